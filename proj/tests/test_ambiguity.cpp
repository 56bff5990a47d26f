#include "cldigdt/ambiguity.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace cldigdt;

TEST_CASE("histogram keeps raw distinct values at zero bin width") {
  EmpiricalHistogram h = histogram_from_samples({1, 1, 2, 3}, 0.0);
  REQUIRE(h.support == std::vector<double>{1, 2, 3});
  CHECK(h.counts == std::vector<long>{2, 1, 1});
  CHECK(h.total == 4);
}

TEST_CASE("identical samples collapse to one support point") {
  EmpiricalHistogram h = histogram_from_samples({5, 5, 5, 5});
  REQUIRE(h.support.size() == 1);
  CHECK(h.counts[0] == 4);
  CHECK(h.total == 4);
}

TEST_CASE("negative samples are rejected") {
  CHECK_THROWS_AS(histogram_from_samples({1.0, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(histogram_from_samples({}), std::invalid_argument);
}

TEST_CASE("many distinct values fall back to 50 bins") {
  std::vector<double> samples;
  for (int i = 0; i < 500; ++i) samples.push_back(0.001 * i);
  EmpiricalHistogram h = histogram_from_samples(samples);
  CHECK(h.support.size() <= 51);
  CHECK(h.total == 500);
}

TEST_CASE("IDM closed-form interval substitutions") {
  auto iv = idm_probability_interval(3, 10, 1.0);
  CHECK(iv.first == doctest::Approx(3.0 / 11.0));
  CHECK(iv.second == doctest::Approx(4.0 / 11.0));
  iv = idm_probability_interval(0, 10, 1.0);
  CHECK(iv.first == 0.0);
  CHECK(iv.second == doctest::Approx(1.0 / 11.0));
  iv = idm_probability_interval(10, 10, 1.0);
  CHECK(iv.first == doctest::Approx(10.0 / 11.0));
  CHECK(iv.second == 1.0);
  CHECK_THROWS_AS(idm_probability_interval(1, 0, 1.0), std::invalid_argument);
}

TEST_CASE("interval width is exactly lambda over n plus lambda") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const long n = 1 + static_cast<long>(rng() % 5000);
    const long n_k = static_cast<long>(rng() % static_cast<unsigned long>(n + 1));
    const double lambda = 0.25 + static_cast<double>(rng() % 400) / 100.0;
    auto [lo, hi] = idm_probability_interval(n_k, n, lambda);
    CHECK(hi - lo == doctest::Approx(lambda / (static_cast<double>(n) + lambda)).epsilon(1e-12));
    // envelope containment of the empirical frequency
    const double freq = static_cast<double>(n_k) / static_cast<double>(n);
    CHECK(lo <= freq + 1e-12);
    CHECK(freq <= hi * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("beta quantiles: closed forms and the quadrature oracle") {
  CHECK(beta_inverse_cdf(0.5, 1, 1) == doctest::Approx(0.5));
  // CDF of Beta(2,1) is x^2, so the 0.25 quantile is 0.5.
  CHECK(beta_inverse_cdf(0.25, 2, 1) == doctest::Approx(0.5));
  CHECK(beta_inverse_cdf(0.975, 51, 50) ==
        doctest::Approx(oracles::ibeta_inverse_bisect(0.975, 51, 50)).epsilon(1e-8));
  CHECK(beta_inverse_cdf(0.975, 51, 50) == doctest::Approx(0.6016788704966989).epsilon(1e-10));
  CHECK_THROWS_AS(beta_inverse_cdf(0.0, 1, 1), std::domain_error);
  CHECK_THROWS_AS(beta_inverse_cdf(1.0, 1, 1), std::domain_error);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 25; ++i) {
    const double a = 1.0 + static_cast<double>(rng() % 80);
    const double b = 1.0 + static_cast<double>(rng() % 80);
    const double p = 0.02 + 0.96 * static_cast<double>(rng() % 1000) / 1000.0;
    const double x = beta_inverse_cdf(p, a, b);
    CHECK(std::abs(oracles::ibeta_quadrature(a, b, x) - p) < 1e-8);
  }
}

TEST_CASE("credible band endpoints and symmetry") {
  EmpiricalHistogram h;
  h.support = {1, 2, 3, 4};
  h.counts = {2, 3, 4, 1};
  h.total = 10;
  IdmParams params;
  CdfBand band = idm_credible_band(h, params);
  CHECK(band.lower.front() > 0.0);  // n*_1 = 2, not the zero case
  CHECK(band.upper.back() == 1.0);  // n*_K = n

  EmpiricalHistogram h0;
  h0.support = {0, 1};
  h0.counts = {0, 5};
  h0.total = 5;
  CdfBand b0 = idm_credible_band(h0, params);
  CHECK(b0.lower.front() == 0.0);  // n*_k = 0 exactly

  // Beta symmetry: theta_lo at count m equals 1 - theta_hi at count n - m
  // for lambda = 1.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const long n = 2 + static_cast<long>(rng() % 400);
    const long m = 1 + static_cast<long>(rng() % static_cast<unsigned long>(n - 1));
    const double lo_m =
        beta_inverse_cdf(0.025, static_cast<double>(m), 1.0 + static_cast<double>(n - m));
    const double hi_nm =
        beta_inverse_cdf(0.975, 1.0 + static_cast<double>(n - m), static_cast<double>(m));
    CHECK(lo_m == doctest::Approx(1.0 - hi_nm).epsilon(1e-8));
  }
}

TEST_CASE("band monotone and ordered after construction") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 30; ++rep) {
    EmpiricalHistogram h;
    const int K = 2 + static_cast<int>(rng() % 12);
    double x = 0.0;
    h.total = 0;
    for (int k = 0; k < K; ++k) {
      x += 0.5 + static_cast<double>(rng() % 100) / 25.0;
      h.support.push_back(x);
      h.counts.push_back(static_cast<long>(rng() % 40));
      h.total += h.counts.back();
    }
    if (h.total == 0) {
      h.counts[0] = 1;
      h.total = 1;
    }
    IdmParams params;
    params.lambda = 0.5 + static_cast<double>(rng() % 300) / 100.0;
    CdfBand band = idm_credible_band(h, params, 0.0, x + 5.0);
    for (size_t k = 0; k < band.grid.size(); ++k) {
      CHECK(band.lower[k] <= band.upper[k] + 1e-12);
      CHECK(band.lower[k] >= -1e-12);
      CHECK(band.upper[k] <= 1.0 + 1e-12);
      if (k > 0) {
        CHECK(band.lower[k] + 1e-12 >= band.lower[k - 1]);
        CHECK(band.upper[k] + 1e-12 >= band.upper[k - 1]);
      }
    }
    CHECK(band.grid.front() == 0.0);
    CHECK(band.upper.back() == 1.0);
  }
}

TEST_CASE("worst case pair is the band flipped") {
  EmpiricalHistogram h;
  h.support = {1, 2, 3};
  h.counts = {4, 2, 4};
  h.total = 10;
  CdfBand band = idm_credible_band(h, IdmParams{});
  WorstCasePair pair = worst_case_cdfs(band);
  CHECK(pair.downside.value == band.upper);
  CHECK(pair.upside.value == band.lower);
  for (double q : {1.0, 1.5, 2.0, 2.5, 3.0})
    CHECK(pair.downside.at(q) >= pair.upside.at(q) - 1e-12);

  // Degenerate band: both members coincide.
  CdfBand flat = band;
  flat.lower = flat.upper;
  WorstCasePair same = worst_case_cdfs(flat);
  CHECK(same.downside.value == same.upside.value);
}

TEST_CASE("risk integrals against a fine Riemann oracle") {
  StepCdf cdf;
  cdf.grid = {0.0, 1.0, 2.0, 3.5, 5.0};
  cdf.value = {0.1, 0.35, 0.55, 0.8, 1.0};
  cdf.carry_back = false;

  const double lb = 3.2;
  const double oracle_down =
      oracles::riemann([&](double x) { return cdf.at(x); }, 0.0, lb, 400000);
  CHECK(downside_risk(cdf, lb) == doctest::Approx(oracle_down).epsilon(1e-6));

  const double ub = 1.7;
  const double oracle_up =
      oracles::riemann([&](double x) { return 1.0 - cdf.at(x); }, ub, 5.0, 400000);
  CHECK(upside_risk(cdf, ub) == doctest::Approx(oracle_up).epsilon(1e-6));

  CHECK(downside_risk(cdf, 0.0) == 0.0);
  CHECK_THROWS_AS(downside_risk(cdf, 6.0), std::domain_error);
  CHECK_THROWS_AS(upside_risk(cdf, -1.0), std::domain_error);
}

TEST_CASE("uniform CDF downside risk in closed form") {
  // Piecewise-linearized uniform on [0,1] sampled densely: F(x) = x, so the
  // integral to 0.5 is 1/8. A fine step grid approximates it.
  StepCdf cdf;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    cdf.grid.push_back(static_cast<double>(i) / n);
    cdf.value.push_back(static_cast<double>(i) / n);
  }
  CHECK(downside_risk(cdf, 0.5) == doctest::Approx(0.125).epsilon(1e-3));
}

TEST_CASE("downside risk under the chosen member dominates") {
  EmpiricalHistogram h;
  h.support = {0.5, 1.5, 2.5, 4.0};
  h.counts = {3, 1, 5, 2};
  h.total = 11;
  CdfBand band = idm_credible_band(h, IdmParams{}, 0.0, 6.0);
  WorstCasePair pair = worst_case_cdfs(band);
  for (double cut : {0.7, 1.9, 3.0, 4.5})
    CHECK(downside_risk(pair.downside, cut) >= downside_risk(pair.upside, cut) - 1e-12);
}

TEST_CASE("bands serialize with their labels") {
  EmpiricalHistogram h;
  h.support = {1, 2};
  h.counts = {3, 7};
  h.total = 10;
  SourceBand sb;
  sb.source = "pv:9";
  sb.hour = 13;
  sb.band = idm_credible_band(h, IdmParams{}, 0.0, 4.0);
  sb.params = IdmParams{};
  sb.n = 10;
  sb.mode = 2.0;
  auto text = bands_to_json({sb});
  auto back = bands_from_json(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0].source == "pv:9");
  CHECK(back[0].hour == 13);
  CHECK(back[0].band.grid == sb.band.grid);
  CHECK(back[0].band.lower == sb.band.lower);
  CHECK(back[0].band.upper == sb.band.upper);
  CHECK(back[0].mode == 2.0);
  CHECK(back[0].n == 10);
}
