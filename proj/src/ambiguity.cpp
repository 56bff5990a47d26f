#include "cldigdt/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "json.hpp"

namespace cldigdt {

using nlohmann::json;

double StepCdf::at(double x) const {
  if (grid.empty()) throw std::logic_error("empty step CDF");
  if (carry_back) {
    // value[k] holds on (g_{k-1}, g_k]; right of the grid the CDF is 1.
    auto it = std::lower_bound(grid.begin(), grid.end(), x);
    if (it == grid.end()) return 1.0;
    return value[static_cast<size_t>(it - grid.begin())];
  }
  // value[k] holds on [g_k, g_{k+1}); left of the grid the CDF is 0.
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  if (it == grid.begin()) return 0.0;
  return value[static_cast<size_t>(it - grid.begin()) - 1];
}

EmpiricalHistogram histogram_from_samples(const std::vector<double>& samples,
                                          std::optional<double> bin_width) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  for (double s : samples) {
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite sample");
    if (s < 0) throw std::invalid_argument("negative sample");
  }
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());

  auto raw = [&sorted]() {
    EmpiricalHistogram h;
    for (double s : sorted) {
      if (h.support.empty() || s != h.support.back()) {
        h.support.push_back(s);
        h.counts.push_back(0);
      }
      ++h.counts.back();
    }
    h.total = static_cast<long>(sorted.size());
    return h;
  };

  double width = 0.0;
  if (bin_width.has_value()) {
    if (*bin_width < 0) throw std::invalid_argument("negative bin width");
    width = *bin_width;
  } else {
    long distinct = 1;
    for (size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] != sorted[i - 1]) ++distinct;
    if (distinct <= 200) return raw();
    width = (sorted.back() - sorted.front()) / 50.0;
  }
  if (width == 0.0 || sorted.back() == sorted.front()) return raw();

  const double lo = sorted.front();
  std::map<long, long> bins;
  for (double s : sorted) {
    long k = static_cast<long>(std::floor((s - lo) / width));
    ++bins[k];
  }
  EmpiricalHistogram h;
  for (const auto& [k, c] : bins) {
    h.support.push_back(lo + (static_cast<double>(k) + 0.5) * width);
    h.counts.push_back(c);
  }
  h.total = static_cast<long>(sorted.size());
  return h;
}

std::pair<double, double> idm_probability_interval(long n_k, long n, double lambda) {
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (n_k < 0 || n_k > n) throw std::invalid_argument("count outside [0, n]");
  if (!(lambda > 0)) throw std::invalid_argument("prior strength must be positive");
  const double denom = static_cast<double>(n) + lambda;
  return {static_cast<double>(n_k) / denom, (static_cast<double>(n_k) + lambda) / denom};
}

double beta_inverse_cdf(double p, double a, double b) {
  if (!(p > 0 && p < 1)) throw std::domain_error("probability must lie in (0, 1)");
  if (!(a > 0 && b > 0)) throw std::domain_error("beta shapes must be positive");
  return boost::math::ibeta_inv(a, b, p);
}

CdfBand idm_credible_band(const EmpiricalHistogram& hist, const IdmParams& params,
                          std::optional<double> extend_lo, std::optional<double> extend_hi) {
  if (hist.support.empty() || hist.total < 1) throw std::invalid_argument("empty histogram");
  if (!(params.lambda > 0) || !(params.gamma > 0 && params.gamma < 1))
    throw std::invalid_argument("invalid IDM parameters");
  const double n = static_cast<double>(hist.total);
  const double lam = params.lambda;
  const double p_lo = (1.0 - params.gamma) / 2.0;
  const double p_hi = (1.0 + params.gamma) / 2.0;

  auto theta_lo = [&](long nstar) {
    if (nstar == 0) return 0.0;
    return beta_inverse_cdf(p_lo, static_cast<double>(nstar), lam + n - static_cast<double>(nstar));
  };
  auto theta_hi = [&](long nstar) {
    if (nstar == hist.total) return 1.0;
    return beta_inverse_cdf(p_hi, lam + static_cast<double>(nstar), n - static_cast<double>(nstar));
  };

  CdfBand band;
  if (extend_lo && *extend_lo < hist.support.front()) {
    band.grid.push_back(*extend_lo);
    band.lower.push_back(theta_lo(0));
    band.upper.push_back(theta_hi(0));
  }
  long cum = 0;
  for (size_t k = 0; k < hist.support.size(); ++k) {
    cum += hist.counts[k];
    band.grid.push_back(hist.support[k]);
    band.lower.push_back(theta_lo(cum));
    band.upper.push_back(theta_hi(cum));
  }
  if (extend_hi && *extend_hi > hist.support.back()) {
    band.grid.push_back(*extend_hi);
    band.lower.push_back(theta_lo(hist.total));
    band.upper.push_back(theta_hi(hist.total));
  }

  for (size_t k = 0; k < band.grid.size(); ++k) {
    if (band.lower[k] > band.upper[k] + 1e-12)
      throw std::logic_error("credible band bounds crossed");
    if (k > 0 && (band.lower[k] < band.lower[k - 1] - 1e-12 ||
                  band.upper[k] < band.upper[k - 1] - 1e-12))
      throw std::logic_error("credible band not monotone");
  }
  return band;
}

WorstCasePair worst_case_cdfs(const CdfBand& band) {
  return WorstCasePair{band.as_upper(), band.as_lower()};
}

namespace {

// Integrate a step CDF exactly over [a, b] using its own step convention.
double integrate_cdf(const StepCdf& cdf, double a, double b) {
  if (a >= b) return 0.0;
  double total = 0.0;
  double x = a;
  // Walk the grid points inside (a, b); the function is constant between them.
  for (size_t k = 0; k < cdf.grid.size() && x < b; ++k) {
    const double g = cdf.grid[k];
    if (g <= x) continue;
    const double seg_end = std::min(g, b);
    // On (x, seg_end) the value is constant; sample the midpoint.
    total += cdf.at(0.5 * (x + seg_end)) * (seg_end - x);
    x = seg_end;
  }
  if (x < b) total += cdf.at(0.5 * (x + b)) * (b - x);
  return total;
}

}  // namespace

double downside_risk(const StepCdf& cdf, double lb) {
  if (cdf.grid.empty()) throw std::logic_error("empty step CDF");
  if (lb < 0 || lb > cdf.grid.back() + 1e-12) throw std::domain_error("cutoff out of range");
  return integrate_cdf(cdf, 0.0, lb);
}

double upside_risk(const StepCdf& cdf, double ub) {
  if (cdf.grid.empty()) throw std::logic_error("empty step CDF");
  if (ub < cdf.grid.front() - 1e-12 || ub > cdf.grid.back() + 1e-12)
    throw std::domain_error("cutoff out of range");
  const double span_end = cdf.grid.back();
  return (span_end - ub) - integrate_cdf(cdf, ub, span_end);
}

std::string bands_to_json(const std::vector<SourceBand>& bands) {
  json arr = json::array();
  for (const SourceBand& sb : bands) {
    arr.push_back({{"source", sb.source},
                   {"hour", sb.hour},
                   {"grid", sb.band.grid},
                   {"lower", sb.band.lower},
                   {"upper", sb.band.upper},
                   {"params", {{"lambda", sb.params.lambda}, {"gamma", sb.params.gamma}}},
                   {"n", sb.n},
                   {"mode", sb.mode}});
  }
  return arr.dump(2);
}

std::vector<SourceBand> bands_from_json(const std::string& text) {
  json arr = json::parse(text);
  std::vector<SourceBand> out;
  for (const json& j : arr) {
    SourceBand sb;
    sb.source = j.at("source").get<std::string>();
    sb.hour = j.at("hour").get<int>();
    sb.band.grid = j.at("grid").get<std::vector<double>>();
    sb.band.lower = j.at("lower").get<std::vector<double>>();
    sb.band.upper = j.at("upper").get<std::vector<double>>();
    sb.params.lambda = j.at("params").at("lambda").get<double>();
    sb.params.gamma = j.at("params").at("gamma").get<double>();
    sb.n = j.at("n").get<long>();
    sb.mode = j.value("mode", 0.0);
    out.push_back(std::move(sb));
  }
  return out;
}

void save_bands(const std::vector<SourceBand>& bands, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << bands_to_json(bands) << "\n";
}

std::vector<SourceBand> load_bands(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return bands_from_json(buf.str());
}

}  // namespace cldigdt
