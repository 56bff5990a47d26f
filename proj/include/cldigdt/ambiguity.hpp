#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cldigdt {

struct EmpiricalHistogram {
  std::vector<double> support;  // strictly ascending bin centers, kW
  std::vector<long> counts;
  long total = 0;
};

struct IdmParams {
  double lambda = 1.0;  // total prior strength
  double gamma = 0.95;  // credible index
};

/// Non-decreasing step function on a grid. carry_back selects the convention
/// between grid points: value[k] holds on [g_k, g_{k+1}) when false, on
/// (g_{k-1}, g_k] when true.
struct StepCdf {
  std::vector<double> grid;
  std::vector<double> value;
  bool carry_back = false;

  double at(double x) const;
};

/// Envelope of cumulative distribution functions. lower/upper hold the
/// credible bounds at each grid point; between points the lower bound is
/// carried forward and the upper bound carried back.
struct CdfBand {
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> upper;

  double lower_at(double x) const { return as_lower().at(x); }
  double upper_at(double x) const { return as_upper().at(x); }
  StepCdf as_lower() const { return StepCdf{grid, lower, false}; }
  StepCdf as_upper() const { return StepCdf{grid, upper, true}; }
};

/// The two distributions selected from a band by the risk criteria:
/// downside (highest downside risk) is the band's upper CDF, upside the
/// band's lower CDF.
struct WorstCasePair {
  StepCdf downside;
  StepCdf upside;
};

/// Bin samples into a histogram. bin_width = 0 keeps raw distinct values;
/// absent, distinct values are kept up to 200, then 50 equal-width bins.
EmpiricalHistogram histogram_from_samples(const std::vector<double>& samples,
                                          std::optional<double> bin_width = std::nullopt);

/// IDM posterior probability interval [n_k/(n+lambda), (n_k+lambda)/(n+lambda)].
std::pair<double, double> idm_probability_interval(long n_k, long n, double lambda);

/// Quantile of the regularized incomplete beta function I_{a,b}.
double beta_inverse_cdf(double p, double a, double b);

/// Credible band from Beta quantiles of the IDM posterior at each cumulative
/// count. Optional extension bounds add virtual grid points treated as
/// cumulative count 0 (left) and n (right).
CdfBand idm_credible_band(const EmpiricalHistogram& hist, const IdmParams& params,
                          std::optional<double> extend_lo = std::nullopt,
                          std::optional<double> extend_hi = std::nullopt);

WorstCasePair worst_case_cdfs(const CdfBand& band);

/// Integral of F over [0, lb] (exact, the step function integrates in
/// closed form).
double downside_risk(const StepCdf& cdf, double lb);
/// Integral of (1 - F) over [ub, grid max].
double upside_risk(const StepCdf& cdf, double ub);

/// Band labeled with its origin, as persisted to band files. mode is the
/// empirical mode of the underlying histogram, kept for interval tie-breaks.
struct SourceBand {
  std::string source;  // "pv:<bus>" or "load:<bus>"
  int hour = 0;
  CdfBand band;
  IdmParams params;
  long n = 0;
  double mode = 0.0;
};

std::string bands_to_json(const std::vector<SourceBand>& bands);
std::vector<SourceBand> bands_from_json(const std::string& text);
void save_bands(const std::vector<SourceBand>& bands, const std::string& path);
std::vector<SourceBand> load_bands(const std::string& path);

}  // namespace cldigdt
