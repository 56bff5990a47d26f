#pragma once

#include <map>
#include <string>
#include <vector>

#include "cldigdt/ambiguity.hpp"
#include "cldigdt/network.hpp"

namespace cldigdt {

/// Historical PV/load time series keyed by (day, hour, source).
/// Sources are "pv:<bus>" or "load:<bus>".
class HistoryTable {
 public:
  void add(int day, int hour, const std::string& source, double value_kw);

  const std::vector<double>& samples(const std::string& source, int hour) const;
  bool has(const std::string& source, int hour) const;
  std::vector<std::string> sources() const;
  std::vector<int> days() const;
  long num_records() const { return num_records_; }

  /// The day-sliced sub-table of one day, as (source, hour) -> value.
  std::map<std::pair<std::string, int>, double> day_slice(int day) const;

 private:
  friend HistoryTable load_history(const std::string&);
  std::map<std::pair<std::string, int>, std::vector<double>> pools_;
  std::map<int, std::map<std::pair<std::string, int>, double>> by_day_;
  long num_records_ = 0;
};

/// Expected value per (source, hour): the per-cell sample mean.
struct ForecastSet {
  std::map<std::pair<std::string, int>, double> mean;

  double at(const std::string& source, int hour) const;
};

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// CSV with header day,hour,source,value_kw.
HistoryTable load_history(const std::string& path);
void save_history(const HistoryTable& table, const std::string& path);

ForecastSet make_forecast(const HistoryTable& history);

/// Parameters of the synthetic generator shipped in place of proprietary
/// measurement data. PV is zero-inflated and right-skewed by daylight hour,
/// loads are lognormal around a daily profile (heavy upper tail).
struct SyntheticSpec {
  struct PvSource {
    std::string id;  // "pv:<bus>"
    double cap_kw = 0.0;
  };
  struct LoadSource {
    std::string id;  // "load:<bus>"
    double peak_kw = 0.0;  // mean at the profile peak hour
  };
  std::vector<PvSource> pv;
  std::vector<LoadSource> loads;
  double load_sigma = 0.35;  // lognormal shape
  double pv_sigma = 0.55;

  /// Sources sized from a network case: PV capacity at PV buses, load peaks
  /// from the given per-bus peaks.
  static SyntheticSpec for_case(const NetworkCase& net,
                                const std::map<int, double>& load_peaks_kw);
};

HistoryTable generate_synthetic(const SyntheticSpec& spec, int days, unsigned long seed);

/// Deterministic hourly shape factors used by the generator.
double synthetic_load_profile(int hour);
double synthetic_pv_profile(int hour);

/// Day-based split: every fifth day goes to the holdout.
void split_history(const HistoryTable& table, HistoryTable* train, HistoryTable* holdout);

/// One credible band per (source, hour). PV grids extend to [0, pv_cap],
/// load grids to [0, 1.5 x max observed].
std::vector<SourceBand> build_source_bands(const HistoryTable& history, const IdmParams& params,
                                           double pv_cap);

struct SourceId {
  enum Kind { Pv, Load } kind;
  int bus;
};
SourceId parse_source_id(const std::string& source);

/// Expand a forecast (or any per-source-hour map) into a per-bus scenario.
Scenario forecast_to_scenario(const NetworkCase& net, const ForecastSet& forecast);

}  // namespace cldigdt
