#include "cldigdt/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace cldigdt {

void HistoryTable::add(int day, int hour, const std::string& source, double value_kw) {
  if (hour < 0 || hour > 23) throw IngestError("hour outside 0-23");
  if (value_kw < 0) throw IngestError("negative value for " + source);
  auto& cell = by_day_[day];
  auto key = std::make_pair(source, hour);
  if (!cell.emplace(key, value_kw).second)
    throw IngestError("duplicate record: day " + std::to_string(day) + " hour " +
                      std::to_string(hour) + " " + source);
  pools_[key].push_back(value_kw);
  ++num_records_;
}

const std::vector<double>& HistoryTable::samples(const std::string& source, int hour) const {
  auto it = pools_.find({source, hour});
  if (it == pools_.end())
    throw IngestError("no samples for " + source + " hour " + std::to_string(hour));
  return it->second;
}

bool HistoryTable::has(const std::string& source, int hour) const {
  return pools_.count({source, hour}) > 0;
}

std::vector<std::string> HistoryTable::sources() const {
  std::vector<std::string> out;
  for (const auto& [key, pool] : pools_)
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> HistoryTable::days() const {
  std::vector<int> out;
  for (const auto& [day, slice] : by_day_) out.push_back(day);
  return out;
}

std::map<std::pair<std::string, int>, double> HistoryTable::day_slice(int day) const {
  auto it = by_day_.find(day);
  if (it == by_day_.end()) throw IngestError("unknown day " + std::to_string(day));
  return it->second;
}

double ForecastSet::at(const std::string& source, int hour) const {
  auto it = mean.find({source, hour});
  if (it == mean.end())
    throw IngestError("no forecast for " + source + " hour " + std::to_string(hour));
  return it->second;
}

HistoryTable load_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open history file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty history file");
  // Tolerate trailing carriage returns from foreign CSV writers.
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (strip(line) != "day,hour,source,value_kw")
    throw IngestError("unexpected history header: " + line);
  HistoryTable table;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string day_s, hour_s, source, value_s;
    if (!std::getline(ss, day_s, ',') || !std::getline(ss, hour_s, ',') ||
        !std::getline(ss, source, ',') || !std::getline(ss, value_s))
      throw IngestError("malformed history row " + std::to_string(lineno));
    try {
      table.add(std::stoi(day_s), std::stoi(hour_s), source, std::stod(value_s));
    } catch (const std::invalid_argument&) {
      throw IngestError("unparsable history row " + std::to_string(lineno));
    }
  }
  return table;
}

void save_history(const HistoryTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open output file: " + path);
  out << "day,hour,source,value_kw\n";
  out.precision(10);
  for (int day : table.days())
    for (const auto& [key, value] : table.day_slice(day))
      out << day << "," << key.second << "," << key.first << "," << value << "\n";
}

ForecastSet make_forecast(const HistoryTable& history) {
  ForecastSet f;
  for (const std::string& source : history.sources()) {
    for (int hour = 0; hour < 24; ++hour) {
      if (!history.has(source, hour))
        throw IngestError("missing cell: " + source + " hour " + std::to_string(hour));
      const auto& pool = history.samples(source, hour);
      double sum = 0;
      for (double v : pool) sum += v;
      f.mean[{source, hour}] = sum / static_cast<double>(pool.size());
    }
  }
  return f;
}

namespace {

// Explicit transforms keep generated tables identical across standard
// library versions.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal01(std::mt19937_64& rng) {
  double u1 = uniform01(rng), u2 = uniform01(rng);
  while (u1 <= 1e-300) u1 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

double synthetic_load_profile(int hour) {
  static const double prof[24] = {0.58, 0.55, 0.53, 0.52, 0.53, 0.57, 0.64, 0.72,
                                  0.78, 0.80, 0.82, 0.84, 0.83, 0.81, 0.80, 0.82,
                                  0.88, 0.95, 1.00, 0.98, 0.92, 0.82, 0.70, 0.62};
  return prof[hour];
}

double synthetic_pv_profile(int hour) {
  if (hour < 6 || hour > 18) return 0.0;
  return std::sin(M_PI * (static_cast<double>(hour) - 5.5) / 13.5);
}

SyntheticSpec SyntheticSpec::for_case(const NetworkCase& net,
                                      const std::map<int, double>& load_peaks_kw) {
  SyntheticSpec spec;
  for (int bus : net.pv_buses())
    spec.pv.push_back({"pv:" + std::to_string(bus), net.pv_cap});
  for (const auto& [bus, peak] : load_peaks_kw)
    if (peak > 0) spec.loads.push_back({"load:" + std::to_string(bus), peak});
  return spec;
}

HistoryTable generate_synthetic(const SyntheticSpec& spec, int days, unsigned long seed) {
  if (days < 1) throw IngestError("need at least one day");
  HistoryTable table;
  std::mt19937_64 rng(seed);
  const double load_mu = -0.5 * spec.load_sigma * spec.load_sigma;  // unit mean
  for (int day = 0; day < days; ++day) {
    for (int hour = 0; hour < 24; ++hour) {
      const double bell = synthetic_pv_profile(hour);
      for (const auto& pv : spec.pv) {
        double v = 0.0;
        if (bell > 0) {
          const double p_zero = 0.04 + 0.20 * (1.0 - bell);
          if (uniform01(rng) >= p_zero) {
            const double shape = std::exp(-0.35 + spec.pv_sigma * normal01(rng));
            v = std::min(1.0, shape) * bell * pv.cap_kw;
          } else {
            uniform01(rng);
            normal01(rng);  // keep the stream aligned across branches
          }
        }
        table.add(day, hour, pv.id, std::min(v, pv.cap_kw));
      }
      const double lp = synthetic_load_profile(hour);
      for (const auto& ld : spec.loads) {
        const double shape = std::exp(load_mu + spec.load_sigma * normal01(rng));
        table.add(day, hour, ld.id, ld.peak_kw * lp * shape);
      }
    }
  }
  return table;
}

void split_history(const HistoryTable& table, HistoryTable* train, HistoryTable* holdout) {
  for (int day : table.days()) {
    HistoryTable* dst = (day % 5 == 4) ? holdout : train;
    for (const auto& [key, value] : table.day_slice(day))
      dst->add(day, key.second, key.first, value);
  }
}

std::vector<SourceBand> build_source_bands(const HistoryTable& history, const IdmParams& params,
                                           double pv_cap) {
  std::vector<SourceBand> bands;
  for (const std::string& source : history.sources()) {
    const SourceId sid = parse_source_id(source);
    for (int hour = 0; hour < 24; ++hour) {
      if (!history.has(source, hour)) continue;
      const auto& pool = history.samples(source, hour);
      EmpiricalHistogram hist = histogram_from_samples(pool);
      double ext_hi = sid.kind == SourceId::Pv
                          ? pv_cap
                          : 1.5 * *std::max_element(pool.begin(), pool.end());
      SourceBand sb;
      sb.source = source;
      sb.hour = hour;
      sb.params = params;
      sb.n = hist.total;
      sb.band = idm_credible_band(hist, params, 0.0, std::max(ext_hi, hist.support.back()));
      long best = -1;
      for (size_t k = 0; k < hist.counts.size(); ++k)
        if (hist.counts[k] > best) {
          best = hist.counts[k];
          sb.mode = hist.support[k];
        }
      bands.push_back(std::move(sb));
    }
  }
  return bands;
}

SourceId parse_source_id(const std::string& source) {
  auto colon = source.find(':');
  if (colon == std::string::npos) throw IngestError("malformed source id: " + source);
  const std::string kind = source.substr(0, colon);
  int bus = 0;
  try {
    bus = std::stoi(source.substr(colon + 1));
  } catch (const std::exception&) {
    throw IngestError("malformed source id: " + source);
  }
  if (kind == "pv") return {SourceId::Pv, bus};
  if (kind == "load") return {SourceId::Load, bus};
  throw IngestError("unknown source kind: " + source);
}

Scenario forecast_to_scenario(const NetworkCase& net, const ForecastSet& forecast) {
  Scenario s = Scenario::zeros(net);
  for (const auto& [key, value] : forecast.mean) {
    const SourceId sid = parse_source_id(key.first);
    if (key.second >= net.time_steps) continue;
    if (!net.has_bus(sid.bus)) throw IngestError("forecast references unknown bus in " + key.first);
    const size_t pos = static_cast<size_t>(net.bus_pos(sid.bus));
    const size_t t = static_cast<size_t>(key.second);
    if (sid.kind == SourceId::Pv)
      s.pv[pos][t] = std::min(value, net.pv_cap);
    else
      s.load[pos][t] = value;
  }
  return s;
}

}  // namespace cldigdt
