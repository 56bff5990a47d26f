#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cldigdt/ambiguity.hpp"
#include "cldigdt/milp.hpp"

namespace cldigdt {

/// Piecewise-linear approximation of a CDF over ascending breakpoints.
/// Segment s runs from breakpoints[s] to breakpoints[s+1] with
/// value = slopes[s] * x + intercepts[s].
struct PlaApprox {
  std::vector<double> breakpoints;
  std::vector<double> values;  // CDF at each breakpoint
  std::vector<double> slopes;
  std::vector<double> intercepts;

  double eval(double x) const;
  /// Smallest x with eval(x) >= y, if attainable on the breakpoint span.
  std::optional<double> inverse_min(double y) const;
};

PlaApprox pla_coefficients(const StepCdf& cdf, const std::vector<double>& breakpoints);

/// Worst-case pair linearized on a shared equal-width breakpoint grid.
struct PlaPair {
  PlaApprox downside;  // upper CDF, evaluated at interval lower ends
  PlaApprox upside;    // lower CDF, evaluated at interval upper ends

  /// Largest coverage the pair can certify on its span.
  double max_coverage() const;
};

PlaPair linearize_pair(const WorstCasePair& pair, int segments = 50);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Equal-width ties keep the interval containing `mode`, then the leftmost.
struct TieBreakPolicy {
  double mode = 0.0;
};

/// Minimal-width interval with upside(hi) - downside(lo) >= alpha. Solved as
/// a segment-binary MILP; an exact scan provides the warm start, the
/// tie-break placement, and a width cross-check. alpha = 0 degenerates to the
/// tie-break point.
Interval shortest_interval(const PlaPair& pair, double alpha, const TieBreakPolicy& tie);

/// Exact scan used as the independent route inside shortest_interval. Exposed
/// for verification.
Interval shortest_interval_scan(const PlaPair& pair, double alpha, const TieBreakPolicy& tie);

struct EntryInterval {
  std::string source;
  int hour = 0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ConfidenceSet {
  double alpha = 0.0;
  std::vector<EntryInterval> entries;  // fixed order: as the builder's bands
};

/// Precomputed per-entry linearizations for repeated interval queries.
class UncertaintySetBuilder {
 public:
  /// zero_anchor, when present per source/hour, is the degenerate point used
  /// at alpha = 0 (the forecast inside the dispatch models); the band mode is
  /// the fallback.
  UncertaintySetBuilder(const std::vector<SourceBand>& bands, int segments = 50,
                        std::map<std::pair<std::string, int>, double> zero_anchor = {});

  ConfidenceSet build(double alpha) const;
  /// Coverage attainable by every entry.
  double max_alpha() const;
  size_t num_entries() const { return entries_.size(); }
  const std::vector<std::pair<std::string, int>>& entry_keys() const { return keys_; }

 private:
  struct Entry {
    PlaPair pla;
    TieBreakPolicy tie;
    double anchor = 0.0;
  };
  std::vector<Entry> entries_;
  std::vector<std::pair<std::string, int>> keys_;
};

struct AlphaGrid {
  std::vector<double> alphas;            // ascending
  std::vector<ConfidenceSet> raw;        // per alpha, as built
  std::vector<ConfidenceSet> enveloped;  // nested: running min lo / max hi
};

/// Builds one ConfidenceSet per grid value, then applies the nested-envelope
/// post-processing so the sets grow monotonically with alpha.
AlphaGrid tabulate_alpha_grid(const UncertaintySetBuilder& builder,
                              const std::vector<double>& grid);

/// Envelope over an arbitrary pool of (alpha, raw set) pairs; used when the
/// pool accumulates across refinement iterations.
std::vector<ConfidenceSet> envelope_sets(const std::vector<double>& alphas,
                                         const std::vector<ConfidenceSet>& raw);

/// Offline cache of raw confidence sets keyed by alpha (canonical string of
/// at most six decimals, e.g. "0.60").
class SetCache {
 public:
  static std::string alpha_key(double alpha);

  bool contains(double alpha) const;
  const ConfidenceSet& get(double alpha) const;
  void put(double alpha, ConfidenceSet set);
  std::vector<double> cached_alphas() const;

  void save(const std::string& path) const;
  static SetCache load(const std::string& path);

 private:
  std::map<long, ConfidenceSet> by_micro_;  // alpha rounded to 1e-6
};

}  // namespace cldigdt
