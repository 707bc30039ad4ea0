#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sacn/errors.hpp"
#include "sacn/util/csv.hpp"

namespace sacn::diagnostics {

/// Inclusive range of training steps.
struct Window {
  std::int64_t start = 0;
  std::int64_t end = 0;
  friend bool operator==(const Window&, const Window&) = default;
};

inline const std::vector<std::int64_t>& reference_window_starts() {
  static const std::vector<std::int64_t> starts{10001,  19001,  49001,  99001,
                                                199001, 499001, 999001};
  return starts;
}

inline constexpr std::int64_t kReferenceSteps = 1000000;
inline constexpr std::int64_t kReferenceWidth = 1000;

/// Measurement windows for a run of `total_steps`. The reference schedule
/// is defined for 10^6 steps; other lengths scale starts and width by
/// f = total / 10^6 (width capped at 1000): start' = round((start-1) f) + 1.
inline std::vector<Window> active_windows(std::int64_t total_steps) {
  std::vector<Window> out;
  if (total_steps <= 0) return out;
  const double f = static_cast<double>(total_steps) / static_cast<double>(kReferenceSteps);
  const auto width = std::max<std::int64_t>(
      1, std::llround(static_cast<double>(kReferenceWidth) * std::min(1.0, f)));
  for (auto s : reference_window_starts()) {
    const std::int64_t start = std::llround(static_cast<double>(s - 1) * f) + 1;
    const std::int64_t end = std::min(start + width - 1, total_steps);
    if (start > total_steps) continue;
    if (!out.empty() && start <= out.back().end) continue;
    out.push_back({start, end});
  }
  return out;
}

inline std::vector<double> default_thresholds() {
  return {1.0, 10.0, 100.0, std::numeric_limits<double>::infinity()};
}

/// Single-step ratio pi(a|s) / pi_t(a|s) evaluated at 32-bit: each density
/// is exponentiated in float, so large log-densities overflow to +inf.
inline float ratio32(double log_current, double log_behavior) {
  const float num = std::exp(static_cast<float>(log_current));
  const float den = std::exp(static_cast<float>(log_behavior));
  if (std::isinf(num)) return std::numeric_limits<float>::infinity();
  if (den == 0.0f) return std::numeric_limits<float>::infinity();
  return num / den;
}

/// Fraction of ratios >= each threshold.
inline std::vector<double> fractions_at_or_above(std::span<const float> ratios,
                                                 const std::vector<double>& thresholds) {
  std::vector<double> out(thresholds.size(), 0.0);
  if (ratios.empty()) return out;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    std::size_t c = 0;
    for (float r : ratios) c += static_cast<double>(r) >= thresholds[k] ? 1 : 0;
    out[k] = static_cast<double>(c) / static_cast<double>(ratios.size());
  }
  return out;
}

struct RatioWindowStats {
  std::int64_t window_start = 0;
  std::vector<double> thresholds;
  std::vector<std::uint64_t> at_or_above;
  std::uint64_t sample_count = 0;

  [[nodiscard]] std::vector<double> fractions() const {
    std::vector<double> f(thresholds.size(), 0.0);
    if (sample_count == 0) return f;
    for (std::size_t k = 0; k < f.size(); ++k) {
      f[k] = static_cast<double>(at_or_above[k]) / static_cast<double>(sample_count);
    }
    return f;
  }
};

/// Accumulates per-window threshold counts over one run.
class DensityRecorder {
 public:
  DensityRecorder(std::vector<Window> windows, std::vector<double> thresholds)
      : windows_(std::move(windows)), thresholds_(std::move(thresholds)) {
    if (!std::is_sorted(thresholds_.begin(), thresholds_.end())) {
      throw ConfigError("density thresholds must be ascending");
    }
    for (const auto& w : windows_) {
      stats_.push_back({w.start, thresholds_, std::vector<std::uint64_t>(thresholds_.size(), 0), 0});
    }
  }

  /// True if `timestep` lies inside a measurement window.
  [[nodiscard]] bool active(std::int64_t timestep) const { return find(timestep) >= 0; }

  /// Adds the batch's ratios to the window containing `timestep`; no-op
  /// outside every window.
  void record(std::int64_t timestep, std::span<const float> ratios) {
    const int w = find(timestep);
    if (w < 0) return;
    auto& s = stats_[static_cast<std::size_t>(w)];
    for (float r : ratios) {
      for (std::size_t k = 0; k < thresholds_.size(); ++k) {
        if (static_cast<double>(r) >= thresholds_[k]) ++s.at_or_above[k];
      }
    }
    s.sample_count += ratios.size();
  }

  [[nodiscard]] const std::vector<RatioWindowStats>& stats() const { return stats_; }
  [[nodiscard]] const std::vector<Window>& windows() const { return windows_; }
  [[nodiscard]] const std::vector<double>& thresholds() const { return thresholds_; }

  /// density.csv rows; windows without samples are omitted.
  void write_csv(std::ostream& os, const std::string& run_id, bool header = true) const {
    if (header) os << "run_id,window_start,threshold,fraction\n";
    for (const auto& s : stats_) {
      if (s.sample_count == 0) continue;
      const auto f = s.fractions();
      for (std::size_t k = 0; k < f.size(); ++k) {
        os << run_id << ',' << s.window_start << ',' << util::format_double(s.thresholds[k]) << ','
           << util::format_double(f[k]) << '\n';
      }
    }
  }

 private:
  [[nodiscard]] int find(std::int64_t t) const {
    for (std::size_t i = 0; i < windows_.size(); ++i) {
      if (t >= windows_[i].start && t <= windows_[i].end) return static_cast<int>(i);
    }
    return -1;
  }

  std::vector<Window> windows_;
  std::vector<double> thresholds_;
  std::vector<RatioWindowStats> stats_;
};

/// One (window, threshold) fraction of one run.
struct DensityRow {
  std::string run_id;
  std::int64_t window_start = 0;
  double threshold = 0.0;
  double fraction = 0.0;
};

struct DensityAggregate {
  std::int64_t window_start = 0;
  double threshold = 0.0;
  double mean = 0.0;
  std::optional<double> std_error;  // absent for a single run
  std::size_t runs = 0;
};

/// Mean and standard error over runs for every (window, threshold). Every
/// run must report the same set of cells.
inline std::vector<DensityAggregate> aggregate_over_runs(const std::vector<DensityRow>& rows) {
  using Key = std::pair<std::int64_t, double>;
  std::map<std::string, std::map<Key, double>> by_run;
  for (const auto& r : rows) by_run[r.run_id][{r.window_start, r.threshold}] = r.fraction;
  std::vector<DensityAggregate> out;
  if (by_run.empty()) return out;
  const auto& first = by_run.begin()->second;
  for (const auto& [run, cells] : by_run) {
    if (cells.size() != first.size() ||
        !std::equal(cells.begin(), cells.end(), first.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw ConfigError("density aggregation: run '" + run + "' has mismatched windows");
    }
  }
  for (const auto& [key, unused] : first) {
    std::vector<double> v;
    for (const auto& [run, cells] : by_run) v.push_back(cells.at(key));
    DensityAggregate a;
    a.window_start = key.first;
    a.threshold = key.second;
    a.runs = v.size();
    // offset from the first value so identical runs give exactly zero spread
    double m = 0.0;
    for (double x : v) m += x - v.front();
    m = v.front() + m / static_cast<double>(v.size());
    a.mean = m;
    if (v.size() >= 2) {
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      a.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    out.push_back(a);
  }
  return out;
}

inline std::vector<DensityRow> read_density_csv(std::istream& is) {
  const auto t = util::read_csv(is);
  const auto ci = t.column("run_id");
  const auto cw = t.column("window_start");
  const auto ct = t.column("threshold");
  const auto cf = t.column("fraction");
  std::vector<DensityRow> out;
  for (const auto& r : t.rows) {
    out.push_back({r[ci], static_cast<std::int64_t>(util::parse_double(r[cw])),
                   util::parse_double(r[ct]), util::parse_double(r[cf])});
  }
  return out;
}

inline void write_density_agg_csv(std::ostream& os, const std::vector<DensityAggregate>& agg) {
  os << "window_start,threshold,mean,stderr\n";
  for (const auto& a : agg) {
    os << a.window_start << ',' << util::format_double(a.threshold) << ','
       << util::format_double(a.mean) << ',' << (a.std_error ? util::format_double(*a.std_error) : "")
       << '\n';
  }
}

}  // namespace sacn::diagnostics
