#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "sacn/diagnostics/density.hpp"
#include "sacn/harness/run_config.hpp"
#include "sacn/harness/stats.hpp"
#include "sacn/util/csv.hpp"

namespace sacn::harness {

struct GroupKey {
  std::string env;
  std::string variant;
  std::size_t n = 1;
  double q_b = 0.75;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

/// One finished run reduced to its tail mean.
struct RunSummary {
  std::string run_id;
  GroupKey key;
  std::uint64_t seed = 0;
  double tail_mean = 0.0;
};

struct TableRow {
  GroupKey key;
  double mean = 0.0;
  std::optional<double> std_error;  // needs >= 2 seeds
  std::optional<double> p_vs_sac;   // Welch p that this group >= the sac group
  std::size_t seeds = 0;
  std::vector<double> tail_means;
};

/// Groups runs by (env, variant, n, q_b); p_vs_sac compares against the sac
/// group of the same env, preferring a matching q_b. p is left empty when
/// either side has fewer than two seeds or no sac group exists.
inline std::vector<TableRow> build_tables(const std::vector<RunSummary>& runs) {
  std::map<GroupKey, TableRow> groups;
  for (const auto& r : runs) {
    auto& row = groups[r.key];
    row.key = r.key;
    row.tail_means.push_back(r.tail_mean);
  }
  for (auto& [key, row] : groups) {
    row.seeds = row.tail_means.size();
    row.mean = mean(row.tail_means);
    if (row.seeds >= 2) row.std_error = standard_error(row.tail_means);
  }
  for (auto& [key, row] : groups) {
    if (key.variant == "sac") continue;
    const TableRow* base = nullptr;
    std::vector<const TableRow*> in_env;
    for (const auto& [k2, r2] : groups) {
      if (k2.env != key.env || k2.variant != "sac") continue;
      in_env.push_back(&r2);
      if (k2.q_b == key.q_b) base = &r2;
    }
    if (!base && in_env.size() == 1) base = in_env.front();
    if (base && base->seeds >= 2 && row.seeds >= 2) {
      row.p_vs_sac = welch_p(row.tail_means, base->tail_means);
    }
  }
  std::vector<TableRow> out;
  for (auto& [key, row] : groups) out.push_back(std::move(row));
  return out;
}

inline constexpr const char* kTablesHeader = "env,variant,n,q_b,mean,stderr,p_vs_sac,seeds";

inline void write_tables_csv(std::ostream& os, const std::vector<TableRow>& rows) {
  using util::format_double;
  os << kTablesHeader << "\n";
  for (const auto& r : rows) {
    os << r.key.env << "," << r.key.variant << "," << r.key.n << "," << format_double(r.key.q_b)
       << "," << format_double(r.mean) << "," << (r.std_error ? format_double(*r.std_error) : "")
       << "," << (r.p_vs_sac ? format_double(*r.p_vs_sac) : "") << "," << r.seeds << "\n";
  }
}

/// Per-timestep mean returns of one eval.csv.
struct EvalFile {
  std::string run_id;
  GroupKey key;
  std::uint64_t seed = 0;
  std::vector<EvalPoint> points;
};

inline EvalFile read_eval_csv(std::istream& is) {
  const auto t = util::read_csv(is);
  const auto c_run = t.column("run_id");
  const auto c_env = t.column("env");
  const auto c_var = t.column("variant");
  const auto c_n = t.column("n");
  const auto c_q = t.column("q_b");
  const auto c_seed = t.column("seed");
  const auto c_t = t.column("timestep");
  (void)t.column("episode_index");
  const auto c_ret = t.column("return");
  (void)t.column("episode_length");
  EvalFile f;
  std::map<std::int64_t, std::vector<double>> by_t;
  for (const auto& r : t.rows) {
    if (f.run_id.empty()) {
      f.run_id = r[c_run];
      f.key = {r[c_env], r[c_var], static_cast<std::size_t>(util::parse_double(r[c_n])),
               util::parse_double(r[c_q])};
      f.seed = static_cast<std::uint64_t>(util::parse_double(r[c_seed]));
    }
    by_t[static_cast<std::int64_t>(util::parse_double(r[c_t]))].push_back(util::parse_double(r[c_ret]));
  }
  for (const auto& [ts, rets] : by_t) f.points.push_back({ts, mean(rets)});
  return f;
}

struct AggregateReport {
  std::vector<TableRow> tables;
  std::vector<std::string> excluded;  // "<dir>: <reason>"
  std::size_t included = 0;
};

namespace detail {

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::string s((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace detail

/// Scans `in` recursively for run directories (those holding eval.csv),
/// drops failed runs, writes tables.csv and density_agg.csv into `out`.
/// tail_window <= 0 takes each run's window from its config.txt.
inline AggregateReport aggregate_directory(const std::filesystem::path& in,
                                           const std::filesystem::path& out,
                                           std::int64_t tail_window = 0) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(in)) throw ConfigError("aggregate: '" + in.string() + "' is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::recursive_directory_iterator(in)) {
    if (e.is_regular_file() && e.path().filename() == "eval.csv") dirs.push_back(e.path().parent_path());
  }
  std::sort(dirs.begin(), dirs.end());

  AggregateReport rep;
  std::vector<RunSummary> runs;
  std::map<GroupKey, std::vector<diagnostics::DensityRow>> density;
  for (const auto& d : dirs) {
    const std::string status = fs::exists(d / "status.txt") ? detail::read_text(d / "status.txt") : "missing status";
    if (status != "ok") {
      rep.excluded.push_back(d.string() + ": " + status);
      continue;
    }
    std::int64_t window = tail_window;
    if (window <= 0) {
      if (!fs::exists(d / "config.txt")) {
        rep.excluded.push_back(d.string() + ": no config.txt and no tail window given");
        continue;
      }
      window = load_config((d / "config.txt").string()).tail_window;
    }
    std::ifstream es(d / "eval.csv");
    const EvalFile ef = read_eval_csv(es);
    if (ef.points.empty()) {
      rep.excluded.push_back(d.string() + ": no evaluation rows");
      continue;
    }
    runs.push_back({ef.run_id, ef.key, ef.seed, tail_mean(ef.points, window)});
    if (fs::exists(d / "density.csv")) {
      std::ifstream ds(d / "density.csv");
      auto rows = diagnostics::read_density_csv(ds);
      auto& g = density[ef.key];
      g.insert(g.end(), rows.begin(), rows.end());
    }
  }
  rep.included = runs.size();
  rep.tables = build_tables(runs);

  fs::create_directories(out);
  {
    std::ofstream os(out / "tables.csv", std::ios::binary);
    if (!os) throw ConfigError("cannot write " + (out / "tables.csv").string());
    write_tables_csv(os, rep.tables);
  }
  std::ofstream os(out / "density_agg.csv", std::ios::binary);
  if (!os) throw ConfigError("cannot write " + (out / "density_agg.csv").string());
  os << "env,variant,n,q_b,window_start,threshold,mean,stderr\n";
  for (const auto& [key, rows] : density) {
    for (const auto& a : diagnostics::aggregate_over_runs(rows)) {
      os << key.env << "," << key.variant << "," << key.n << "," << util::format_double(key.q_b) << ","
         << a.window_start << "," << util::format_double(a.threshold) << ","
         << util::format_double(a.mean) << "," << (a.std_error ? util::format_double(*a.std_error) : "")
         << "\n";
    }
  }
  return rep;
}

}  // namespace sacn::harness
