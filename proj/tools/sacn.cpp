// Command-line front end: train, aggregate, presets, diagnose-density.
#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sacn/harness/allocator.hpp"
#include "sacn/harness/experiment.hpp"
#include "sacn/harness/run_config.hpp"
#include "sacn/harness/tables.hpp"

namespace {

namespace h = sacn::harness;
namespace fs = std::filesystem;

// Config file, then --set key=value overrides, then --seed.
h::RunConfig resolve(const std::string& path, const std::vector<std::string>& sets,
                     const std::int64_t* seed) {
  h::RunConfig c = h::load_config(path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw sacn::ConfigError("--set expects key=value, got '" + kv + "'");
    h::apply_setting(c, h::detail::trim(kv.substr(0, eq)), h::detail::trim(kv.substr(eq + 1)));
  }
  if (seed && *seed >= 0) c.seed = static_cast<std::uint64_t>(*seed);
  c.validate();
  return c;
}

void print_density(const h::RunResult& r, const std::vector<double>& thresholds) {
  std::cout << "window_start,samples";
  for (double t : thresholds) std::cout << ",>=" << sacn::util::format_double(t);
  std::cout << "\n";
  for (const auto& w : r.density) {
    std::cout << w.window_start << "," << w.sample_count;
    for (double f : w.fractions()) std::cout << "," << sacn::util::format_double(f);
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  h::tune_allocator();
  CLI::App app{"SAC / SACn experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string in_dir;
  std::int64_t seed = -1;
  std::int64_t tail_window = 0;
  std::vector<std::string> sets;
  std::string show;

  auto* train = app.add_subcommand("train", "Run one training job and write its CSV files");
  train->add_option("--config", config_path, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Master seed (overrides the config)");
  train->add_option("--out", out_dir, "Output directory (default runs/<run_id>)");
  train->add_option("--set", sets, "Extra key=value override, repeatable");

  auto* aggregate = app.add_subcommand("aggregate", "Build tables.csv and density_agg.csv from run directories");
  aggregate->add_option("--in", in_dir, "Directory scanned recursively for eval.csv")->required()->check(CLI::ExistingDirectory);
  aggregate->add_option("--out", out_dir, "Output directory")->required();
  aggregate->add_option("--tail-window", tail_window, "Tail window in steps (default: per-run config)");

  auto* presets = app.add_subcommand("presets", "List presets, or print one as a config file");
  presets->add_option("--show", show, "Preset to print");

  auto* diagnose = app.add_subcommand("diagnose-density", "Run a job and print 32-bit density-ratio fractions");
  diagnose->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--seed", seed, "Master seed (overrides the config)");
  diagnose->add_option("--out", out_dir, "Also write the run directory here");
  diagnose->add_option("--set", sets, "Extra key=value override, repeatable");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train || *diagnose) {
      const auto cfg = resolve(config_path, sets, &seed);
      const auto res = h::run_experiment(cfg);
      const bool write = *train || !out_dir.empty();
      const fs::path dir = out_dir.empty() ? fs::path("runs") / res.run_id : fs::path(out_dir);
      if (write) h::write_run_outputs(dir, cfg, res);
      if (*diagnose) print_density(res, cfg.density_thresholds);
      std::cerr << res.run_id << ": " << res.status;
      if (write) std::cerr << " -> " << dir.string();
      std::cerr << "\n";
      return res.ok() ? 0 : 2;
    }
    if (*aggregate) {
      const auto rep = h::aggregate_directory(in_dir, out_dir, tail_window);
      for (const auto& e : rep.excluded) std::cerr << "excluded " << e << "\n";
      for (const auto& r : rep.tables) {
        if (r.seeds < 2) {
          std::cerr << "warning: " << r.key.env << "/" << r.key.variant << " has " << r.seeds
                    << " seed; stderr and p omitted\n";
        }
      }
      h::write_tables_csv(std::cout, rep.tables);
      return 0;
    }
    if (*presets) {
      if (!show.empty()) {
        std::cout << h::to_config_text(h::preset(show));
      } else {
        for (const auto& n : h::preset_names()) std::cout << n << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
