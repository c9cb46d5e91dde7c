// Command-line runner: sweeps, single points, the classical limit and the
// named presets. Tables go to --out or stdout.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dvtele/sweep.hpp"

namespace {

using dvtele::SweepConfig;

// Flags that map one-to-one onto SweepConfig settings.
struct SettingFlags {
  std::map<std::string, std::string> values;
  bool optimize = false;
  bool no_optimize = false;

  void add(CLI::App* app, bool with_grids) {
    const auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
      app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
    };
    opt("--protocol", "protocol", "cv_bsm | hbsm_two_state | hbsm_four_state");
    opt("--distill", "distillation", "none | qs | pc");
    opt("--norm-convention", "norm", "ratio | per-point | both");
    opt("--cv-route", "cv_route", "gaussian | density");
    if (with_grids) {
      opt("--r-db", "r_db", "squeezing grid in dB (a,b,c or start:step:stop)");
      opt("--loss-db", "loss_db", "channel loss grid in dB, both channels");
      opt("--loss2-db", "loss2_db", "independent loss grid for the second channel");
      opt("--eta", "eta", "detector efficiency grid");
    } else {
      opt("--r-db", "r_db", "squeezing in dB");
      opt("--loss-db", "loss_db", "channel loss in dB, both channels");
      opt("--loss2-db", "loss2_db", "loss of the second channel in dB");
      opt("--eta", "eta", "detector efficiency");
    }
    opt("--g", "g", "displacement gain (CV-BSM)");
    opt("--ts", "ts", "scissors transmissivity");
    opt("--tc", "tc", "catalysis transmissivity");
    opt("--truncation-mass", "truncation_mass", "retained TMSV probability mass");
    opt("--out", "out", "output file (default stdout)");
    opt("--format", "format", "csv | json");
    opt("--threads", "threads", "worker threads, 0 for all cores");
    app->add_flag("--optimize", optimize, "tune g, T_s and T_c per point");
    app->add_flag("--no-optimize", no_optimize, "use the given g, T_s and T_c");
  }

  void apply(SweepConfig& cfg) const {
    for (const auto& [key, value] : values) dvtele::apply_setting(cfg, key, value);
    if (optimize) cfg.optimize = true;
    if (no_optimize) cfg.optimize = false;
  }
};

int write_table(const std::vector<dvtele::ResultRecord>& table, const SweepConfig& cfg) {
  if (cfg.out.empty()) {
    dvtele::emit(std::cout, table, cfg.format);
  } else {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << cfg.out << "'\n";
      return 2;
    }
    dvtele::emit(out, table, cfg.format);
  }
  int failures = 0;
  for (const auto& r : table) {
    if (r.ok()) continue;
    ++failures;
    std::cerr << "point failed: protocol=" << r.protocol << " distillation=" << r.distillation
              << " norm=" << r.norm << " r_db=" << r.r_db << " loss1_db=" << r.loss1_db
              << " loss2_db=" << r.loss2_db << " eta=" << r.eta << ": " << r.error << '\n';
  }
  if (failures > 0) {
    std::cerr << failures << " of " << table.size() << " points failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon qubit teleportation over lossy two-mode squeezed channels"};
  app.require_subcommand(1);

  std::string config_path;
  SettingFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a grid of configurations");
  sweep->add_option("--config", config_path, "key = value settings file");
  sweep_flags.add(sweep, true);

  SettingFlags point_flags;
  CLI::App* point = app.add_subcommand("point", "evaluate a single configuration");
  point->add_option("--config", config_path, "key = value settings file");
  point_flags.add(point, false);

  std::string eta_grid = "0:0.1:1";
  CLI::App* limit = app.add_subcommand("classical-limit", "measure-and-prepare fidelity bound");
  limit->add_option("--eta", eta_grid, "detector efficiency grid");

  std::string preset_name;
  std::string preset_out;
  std::string preset_format = "csv";
  int preset_threads = 1;
  bool list_presets = false;
  CLI::App* preset = app.add_subcommand("preset", "run a named preset sweep");
  preset->add_option("name", preset_name, "fig2a | fig2b | fig4 | fig5 | fig6");
  preset->add_option("--out", preset_out, "output file (default stdout)");
  preset->add_option("--format", preset_format, "csv | json");
  preset->add_option("--threads", preset_threads, "worker threads, 0 for all cores");
  preset->add_flag("--list", list_presets, "print the preset names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed() || point->parsed()) {
      SweepConfig cfg;
      if (!config_path.empty()) cfg = dvtele::load_sweep_config_file(config_path);
      (sweep->parsed() ? sweep_flags : point_flags).apply(cfg);
      cfg.validate();
      if (point->parsed() && cfg.num_points() != cfg.norms.size()) {
        std::cerr << "error: point takes single values, use sweep for grids\n";
        return 2;
      }
      return write_table(dvtele::run_sweep(cfg), cfg);
    }

    if (limit->parsed()) {
      const std::vector<double> etas = dvtele::parse_grid(eta_grid);
      if (etas.empty()) throw std::invalid_argument("eta grid is empty");
      std::printf("eta,classical_limit,bruteforce\r\n");
      for (double e : etas) {
        std::printf("%.12g,%.12g,%.12g\r\n", e, dvtele::classical_limit(e),
                    dvtele::classical_limit_bruteforce(e));
      }
      return 0;
    }

    if (preset->parsed()) {
      if (list_presets) {
        for (const auto& n : dvtele::preset_names()) std::cout << n << '\n';
        return 0;
      }
      if (preset_name.empty()) {
        std::cerr << "error: preset name required (--list shows them)\n";
        return 2;
      }
      std::vector<dvtele::ResultRecord> table;
      SweepConfig out_cfg;
      out_cfg.out = preset_out;
      out_cfg.format = dvtele::parse_format(preset_format);
      for (SweepConfig cfg : dvtele::preset(preset_name)) {
        cfg.threads = preset_threads;
        auto part = dvtele::run_sweep(cfg);
        table.insert(table.end(), part.begin(), part.end());
      }
      return write_table(table, out_cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
