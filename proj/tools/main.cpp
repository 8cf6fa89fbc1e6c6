// parsim: run, sweep and validate stablecoin settlement scenarios.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "parsim/scenario.hpp"

namespace {

enum Exit : int { kOk = 0, kValidation = 1, kAudit = 2, kIo = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parsim::IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const parsim::ParseError& e) {
    std::cerr << "parse error: " << e.what();
    if (!e.field().empty()) std::cerr << " (" << e.field() << ")";
    std::cerr << "\n";
    return kValidation;
  } catch (const parsim::ValidationError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kValidation;
  } catch (const parsim::AuditFailure& e) {
    std::cerr << e.what() << "\n";
    return kAudit;
  } catch (const parsim::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stablecoin redemption and Treasury market-liquidity simulator"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "Run one scenario and write its outputs");
  run->add_option("config", config, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory");

  std::string grid;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  sweep->add_option("config", config, "Base scenario JSON file")->required();
  sweep->add_option("--grid", grid, "Grid JSON: pointer -> list of values")->required();
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--threads", threads, "Worker threads (0 = hardware)");

  auto* validate = app.add_subcommand("validate", "Parse and validate a config");
  validate->add_option("config", config, "Scenario JSON file")->required();

  auto* presets = app.add_subcommand("presets", "Built-in scenarios");
  presets->require_subcommand(1);
  std::string show;
  auto* list = presets->add_subcommand("list", "List preset names");
  auto* dump = presets->add_subcommand("show", "Print a preset's JSON");
  dump->add_option("name", show)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  if (run->parsed()) {
    return guarded([&] {
      parsim::ScenarioConfig cfg = parsim::load_config(config);
      if (seed) cfg.seed = *seed;
      const parsim::RunOutput out = parsim::run(cfg);
      parsim::write_outputs(out, out_dir);
      std::cout << "ran " << cfg.name << " for " << cfg.horizon_days << " days; outputs in " << out_dir << "\n";
      return kOk;
    });
  }
  if (sweep->parsed()) {
    return guarded([&] {
      const parsim::ScenarioConfig cfg = parsim::load_config(config);
      const parsim::SweepReport report = parsim::sweep(cfg, read_file(grid), out_dir, threads);
      std::size_t failed = 0;
      for (const auto& p : report.points) {
        if (p.status != "ok") {
          ++failed;
          std::cerr << "point " << p.index << ": " << p.status << ": " << p.message << "\n";
        }
      }
      std::cout << report.points.size() << " points, " << failed << " failed; matrix in " << out_dir
                << "/sweep.csv\n";
      return kOk;
    });
  }
  if (validate->parsed()) {
    return guarded([&] {
      const parsim::ScenarioConfig cfg = parsim::load_config(config);
      std::cout << "ok: " << cfg.name << " (" << cfg.issuers.size() << " issuers, " << cfg.dealers.size()
                << " dealers, " << cfg.horizon_days << " days)\n";
      return kOk;
    });
  }
  if (list->parsed()) {
    for (const auto& name : parsim::preset_names()) {
      std::cout << name << "\t" << parsim::preset_description(name) << "\n";
    }
    return kOk;
  }
  if (dump->parsed()) {
    return guarded([&] {
      std::cout << parsim::preset_json(show) << "\n";
      return kOk;
    });
  }
  return kOk;
}
