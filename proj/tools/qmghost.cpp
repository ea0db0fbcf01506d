#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qmghost/run.hpp"

namespace {

// "a:b:step" -> LensSweep over S_o.
std::optional<qmg::LensSweep> parse_range(const std::string& text, double f) {
  std::istringstream in(text);
  qmg::LensSweep s{f, 0, 0, 0};
  char c1 = 0, c2 = 0;
  if (!(in >> s.so_min >> c1 >> s.so_max >> c2 >> s.so_step) || c1 != ':' || c2 != ':') return std::nullopt;
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  return s;
}

int execute(const qmg::RunConfig& cfg) {
  const qmg::RunOutcome outcome = qmg::run(cfg, std::cout, std::cerr);
  for (const auto& a : outcome.artifacts) std::cerr << "wrote " << a << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ghost-imaging simulator and quantum-mirror law checker"};
  app.require_subcommand(1);

  std::string config_path, out_dir, so_range;
  std::uint64_t seed = 0, pairs = 0;
  int workers = 1;
  double f_mm = 0;

  auto* sim = app.add_subcommand("simulate", "Run the two-arm coincidence simulation");
  sim->add_option("--config", config_path, "Scene config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = sim->add_option("--seed", seed, "Override the config seed");
  auto* pairs_opt = sim->add_option("--pairs", pairs, "Override the number of pairs");
  sim->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* ver = app.add_subcommand("verify-laws", "Oracle-vs-law convergence sweep");
  ver->add_option("--config", config_path, "Sweep config (JSON)")->required()->check(CLI::ExistingFile);
  ver->add_option("--out", out_dir, "Output directory")->required();
  ver->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* lens = app.add_subcommand("lens-law", "Ghost thin-lens table over a range of object distances");
  lens->add_option("--f", f_mm, "Focal length (mm)")->required();
  lens->add_option("--so-range", so_range, "Object distances a:b:step (mm)")->required();
  lens->add_option("--out", out_dir, "Write lens_law.csv here instead of stdout");

  auto* fold = app.add_subcommand("fold-check", "Compare the coincidence image with its Klyshko-folded twin");
  fold->add_option("--config", config_path, "Scene config (JSON)")->required()->check(CLI::ExistingFile);
  fold->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? qmg::kExitOk : qmg::kExitError;
  }

  try {
    qmg::ConfigOverrides ov;
    ov.workers = workers;
    if (*sim) {
      ov.mode = qmg::RunMode::Simulate;
      ov.output_dir = out_dir;
      if (*seed_opt) ov.seed = seed;
      if (*pairs_opt) ov.n_pairs = pairs;
      return execute(qmg::load_config(config_path, ov));
    }
    if (*ver) {
      ov.mode = qmg::RunMode::VerifyLaws;
      ov.output_dir = out_dir;
      return execute(qmg::load_config(config_path, ov));
    }
    if (*fold) {
      ov.mode = qmg::RunMode::FoldCheck;
      ov.output_dir = std::string();
      return execute(qmg::load_config(config_path, ov));
    }
    const auto range = parse_range(so_range, f_mm);
    if (!range) {
      std::cerr << "--so-range: expected a:b:step\n";
      return qmg::kExitError;
    }
    qmg::RunConfig cfg = qmg::lens_law_config(*range);
    cfg.output_dir = out_dir;
    return execute(cfg);
  } catch (const qmg::ConfigError& e) {
    for (const auto& issue : e.issues()) std::cerr << "config error: " << issue << "\n";
    return qmg::kExitError;
  } catch (const qmg::Error& e) {
    std::cerr << "error [" << qmg::to_string(e.kind()) << "]: " << e.what() << "\n";
    return qmg::kExitError;
  }
}
