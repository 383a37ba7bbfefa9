// hermcs command-line front end.
//
//   hermcs basis --order 200 [--check]
//   hermcs experiment ex3 [--config cfg.json] [--seed N] [--trials N] [--out DIR] [--pnn P] [--svg]
//   hermcs reconstruct --config signal.json [--pnn P] [--out DIR]
//
// Exit codes: 0 ok, 2 invalid arguments or config, 3 numeric failure, 1 I/O.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hermcs/basis.hpp"
#include "hermcs/detect.hpp"
#include "hermcs/error.hpp"
#include "hermcs/harness/config.hpp"
#include "hermcs/harness/csv.hpp"
#include "hermcs/harness/experiments.hpp"
#include "hermcs/sampling.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNumeric = 3;

constexpr double kDefectTolerance = 1e-8;

int run_basis(int order, bool check) {
  const hermcs::HermiteBasis basis = hermcs::build_basis(order);
  const double defect = hermcs::orthonormality_defect(basis);
  std::cout << "order " << order << "\n"
            << "t_min " << hermcs::harness::format_number(basis.roots()(0)) << "\n"
            << "t_max " << hermcs::harness::format_number(basis.roots()(order - 1)) << "\n"
            << "orthonormality_defect " << hermcs::harness::format_number(defect) << "\n";
  if (check && !(defect < kDefectTolerance)) {
    std::cerr << "defect exceeds " << kDefectTolerance << "\n";
    return kExitNumeric;
  }
  return 0;
}

struct ExperimentFlags {
  std::string id;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<double> pnn;
  bool svg = false;
};

int run_experiment(const ExperimentFlags& f) {
  using namespace hermcs::harness;
  ExperimentConfig cfg = default_config(parse_experiment_id(f.id));
  if (!f.config.empty()) {
    const nlohmann::json j = load_json_file(f.config);
    if (j.contains("experiment") && j.at("experiment") != f.id) {
      throw hermcs::InvalidArgument("config names experiment " + j.at("experiment").dump() + " but " + f.id +
                                    " was requested");
    }
    apply_json(cfg, j);
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.out) cfg.out_dir = *f.out;
  if (f.pnn) cfg.pnn = *f.pnn;
  cfg.svg = f.svg;
  validate(cfg);
  for (const auto& path : hermcs::harness::run_experiment(cfg)) std::cout << path.string() << "\n";
  return 0;
}

int run_reconstruct(const std::string& config, std::optional<double> pnn, std::optional<std::string> out_dir) {
  using namespace hermcs::harness;
  ExperimentConfig cfg;
  cfg.id = ExperimentId::kEx5;
  apply_json(cfg, load_json_file(config));
  if (pnn) cfg.pnn = *pnn;
  hermcs::detail::require(cfg.ma_values.size() == 1, "config needs mask.M_A");
  validate(cfg);

  const int M = cfg.M;
  const hermcs::HermiteBasis basis = hermcs::build_basis(M);
  const hermcs::SparseSignalSpec spec = cfg.signal();
  const hermcs::SampleVector signal = hermcs::synthesize(spec, basis);
  const hermcs::SamplingMask mask = hermcs::random_mask(M, cfg.ma_values.front(), cfg.seed);
  const hermcs::ReconstructionResult rec = hermcs::reconstruct(hermcs::measure(signal, mask), basis, cfg.pnn);
  const double mse = (rec.reconstructed_signal.values() - signal.values()).squaredNorm() / M;

  nlohmann::json j;
  j["status"] = std::string(hermcs::to_string(rec.status));
  j["support"] = rec.support;
  std::vector<double> coeffs(rec.coefficients.data(), rec.coefficients.data() + rec.coefficients.size());
  j["coefficients"] = coeffs;
  j["threshold"] = rec.threshold_used;
  j["sigma_estimate"] = rec.sigma_estimate;
  j["residual_norm"] = rec.residual_norm;
  j["condition_estimate"] = rec.condition_estimate;
  j["rank_deficient"] = rec.rank_deficient;
  j["signal_mse"] = mse;
  std::cout << j.dump(2) << "\n";

  if (out_dir) {
    std::vector<char> kept(static_cast<std::size_t>(M), 0);
    for (int m : mask.available()) kept[static_cast<std::size_t>(m)] = 1;
    CsvWriter w(std::filesystem::path(*out_dir) / "reconstruction.csv",
                std::string("hermcs ") + HERMCS_VERSION + " reconstruct " + describe(cfg),
                {"m", "t", "original", "reconstructed", "available"});
    for (int m = 0; m < M; ++m) {
      w.row(m, basis.roots()(m), signal[m], rec.reconstructed_signal[m], kept[static_cast<std::size_t>(m)] != 0);
    }
    std::cout << w.path().string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive sensing in the discrete Hermite transform domain"};
  app.set_version_flag("--version", std::string(HERMCS_VERSION));
  app.require_subcommand(1);

  auto* basis_cmd = app.add_subcommand("basis", "Build the Hermite basis and report its orthonormality defect");
  int order = 200;
  bool check = false;
  basis_cmd->add_option("--order,-M", order, "Transform length M")->required();
  basis_cmd->add_flag("--check", check, "Exit 3 when the defect exceeds 1e-8");

  auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte-Carlo campaign");
  ExperimentFlags ef;
  exp_cmd->add_option("id", ef.id, "ex1a | ex1b | ex2 | ex3 | ex4 | ex5 | histograms")->required();
  exp_cmd->add_option("--config", ef.config, "JSON config overlaying the defaults");
  exp_cmd->add_option("--seed", ef.seed, "Master seed");
  exp_cmd->add_option("--trials", ef.trials, "Trials per sweep point");
  exp_cmd->add_option("--out", ef.out, "Output directory");
  exp_cmd->add_option("--pnn", ef.pnn, "Target probability that no noise coefficient exceeds the threshold");
  exp_cmd->add_flag("--svg", ef.svg, "Also write SVG charts");

  auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct one signal described by a JSON config");
  std::string rec_config;
  std::optional<double> rec_pnn;
  std::optional<std::string> rec_out;
  rec_cmd->add_option("--config", rec_config, "JSON with M, components and mask {M_A, seed}")->required();
  rec_cmd->add_option("--pnn", rec_pnn, "Target probability for the threshold");
  rec_cmd->add_option("--out", rec_out, "Directory for reconstruction.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*basis_cmd) return run_basis(order, check);
    if (*exp_cmd) return run_experiment(ef);
    if (*rec_cmd) return run_reconstruct(rec_config, rec_pnn, rec_out);
  } catch (const hermcs::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const hermcs::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const hermcs::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
