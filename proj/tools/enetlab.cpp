#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "enet/harness.hpp"
#include "enet/sample.hpp"
#include "enet/solver.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
  int replications = 0;
  int parallel = 0;
};

void apply(enet::ExperimentConfig& config, const Overrides& ov) {
  if (!ov.out.empty()) config.out = ov.out;
  if (!ov.format.empty()) config.format = ov.format;
  if (ov.seed != 0) config.master_seed = ov.seed;
  if (ov.replications > 0) config.replications = ov.replications;
  if (ov.parallel > 0) config.parallel = ov.parallel;
}

int emit_study(const enet::ExperimentConfig& config,
               const enet::StudyResult& result) {
  const std::string prefix = config.out.empty() ? "study" : config.out;
  const std::string rec_path =
      prefix + (config.format == "json" ? ".records.jsonl" : ".records.csv");
  enet::write_records(rec_path, result.records, config.format);
  enet::write_json_file(prefix + ".summary.json", result.summary);
  if (config.study == enet::StudyKind::SeriesRate)
    enet::write_rate_csv(prefix + ".rate.csv", result.summary);

  std::cout << "study=" << enet::study_name(config.study)
            << " records=" << result.records.size()
            << " aborted=" << result.aborted << "\n";
  if (result.summary.contains("fraction_tau"))
    std::cout << "  fraction_tau=" << result.summary["fraction_tau"].dump()
              << " violations="
              << result.summary["violations_tau_and_not_holds"].dump() << "\n";
  if (result.summary.contains("slope"))
    std::cout << "  slope=" << result.summary["slope"].dump() << "\n";
  if (result.summary.contains("fraction_exact"))
    std::cout << "  screening=" << result.summary["fraction_screening"].dump()
              << " exact=" << result.summary["fraction_exact"].dump() << "\n";
  std::cout << "  wrote " << rec_path << " and " << prefix << ".summary.json"
            << "\n";
  if (!result.acceptable()) {
    std::cerr << "error: more than 10% of replications aborted\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elastic net estimation and oracle-inequality studies"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON study configuration")
        ->required();
    cmd->add_option("--out", ov.out, "output path prefix");
    cmd->add_option("--format", ov.format, "json or csv records")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", ov.seed, "master seed override");
    cmd->add_option("--replications", ov.replications, "replication override");
    cmd->add_option("--parallel", ov.parallel, "worker count");
  };

  auto* run_cmd = app.add_subcommand("run", "run a seeded Monte Carlo study");
  add_common(run_cmd);

  auto* rate_cmd =
      app.add_subcommand("rate", "run a series-estimator rate study");
  add_common(rate_cmd);

  auto* sum_cmd =
      app.add_subcommand("summarize", "recompute aggregates from records");
  std::string records_path, sum_out;
  sum_cmd->add_option("--records", records_path, "records.jsonl path")
      ->required();
  sum_cmd->add_option("--out", sum_out, "summary output path");

  auto* fit_cmd = app.add_subcommand("fit", "one-shot fit on ingested data");
  std::string data_path, loss_name = "quadratic", basis_name = "identity",
              fit_out;
  bool has_header = false;
  int degree = 0;
  double lambda1 = 0.0, lambda2 = 0.0, ell1_radius = 0.0, tol = 1e-8;
  int max_iter = 100000;
  fit_cmd->add_option("--data", data_path, "delimited data file")->required();
  fit_cmd->add_flag("--header", has_header, "skip a header row");
  fit_cmd->add_option("--loss", loss_name)
      ->check(CLI::IsMember({"quadratic", "logistic"}));
  fit_cmd->add_option("--basis", basis_name)
      ->check(CLI::IsMember({"identity", "polynomial"}));
  fit_cmd->add_option("--degree", degree, "polynomial degree p");
  fit_cmd->add_option("--lambda1", lambda1);
  fit_cmd->add_option("--lambda2", lambda2);
  fit_cmd->add_option("--ell1-radius", ell1_radius);
  fit_cmd->add_option("--tol", tol);
  fit_cmd->add_option("--max-iter", max_iter);
  fit_cmd->add_option("--out", fit_out, "write the result as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed() || rate_cmd->parsed()) {
      enet::ExperimentConfig config = enet::load_config_file(config_path);
      apply(config, ov);
      if (rate_cmd->parsed() && config.study != enet::StudyKind::SeriesRate)
        throw std::invalid_argument("rate: config study must be series-rate");
      const enet::StudyResult result = config.study == enet::StudyKind::SeriesRate
                                           ? enet::run_rate_study(config)
                                           : enet::run_study(config);
      return emit_study(config, result);
    }

    if (sum_cmd->parsed()) {
      const auto records = enet::read_records_jsonl(records_path);
      const json summary = enet::summarize_records(records);
      if (sum_out.empty())
        std::cout << summary.dump(2) << "\n";
      else
        enet::write_json_file(sum_out, summary);
      return 0;
    }

    if (fit_cmd->parsed()) {
      enet::LoadOptions lopts;
      lopts.has_header = has_header;
      const enet::Sample sample = enet::load_sample(data_path, lopts);

      enet::BasisSpec basis;
      if (basis_name == "identity") {
        basis.kind = enet::BasisKind::Identity;
        basis.p = sample.dim();
      } else {
        basis.kind = enet::BasisKind::Polynomial;
        if (degree < 1)
          throw std::invalid_argument("fit: polynomial basis needs --degree");
        basis.p = degree;
      }
      const Eigen::MatrixXd design = enet::design_matrix(basis, sample);
      const enet::LossKind loss = loss_name == "quadratic"
                                      ? enet::LossKind::Quadratic
                                      : enet::LossKind::Logistic;
      const enet::ErmProblem problem(design, sample.y, loss);
      enet::PenaltyConfig penalty;
      penalty.lambda1 = lambda1;
      penalty.lambda2 = lambda2;
      if (ell1_radius > 0) penalty.ell1_radius = ell1_radius;
      enet::SolverOptions options;
      options.tol = tol;
      options.max_iter = max_iter;
      const enet::FitResult result = enet::fit(problem, penalty, options);

      json out;
      out["n"] = sample.n();
      out["p"] = basis.columns();
      out["objective"] = result.objective;
      out["kkt_residual"] = result.kkt_residual;
      out["iterations"] = result.iterations;
      out["converged"] = result.converged;
      out["support"] = result.support;
      out["beta"] = std::vector<double>(result.beta.data(),
                                        result.beta.data() + result.beta.size());
      if (fit_out.empty())
        std::cout << out.dump(2) << "\n";
      else
        enet::write_json_file(fit_out, out);
      return result.converged ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
