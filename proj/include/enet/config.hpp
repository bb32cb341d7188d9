#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "enet/basis.hpp"
#include "enet/datagen.hpp"
#include "enet/selection.hpp"
#include "enet/solver.hpp"

namespace enet {

enum class StudyKind {
  Theorem1,
  CorollaryLinear,
  TauFrequency,
  LogitMargin,
  GicSelection,
  SeriesRate,
};

enum class PenaltyRuleKind {
  Explicit,   // lambda1 given directly
  LemmaQuad,  // lambda1 = L * lambda0 with lambda0 from concentration
  Scaled,     // lambda1 = scale * sqrt(log(p)/n)
};

enum class CouplingRule { Remark4, Fixed, None };

struct PenaltyRuleConfig {
  PenaltyRuleKind rule = PenaltyRuleKind::LemmaQuad;
  double lambda1 = 0.0;  // Explicit
  double L = 8.0;        // LemmaQuad multiplier, >= 8
  double scale = 0.5;    // Scaled multiplier
  CouplingRule coupling = CouplingRule::Remark4;
  double lambda2 = 0.0;      // Fixed coupling value
  double ell1_radius = 0.0;  // G; 0 = Phi unbounded
};

struct ExperimentConfig {
  StudyKind study = StudyKind::Theorem1;
  DgpConfig dgp;  // per-replication seeds are derived from master_seed
  BasisSpec basis;
  PenaltyRuleConfig penalty;
  int replications = 1;
  std::uint64_t master_seed = 1;
  int parallel = 1;
  std::string out;
  std::string format = "json";

  double eta = 0.5;
  double eps0 = 0.0;  // 0 = derive from the config band

  std::string gamma_rule = "true-support";  // or "first-sstar"
  Eigen::Index s_star = 0;                  // for first-sstar outside rate studies
  int excess_mc = 20000;

  int zm_directions = 64;
  int zm_radii = 4;
  int zm_hill = 200;
  int zm_mc = 10000;

  PathSpec path;
  double threshold_multiplier = 1.0;

  std::vector<Eigen::Index> n_grid;
  double s_scale = 1.0;

  SolverOptions solver;

  nlohmann::json raw;  // parsed source, echoed into summaries

  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

std::string study_name(StudyKind kind);

}  // namespace enet
