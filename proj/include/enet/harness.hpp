#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "enet/config.hpp"

namespace enet {

// One replication: study-specific payload plus bookkeeping. Records are
// self-contained (seed + config re-runs them); wall_ms is the only
// non-reproducible field.
struct ReplicationRecord {
  int rep = -1;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  nlohmann::json payload;
  long long wall_ms = 0;

  nlohmann::json to_json(bool include_timing = true) const;
};

struct StudyResult {
  std::vector<ReplicationRecord> records;
  nlohmann::json summary;
  int aborted = 0;

  // a study with more than 10% aborted replications is a failure
  bool acceptable() const {
    return aborted * 10 <= static_cast<int>(records.size());
  }
};

// Seeded Monte Carlo study driver. theorem1 / corollary-linear /
// tau-frequency / logit-margin run the oracle-inequality engine;
// gic-selection runs the path + GIC + thresholding engine.
StudyResult run_study(const ExperimentConfig& config);

// series-rate: for each n in n_grid set s* by the Theta rule, fit, and
// record the estimated mean square error; the summary carries the
// log-log slope and the Spearman correlation of the means.
StudyResult run_rate_study(const ExperimentConfig& config);

// Aggregate recomputation from persisted records: fractions with
// binomial standard errors for boolean fields, means with standard
// errors for numeric fields, and the tau_member && !holds violation
// count when those fields are present.
nlohmann::json summarize_records(const std::vector<nlohmann::json>& records);

void write_records(const std::string& path,
                   const std::vector<ReplicationRecord>& records,
                   const std::string& format);
void write_json_file(const std::string& path, const nlohmann::json& j);
std::vector<nlohmann::json> read_records_jsonl(const std::string& path);

// columns (n, s_star, mse, mse_se) from a series-rate summary
void write_rate_csv(const std::string& path, const nlohmann::json& summary);

}  // namespace enet
