#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "foodcal/ingest.hpp"
#include "foodcal/pipeline.hpp"

namespace foodcal {

struct PairEstimate {
  std::string pair_id;
  std::string food_label;
  double estimated_volume_cm3 = 0.0;  // v_j
  double reference_volume_cm3 = 0.0;  // V_j, the dataset's measured volume

  double relative_error() const noexcept {
    return (estimated_volume_cm3 - reference_volume_cm3) / reference_volume_cm3;
  }
};

/// Per food type: signed mean relative error over n evaluated pairs.
struct TypeReport {
  std::string food_label;
  int n = 0;
  double mean_error = 0.0;
  double abs_mean_error = 0.0;  // |mean_error|
  int discarded = 0;
};

struct DiscardedPair {
  std::string pair_id;
  std::string food_label;
  std::string stage;
  std::string reason;  // ErrorKind name
  std::string message;
};

struct EvaluationReport {
  std::vector<TypeReport> types;        // sorted by label
  std::vector<PairEstimate> estimates;  // sorted by pair_id
  std::vector<DiscardedPair> discarded; // sorted by pair_id
  std::map<std::string, std::map<std::string, double>> timings_ms;  // pair_id -> stage -> ms
  std::size_t total_records = 0;
};

/// ME_i = (1/n_i) sum_j (v_j - V_j) / V_j, one report per label, sorted by label.
/// Throws Error{EmptyInput} and Error{InvalidArgument} for V_j <= 0.
std::vector<TypeReport> mean_error(std::span<const PairEstimate> estimates);

/// Runs the full pipeline on every record; failing pairs are discarded with
/// the stage and reason, never dropped. Runs `config.jobs` workers; the
/// report does not depend on completion order.
/// Throws Error{NoEvaluableRecords} when nothing can be evaluated.
EvaluationReport evaluate_manifest(const Manifest& manifest, const PipelineConfig& config);

/// As above, with records rejected at load time counted as discarded under
/// stage "ingest", reason "InvalidRecord".
EvaluationReport evaluate_manifest(const ManifestLoad& load, const PipelineConfig& config);

/// Report JSON, schema 1. With include_timings = false the output is a pure
/// function of the inputs.
nlohmann::json evaluation_to_json(const EvaluationReport& report, bool include_timings = true);

}  // namespace foodcal
