#include "foodcal/eval.hpp"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "foodcal/error.hpp"

namespace foodcal {

using nlohmann::json;

namespace {

struct PairOutcome {
  std::optional<PairEstimate> estimate;
  std::optional<DiscardedPair> discarded;
  std::map<std::string, double> timings;
};

PairOutcome evaluate_record(const Manifest& manifest, const ImagePairRecord& record, const PipelineTables& tables,
                            const PipelineConfig& config) {
  PairOutcome out;
  auto discard = [&](const std::string& stage, const Error& e) {
    out.discarded = DiscardedPair{record.pair_id, record.food_label, stage, std::string(e.name()), e.what()};
  };
  if (!record.true_volume_cm3) {
    discard("ingest", Error(ErrorKind::InvariantViolation, "record has no reference volume"));
    return out;
  }
  const auto t0 = std::chrono::steady_clock::now();
  Image top, side;
  try {
    top = load_image(manifest.resolve(record.top_image));
    side = load_image(manifest.resolve(record.side_image));
  } catch (const Error& e) {
    discard("ingest", e);
    return out;
  }
  out.timings["ingest"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  std::unique_ptr<DetectorProvider> top_provider, side_provider;
  try {
    top_provider = provider_for_record(manifest, record, View::Top, config);
    side_provider = provider_for_record(manifest, record, View::Side, config);
  } catch (const Error& e) {
    discard("detect", e);
    return out;
  }

  try {
    const EstimateReport report = estimate_pair(top, side, *top_provider, *side_provider, tables, config);
    for (const auto& [stage, ms] : report.stage_ms) out.timings[stage] = ms;
    out.estimate = PairEstimate{record.pair_id, record.food_label, report.total_volume_cm3(), *record.true_volume_cm3};
  } catch (const StageError& e) {
    discard(e.stage(), e);
  } catch (const Error& e) {
    discard("pipeline", e);
  }
  return out;
}

}  // namespace

std::vector<TypeReport> mean_error(std::span<const PairEstimate> estimates) {
  if (estimates.empty()) throw Error(ErrorKind::EmptyInput, "no pair estimates");
  std::map<std::string, std::pair<double, int>> sums;
  for (const PairEstimate& e : estimates) {
    if (!(e.reference_volume_cm3 > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "pair " + e.pair_id + " has a nonpositive reference volume");
    }
    auto& [sum, n] = sums[e.food_label];
    sum += e.relative_error();
    ++n;
  }
  std::vector<TypeReport> out;
  for (const auto& [label, acc] : sums) {
    const double me = acc.first / acc.second;
    out.push_back({label, acc.second, me, std::abs(me), 0});
  }
  return out;
}

EvaluationReport evaluate_manifest(const Manifest& manifest, const PipelineConfig& config) {
  config.validate();
  const bool any_reference = std::any_of(manifest.records.begin(), manifest.records.end(),
                                         [](const ImagePairRecord& r) { return r.true_volume_cm3.has_value(); });
  if (manifest.records.empty() || !any_reference) {
    throw Error(ErrorKind::NoEvaluableRecords, "manifest has no records with a reference volume");
  }
  const PipelineTables tables = PipelineTables::load(config);

  std::vector<PairOutcome> outcomes(manifest.records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.records.size(); i = next++) {
      outcomes[i] = evaluate_record(manifest, manifest.records[i], tables, config);
    }
  };
  const int workers = std::min<int>(config.jobs, static_cast<int>(manifest.records.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  EvaluationReport report;
  report.total_records = manifest.records.size();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    PairOutcome& o = outcomes[i];
    if (o.estimate) report.estimates.push_back(std::move(*o.estimate));
    if (o.discarded) report.discarded.push_back(std::move(*o.discarded));
    report.timings_ms[manifest.records[i].pair_id] = std::move(o.timings);
  }
  auto by_id = [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; };
  std::sort(report.estimates.begin(), report.estimates.end(), by_id);
  std::sort(report.discarded.begin(), report.discarded.end(), by_id);

  if (!report.estimates.empty()) report.types = mean_error(report.estimates);
  for (const DiscardedPair& d : report.discarded) {
    for (TypeReport& t : report.types)
      if (t.food_label == d.food_label) ++t.discarded;
  }
  return report;
}

EvaluationReport evaluate_manifest(const ManifestLoad& load, const PipelineConfig& config) {
  if (load.manifest.records.empty()) {
    throw Error(ErrorKind::NoEvaluableRecords,
                "manifest has no usable records (" + std::to_string(load.rejected.size()) + " rejected)");
  }
  EvaluationReport report = evaluate_manifest(load.manifest, config);
  for (const RecordDiagnostic& d : load.rejected) {
    report.discarded.push_back({d.pair_id, "", "ingest", "InvalidRecord", d.reason});
  }
  report.total_records += load.rejected.size();
  std::stable_sort(report.discarded.begin(), report.discarded.end(),
                   [](const DiscardedPair& a, const DiscardedPair& b) { return a.pair_id < b.pair_id; });
  return report;
}

json evaluation_to_json(const EvaluationReport& report, bool include_timings) {
  json types = json::array();
  for (const TypeReport& t : report.types) {
    types.push_back({{"food_label", t.food_label},
                     {"n", t.n},
                     {"mean_error", t.mean_error},
                     {"abs_mean_error", t.abs_mean_error},
                     {"discarded", t.discarded}});
  }
  json pairs = json::array();
  for (const PairEstimate& e : report.estimates) {
    pairs.push_back({{"pair_id", e.pair_id},
                     {"food_label", e.food_label},
                     {"estimated_volume_cm3", e.estimated_volume_cm3},
                     {"reference_volume_cm3", e.reference_volume_cm3},
                     {"relative_error", e.relative_error()}});
  }
  json discarded = json::array();
  for (const DiscardedPair& d : report.discarded) {
    discarded.push_back({{"pair_id", d.pair_id},
                         {"food_label", d.food_label},
                         {"stage", d.stage},
                         {"reason", d.reason},
                         {"message", d.message}});
  }
  json out = {{"schema", 1},
              {"total_records", report.total_records},
              {"evaluated", report.estimates.size()},
              {"discarded_count", report.discarded.size()},
              {"type_reports", types},
              {"pair_estimates", pairs},
              {"discarded", discarded}};
  if (include_timings) out["timings"] = report.timings_ms;
  return out;
}

}  // namespace foodcal
