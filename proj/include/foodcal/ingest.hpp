#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "foodcal/detection.hpp"
#include "foodcal/error.hpp"

namespace foodcal {

/// One top/side photo pair of a single portion, with optional ground truth.
struct ImagePairRecord {
  std::string pair_id;
  std::string food_label;
  std::filesystem::path top_image;   // relative to the dataset root
  std::filesystem::path side_image;  // relative to the dataset root
  // nullopt means the view was never annotated, which differs from "annotated, no boxes".
  std::optional<std::vector<Detection>> annotations_top;
  std::optional<std::vector<Detection>> annotations_side;
  std::optional<double> true_volume_cm3;
  std::optional<double> true_mass_g;

  friend bool operator==(const ImagePairRecord&, const ImagePairRecord&) = default;
};

struct Manifest {
  std::filesystem::path dataset_root;
  std::vector<ImagePairRecord> records;

  std::filesystem::path resolve(const std::filesystem::path& relative) const { return dataset_root / relative; }
};

struct RecordDiagnostic {
  std::string pair_id;
  std::string reason;
};

/// Raised when one or more records are rejected; diagnostics lists every one.
class ManifestError : public Error {
 public:
  ManifestError(std::vector<RecordDiagnostic> diagnostics);

  const std::vector<RecordDiagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<RecordDiagnostic> diagnostics_;
};

struct ManifestLoad {
  Manifest manifest;  // accepted records only
  std::vector<RecordDiagnostic> rejected;
};

/// Parses the manifest and checks every record. A relative dataset_root is
/// taken relative to the manifest's directory.
/// Throws Error{MissingFile, ParseError}; rejected records go to `rejected`.
ManifestLoad load_manifest_lenient(const std::filesystem::path& path);

/// Strict variant: any rejected record raises ManifestError (InvariantViolation).
Manifest load_manifest(const std::filesystem::path& path);

nlohmann::json manifest_to_json(const Manifest& manifest);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Reads a per-image XML annotation file in the Pascal-VOC layout
/// (<object><name/><bndbox><xmin/>...</bndbox></object>).
std::vector<Detection> annotations_from_voc_xml(const std::filesystem::path& path);

}  // namespace foodcal
