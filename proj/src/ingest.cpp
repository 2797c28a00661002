#include "foodcal/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "foodcal/nutrition.hpp"

namespace foodcal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ParseError, "field " + field + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) field_error(where + "." + key, "missing");
  return obj[key];
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) field_error(where + "." + key, "expected a string");
  return v.get<std::string>();
}

int require_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) field_error(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_number()) field_error(where + "." + key, "expected a number or null");
  return obj[key].get<double>();
}

std::vector<Detection> parse_boxes(const json& arr, const std::string& where) {
  if (!arr.is_array()) field_error(where, "expected an array");
  std::vector<Detection> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    Detection d;
    d.label = normalize_label(require_string(arr[i], "label", w));
    d.box = {require_int(arr[i], "xmin", w), require_int(arr[i], "ymin", w), require_int(arr[i], "xmax", w),
             require_int(arr[i], "ymax", w)};
    out.push_back(std::move(d));
  }
  return out;
}

ImagePairRecord parse_record(const json& r, const std::string& where) {
  ImagePairRecord rec;
  rec.pair_id = require_string(r, "pair_id", where);
  rec.food_label = normalize_label(require_string(r, "food_label", where));
  rec.top_image = require_string(r, "top_image", where);
  rec.side_image = require_string(r, "side_image", where);
  rec.true_volume_cm3 = optional_number(r, "true_volume_cm3", where);
  rec.true_mass_g = optional_number(r, "true_mass_g", where);
  if (r.contains("annotations") && !r["annotations"].is_null()) {
    const json& a = r["annotations"];
    if (!a.is_object()) field_error(where + ".annotations", "expected an object");
    if (a.contains("top") && !a["top"].is_null()) rec.annotations_top = parse_boxes(a["top"], where + ".annotations.top");
    if (a.contains("side") && !a["side"].is_null())
      rec.annotations_side = parse_boxes(a["side"], where + ".annotations.side");
  }
  return rec;
}

std::optional<std::string> record_problem(const ImagePairRecord& rec, const fs::path& root) {
  if (rec.top_image == rec.side_image) return "top and side images are the same file";
  if (!fs::is_regular_file(root / rec.top_image)) return "top image not found: " + (root / rec.top_image).string();
  if (!fs::is_regular_file(root / rec.side_image)) return "side image not found: " + (root / rec.side_image).string();
  if (rec.true_volume_cm3 && !(*rec.true_volume_cm3 > 0.0)) return "nonpositive volume";
  if (rec.true_mass_g && !(*rec.true_mass_g > 0.0)) return "nonpositive mass";
  if (!is_dataset_label(rec.food_label)) return "unknown food label \"" + rec.food_label + "\"";
  for (const auto* boxes : {&rec.annotations_top, &rec.annotations_side}) {
    if (!*boxes) continue;
    for (const Detection& d : **boxes)
      if (!d.box.valid()) return "degenerate annotation box for \"" + d.label + "\"";
  }
  return std::nullopt;
}

json boxes_to_json(const std::vector<Detection>& boxes) {
  json arr = json::array();
  for (const Detection& d : boxes)
    arr.push_back({{"label", d.label}, {"xmin", d.box.xmin}, {"ymin", d.box.ymin}, {"xmax", d.box.xmax}, {"ymax", d.box.ymax}});
  return arr;
}

}  // namespace

ManifestError::ManifestError(std::vector<RecordDiagnostic> diagnostics)
    : Error(ErrorKind::InvariantViolation,
            [&] {
              std::string msg = std::to_string(diagnostics.size()) + " manifest record(s) rejected";
              for (const RecordDiagnostic& d : diagnostics) msg += "; " + d.pair_id + ": " + d.reason;
              return msg;
            }()),
      diagnostics_(std::move(diagnostics)) {}

ManifestLoad load_manifest_lenient(const fs::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line) + ": " + e.what());
  }

  ManifestLoad out;
  fs::path root = require_string(j, "dataset_root", "manifest");
  if (root.is_relative()) root = path.parent_path() / root;
  out.manifest.dataset_root = root.lexically_normal();

  const json& records = require(j, "records", "manifest");
  if (!records.is_array()) field_error("manifest.records", "expected an array");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ImagePairRecord rec = parse_record(records[i], "records[" + std::to_string(i) + "]");
    if (!seen.insert(rec.pair_id).second) {
      out.rejected.push_back({rec.pair_id, "duplicate"});
      continue;
    }
    if (auto problem = record_problem(rec, out.manifest.dataset_root)) {
      out.rejected.push_back({rec.pair_id, *problem});
      continue;
    }
    out.manifest.records.push_back(std::move(rec));
  }
  return out;
}

Manifest load_manifest(const fs::path& path) {
  ManifestLoad load = load_manifest_lenient(path);
  if (!load.rejected.empty()) throw ManifestError(std::move(load.rejected));
  return std::move(load.manifest);
}

json manifest_to_json(const Manifest& manifest) {
  json records = json::array();
  for (const ImagePairRecord& r : manifest.records) {
    json rec = {{"pair_id", r.pair_id},
                {"food_label", r.food_label},
                {"top_image", r.top_image.generic_string()},
                {"side_image", r.side_image.generic_string()},
                {"true_volume_cm3", r.true_volume_cm3 ? json(*r.true_volume_cm3) : json(nullptr)},
                {"true_mass_g", r.true_mass_g ? json(*r.true_mass_g) : json(nullptr)}};
    json ann = json::object();
    if (r.annotations_top) ann["top"] = boxes_to_json(*r.annotations_top);
    if (r.annotations_side) ann["side"] = boxes_to_json(*r.annotations_side);
    rec["annotations"] = ann;
    records.push_back(std::move(rec));
  }
  return {{"dataset_root", manifest.dataset_root.generic_string()}, {"records", records}};
}

void save_manifest(const fs::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << manifest_to_json(manifest).dump(2) << "\n";
}

std::vector<Detection> annotations_from_voc_xml(const fs::path& path) {
  const std::string text = read_text(path);
  static const std::regex object_re(R"(<object>([\s\S]*?)</object>)");
  auto tag = [&](const std::string& body, const std::string& name) -> std::string {
    const std::regex re("<" + name + R"(>\s*([^<]*?)\s*</)" + name + ">");
    std::smatch m;
    if (!std::regex_search(body, m, re)) {
      throw Error(ErrorKind::ParseError, path.string() + ": <object> without <" + name + ">");
    }
    return m[1].str();
  };
  auto coord = [&](const std::string& body, const std::string& name) {
    const std::string v = tag(body, name);
    try {
      return static_cast<int>(std::lround(std::stod(v)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, path.string() + ": <" + name + "> is not a number");
    }
  };

  std::vector<Detection> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), object_re); it != std::sregex_iterator(); ++it) {
    const std::string body = (*it)[1].str();
    Detection d;
    d.label = normalize_label(tag(body, "name"));
    d.box = {coord(body, "xmin"), coord(body, "ymin"), coord(body, "xmax"), coord(body, "ymax")};
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace foodcal
