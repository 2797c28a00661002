#include "foodcal/nutrition.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "foodcal/error.hpp"

namespace foodcal {

namespace {

struct Row {
  std::string_view label;
  double density;  // g/cm^3
  double energy;   // kcal/g
};

// Dataset table, verbatim.
constexpr std::array<Row, 19> kTable = {{
    {"apple", 0.78, 0.52},
    {"banana", 0.91, 0.89},
    {"bread", 0.18, 3.15},
    {"bun", 0.34, 2.23},
    {"doughnut", 0.31, 4.34},
    {"egg", 1.03, 1.43},
    {"fired dough twist", 0.58, 24.16},
    {"grape", 0.97, 0.69},
    {"lemon", 0.96, 0.29},
    {"litchi", 1.00, 0.66},
    {"mango", 1.07, 0.60},
    {"mooncake", 0.96, 18.83},
    {"orange", 0.90, 0.63},
    {"peach", 0.96, 0.57},
    {"pear", 1.02, 0.39},
    {"plum", 1.01, 0.46},
    {"qiwi", 0.97, 0.61},
    {"sachima", 0.22, 21.45},
    {"tomato", 0.98, 0.27},
}};

constexpr std::array<std::string_view, 19> kLabels = [] {
  std::array<std::string_view, 19> out{};
  for (std::size_t i = 0; i < kTable.size(); ++i) out[i] = kTable[i].label;
  return out;
}();

}  // namespace

std::string normalize_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  for (char c : label) {
    if (c == '_' || c == '-') {
      out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  const auto first = out.find_first_not_of(' ');
  if (first == std::string::npos) return {};
  return out.substr(first, out.find_last_not_of(' ') - first + 1);
}

std::span<const std::string_view> dataset_food_labels() noexcept { return kLabels; }

bool is_dataset_label(std::string_view label) {
  const std::string n = normalize_label(label);
  return n == kMixLabel || std::find(kLabels.begin(), kLabels.end(), n) != kLabels.end();
}

NutritionTable::NutritionTable(std::vector<FoodSpec> foods) : foods_(std::move(foods)) {
  for (const FoodSpec& f : foods_) {
    if (f.energy_kcal_g > kEnergyWarningKcalPerG) {
      std::ostringstream msg;
      msg << f.label << ": energy " << f.energy_kcal_g << " kcal/g exceeds " << kEnergyWarningKcalPerG
          << " kcal/g (pure fat); value kept as given";
      warnings_.push_back(msg.str());
    }
  }
}

NutritionTable NutritionTable::builtin() {
  const ShapeTable shapes = ShapeTable::builtin();
  std::vector<FoodSpec> foods;
  for (const Row& r : kTable) foods.push_back({std::string(r.label), r.density, r.energy, shapes.shape_for(r.label)});
  return NutritionTable(std::move(foods));
}

NutritionTable NutritionTable::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open nutrition table " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorKind::SchemaError, path.string() + ": expected an array of foods");
  std::vector<FoodSpec> foods;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    const std::string where = path.string() + "[" + std::to_string(i) + "]";
    if (!row.is_object() || !row.contains("label") || !row["label"].is_string() || !row.contains("density_g_cm3") ||
        !row["density_g_cm3"].is_number() || !row.contains("energy_kcal_g") || !row["energy_kcal_g"].is_number() ||
        !row.contains("shape") || !row["shape"].is_string()) {
      throw Error(ErrorKind::SchemaError, where + ": needs label, density_g_cm3, energy_kcal_g and shape");
    }
    FoodSpec spec{normalize_label(row["label"].get<std::string>()), row["density_g_cm3"].get<double>(),
                  row["energy_kcal_g"].get<double>(), parse_shape(row["shape"].get<std::string>())};
    if (!(spec.density_g_cm3 > 0.0) || !(spec.energy_kcal_g > 0.0)) {
      throw Error(ErrorKind::SchemaError, where + ": density and energy must be positive");
    }
    foods.push_back(std::move(spec));
  }
  return NutritionTable(std::move(foods));
}

const FoodSpec& NutritionTable::lookup(std::string_view label) const {
  const std::string n = normalize_label(label);
  for (const FoodSpec& f : foods_)
    if (f.label == n) return f;
  throw Error(ErrorKind::UnknownFood, "no nutrition entry for \"" + std::string(label) + "\"");
}

bool NutritionTable::contains(std::string_view label) const {
  const std::string n = normalize_label(label);
  return std::any_of(foods_.begin(), foods_.end(), [&](const FoodSpec& f) { return f.label == n; });
}

FoodSpec lookup(std::string_view label) {
  static const NutritionTable table = NutritionTable::builtin();
  return table.lookup(label);
}

CalorieResult calories_from_volume(double volume_cm3, const FoodSpec& spec) {
  if (!(volume_cm3 > 0.0) || !std::isfinite(volume_cm3)) {
    throw Error(ErrorKind::NonpositiveVolume, "volume must be positive, got " + std::to_string(volume_cm3));
  }
  const double mass = volume_cm3 * spec.density_g_cm3;
  return {volume_cm3, mass, mass * spec.energy_kcal_g};
}

}  // namespace foodcal
