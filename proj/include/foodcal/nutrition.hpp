#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foodcal/measure.hpp"

namespace foodcal {

/// Lowercases and maps '_' / '-' to spaces, so "Fired_Dough_Twist" and
/// "fired dough twist" name the same food.
std::string normalize_label(std::string_view label);

/// The 19 food types of the dataset (excluding "mix").
std::span<const std::string_view> dataset_food_labels() noexcept;

inline constexpr std::string_view kMixLabel = "mix";

/// True for one of the 19 foods or "mix".
bool is_dataset_label(std::string_view label);

struct FoodSpec {
  std::string label;
  double density_g_cm3 = 0.0;
  double energy_kcal_g = 0.0;
  ShapeModel shape = ShapeModel::Ellipsoid;

  friend bool operator==(const FoodSpec&, const FoodSpec&) = default;
};

struct CalorieResult {
  double volume_cm3 = 0.0;
  double mass_g = 0.0;
  double calories_kcal = 0.0;
};

// Above the energy density of pure fat; the built-in table has three such rows.
inline constexpr double kEnergyWarningKcalPerG = 9.0;

class NutritionTable {
 public:
  static NutritionTable builtin();
  /// JSON array [{"label", "density_g_cm3", "energy_kcal_g", "shape"}].
  /// Throws Error{MissingFile, ParseError, SchemaError}.
  static NutritionTable from_json_file(const std::filesystem::path& path);

  /// Throws Error{UnknownFood}.
  const FoodSpec& lookup(std::string_view label) const;
  bool contains(std::string_view label) const;

  const std::vector<FoodSpec>& foods() const noexcept { return foods_; }
  /// One line per suspicious row (energy above kEnergyWarningKcalPerG).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  explicit NutritionTable(std::vector<FoodSpec> foods);

  std::vector<FoodSpec> foods_;
  std::vector<std::string> warnings_;
};

/// Lookup in the built-in table. Throws Error{UnknownFood}.
FoodSpec lookup(std::string_view label);

/// mass = volume * density, calories = mass * energy.
/// Throws Error{NonpositiveVolume} for volume <= 0 or non-finite.
CalorieResult calories_from_volume(double volume_cm3, const FoodSpec& spec);

}  // namespace foodcal
