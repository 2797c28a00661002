#pragma once

// Published food table, typed in by hand, with mass and calories for a
// 100 cm^3 portion worked out by hand (100 x density, 100 x density x energy).

namespace oracle {

struct FoodRow {
  const char* label;
  double density;
  double energy;
  double mass_100;
  double kcal_100;
};

inline constexpr FoodRow kFoodRows[] = {
    {"apple", 0.78, 0.52, 78.0, 40.56},
    {"banana", 0.91, 0.89, 91.0, 80.99},
    {"bread", 0.18, 3.15, 18.0, 56.7},
    {"bun", 0.34, 2.23, 34.0, 75.82},
    {"doughnut", 0.31, 4.34, 31.0, 134.54},
    {"egg", 1.03, 1.43, 103.0, 147.29},
    {"fired dough twist", 0.58, 24.16, 58.0, 1401.28},
    {"grape", 0.97, 0.69, 97.0, 66.93},
    {"lemon", 0.96, 0.29, 96.0, 27.84},
    {"litchi", 1.00, 0.66, 100.0, 66.0},
    {"mango", 1.07, 0.60, 107.0, 64.2},
    {"mooncake", 0.96, 18.83, 96.0, 1807.68},
    {"orange", 0.90, 0.63, 90.0, 56.7},
    {"peach", 0.96, 0.57, 96.0, 54.72},
    {"pear", 1.02, 0.39, 102.0, 39.78},
    {"plum", 1.01, 0.46, 101.0, 46.46},
    {"qiwi", 0.97, 0.61, 97.0, 59.17},
    {"sachima", 0.22, 21.45, 22.0, 471.9},
    {"tomato", 0.98, 0.27, 98.0, 26.46},
};

}  // namespace oracle
