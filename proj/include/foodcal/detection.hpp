#pragma once

#include <string>
#include <string_view>

#include "foodcal/image.hpp"

namespace foodcal {

inline constexpr std::string_view kCoinLabel = "coin";

/// A labeled box from any detector provider. Annotations carry score 1.
struct Detection {
  std::string label;
  Box box;
  double score = 1.0;

  bool is_coin() const noexcept { return label == kCoinLabel; }

  friend bool operator==(const Detection&, const Detection&) = default;
};

}  // namespace foodcal
