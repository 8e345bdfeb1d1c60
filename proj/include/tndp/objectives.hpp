#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace tndp {

inline constexpr std::size_t kObjectiveCount = 4;
inline constexpr std::array<std::string_view, kObjectiveCount> kObjectiveNames{"tl", "ud", "ivt", "ant"};

// (TL m, UD fraction, IVT passenger-seconds, ANT transfers/passenger); all minimized.
struct ObjectiveVector {
  std::array<double, kObjectiveCount> values{};

  double& tl() { return values[0]; }
  double& ud() { return values[1]; }
  double& ivt() { return values[2]; }
  double& ant() { return values[3]; }
  double tl() const { return values[0]; }
  double ud() const { return values[1]; }
  double ivt() const { return values[2]; }
  double ant() const { return values[3]; }

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  static constexpr std::size_t size() { return kObjectiveCount; }

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

}  // namespace tndp
