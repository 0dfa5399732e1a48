#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace watrec {

enum class DamageState : std::uint8_t { None = 0, Minor, Moderate, Extensive, Complete };

inline constexpr int kNumDamageStates = 5;
// Damaged states (everything past None) index repair/fragility tables 0..3.
inline constexpr int kNumDamagedStates = 4;

constexpr int damaged_index(DamageState s) noexcept { return static_cast<int>(s) - 1; }

constexpr std::string_view to_string(DamageState s) noexcept {
  switch (s) {
    case DamageState::None: return "None";
    case DamageState::Minor: return "Minor";
    case DamageState::Moderate: return "Moderate";
    case DamageState::Extensive: return "Extensive";
    case DamageState::Complete: return "Complete";
  }
  return "?";
}

constexpr std::optional<DamageState> damage_from_string(std::string_view name) noexcept {
  if (name == "None") return DamageState::None;
  if (name == "Minor") return DamageState::Minor;
  if (name == "Moderate") return DamageState::Moderate;
  if (name == "Extensive") return DamageState::Extensive;
  if (name == "Complete") return DamageState::Complete;
  return std::nullopt;
}

}  // namespace watrec
