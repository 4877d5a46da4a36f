#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace idss {

// Per-pixel class ids. The numeric values are part of the .lbl file format.
enum class ClassId : std::uint8_t {
  kInvalid = 0,
  kLand = 1,
  kWater = 2,
  kCloud = 3,
};

inline constexpr std::array<ClassId, 3> kTrainableClasses = {
    ClassId::kLand, ClassId::kWater, ClassId::kCloud};

inline constexpr std::uint8_t to_underlying(ClassId id) noexcept {
  return static_cast<std::uint8_t>(id);
}

inline constexpr bool is_known_class(std::uint8_t raw) noexcept { return raw <= 3; }

inline constexpr bool is_trainable(ClassId id) noexcept {
  return id == ClassId::kLand || id == ClassId::kWater || id == ClassId::kCloud;
}

std::string_view default_class_name(ClassId id) noexcept;

// {1: "Land", 2: "Water", 3: "Cloud"}
std::map<ClassId, std::string> default_class_names();

}  // namespace idss
