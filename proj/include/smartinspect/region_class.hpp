#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace smartinspect {

/// Six-way region taxonomy. The numeric values are the wire indices used
/// in model files, reports and confusion matrices.
enum class RegionClass : std::uint8_t {
  Scratch = 0,
  Pit = 1,
  Crack = 2,
  Dust = 3,
  SensorRegion = 4,
  LightReflection = 5,
};

inline constexpr std::size_t kRegionClassCount = 6;

inline constexpr std::array<RegionClass, kRegionClassCount> kAllRegionClasses = {
    RegionClass::Scratch, RegionClass::Pit,          RegionClass::Crack,
    RegionClass::Dust,    RegionClass::SensorRegion, RegionClass::LightReflection};

/// Binary projection used by the BD classifier and the confusion counts.
enum class Verdict : std::uint8_t { Background = 0, Defect = 1 };

constexpr Verdict project(RegionClass c) {
  switch (c) {
    case RegionClass::Scratch:
    case RegionClass::Pit:
    case RegionClass::Crack:
      return Verdict::Defect;
    default:
      return Verdict::Background;
  }
}

constexpr bool is_defect(RegionClass c) { return project(c) == Verdict::Defect; }

constexpr std::size_t wire_index(RegionClass c) { return static_cast<std::size_t>(c); }

/// Canonical lowercase names, as used in label files and reports.
std::string_view class_name(RegionClass c);
std::optional<RegionClass> parse_class(std::string_view name);
std::optional<RegionClass> class_from_index(std::size_t index);

std::string_view verdict_name(Verdict v);

struct Rgb {
  std::uint8_t r, g, b;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Report colours: scratches red, pits and cracks green, dust and light
/// reflections yellow, sensor regions purple.
Rgb class_color(RegionClass c);
std::string_view class_color_name(RegionClass c);

}  // namespace smartinspect
