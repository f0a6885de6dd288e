#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smartinspect/imaging.hpp"
#include "smartinspect/region_class.hpp"

namespace smartinspect {

struct PointF {
  double x = 0.0;
  double y = 0.0;
};

// Cored primitives render as `intensity` inside the core and fall off as a
// gaussian of width `glow` outside it.

struct ScratchSpec {
  std::vector<PointF> points;  // polyline, >= 2 points
  double width = 1.0;          // 1-3 px
  double intensity = 180.0;
  double glow = 2.2;
};

struct PitSpec {
  PointF center;
  double radius = 3.0;  // 2-6 px
  double intensity = 180.0;
  double glow = 2.0;
};

struct CrackSpec {
  std::vector<std::vector<PointF>> branches;  // first is the trunk
  double width = 1.0;
  double intensity = 160.0;
  double glow = 2.2;
};

/// Isotropic gaussian blob; a non-zero `core` radius gives the blob a flat
/// top (a solid particle blurred by `sigma`).
struct DustSpec {
  PointF center;
  double sigma = 3.0;
  double peak = 90.0;
  double core = 0.0;
};

/// Solid rectangle, or a seeded checkerboard when checker_cell > 0.
struct SensorSpec {
  BBox rect;
  int checker_cell = 0;
  std::uint64_t pattern_seed = 0;
  double intensity = 200.0;
  double glow = 2.5;
};

/// Broad, dim band of light.
struct LightReflectionSpec {
  PointF a;
  PointF b;
  double width = 5.0;
  double intensity = 60.0;
  double glow = 3.5;
};

using Primitive = std::variant<ScratchSpec, PitSpec, CrackSpec, DustSpec, SensorSpec, LightReflectionSpec>;

RegionClass primitive_class(const Primitive& p);

struct GlassSpec {
  int width = 768;
  int height = 512;
  double background = 20.0;
  double noise_sigma = 1.0;
  std::vector<Primitive> primitives;
  std::uint64_t seed = 0;
};

struct TruthEntry {
  BBox bbox;
  RegionClass cls = RegionClass::Scratch;
};

struct GroundTruth {
  std::vector<TruthEntry> entries;
};

struct Rendered {
  GrayImage image;
  GroundTruth truth;
};

/// Conservative pixel bounds of everything a primitive can touch.
BBox support_box(const Primitive& p);

/// Renders a GlassSpec. Truth boxes are tight around the pixels each primitive
/// raises by at least half a grey level (before noise). Throws
/// std::invalid_argument naming the primitive index if a primitive leaves
/// the frame interior, its intensity is not above background + 5 sigma or
/// its size is outside the documented range.
Rendered generate(const GlassSpec& spec);

enum class Profile { Clean, Dust, Scratch, PitCrack };

std::string_view profile_name(Profile p);
/// Throws std::invalid_argument for an unknown name.
Profile parse_profile(std::string_view name);

/// Random layout drawn from the profile's parameter ranges. Every profile
/// has 2 sensor regions and 1-2 light reflections; on top of that
///   clean      2-4 dust, 1-2 sparse defects (scratch, pit or crack)
///   dust       10-14 dust, 1-3 sparse defects
///   scratch    2-4 dust, 2-4 scratches
///   pit_crack  2-4 dust, 1-2 pits, 3-4 cracks
/// Primitives are placed with a clear gap so their footprints never merge;
/// one that finds no free spot after a bounded number of tries is left out.
GlassSpec random_spec(Profile profile, int width, int height, std::uint64_t seed);

struct CorpusItem {
  std::string id;
  std::uint64_t seed = 0;
  Rendered rendered;
};

/// n items `<profile>_<index>` with per-item seeds derived from `seed`.
std::vector<CorpusItem> make_corpus(Profile profile, int n, std::uint64_t seed, int width = 768, int height = 512);

struct CorpusOptions {
  std::string name;  // empty: profile name
  int width = 768;
  int height = 512;
};

/// Writes `<out>/<name>/images/<id>.png`, `<out>/<name>/truth/<id>.json`
/// and `<out>/<name>/manifest.json`. Returns the corpus directory. Throws
/// std::invalid_argument if n < 1.
std::filesystem::path generate_corpus(int n, Profile profile, std::uint64_t seed, const std::filesystem::path& out,
                                      const CorpusOptions& options = {});

std::string truth_to_json(const GroundTruth& truth, const std::string& id, std::string_view profile);
/// Parsed truth plus the profile field ("" when absent).
std::pair<GroundTruth, std::string> truth_from_json(const std::string& text);

}  // namespace smartinspect
