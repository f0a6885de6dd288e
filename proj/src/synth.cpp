#include "smartinspect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "smartinspect/errors.hpp"
#include "smartinspect/hash.hpp"
#include "smartinspect/image_io.hpp"
#include "smartinspect/random.hpp"

namespace smartinspect {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

double segment_distance(PointF p, PointF a, PointF b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

double polyline_distance(PointF p, const std::vector<PointF>& pts) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) d = std::min(d, segment_distance(p, pts[i], pts[i + 1]));
  return d;
}

double rect_distance(PointF p, const BBox& r) {
  const double dx = std::max({r.x0 - p.x, 0.0, p.x - (r.x1() - 1)});
  const double dy = std::max({r.y0 - p.y, 0.0, p.y - (r.y1() - 1)});
  return std::hypot(dx, dy);
}

// Cells of a checker patch that are lit: parity pattern with seeded flips.
std::vector<BBox> lit_cells(const SensorSpec& s) {
  std::vector<BBox> cells;
  if (s.checker_cell <= 0) {
    cells.push_back(s.rect);
    return cells;
  }
  Rng rng(s.pattern_seed);
  const int c = s.checker_cell;
  for (int y = s.rect.y0; y < s.rect.y1(); y += c) {
    for (int x = s.rect.x0; x < s.rect.x1(); x += c) {
      bool lit = (((x - s.rect.x0) / c + (y - s.rect.y0) / c) % 2) == 0;
      if (rng.uniform() < 0.25) lit = !lit;
      if (lit) cells.push_back({x, y, std::min(c, s.rect.x1() - x), std::min(c, s.rect.y1() - y)});
    }
  }
  return cells;
}

// Distance beyond which a gaussian tail of amplitude `amp` and width `g`
// drops below half a grey level.
double tail_reach(double amp, double g) { return amp > 0.5 ? g * std::sqrt(2.0 * std::log(2.0 * amp)) : 0.0; }

constexpr double kPitRimHalfWidth = 0.75;

struct Field {
  BBox window;
  // contribution above background at pixel (x, y)
  std::function<double(PointF)> value;
};

BBox points_box(const std::vector<PointF>& pts, double pad) {
  double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int ix0 = static_cast<int>(std::floor(x0 - pad));
  const int iy0 = static_cast<int>(std::floor(y0 - pad));
  const int ix1 = static_cast<int>(std::ceil(x1 + pad));
  const int iy1 = static_cast<int>(std::ceil(y1 + pad));
  return {ix0, iy0, ix1 - ix0 + 1, iy1 - iy0 + 1};
}

Field make_field(const Primitive& prim, double background) {
  auto cored = [](double amp, double g) {
    return [amp, g](double d) { return d <= 0.0 ? amp : amp * std::exp(-d * d / (2.0 * g * g)); };
  };
  return std::visit(
      Overloaded{
          [&](const ScratchSpec& s) {
            const double amp = s.intensity - background;
            const double reach = tail_reach(amp, s.glow) + s.width / 2 + 1;
            auto f = cored(amp, s.glow);
            return Field{points_box(s.points, reach),
                         [=](PointF p) { return f(polyline_distance(p, s.points) - s.width / 2); }};
          },
          [&](const PitSpec& s) {
            const double amp = s.intensity - background;
            const double reach = tail_reach(amp, s.glow) + s.radius + 1;
            auto f = cored(amp, s.glow);
            return Field{points_box({s.center}, reach),
                         [=](PointF p) {
                           // bright crater rim, dimmer floor
                           const double r = std::hypot(p.x - s.center.x, p.y - s.center.y);
                           return f(std::abs(r - s.radius) - kPitRimHalfWidth);
                         }};
          },
          [&](const CrackSpec& s) {
            const double amp = s.intensity - background;
            const double reach = tail_reach(amp, s.glow) + s.width / 2 + 1;
            std::vector<PointF> all;
            for (const auto& b : s.branches) all.insert(all.end(), b.begin(), b.end());
            auto f = cored(amp, s.glow);
            return Field{points_box(all, reach), [=](PointF p) {
                           double d = std::numeric_limits<double>::infinity();
                           for (const auto& b : s.branches) d = std::min(d, polyline_distance(p, b));
                           return f(d - s.width / 2);
                         }};
          },
          [&](const DustSpec& s) {
            const double amp = s.peak - background;
            const double reach = tail_reach(amp, s.sigma) + s.core + 1;
            auto f = cored(amp, s.sigma);
            return Field{points_box({s.center}, reach), [=](PointF p) {
                           return f(std::hypot(p.x - s.center.x, p.y - s.center.y) - s.core);
                         }};
          },
          [&](const SensorSpec& s) {
            const double amp = s.intensity - background;
            const double reach = tail_reach(amp, s.glow) + 1;
            const BBox& r = s.rect;
            const std::vector<BBox> cells = lit_cells(s);
            auto f = cored(amp, s.glow);
            const int pad = static_cast<int>(std::ceil(reach));
            return Field{BBox{r.x0 - pad, r.y0 - pad, r.w + 2 * pad, r.h + 2 * pad}, [=](PointF p) {
                           double d = std::numeric_limits<double>::infinity();
                           for (const BBox& c : cells) d = std::min(d, rect_distance(p, c));
                           return f(d);
                         }};
          },
          [&](const LightReflectionSpec& s) {
            const double amp = s.intensity - background;
            const double reach = tail_reach(amp, s.glow) + s.width / 2 + 1;
            auto f = cored(amp, s.glow);
            return Field{points_box({s.a, s.b}, reach),
                         [=](PointF p) { return f(segment_distance(p, s.a, s.b) - s.width / 2); }};
          },
      },
      prim);
}

[[noreturn]] void bad_primitive(std::size_t index, const std::string& what) {
  throw std::invalid_argument("primitive " + std::to_string(index) + ": " + what);
}

void validate_primitive(const Primitive& prim, std::size_t index, const GlassSpec& spec) {
  const double floor_level = spec.background + 5.0 * spec.noise_sigma;
  auto check_level = [&](double level) {
    if (!(level > floor_level && level <= 255.0)) {
      bad_primitive(index, "intensity " + std::to_string(level) + " must lie in (background + 5 sigma = " +
                               std::to_string(floor_level) + ", 255]");
    }
  };
  auto check_glow = [&](double g) {
    if (!(g > 0.0)) bad_primitive(index, "glow must be positive");
  };
  std::visit(Overloaded{
                 [&](const ScratchSpec& s) {
                   if (s.points.size() < 2) bad_primitive(index, "scratch needs at least 2 points");
                   if (s.width < 1.0 || s.width > 3.0) bad_primitive(index, "scratch width must lie in [1, 3]");
                   check_level(s.intensity);
                   check_glow(s.glow);
                 },
                 [&](const PitSpec& s) {
                   if (s.radius < 2.0 || s.radius > 6.0) bad_primitive(index, "pit radius must lie in [2, 6]");
                   check_level(s.intensity);
                   check_glow(s.glow);
                 },
                 [&](const CrackSpec& s) {
                   if (s.branches.empty()) bad_primitive(index, "crack needs a trunk");
                   for (const auto& b : s.branches) {
                     if (b.size() < 2) bad_primitive(index, "crack branches need at least 2 points");
                   }
                   if (s.width < 1.0 || s.width > 3.0) bad_primitive(index, "crack width must lie in [1, 3]");
                   check_level(s.intensity);
                   check_glow(s.glow);
                 },
                 [&](const DustSpec& s) {
                   if (!(s.sigma > 0.0)) bad_primitive(index, "dust sigma must be positive");
                   if (!(s.core >= 0.0)) bad_primitive(index, "dust core must be >= 0");
                   check_level(s.peak);
                 },
                 [&](const SensorSpec& s) {
                   if (s.rect.w < 1 || s.rect.h < 1) bad_primitive(index, "sensor rectangle is empty");
                   if (s.checker_cell < 0) bad_primitive(index, "checker cell must be >= 0");
                   check_level(s.intensity);
                   check_glow(s.glow);
                 },
                 [&](const LightReflectionSpec& s) {
                   if (!(s.width > 0.0)) bad_primitive(index, "light reflection width must be positive");
                   check_level(s.intensity);
                   check_glow(s.glow);
                 },
             },
             prim);
}

}  // namespace

RegionClass primitive_class(const Primitive& p) {
  return std::visit(Overloaded{
                        [](const ScratchSpec&) { return RegionClass::Scratch; },
                        [](const PitSpec&) { return RegionClass::Pit; },
                        [](const CrackSpec&) { return RegionClass::Crack; },
                        [](const DustSpec&) { return RegionClass::Dust; },
                        [](const SensorSpec&) { return RegionClass::SensorRegion; },
                        [](const LightReflectionSpec&) { return RegionClass::LightReflection; },
                    },
                    p);
}

BBox support_box(const Primitive& p) {
  // the amplitude bound only depends on the absolute level; use a zero
  // background for the most conservative reach
  return make_field(p, 0.0).window;
}

Rendered generate(const GlassSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw std::invalid_argument("generate: frame dimensions must be positive");
  if (!(spec.background >= 0.0 && spec.background < 255.0)) {
    throw std::invalid_argument("generate: background must lie in [0, 255)");
  }
  if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("generate: noise sigma must be >= 0");

  const int w = spec.width;
  const int h = spec.height;
  const BBox interior{1, 1, w - 2, h - 2};
  std::vector<double> field(static_cast<std::size_t>(w) * h, 0.0);
  Rendered out;

  for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
    const Primitive& prim = spec.primitives[i];
    validate_primitive(prim, i, spec);
    const Field f = make_field(prim, spec.background);
    const BBox& win = f.window;
    if (win.x0 < interior.x0 || win.y0 < interior.y0 || win.x1() > interior.x1() || win.y1() > interior.y1()) {
      bad_primitive(i, "out of frame (support " + std::to_string(win.x0) + "," + std::to_string(win.y0) + " " +
                           std::to_string(win.w) + "x" + std::to_string(win.h) + " in a " + std::to_string(w) + "x" +
                           std::to_string(h) + " frame)");
    }
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (int y = win.y0; y < win.y1(); ++y) {
      for (int x = win.x0; x < win.x1(); ++x) {
        const double v = f.value({static_cast<double>(x), static_cast<double>(y)});
        if (v < 0.5) continue;
        field[static_cast<std::size_t>(y) * w + x] += v;
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
    }
    if (x1 >= 0) out.truth.entries.push_back({{x0, y0, x1 - x0 + 1, y1 - y0 + 1}, primitive_class(prim)});
  }

  Rng rng(spec.seed);
  out.image = GrayImage(w, h);
  auto& px = out.image.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    double v = spec.background + field[i];
    if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
    px[i] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
  }
  return out;
}

// --- profiles ---------------------------------------------------------------

std::string_view profile_name(Profile p) {
  switch (p) {
    case Profile::Clean:
      return "clean";
    case Profile::Dust:
      return "dust";
    case Profile::Scratch:
      return "scratch";
    case Profile::PitCrack:
      return "pit_crack";
  }
  return "unknown";
}

Profile parse_profile(std::string_view name) {
  for (Profile p : {Profile::Clean, Profile::Dust, Profile::Scratch, Profile::PitCrack}) {
    if (profile_name(p) == name) return p;
  }
  throw std::invalid_argument("unknown profile '" + std::string(name) + "' (expected clean, dust, scratch or pit_crack)");
}

namespace {

constexpr int kPlacementGap = 8;
constexpr double kCompactDustShare = 0.12;
constexpr int kPlacementTries = 200;

std::vector<PointF> random_walk(Rng& rng, int segments, double seg_lo, double seg_hi, double turn, double heading) {
  std::vector<PointF> pts{{0.0, 0.0}};
  for (int s = 0; s < segments; ++s) {
    heading += rng.uniform(-turn, turn);
    const double len = rng.uniform(seg_lo, seg_hi);
    pts.push_back({pts.back().x + len * std::cos(heading), pts.back().y + len * std::sin(heading)});
  }
  return pts;
}

Primitive draw_primitive(RegionClass cls, Rng& rng, double bg) {
  const double two_pi = 2.0 * std::numbers::pi;
  switch (cls) {
    case RegionClass::Scratch: {
      const int segments = rng.between(2, 3);
      const double total = rng.uniform(40.0, 110.0);
      ScratchSpec s;
      s.points = random_walk(rng, segments, total / segments * 0.8, total / segments * 1.2, 0.25,
                             rng.uniform(0.0, two_pi));
      s.width = rng.uniform(1.0, 2.0);
      s.intensity = rng.uniform(130.0, 220.0);
      s.glow = rng.uniform(2.0, 2.8);
      return s;
    }
    case RegionClass::Pit: {
      PitSpec s;
      s.radius = rng.uniform(2.0, 4.0);
      s.intensity = rng.uniform(150.0, 230.0);
      s.glow = rng.uniform(1.8, 2.5);
      return s;
    }
    case RegionClass::Crack: {
      CrackSpec s;
      const double heading = rng.uniform(0.0, two_pi);
      s.branches.push_back(random_walk(rng, rng.between(4, 5), 10.0, 20.0, 0.7, heading));
      const int branches = rng.between(1, 2);
      for (int b = 0; b < branches; ++b) {
        const auto& trunk = s.branches.front();
        const PointF root = trunk[1 + rng.index(trunk.size() - 2)];
        const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
        auto branch = random_walk(rng, 2, 8.0, 15.0, 0.4, heading + side * rng.uniform(0.6, 1.2));
        for (auto& p : branch) {
          p.x += root.x;
          p.y += root.y;
        }
        s.branches.push_back(std::move(branch));
      }
      s.width = 1.0;
      s.intensity = rng.uniform(120.0, 200.0);
      s.glow = rng.uniform(2.0, 2.6);
      return s;
    }
    case RegionClass::Dust: {
      DustSpec s;
      if (rng.uniform() < kCompactDustShare) {
        // solid bright particle, easily mistaken for a small pit
        s.core = rng.uniform(1.0, 2.0);
        s.sigma = rng.uniform(1.8, 2.4);
        s.peak = bg + rng.uniform(150.0, 225.0);
      } else {
        s.sigma = rng.uniform(2.8, 5.0);
        s.peak = bg + rng.uniform(45.0, 130.0);
      }
      return s;
    }
    case RegionClass::SensorRegion: {
      SensorSpec s;
      if (rng.uniform() < 0.5) {
        // cutouts are compact; elongated bands would read as scratches
        const int w = rng.between(30, 80);
        const int h = static_cast<int>(std::lround(w * rng.uniform(0.7, 1.4)));
        s.rect = {0, 0, w, h};
      } else {
        // a sharp edge keeps the cells apart; wide glow would fill the gaps
        s.checker_cell = rng.between(5, 7);
        const int cells = rng.between(6, 9);
        s.rect = {0, 0, cells * s.checker_cell, cells * s.checker_cell};
        s.pattern_seed = rng.next();
      }
      s.intensity = rng.uniform(160.0, 230.0);
      s.glow = s.checker_cell > 0 ? rng.uniform(1.5, 2.0) : rng.uniform(2.0, 3.0);
      return s;
    }
    case RegionClass::LightReflection: {
      LightReflectionSpec s;
      const double len = rng.uniform(15.0, 40.0);
      const double a = rng.uniform(0.0, two_pi);
      s.b = {len * std::cos(a), len * std::sin(a)};
      s.width = rng.uniform(8.0, 16.0);
      s.intensity = bg + rng.uniform(40.0, 70.0);
      s.glow = rng.uniform(4.0, 6.0);
      return s;
    }
  }
  throw std::logic_error("draw_primitive: bad class");
}

void translate(Primitive& prim, int dx, int dy) {
  auto move = [&](PointF& p) {
    p.x += dx;
    p.y += dy;
  };
  std::visit(Overloaded{
                 [&](ScratchSpec& s) { std::for_each(s.points.begin(), s.points.end(), move); },
                 [&](PitSpec& s) { move(s.center); },
                 [&](CrackSpec& s) {
                   for (auto& b : s.branches) std::for_each(b.begin(), b.end(), move);
                 },
                 [&](DustSpec& s) { move(s.center); },
                 [&](SensorSpec& s) {
                   s.rect.x0 += dx;
                   s.rect.y0 += dy;
                 },
                 [&](LightReflectionSpec& s) {
                   move(s.a);
                   move(s.b);
                 },
             },
             prim);
}

bool overlaps(const BBox& a, const BBox& b, int gap) {
  return a.x0 < b.x1() + gap && b.x0 < a.x1() + gap && a.y0 < b.y1() + gap && b.y0 < a.y1() + gap;
}

}  // namespace

GlassSpec random_spec(Profile profile, int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  GlassSpec spec;
  spec.width = width;
  spec.height = height;
  spec.background = rng.uniform(14.0, 26.0);
  spec.noise_sigma = 1.0;
  spec.seed = rng.next();

  std::vector<RegionClass> wanted;
  auto add = [&](RegionClass c, int n) { wanted.insert(wanted.end(), static_cast<std::size_t>(n), c); };
  auto sparse_defects = [&](int lo, int hi) {
    const int n = rng.between(lo, hi);
    constexpr RegionClass kinds[] = {RegionClass::Scratch, RegionClass::Pit, RegionClass::Crack};
    for (int i = 0; i < n; ++i) add(kinds[rng.index(3)], 1);
  };
  switch (profile) {
    case Profile::Clean:
      add(RegionClass::SensorRegion, 2);
      add(RegionClass::Dust, rng.between(2, 4));
      add(RegionClass::LightReflection, rng.between(1, 2));
      sparse_defects(1, 2);
      break;
    case Profile::Dust:
      add(RegionClass::SensorRegion, 2);
      add(RegionClass::Dust, rng.between(10, 14));
      add(RegionClass::LightReflection, rng.between(1, 2));
      sparse_defects(1, 3);
      break;
    case Profile::Scratch:
      add(RegionClass::SensorRegion, 2);
      add(RegionClass::Dust, rng.between(2, 4));
      add(RegionClass::LightReflection, rng.between(1, 2));
      add(RegionClass::Scratch, rng.between(2, 4));
      break;
    case Profile::PitCrack:
      add(RegionClass::SensorRegion, 2);
      add(RegionClass::Dust, rng.between(2, 4));
      add(RegionClass::LightReflection, rng.between(1, 2));
      add(RegionClass::Pit, rng.between(1, 2));
      add(RegionClass::Crack, rng.between(3, 4));
      break;
  }

  std::vector<BBox> occupied;
  for (RegionClass cls : wanted) {
    for (int attempt = 0; attempt < kPlacementTries; ++attempt) {
      Primitive prim = draw_primitive(cls, rng, spec.background);
      const BBox box = support_box(prim);
      const int lo_x = 2 - box.x0;
      const int hi_x = width - 3 - (box.x1() - 1);
      const int lo_y = 2 - box.y0;
      const int hi_y = height - 3 - (box.y1() - 1);
      if (hi_x < lo_x || hi_y < lo_y) continue;
      const int dx = rng.between(lo_x, hi_x);
      const int dy = rng.between(lo_y, hi_y);
      const BBox placed{box.x0 + dx, box.y0 + dy, box.w, box.h};
      if (std::any_of(occupied.begin(), occupied.end(),
                      [&](const BBox& o) { return overlaps(o, placed, kPlacementGap); })) {
        continue;
      }
      translate(prim, dx, dy);
      occupied.push_back(placed);
      spec.primitives.push_back(std::move(prim));
      break;
    }
  }
  return spec;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string item_id(Profile profile, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return std::string(profile_name(profile)) + "_" + buf;
}

}  // namespace

std::vector<CorpusItem> make_corpus(Profile profile, int n, std::uint64_t seed, int width, int height) {
  if (n < 1) throw std::invalid_argument("corpus size must be >= 1");
  std::vector<CorpusItem> items(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const std::uint64_t item_seed =
        splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(profile) * 1000003ull + static_cast<std::uint64_t>(i)));
    items[i].id = item_id(profile, i);
    items[i].seed = item_seed;
    items[i].rendered = generate(random_spec(profile, width, height, item_seed));
  }
  return items;
}

std::string truth_to_json(const GroundTruth& truth, const std::string& id, std::string_view profile) {
  nlohmann::json entries = nlohmann::json::array();
  for (const TruthEntry& e : truth.entries) {
    entries.push_back({{"bbox", {e.bbox.x0, e.bbox.y0, e.bbox.w, e.bbox.h}}, {"class", class_name(e.cls)}});
  }
  nlohmann::json j{{"id", id}, {"profile", profile}, {"entries", std::move(entries)}};
  return j.dump(2);
}

std::pair<GroundTruth, std::string> truth_from_json(const std::string& text) {
  GroundTruth truth;
  std::string profile;
  try {
    const auto j = nlohmann::json::parse(text);
    profile = j.value("profile", std::string());
    for (const auto& e : j.at("entries")) {
      const auto box = e.at("bbox").get<std::vector<int>>();
      if (box.size() != 4) throw IoError("truth: bbox must have 4 entries");
      const auto cls = parse_class(e.at("class").get<std::string>());
      if (!cls) throw IoError("truth: unknown class '" + e.at("class").get<std::string>() + "'");
      truth.entries.push_back({{box[0], box[1], box[2], box[3]}, *cls});
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("truth: ") + e.what());
  }
  return {std::move(truth), std::move(profile)};
}

std::filesystem::path generate_corpus(int n, Profile profile, std::uint64_t seed, const std::filesystem::path& out,
                                      const CorpusOptions& options) {
  if (n < 1) throw std::invalid_argument("corpus size must be >= 1");
  const std::string name = options.name.empty() ? std::string(profile_name(profile)) : options.name;
  const auto dir = out / name;
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "truth");

  const std::vector<CorpusItem> items = make_corpus(profile, n, seed, options.width, options.height);
  nlohmann::json manifest_items = nlohmann::json::array();
  for (const CorpusItem& item : items) {
    const auto image_path = dir / "images" / (item.id + ".png");
    const auto truth_path = dir / "truth" / (item.id + ".json");
    write_png(image_path, item.rendered.image);
    {
      std::ofstream t(truth_path, std::ios::binary);
      if (!t) throw IoError("cannot write '" + truth_path.string() + "'");
      t << truth_to_json(item.rendered.truth, item.id, profile_name(profile)) << '\n';
    }
    manifest_items.push_back({{"id", item.id},
                              {"seed", item.seed},
                              {"image", "images/" + item.id + ".png"},
                              {"truth", "truth/" + item.id + ".json"},
                              {"image_sha256", sha256_hex(item.rendered.image.data())},
                              {"truth_sha256", sha256_file(truth_path)}});
  }
  nlohmann::json manifest{{"name", name},
                          {"profile", profile_name(profile)},
                          {"seed", seed},
                          {"width", options.width},
                          {"height", options.height},
                          {"count", n},
                          {"items", std::move(manifest_items)}};
  std::ofstream m(dir / "manifest.json", std::ios::binary);
  if (!m) throw IoError("cannot write manifest in '" + dir.string() + "'");
  m << manifest.dump(2) << '\n';
  return dir;
}

}  // namespace smartinspect
