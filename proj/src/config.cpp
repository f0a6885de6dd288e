#include "smartinspect/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "smartinspect/errors.hpp"

namespace smartinspect {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || value.empty()) {
    throw ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid boolean '" + std::string(value) + "' for '" + std::string(key) + "'");
}

[[noreturn]] void out_of_range(const std::string& what) { throw ConfigError("config: " + what); }

}  // namespace

void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view raw) {
  std::string_view value = trim(raw);
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
  auto& s = cfg.stage_one;
  if (key == "sobel_kernel") s.sobel_kernel = parse_number<int>(key, value);
  else if (key == "binary_threshold") s.threshold = parse_number<int>(key, value);
  else if (key == "dilate_kernel_w") s.dilate_w = parse_number<int>(key, value);
  else if (key == "dilate_kernel_h") s.dilate_h = parse_number<int>(key, value);
  else if (key == "t_nms") s.t_nms = parse_number<double>(key, value);
  else if (key == "min_region_area") s.min_area = parse_number<std::int64_t>(key, value);
  else if (key == "tile_size") s.tile_size = parse_number<int>(key, value);
  else if (key == "tile_overlap") s.tile_overlap = parse_number<int>(key, value);
  else if (key == "k") cfg.k = parse_number<std::size_t>(key, value);
  else if (key == "keep") cfg.keep = parse_number<std::size_t>(key, value);
  else if (key == "drop_threshold") cfg.drop_threshold = parse_number<std::size_t>(key, value);
  else if (key == "strict_drop") cfg.strict_drop = parse_bool(key, value);
  else if (key == "kmeans_max_iter") cfg.kmeans_max_iter = parse_number<int>(key, value);
  else if (key == "kmeans_restarts") cfg.kmeans_restarts = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "forest_trees") cfg.forest_trees = parse_number<int>(key, value);
  else if (key == "forest_max_depth") cfg.forest_max_depth = parse_number<int>(key, value);
  else if (key == "forest_min_leaf") cfg.forest_min_leaf = parse_number<int>(key, value);
  else if (key == "forest_features_per_split") cfg.forest_features_per_split = parse_number<int>(key, value);
  else if (key == "forest_bootstrap") cfg.forest_bootstrap = parse_bool(key, value);
  else if (key == "model") cfg.model = std::string(value);
  else if (key == "dc_scope") {
    const auto scope = parse_dc_scope(value);
    if (!scope) throw ConfigError("invalid dc_scope '" + std::string(value) + "' (expected all or defects-only)");
    cfg.dc_scope = *scope;
  } else if (key == "iou") cfg.iou = parse_number<double>(key, value);
  else if (key == "jobs") cfg.jobs = parse_number<int>(key, value);
  else if (key == "luma") cfg.luma = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

PipelineConfig parse_config(std::string_view text, const std::string& origin) {
  PipelineConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected `key = value`");
    }
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void PipelineConfig::validate() const {
  try {
    stage_one.validate();
  } catch (const std::invalid_argument& e) {
    out_of_range(e.what());
  }
  if (k < 2) out_of_range("k must be >= 2");
  if (keep < 1 || keep >= k) out_of_range("keep must lie in [1, k)");
  if (kmeans_max_iter < 1) out_of_range("kmeans_max_iter must be >= 1");
  if (kmeans_restarts < 1) out_of_range("kmeans_restarts must be >= 1");
  try {
    bd_forest_params().validate();
  } catch (const std::invalid_argument& e) {
    out_of_range(e.what());
  }
  if (!(iou > 0.0 && iou <= 1.0)) out_of_range("iou must lie in (0, 1]");
  if (jobs < 0) out_of_range("jobs must be >= 0");
}

FilterParams PipelineConfig::filter_params() const {
  FilterParams p;
  p.k = k;
  p.keep_count = keep;
  p.drop_threshold = drop_threshold;
  p.seed = seed;
  p.strict_drop = strict_drop;
  p.max_iter = kmeans_max_iter;
  p.restarts = kmeans_restarts;
  return p;
}

ForestParams PipelineConfig::bd_forest_params() const {
  ForestParams p;
  p.trees = forest_trees;
  p.max_depth = forest_max_depth;
  p.min_leaf = forest_min_leaf;
  p.features_per_split = forest_features_per_split;
  p.bootstrap = forest_bootstrap;
  p.seed = seed;
  return p;
}

ForestParams PipelineConfig::dc_forest_params() const {
  ForestParams p = bd_forest_params();
  p.seed = seed + 1;
  return p;
}

InspectConfig PipelineConfig::inspect_config() const { return {stage_one, dc_scope}; }

std::string config_to_string(const PipelineConfig& c) {
  std::ostringstream o;
  const auto& s = c.stage_one;
  o << "sobel_kernel = " << s.sobel_kernel << '\n'
    << "binary_threshold = " << s.threshold << '\n'
    << "dilate_kernel_w = " << s.dilate_w << '\n'
    << "dilate_kernel_h = " << s.dilate_h << '\n'
    << "t_nms = " << s.t_nms << '\n'
    << "min_region_area = " << s.min_area << '\n'
    << "tile_size = " << s.tile_size << '\n'
    << "tile_overlap = " << s.tile_overlap << '\n'
    << "k = " << c.k << '\n'
    << "keep = " << c.keep << '\n'
    << "drop_threshold = " << c.drop_threshold << '\n'
    << "strict_drop = " << (c.strict_drop ? "true" : "false") << '\n'
    << "kmeans_max_iter = " << c.kmeans_max_iter << '\n'
    << "kmeans_restarts = " << c.kmeans_restarts << '\n'
    << "seed = " << c.seed << '\n'
    << "forest_trees = " << c.forest_trees << '\n'
    << "forest_max_depth = " << c.forest_max_depth << '\n'
    << "forest_min_leaf = " << c.forest_min_leaf << '\n'
    << "forest_features_per_split = " << c.forest_features_per_split << '\n'
    << "forest_bootstrap = " << (c.forest_bootstrap ? "true" : "false") << '\n'
    << "model = \"" << c.model << "\"\n"
    << "dc_scope = " << dc_scope_name(c.dc_scope) << '\n'
    << "iou = " << c.iou << '\n'
    << "jobs = " << c.jobs << '\n'
    << "luma = " << (c.luma ? "true" : "false") << '\n';
  return o.str();
}

}  // namespace smartinspect
