#include "smartinspect/proposals.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "smartinspect/errors.hpp"

namespace smartinspect {

Region score_region(const PixelRegion& r, std::string source_id) {
  return Region{r.bbox, static_cast<double>(r.area()), r.area(), std::move(source_id)};
}

double iou(const BBox& a, const BBox& b) {
  const std::int64_t ix = std::max(0, std::min(a.x1(), b.x1()) - std::max(a.x0, b.x0));
  const std::int64_t iy = std::max(0, std::min(a.y1(), b.y1()) - std::max(a.y0, b.y0));
  const std::int64_t inter = ix * iy;
  const std::int64_t uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool nms_before(const Region& a, const Region& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tuple(a.bbox.y0, a.bbox.x0, a.bbox.x1(), a.bbox.y1()) <
         std::tuple(b.bbox.y0, b.bbox.x0, b.bbox.x1(), b.bbox.y1());
}

std::vector<Region> nms(std::vector<Region> regions, double t_nms) {
  if (!(t_nms >= 0.0 && t_nms <= 1.0)) throw std::invalid_argument("nms: t_nms must lie in [0, 1]");
  std::stable_sort(regions.begin(), regions.end(), nms_before);
  std::vector<Region> kept;
  std::vector<bool> removed(regions.size(), false);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (removed[i]) continue;
    kept.push_back(regions[i]);
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (!removed[j] && iou(regions[i].bbox, regions[j].bbox) >= t_nms) removed[j] = true;
    }
  }
  return kept;
}

Crop extract_crop(const GrayImage& img, const Region& region) {
  const BBox& b = region.bbox;
  if (b.w < 1 || b.h < 1 || b.x0 < 0 || b.y0 < 0 || b.x1() > img.width() || b.y1() > img.height()) {
    throw std::invalid_argument("extract_crop: region (" + std::to_string(b.x0) + "," + std::to_string(b.y0) + "," +
                                std::to_string(b.w) + "," + std::to_string(b.h) + ") is outside the " +
                                std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
  }
  Crop crop;
  crop.origin = region;
  const int side = std::max(b.w, b.h);
  crop.pad_left = (side - b.w) / 2;
  crop.pad_top = (side - b.h) / 2;
  crop.pixels = GrayImage(kCropSize, kCropSize);
  for (int dy = 0; dy < kCropSize; ++dy) {
    const int sy = dy * side / kCropSize - crop.pad_top;
    auto dst = crop.pixels.row(dy);
    if (sy < 0 || sy >= b.h) continue;
    auto src = img.row(b.y0 + sy);
    for (int dx = 0; dx < kCropSize; ++dx) {
      const int sx = dx * side / kCropSize - crop.pad_left;
      if (sx >= 0 && sx < b.w) dst[dx] = src[b.x0 + sx];
    }
  }
  return crop;
}

void StageOneParams::validate() const {
  if (sobel_kernel != 3 && sobel_kernel != 5 && sobel_kernel != 7) {
    throw std::invalid_argument("sobel kernel must be 3, 5 or 7, got " + std::to_string(sobel_kernel));
  }
  if (threshold < 0 || threshold > 255) throw std::invalid_argument("binary threshold must lie in [0, 255]");
  if (dilate_w < 1 || dilate_h < 1 || dilate_w % 2 == 0 || dilate_h % 2 == 0) {
    throw std::invalid_argument("dilation kernel dimensions must be odd and >= 1");
  }
  if (!(t_nms >= 0.0 && t_nms <= 1.0)) throw std::invalid_argument("t_nms must lie in [0, 1]");
  if (min_area < 1) throw std::invalid_argument("min region area must be >= 1");
  if (tile_size < 16) throw std::invalid_argument("tile size must be >= 16");
  if (tile_overlap < 0 || tile_overlap >= tile_size) {
    throw std::invalid_argument("tile overlap must lie in [0, tile_size)");
  }
}

namespace {

std::vector<Region> stage_one_regions(const GrayImage& img, const StageOneParams& p, const std::string& source_id) {
  const GrayImage grad = sobel_magnitude(img, p.sobel_kernel);
  const BinaryImage mask = dilate(threshold_binary(grad, static_cast<std::uint8_t>(p.threshold)), p.dilate_w,
                                  p.dilate_h);
  std::vector<Region> regions;
  for (const PixelRegion& r : connected_regions(mask)) {
    if (r.area() >= p.min_area) regions.push_back(score_region(r, source_id));
  }
  return regions;
}

GrayImage sub_image(const GrayImage& img, const BBox& box) {
  GrayImage out(box.w, box.h);
  for (int y = 0; y < box.h; ++y) {
    auto src = img.row(box.y0 + y).subspan(static_cast<std::size_t>(box.x0), static_cast<std::size_t>(box.w));
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

std::vector<int> tile_starts(int extent, int tile, int stride) {
  std::vector<int> starts;
  int p = 0;
  while (true) {
    starts.push_back(p);
    if (p + tile >= extent) break;
    p = std::min(p + stride, extent - tile);
  }
  return starts;
}

}  // namespace

std::vector<Region> propose_frame(const GrayImage& img, const StageOneParams& params, const std::string& source_id) {
  params.validate();
  return nms(stage_one_regions(img, params, source_id), params.t_nms);
}

std::vector<Region> propose(const GrayImage& img, const StageOneParams& params, const std::string& source_id) {
  params.validate();
  if (img.width() <= params.tile_size && img.height() <= params.tile_size) {
    return propose_frame(img, params, source_id);
  }
  const int stride = params.tile_size - params.tile_overlap;
  // pixels this close to a cut edge may differ from the monolithic result
  const int margin = params.sobel_kernel / 2 + std::max(params.dilate_w, params.dilate_h) / 2;
  std::vector<BBox> tiles;
  const int tw = std::min(params.tile_size, img.width());
  const int th = std::min(params.tile_size, img.height());
  for (int y : tile_starts(img.height(), th, stride)) {
    for (int x : tile_starts(img.width(), tw, stride)) tiles.push_back({x, y, tw, th});
  }

  std::vector<std::vector<Region>> per_tile(tiles.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const BBox& tile = tiles[t];
    const int lo_x = tile.x0 == 0 ? -1 : margin;
    const int lo_y = tile.y0 == 0 ? -1 : margin;
    const int hi_x = tile.x1() == img.width() ? tile.w : tile.w - margin - 1;
    const int hi_y = tile.y1() == img.height() ? tile.h : tile.h - margin - 1;
    for (Region r : stage_one_regions(sub_image(img, tile), params, source_id)) {
      // keep only regions that are at least one exact pixel away from the unreliable band
      if (r.bbox.x0 <= lo_x || r.bbox.y0 <= lo_y || r.bbox.x1() - 1 >= hi_x || r.bbox.y1() - 1 >= hi_y) continue;
      r.bbox.x0 += tile.x0;
      r.bbox.y0 += tile.y0;
      per_tile[t].push_back(std::move(r));
    }
  }
  std::vector<Region> merged;
  for (auto& v : per_tile) merged.insert(merged.end(), v.begin(), v.end());
  return nms(std::move(merged), params.t_nms);
}

std::string crop_id(const std::string& source_id, std::size_t index) {
  return source_id + "_" + std::to_string(index);
}

void write_proposals(std::ostream& out, const std::vector<Region>& regions) {
  for (const Region& r : regions) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, r.score);
    out << r.source_id << ' ' << r.bbox.x0 << ' ' << r.bbox.y0 << ' ' << r.bbox.w << ' ' << r.bbox.h << ' '
        << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  }
}

std::vector<Region> read_proposals(std::istream& in) {
  std::vector<Region> regions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Region r;
    std::string score;
    if (!(ss >> r.source_id >> r.bbox.x0 >> r.bbox.y0 >> r.bbox.w >> r.bbox.h >> score)) {
      throw IoError("proposals line " + std::to_string(line_no) + ": expected `source_id x0 y0 w h score`");
    }
    auto res = std::from_chars(score.data(), score.data() + score.size(), r.score);
    if (res.ec != std::errc{} || r.bbox.w < 1 || r.bbox.h < 1 || r.score < 0) {
      throw IoError("proposals line " + std::to_string(line_no) + ": invalid box or score");
    }
    r.area = static_cast<std::int64_t>(r.score);
    regions.push_back(std::move(r));
  }
  return regions;
}

void write_proposals_file(const std::filesystem::path& path, const std::vector<Region>& regions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_proposals(out, regions);
}

std::vector<Region> read_proposals_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_proposals(in);
}

}  // namespace smartinspect
