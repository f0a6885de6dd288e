#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "smartinspect/imaging.hpp"

namespace smartinspect {

inline constexpr int kCropSize = 224;

/// A candidate region: bbox, detection score and pixel count.
struct Region {
  BBox bbox;
  double score = 0.0;
  std::int64_t area = 0;
  std::string source_id;

  friend bool operator==(const Region&, const Region&) = default;
};

/// A region normalized to a kCropSize x kCropSize patch.
struct Crop {
  GrayImage pixels;
  Region origin;
  int pad_left = 0;
  int pad_top = 0;

  /// Side of the zero-padded square before resizing.
  int side() const { return std::max(origin.bbox.w, origin.bbox.h); }
};

/// Default scoring rule: score = pixel area.
Region score_region(const PixelRegion& r, std::string source_id = {});

double iou(const BBox& a, const BBox& b);

/// NMS ordering: score descending, then (y0, x0, x1, y1) ascending.
bool nms_before(const Region& a, const Region& b);

/// Greedy hard suppression. Repeatedly selects the best remaining region
/// (per nms_before) and discards every other region whose IoU with it is
/// >= t_nms. Output is in selection order.
std::vector<Region> nms(std::vector<Region> regions, double t_nms);

/// Cuts `region` out of `img`, zero-pads it to a centred square (odd pixel
/// on the right/bottom) and resizes to kCropSize with nearest neighbour:
/// src = floor(dst * side / kCropSize).
Crop extract_crop(const GrayImage& img, const Region& region);

struct StageOneParams {
  int sobel_kernel = 5;
  int threshold = 200;
  int dilate_w = 3;
  int dilate_h = 3;
  double t_nms = 0.2;
  std::int64_t min_area = 1;
  /// Frames with a side larger than tile_size are processed in tiles.
  int tile_size = 4096;
  /// Tile overlap; should be at least twice the largest expected defect extent.
  int tile_overlap = 256;

  void validate() const;
};

/// Stage I on a whole frame: Sobel, threshold, dilation, components,
/// scoring, minimum-area filter and NMS.
std::vector<Region> propose_frame(const GrayImage& img, const StageOneParams& params,
                                  const std::string& source_id = {});

/// Stage I with tiling for frames larger than params.tile_size. Regions
/// that come within the filter support of an interior tile edge are
/// discarded (a complete copy exists in the neighbouring tile), then the
/// per-tile results are merged with a cross-tile NMS. Identical to
/// propose_frame when the frame fits in one tile.
std::vector<Region> propose(const GrayImage& img, const StageOneParams& params,
                            const std::string& source_id = {});

/// Line format: `source_id x0 y0 w h score`, LF-terminated.
void write_proposals(std::ostream& out, const std::vector<Region>& regions);
std::vector<Region> read_proposals(std::istream& in);
void write_proposals_file(const std::filesystem::path& path, const std::vector<Region>& regions);
std::vector<Region> read_proposals_file(const std::filesystem::path& path);

/// `<source_id>_<index>`, the crop file stem and label-file key.
std::string crop_id(const std::string& source_id, std::size_t index);

}  // namespace smartinspect
