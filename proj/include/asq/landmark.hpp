#pragma once

#include <utility>
#include <vector>

#include "asq/types.hpp"

namespace asq {

struct LandmarkLabelConfig {
  int r_focus = 16;      // focus-disk radius, px
  int r_attention = 48;  // attention-disk radius, px
  int ref_square_side = 0;  // 0 = default 2*r_focus

  int square_side() const { return ref_square_side > 0 ? ref_square_side : 2 * r_focus; }
  void validate() const {
    if (!(0 < r_focus && r_focus < r_attention))
      throw ConfigError("need 0 < r_focus < r_attention");
    if (square_side() < 2) throw ConfigError("ref square side must be >= 2");
  }
};

// Focus disk (code 2) centered on the spur, attention annulus (code 1) around it.
LabelMask encode_landmark(int width, int height, Point spur, const LandmarkLabelConfig& cfg);

// Left half and horizontally mirrored right half; odd width gives the middle
// column to the left half.
std::pair<LabelMask, LabelMask> split_halves(const LabelMask& mask);

// Inverse of split_halves (un-mirrors the right half).
LabelMask join_halves(const LabelMask& left, const LabelMask& right_mirrored);

// Mirrored right-half x coordinate back to full-image coordinates.
inline double unmirror_x(double x_half, int full_width) { return full_width - 1 - x_half; }

struct DecodedSpur {
  Point centroid;
  std::vector<std::pair<int, int>> focus_pixels;  // largest focus component
};

// Centroid of the largest 8-connected focus component of a landmark prediction.
DecodedSpur decode_spur(const LabelMask& pred);

// IoU between the focus pixel set and the axis-aligned square of the given
// side centered on the centroid (pixel centers strictly inside the square).
double confidence_index(const std::vector<std::pair<int, int>>& focus_pixels, Point centroid,
                        int ref_square_side);

}  // namespace asq
