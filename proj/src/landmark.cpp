#include "asq/landmark.hpp"

#include <algorithm>
#include <cmath>

#include "asq/contours.hpp"

namespace asq {

LabelMask encode_landmark(int width, int height, Point spur, const LandmarkLabelConfig& cfg) {
  cfg.validate();
  if (!spur.finite()) throw NonFiniteCoordinate();
  if (spur.x < cfg.r_focus || spur.x > width - 1 - cfg.r_focus || spur.y < cfg.r_focus ||
      spur.y > height - 1 - cfg.r_focus)
    throw TooCloseToBorder("spur closer than r_focus to the image border");

  LabelMask m(width, height, Palette::Landmark, cls::background);
  const int x0 = std::max(0, static_cast<int>(std::floor(spur.x - cfg.r_attention)) - 1);
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(spur.x + cfg.r_attention)) + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(spur.y - cfg.r_attention)) - 1);
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(spur.y + cfg.r_attention)) + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x - spur.x, y - spur.y);
      if (d <= cfg.r_focus)
        m.at(x, y) = cls::focus;
      else if (d <= cfg.r_attention)
        m.at(x, y) = cls::attention;
    }
  return m;
}

std::pair<LabelMask, LabelMask> split_halves(const LabelMask& mask) {
  const int lw = (mask.width + 1) / 2;  // odd width: middle column goes left
  const int rw = mask.width - lw;
  LabelMask left(lw, mask.height, mask.palette);
  LabelMask right(rw, mask.height, mask.palette);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < lw; ++x) left.at(x, y) = mask.at(x, y);
    for (int x = 0; x < rw; ++x) right.at(x, y) = mask.at(mask.width - 1 - x, y);
  }
  return {std::move(left), std::move(right)};
}

LabelMask join_halves(const LabelMask& left, const LabelMask& right_mirrored) {
  if (left.height != right_mirrored.height || left.palette != right_mirrored.palette)
    throw Error("mismatched halves");
  const int w = left.width + right_mirrored.width;
  LabelMask m(w, left.height, left.palette);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < left.width; ++x) m.at(x, y) = left.at(x, y);
    for (int x = 0; x < right_mirrored.width; ++x)
      m.at(w - 1 - x, y) = right_mirrored.at(x, y);
  }
  return m;
}

DecodedSpur decode_spur(const LabelMask& pred) {
  if (pred.palette != Palette::Landmark) throw Error("decode_spur expects landmark palette");
  auto comps = connected_components(pred, cls::focus, 8);
  if (comps.empty()) throw NoFocusRegion("prediction has no focus pixels");
  DecodedSpur out;
  out.focus_pixels = comps.front().pixels;
  double sx = 0, sy = 0;
  for (auto [x, y] : out.focus_pixels) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(out.focus_pixels.size());
  out.centroid = {sx / n, sy / n};
  return out;
}

double confidence_index(const std::vector<std::pair<int, int>>& focus_pixels, Point centroid,
                        int ref_square_side) {
  if (focus_pixels.empty()) throw NoFocusRegion("empty focus set");
  if (ref_square_side < 2) throw ConfigError("ref square side must be >= 2");
  const double half = ref_square_side / 2.0;
  auto in_square = [&](double x, double y) {
    return std::abs(x - centroid.x) < half && std::abs(y - centroid.y) < half;
  };

  size_t inter = 0;
  for (auto [x, y] : focus_pixels)
    if (in_square(x, y)) ++inter;

  // count square pixels (centers strictly inside)
  size_t square = 0;
  const int x0 = static_cast<int>(std::floor(centroid.x - half));
  const int x1 = static_cast<int>(std::ceil(centroid.x + half));
  const int y0 = static_cast<int>(std::floor(centroid.y - half));
  const int y1 = static_cast<int>(std::ceil(centroid.y + half));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (in_square(x, y)) ++square;

  const size_t uni = focus_pixels.size() + square - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace asq
