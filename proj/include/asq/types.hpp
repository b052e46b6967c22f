#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace asq {

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define ASQ_ERROR_TYPE(Name)                                 \
  struct Name : Error {                                      \
    explicit Name(const std::string& msg = #Name) : Error(msg) {} \
  }

ASQ_ERROR_TYPE(MalformedHeader);
ASQ_ERROR_TYPE(IllegalClassCode);
ASQ_ERROR_TYPE(DimensionTooSmall);
ASQ_ERROR_TYPE(IoFailure);
ASQ_ERROR_TYPE(MissingSide);
ASQ_ERROR_TYPE(NonFiniteCoordinate);
ASQ_ERROR_TYPE(LeftRightSwapped);
ASQ_ERROR_TYPE(EmptyInterface);
ASQ_ERROR_TYPE(PastEnd);
ASQ_ERROR_TYPE(NoIntersection);
ASQ_ERROR_TYPE(DegenerateTangent);
ASQ_ERROR_TYPE(TooCloseToBorder);
ASQ_ERROR_TYPE(NoFocusRegion);
ASQ_ERROR_TYPE(SpurOffTissue);
ASQ_ERROR_TYPE(NoLensSurface);
ASQ_ERROR_TYPE(DegenerateIris);
ASQ_ERROR_TYPE(DegeneratePolygon);
ASQ_ERROR_TYPE(DegenerateVariance);
ASQ_ERROR_TYPE(InconsistentSpec);
ASQ_ERROR_TYPE(DuplicateScanIndex);
ASQ_ERROR_TYPE(ConfigError);
ASQ_ERROR_TYPE(ManifestError);

#undef ASQ_ERROR_TYPE

// ---------------------------------------------------------------------------
// Label masks

enum class Palette : uint8_t { Tissue, Landmark };

// Tissue class codes (P5 byte values).
namespace cls {
constexpr uint8_t background = 0;
constexpr uint8_t iris = 1;
constexpr uint8_t cornea = 2;  // corneo-sclera shell
constexpr uint8_t chamber = 3; // anterior chamber
// Landmark palette
constexpr uint8_t attention = 1;
constexpr uint8_t focus = 2;
}  // namespace cls

inline int palette_max_code(Palette p) {
  return p == Palette::Tissue ? 3 : 2;
}

struct LabelMask {
  int width = 0;
  int height = 0;
  Palette palette = Palette::Tissue;
  std::vector<uint8_t> data;  // row-major, width*height

  LabelMask() = default;
  // Permissive about dimensions; file I/O and validate() enforce the 16x16 floor
  // (half-image rasters from split_halves may be narrower).
  LabelMask(int w, int h, Palette p, uint8_t fill = 0)
      : width(w), height(h), palette(p), data(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  void validate() const {
    if (width < 16 || height < 16) throw DimensionTooSmall("mask smaller than 16x16");
    if (data.size() != static_cast<size_t>(width) * height)
      throw Error("mask data size mismatch");
    const int maxc = palette_max_code(palette);
    for (size_t i = 0; i < data.size(); ++i)
      if (data[i] > maxc)
        throw IllegalClassCode("illegal class code " + std::to_string(int(data[i])) +
                               " at offset " + std::to_string(i));
  }

  bool operator==(const LabelMask& o) const {
    return width == o.width && height == o.height && palette == o.palette && data == o.data;
  }
};

// ---------------------------------------------------------------------------
// Geometry / scan metadata

struct Point {
  double x = 0;  // column, pixels (sub-pixel allowed)
  double y = 0;  // row, pixels

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double dist(Point a, Point b) { return norm(a - b); }

// Deterministic half-away-from-zero rounding for rasterization.
inline int round_px(double v) {
  return static_cast<int>(v >= 0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

struct ScanMeta {
  double scale_x = 0;  // um per pixel
  double scale_y = 0;  // um per pixel
  int scan_index = 0;  // [0,127]

  ScanMeta() = default;
  ScanMeta(double sx, double sy, int idx = 0) : scale_x(sx), scale_y(sy), scan_index(idx) {
    if (!(sx > 0) || !(sy > 0)) throw Error("pixel scale must be positive");
  }

  // Polar angle of the left-side spur of this scan, degrees.
  double radial_angle_deg() const { return scan_index * (180.0 / 64.0); }

  Point to_um(Point px) const { return {px.x * scale_x, px.y * scale_y}; }
  Point to_px(Point um) const { return {um.x / scale_x, um.y / scale_y}; }
  double dist_um(Point a_px, Point b_px) const {
    return std::hypot((a_px.x - b_px.x) * scale_x, (a_px.y - b_px.y) * scale_y);
  }
};

struct SpurPair {
  Point left;
  Point right;
  double conf_left = 1.0;
  double conf_right = 1.0;

  void validate() const {
    if (!left.finite() || !right.finite()) throw NonFiniteCoordinate();
    if (!(left.x < right.x)) throw LeftRightSwapped("left.x must be < right.x");
    if (conf_left < 0 || conf_left > 1 || conf_right < 0 || conf_right > 1)
      throw Error("spur confidence outside [0,1]");
  }
};

// ---------------------------------------------------------------------------
// Parameter set (the eight clinical parameters of a single scan)

struct SideParams {
  std::optional<double> aod500_um;
  std::optional<double> aod750_um;
  std::optional<double> tisa500_um2;
  std::optional<double> tisa750_um2;
  std::optional<double> it750_um;
  std::optional<double> icurve_um;
  bool closed500 = false;  // iridotrabecular contact at the 500 um offset
  bool closed750 = false;
};

struct ParamSet {
  std::optional<double> acw_um;
  std::optional<double> acd_um;
  std::optional<double> lv_um;  // signed: positive = lens pole anterior to spur line
  std::optional<double> ac_area_um2;
  SideParams left;
  SideParams right;
  std::optional<bool> qc_pass;       // filled by the qc module
  std::vector<std::string> notes;    // per-parameter failure reasons
};

enum class Side { Left, Right };

inline const char* side_name(Side s) { return s == Side::Left ? "L" : "R"; }

}  // namespace asq
