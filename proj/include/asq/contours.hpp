#pragma once

#include <utility>
#include <vector>

#include "asq/types.hpp"

namespace asq {

struct Region {
  std::vector<std::pair<int, int>> pixels;  // (x, y)
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  int area() const { return static_cast<int>(pixels.size()); }
};

struct Contour {
  std::vector<std::pair<int, int>> chain;  // closed outer boundary, CCW in image coords
  int area_px = 0;
};

struct Polyline {
  std::vector<Point> points;  // ordered, sub-pixel
  bool closed = false;

  bool empty() const { return points.empty(); }
  size_t size() const { return points.size(); }
};

// Maximal connected regions of one class, sorted by descending area.
std::vector<Region> connected_components(const LabelMask& mask, uint8_t code,
                                         int connectivity = 8);

// Moore-neighbor outer boundary trace of an 8-connected region.
Contour trace_boundary(const Region& region);

// Sub-pixel boundary curves between class_a and class_b (4-adjacency),
// ordered along the interface, oriented along the dominant axis.
// Vertices are midpoints of the shared pixel edges, so the polyline sits on
// the class boundary itself rather than half a pixel inside class_a.
std::vector<Polyline> extract_interface(const LabelMask& mask, uint8_t class_a,
                                        uint8_t class_b);

// Pixel set version used for symmetry/property checks.
std::vector<std::pair<int, int>> interface_pixels(const LabelMask& mask, uint8_t class_a,
                                                  uint8_t class_b);

// Moving-average smoothing (odd tap count; 1 = no-op). Endpoints use a clamped window.
Polyline smooth(const Polyline& p, int taps);

// Cumulative arc length per vertex, in um.
std::vector<double> cumulative_arclength_um(const Polyline& p, const ScanMeta& meta);

// Point at `distance` um along the polyline from `start` (projected onto the
// polyline; must lie within 2 px of it), in the given direction (+1 = toward
// increasing vertex index). Linear interpolation between vertices.
Point point_at_arclength(const Polyline& p, Point start, double distance_um, int direction,
                         const ScanMeta& meta);

// Arc-length position (um) of the projection of `pt` onto the polyline, plus
// the projected point itself.
std::pair<double, Point> project_onto(const Polyline& p, Point pt, const ScanMeta& meta);

// Unit normal (pixel space) at `at`, perpendicular in physical um space to the
// local tangent estimated over a +-window vertex span. Sign is unspecified;
// see orient_normal.
Point normal_at(const Polyline& p, Point at, const ScanMeta& meta, int window = 7);

// Flip `n` so that stepping from `at` along it lands in `target_class`.
// Samples a handful of offsets; throws DegenerateTangent if neither side hits.
Point orient_normal(const LabelMask& mask, Point at, Point n, uint8_t target_class);

// Nearest intersection of the ray origin + t*dir (t > 0) with any segment of p.
Point ray_intersect(const Polyline& p, Point origin, Point dir);
bool try_ray_intersect(const Polyline& p, Point origin, Point dir, Point* hit);

// Signed shoelace area over a point loop (pixel^2; last->first edge implied).
double shoelace_area(const std::vector<Point>& pts);

}  // namespace asq
