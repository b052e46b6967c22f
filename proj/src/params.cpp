#include "asq/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace asq {

namespace {

Point to_um(Point px, const ScanMeta& meta) { return {px.x * meta.scale_x, px.y * meta.scale_y}; }

double mean_scale(const ScanMeta& meta) { return 0.5 * (meta.scale_x + meta.scale_y); }

// Per-column lower boundary of `code` against background below, as contiguous
// x-runs (small gaps bridged). Vertices sit on the pixel's bottom edge.
std::vector<Polyline> lower_boundary_runs(const LabelMask& mask, uint8_t code) {
  std::vector<std::pair<int, double>> cols;  // x, boundary y
  for (int x = 0; x < mask.width; ++x) {
    for (int y = mask.height - 1; y >= 1; --y) {
      if (mask.at(x, y - 1) == code && mask.at(x, y) == cls::background) {
        cols.emplace_back(x, y - 0.5);
        break;
      }
    }
  }
  std::vector<Polyline> runs;
  for (size_t i = 0; i < cols.size(); ++i) {
    if (runs.empty() || cols[i].first - cols[i - 1].first > 2) runs.emplace_back();
    runs.back().points.push_back({double(cols[i].first), cols[i].second});
  }
  return runs;
}

double run_mean_x(const Polyline& p) {
  double s = 0;
  for (const auto& pt : p.points) s += pt.x;
  return s / p.points.size();
}

const Polyline* longest(const std::vector<const Polyline*>& runs) {
  const Polyline* best = nullptr;
  for (const auto* r : runs)
    if (!best || r->size() > best->size()) best = r;
  return best;
}

}  // namespace

SceneInterfaces build_interfaces(const LabelMask& mask, const SpurPair& spurs,
                                 const QuantifyConfig& cfg) {
  if (mask.palette != Palette::Tissue) throw Error("build_interfaces expects tissue palette");
  spurs.validate();

  // both spurs must sit within 20 px of the corneo-sclera shell
  for (Side s : {Side::Left, Side::Right}) {
    const Point sp = s == Side::Left ? spurs.left : spurs.right;
    bool near = false;
    const int cx = round_px(sp.x), cy = round_px(sp.y);
    for (int y = cy - 20; y <= cy + 20 && !near; ++y)
      for (int x = cx - 20; x <= cx + 20 && !near; ++x)
        if (mask.in_bounds(x, y) && mask.at(x, y) == cls::cornea &&
            std::hypot(x - sp.x, y - sp.y) <= 20.0)
          near = true;
    if (!near) throw SpurOffTissue(std::string("spur ") + side_name(s) + " off corneo-sclera");
  }

  const double midx = 0.5 * (spurs.left.x + spurs.right.x);
  SceneInterfaces ifc;

  // posterior cornea: the longest corneo-sclera <-> chamber run
  std::vector<Polyline> wall_runs;
  try {
    wall_runs = extract_interface(mask, cls::cornea, cls::chamber);
  } catch (const EmptyInterface&) {
    throw EmptyInterface("posterior_cornea");
  }
  {
    std::vector<const Polyline*> ptrs;
    for (const auto& r : wall_runs) ptrs.push_back(&r);
    ifc.posterior_cornea = smooth(*longest(ptrs), cfg.smooth_taps);
  }

  // anterior iris: iris <-> chamber runs, split left/right at the spur midline
  try {
    auto runs = extract_interface(mask, cls::iris, cls::chamber);
    std::vector<const Polyline*> lefts, rights;
    for (const auto& r : runs) (run_mean_x(r) < midx ? lefts : rights).push_back(&r);
    if (const auto* l = longest(lefts)) ifc.anterior_iris_left = smooth(*l, cfg.smooth_taps);
    if (const auto* r = longest(rights)) ifc.anterior_iris_right = smooth(*r, cfg.smooth_taps);
  } catch (const EmptyInterface&) {
    // fully closed angle with no visible iris-chamber boundary; leave empty
  }

  // posterior iris: per-column iris lower boundary against background
  {
    auto runs = lower_boundary_runs(mask, cls::iris);
    std::vector<const Polyline*> lefts, rights;
    for (const auto& r : runs) (run_mean_x(r) < midx ? lefts : rights).push_back(&r);
    if (const auto* l = longest(lefts)) ifc.posterior_iris_left = smooth(*l, cfg.smooth_taps);
    if (const auto* r = longest(rights)) ifc.posterior_iris_right = smooth(*r, cfg.smooth_taps);
  }

  // anterior lens: the chamber lower boundary run spanning the pupil gap
  {
    auto runs = lower_boundary_runs(mask, cls::chamber);
    const Polyline* best = nullptr;
    for (const auto& r : runs) {
      const bool covers = r.points.front().x <= midx && r.points.back().x >= midx;
      if (covers && (!best || r.size() > best->size())) best = &r;
    }
    if (!best && !runs.empty()) {
      // fall back to the widest run between the spurs
      for (const auto& r : runs)
        if (r.points.front().x > spurs.left.x && r.points.back().x < spurs.right.x &&
            (!best || r.size() > best->size()))
          best = &r;
    }
    if (best) ifc.anterior_lens = smooth(*best, cfg.smooth_taps);
  }

  return ifc;
}

double acw(const SpurPair& spurs, const ScanMeta& meta) {
  spurs.validate();
  return meta.dist_um(spurs.left, spurs.right);
}

SpurAxis spur_axis(const SpurPair& spurs, const ScanMeta& meta) {
  spurs.validate();
  SpurAxis ax;
  ax.mid_px = 0.5 * (spurs.left + spurs.right);
  const Point d_um{(spurs.right.x - spurs.left.x) * meta.scale_x,
                   (spurs.right.y - spurs.left.y) * meta.scale_y};
  const double dn = norm(d_um);
  Point n_um{-d_um.y / dn, d_um.x / dn};
  if (n_um.y > 0) n_um = {-n_um.x, -n_um.y};  // anterior = toward decreasing y
  ax.axis_um = n_um;
  Point n_px{n_um.x / meta.scale_x, n_um.y / meta.scale_y};
  const double pn = norm(n_px);
  ax.axis_px = {n_px.x / pn, n_px.y / pn};
  return ax;
}

double lens_vault(const SceneInterfaces& ifc, const SpurPair& spurs, const ScanMeta& meta) {
  if (ifc.anterior_lens.empty()) throw NoLensSurface();
  const SpurAxis ax = spur_axis(spurs, meta);
  double best = -std::numeric_limits<double>::max();
  for (const auto& p : ifc.anterior_lens.points) {
    const Point d_um{(p.x - ax.mid_px.x) * meta.scale_x, (p.y - ax.mid_px.y) * meta.scale_y};
    best = std::max(best, dot(d_um, ax.axis_um));
  }
  return best;
}

double acd(const SceneInterfaces& ifc, const SpurPair& spurs, const ScanMeta& meta) {
  if (ifc.posterior_cornea.empty()) throw EmptyInterface("posterior_cornea");
  if (ifc.anterior_lens.empty()) throw NoLensSurface();
  const SpurAxis ax = spur_axis(spurs, meta);

  auto signed_um = [&](Point hit) {
    const Point d_um{(hit.x - ax.mid_px.x) * meta.scale_x, (hit.y - ax.mid_px.y) * meta.scale_y};
    return dot(d_um, ax.axis_um);
  };

  Point hit;
  if (!try_ray_intersect(ifc.posterior_cornea, ax.mid_px, ax.axis_px, &hit))
    throw NoIntersection("spur axis misses posterior cornea");
  const double s_cornea = signed_um(hit);

  double s_lens;
  const Point back{-ax.axis_px.x, -ax.axis_px.y};
  if (try_ray_intersect(ifc.anterior_lens, ax.mid_px, back, &hit))
    s_lens = signed_um(hit);
  else if (try_ray_intersect(ifc.anterior_lens, ax.mid_px, ax.axis_px, &hit))
    s_lens = signed_um(hit);
  else
    throw NoIntersection("spur axis misses anterior lens");

  return s_cornea - s_lens;
}

double ac_area(const LabelMask& mask, const ScanMeta& meta) {
  if (mask.palette != Palette::Tissue) throw Error("ac_area expects tissue palette");
  size_t count = 0;
  for (uint8_t v : mask.data)
    if (v == cls::chamber) ++count;
  return static_cast<double>(count) * meta.scale_x * meta.scale_y;
}

AodResult aod(const SceneInterfaces& ifc, const LabelMask& mask, Point spur, double offset_um,
              Side side, const ScanMeta& meta, const QuantifyConfig& cfg) {
  if (ifc.posterior_cornea.empty()) throw EmptyInterface("posterior_cornea");
  const Polyline& wall = ifc.posterior_cornea;

  auto [s0, w0] = project_onto(wall, spur, meta);
  const double gap_um = meta.dist_um(spur, w0);
  const double contact_um = cfg.contact_tol_px * mean_scale(meta);

  // When the spur projects beyond the end of the wall run, the boundary is
  // truncated (sub-pixel recess wedge, or iridotrabecular contact) and the gap
  // lies along the wall: count it toward the offset.
  auto wall_cum = cumulative_arclength_um(wall, meta);
  const bool clamped = s0 <= 1e-9 || s0 >= wall_cum.back() - 1e-9;

  double walk = offset_um;
  if (gap_um > contact_um) {
    // wall-chamber boundary does not reach the spur: iridotrabecular contact
    if (gap_um >= offset_um) return {0.0, true, w0, w0};
    walk = offset_um - gap_um;
  } else if (clamped) {
    walk = std::max(0.0, offset_um - gap_um);
  }

  const int dir = side == Side::Left ? 1 : -1;
  const Point p = point_at_arclength(wall, w0, walk, dir, meta);

  Point n = normal_at(wall, p, meta, cfg.tangent_window);
  n = orient_normal(mask, p, n, cls::chamber);

  const Polyline& iris = ifc.anterior_iris(side);
  Point hit;
  if (iris.empty() || !try_ray_intersect(iris, p, n, &hit))
    return {0.0, true, p, p};  // contact anterior to the measurement point
  return {meta.dist_um(p, hit), false, p, hit};
}

TisaResult tisa(const SceneInterfaces& ifc, const LabelMask& mask, Point spur, double offset_um,
                Side side, const ScanMeta& meta, const QuantifyConfig& cfg) {
  const AodResult a = aod(ifc, mask, spur, offset_um, side, meta, cfg);
  if (a.closed) return {0.0, true};

  const Polyline& wall = ifc.posterior_cornea;
  const Polyline& iris = ifc.anterior_iris(side);
  auto [s_start, w0] = project_onto(wall, spur, meta);

  // spur perpendicular down to the iris
  Point g;
  bool have_g = false;
  try {
    Point n0 = normal_at(wall, w0, meta, cfg.tangent_window);
    n0 = orient_normal(mask, w0, n0, cls::chamber);
    Point hit;
    if (try_ray_intersect(iris, w0, n0, &hit) &&
        meta.dist_um(w0, hit) < 2 * offset_um) {
      g = hit;
      have_g = true;
    }
  } catch (const DegenerateTangent&) {
  }
  if (!have_g) {
    // recess at the spur itself: close the polygon at the iris end nearest it
    double best = std::numeric_limits<double>::max();
    for (const auto& v : iris.points) {
      const double d = dist(v, w0);
      if (d < best) {
        best = d;
        g = v;
      }
    }
  }

  auto wall_cum = cumulative_arclength_um(wall, meta);
  auto [s_p, p_proj] = project_onto(wall, a.wall_pt, meta);
  auto [s_q, q_proj] = project_onto(iris, a.iris_pt, meta);
  auto [s_g, g_proj] = project_onto(iris, g, meta);
  auto iris_cum = cumulative_arclength_um(iris, meta);

  std::vector<Point> poly;
  poly.push_back(w0);
  const double lo = std::min(s_start, s_p), hi = std::max(s_start, s_p);
  if (s_p >= s_start) {
    for (size_t i = 0; i < wall.size(); ++i)
      if (wall_cum[i] > lo && wall_cum[i] < hi) poly.push_back(wall.points[i]);
  } else {
    for (size_t i = wall.size(); i-- > 0;)
      if (wall_cum[i] > lo && wall_cum[i] < hi) poly.push_back(wall.points[i]);
  }
  poly.push_back(a.wall_pt);
  poly.push_back(a.iris_pt);
  const double ilo = std::min(s_q, s_g), ihi = std::max(s_q, s_g);
  if (s_g >= s_q) {
    for (size_t i = 0; i < iris.size(); ++i)
      if (iris_cum[i] > ilo && iris_cum[i] < ihi) poly.push_back(iris.points[i]);
  } else {
    for (size_t i = iris.size(); i-- > 0;)
      if (iris_cum[i] > ilo && iris_cum[i] < ihi) poly.push_back(iris.points[i]);
  }
  poly.push_back(g);

  std::vector<Point> poly_um;
  poly_um.reserve(poly.size());
  for (const auto& pt : poly)
    if (poly_um.empty() || dist(poly_um.back(), to_um(pt, meta)) > 1e-9)
      poly_um.push_back(to_um(pt, meta));
  if (poly_um.size() < 3) throw DegeneratePolygon();

  return {std::abs(shoelace_area(poly_um)), false};
}

double iris_thickness(const SceneInterfaces& ifc, const LabelMask& mask, Point spur, Side side,
                      const ScanMeta& meta, const QuantifyConfig& cfg) {
  const Polyline& ant = ifc.anterior_iris(side);
  const Polyline& post = ifc.posterior_iris(side);
  if (ant.empty()) throw EmptyInterface("anterior_iris");
  if (post.empty()) throw EmptyInterface("posterior_iris");

  Point a{};
  if (cfg.it_relative_mode) {
    auto cum = cumulative_arclength_um(ant, meta);
    const double target = cum.back() / 2;
    size_t best_i = 0;
    for (size_t i = 0; i < cum.size(); ++i)
      if (std::abs(cum[i] - target) < std::abs(cum[best_i] - target)) best_i = i;
    a = ant.points[best_i];
  } else {
    double best = std::numeric_limits<double>::max();
    for (const auto& v : ant.points) {
      const double d = std::abs(meta.dist_um(v, spur) - cfg.it_offset_um);
      if (d < best) {
        best = d;
        a = v;
      }
    }
    if (best > cfg.it_offset_um)  // leaf nowhere near the offset
      throw NoIntersection("iris leaf shorter than the IT offset");
  }

  Point n = normal_at(ant, a, meta, cfg.tangent_window);
  n = orient_normal(mask, a, n, cls::iris);
  Point hit;
  if (!try_ray_intersect(post, a, n, &hit))
    throw NoIntersection("no posterior iris surface along the normal");
  return meta.dist_um(a, hit);
}

double iris_curvature(const SceneInterfaces& ifc, Side side, const ScanMeta& meta) {
  const Polyline& post = ifc.posterior_iris(side);
  if (post.size() < 3) throw DegenerateIris("posterior iris needs >= 3 points");
  const Point a = to_um(post.points.front(), meta);
  const Point b = to_um(post.points.back(), meta);
  const Point chord = b - a;
  const double cl = norm(chord);
  if (cl < 1e-9) throw DegenerateIris("degenerate posterior iris chord");
  double best = 0;
  for (const auto& v : post.points) {
    const Point d = to_um(v, meta) - a;
    best = std::max(best, std::abs(cross(chord, d)) / cl);
  }
  return best;
}

ParamSet quantify_scan(const LabelMask& mask, const SpurPair& spurs, const ScanMeta& meta,
                       const QuantifyConfig& cfg) {
  ParamSet out;
  auto note = [&](const std::string& what, const std::exception& e) {
    out.notes.push_back(what + ": " + e.what());
  };

  try {
    out.acw_um = acw(spurs, meta);
  } catch (const std::exception& e) {
    note("acw", e);
  }
  try {
    out.ac_area_um2 = ac_area(mask, meta);
  } catch (const std::exception& e) {
    note("ac_area", e);
  }

  SceneInterfaces ifc;
  try {
    ifc = build_interfaces(mask, spurs, cfg);
  } catch (const std::exception& e) {
    note("interfaces", e);
    return out;
  }

  try {
    out.acd_um = acd(ifc, spurs, meta);
  } catch (const std::exception& e) {
    note("acd", e);
  }
  try {
    out.lv_um = lens_vault(ifc, spurs, meta);
  } catch (const std::exception& e) {
    note("lv", e);
  }

  for (Side side : {Side::Left, Side::Right}) {
    const Point sp = side == Side::Left ? spurs.left : spurs.right;
    SideParams& sp_out = side == Side::Left ? out.left : out.right;
    const char* sn = side_name(side);

    try {
      const AodResult a = aod(ifc, mask, sp, 500, side, meta, cfg);
      sp_out.aod500_um = a.value_um;
      sp_out.closed500 = a.closed;
    } catch (const std::exception& e) {
      note(std::string("aod500/") + sn, e);
    }
    try {
      const AodResult a = aod(ifc, mask, sp, 750, side, meta, cfg);
      sp_out.aod750_um = a.value_um;
      sp_out.closed750 = a.closed;
    } catch (const std::exception& e) {
      note(std::string("aod750/") + sn, e);
    }
    try {
      const TisaResult t = tisa(ifc, mask, sp, 500, side, meta, cfg);
      sp_out.tisa500_um2 = t.value_um2;
    } catch (const std::exception& e) {
      note(std::string("tisa500/") + sn, e);
    }
    try {
      const TisaResult t = tisa(ifc, mask, sp, 750, side, meta, cfg);
      sp_out.tisa750_um2 = t.value_um2;
    } catch (const std::exception& e) {
      note(std::string("tisa750/") + sn, e);
    }
    try {
      sp_out.it750_um = iris_thickness(ifc, mask, sp, side, meta, cfg);
    } catch (const std::exception& e) {
      note(std::string("it750/") + sn, e);
    }
    try {
      sp_out.icurve_um = iris_curvature(ifc, side, meta);
    } catch (const std::exception& e) {
      note(std::string("icurve/") + sn, e);
    }
  }

  return out;
}

}  // namespace asq
