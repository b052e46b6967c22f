#include "asq/contours.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace asq {

std::vector<Region> connected_components(const LabelMask& mask, uint8_t code,
                                         int connectivity) {
  if (connectivity != 4 && connectivity != 8) throw Error("connectivity must be 4 or 8");
  if (code > palette_max_code(mask.palette)) throw IllegalClassCode();

  static const int off8[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                 {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  const int noff = connectivity;

  std::vector<uint8_t> seen(mask.data.size(), 0);
  std::vector<Region> regions;
  std::vector<std::pair<int, int>> stack;

  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const size_t idx = static_cast<size_t>(y) * mask.width + x;
      if (mask.data[idx] != code || seen[idx]) continue;
      Region r;
      r.min_x = r.max_x = x;
      r.min_y = r.max_y = y;
      seen[idx] = 1;
      stack.clear();
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        r.pixels.emplace_back(cx, cy);
        r.min_x = std::min(r.min_x, cx);
        r.max_x = std::max(r.max_x, cx);
        r.min_y = std::min(r.min_y, cy);
        r.max_y = std::max(r.max_y, cy);
        for (int k = 0; k < noff; ++k) {
          const int nx = cx + off8[k][0], ny = cy + off8[k][1];
          if (!mask.in_bounds(nx, ny)) continue;
          const size_t nidx = static_cast<size_t>(ny) * mask.width + nx;
          if (mask.data[nidx] == code && !seen[nidx]) {
            seen[nidx] = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
      regions.push_back(std::move(r));
    }
  }

  std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    if (a.pixels.size() != b.pixels.size()) return a.pixels.size() > b.pixels.size();
    if (a.min_y != b.min_y) return a.min_y < b.min_y;
    return a.min_x < b.min_x;
  });
  return regions;
}

Contour trace_boundary(const Region& region) {
  if (region.pixels.empty()) throw Error("empty region");

  Contour c;
  c.area_px = region.area();
  if (region.pixels.size() == 1) {
    c.chain.push_back(region.pixels.front());
    return c;
  }

  // Bitmap over the bounding box, padded by one.
  const int w = region.max_x - region.min_x + 3;
  const int h = region.max_y - region.min_y + 3;
  std::vector<uint8_t> bm(static_cast<size_t>(w) * h, 0);
  auto inreg = [&](int x, int y) {
    const int lx = x - region.min_x + 1, ly = y - region.min_y + 1;
    if (lx < 0 || lx >= w || ly < 0 || ly >= h) return false;
    return bm[static_cast<size_t>(ly) * w + lx] != 0;
  };
  for (auto [x, y] : region.pixels)
    bm[static_cast<size_t>(y - region.min_y + 1) * w + (x - region.min_x + 1)] = 1;

  // Topmost, then leftmost start pixel; its west neighbor is outside.
  std::pair<int, int> start = region.pixels.front();
  for (auto p : region.pixels)
    if (p.second < start.second || (p.second == start.second && p.first < start.first))
      start = p;

  // Moore neighborhood, clockwise on screen starting at W.
  static const int moore[8][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                  {1, 0},  {1, 1},   {0, 1},  {-1, 1}};
  auto dir_index = [&](std::pair<int, int> from, std::pair<int, int> to) {
    for (int k = 0; k < 8; ++k)
      if (from.first + moore[k][0] == to.first && from.second + moore[k][1] == to.second)
        return k;
    return -1;
  };

  std::pair<int, int> cur = start;
  std::pair<int, int> back{start.first - 1, start.second};
  const std::pair<int, int> start_back = back;
  c.chain.push_back(start);

  const size_t limit = region.pixels.size() * 8 + 16;
  while (c.chain.size() < limit) {
    const int bk = dir_index(cur, back);
    std::pair<int, int> next{-1, -1};
    std::pair<int, int> prev_scanned = back;
    for (int k = 1; k <= 8; ++k) {
      const int d = (bk + k) % 8;
      std::pair<int, int> cand{cur.first + moore[d][0], cur.second + moore[d][1]};
      if (inreg(cand.first, cand.second)) {
        next = cand;
        break;
      }
      prev_scanned = cand;
    }
    if (next.first < 0) break;  // isolated pixel cluster, should not happen here
    back = prev_scanned;
    cur = next;
    if (cur == start && back == start_back) break;  // Jacob's criterion
    c.chain.push_back(cur);
  }

  // Normalize orientation via the shoelace sign.
  std::vector<Point> pts;
  pts.reserve(c.chain.size());
  for (auto [x, y] : c.chain) pts.push_back({double(x), double(y)});
  if (shoelace_area(pts) < 0) std::reverse(c.chain.begin(), c.chain.end());
  return c;
}

std::vector<std::pair<int, int>> interface_pixels(const LabelMask& mask, uint8_t class_a,
                                                  uint8_t class_b) {
  static const int off4[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) != class_a) continue;
      for (auto& d : off4) {
        const int nx = x + d[0], ny = y + d[1];
        if (mask.in_bounds(nx, ny) && mask.at(nx, ny) == class_b) {
          out.emplace_back(x, y);
          break;
        }
      }
    }
  return out;
}

namespace {

// Crack-following between class a and class b. A crack is the shared edge of
// an a-pixel P and the b-pixel at P + dir[d]; travel keeps a on the left.
struct CrackWalker {
  const LabelMask& m;
  uint8_t a, b;
  static constexpr int dir[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

  int64_t key(int x, int y, int d) const {
    return (static_cast<int64_t>(y) * m.width + x) * 4 + d;
  }
  int code_at(int x, int y) const { return m.in_bounds(x, y) ? m.at(x, y) : -1; }

  // Successor crack, or -1 at a chain end.
  int64_t successor(int x, int y, int d) const {
    const int dx = dir[d][0], dy = dir[d][1];
    const int tx = dy, ty = -dx;  // travel direction
    const int ax = x + tx, ay = y + ty;       // ahead-left
    const int bx = ax + dx, by = ay + dy;     // ahead-right
    const int ca = code_at(ax, ay);
    if (ca == b) {
      // left turn: crack between P and ahead-left
      int nd = -1;
      for (int k = 0; k < 4; ++k)
        if (dir[k][0] == tx && dir[k][1] == ty) nd = k;
      return key(x, y, nd);
    }
    if (ca != a) return -1;
    const int cb = code_at(bx, by);
    if (cb == b) return key(ax, ay, d);  // straight
    if (cb == a) {
      // right turn: crack between ahead-right and the old b-pixel
      int nd = -1;
      for (int k = 0; k < 4; ++k)
        if (dir[k][0] == -tx && dir[k][1] == -ty) nd = k;
      return key(bx, by, nd);
    }
    return -1;
  }
};

}  // namespace

std::vector<Polyline> extract_interface(const LabelMask& mask, uint8_t class_a,
                                        uint8_t class_b) {
  if (mask.palette != Palette::Tissue) throw Error("extract_interface expects tissue palette");
  CrackWalker walker{mask, class_a, class_b};

  // Enumerate all cracks and successor links.
  std::unordered_map<int64_t, int64_t> succ;
  std::unordered_set<int64_t> has_pred;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) != class_a) continue;
      for (int d = 0; d < 4; ++d) {
        const int nx = x + CrackWalker::dir[d][0], ny = y + CrackWalker::dir[d][1];
        if (walker.code_at(nx, ny) != class_b) continue;
        const int64_t k = walker.key(x, y, d);
        const int64_t s = walker.successor(x, y, d);
        succ[k] = s;
        if (s >= 0) has_pred.insert(s);
      }
    }
  if (succ.empty()) throw EmptyInterface("no adjacency between classes " +
                                         std::to_string(class_a) + " and " +
                                         std::to_string(class_b));

  auto decode = [&](int64_t k, int* x, int* y, int* d) {
    *d = static_cast<int>(k % 4);
    const int64_t cell = k / 4;
    *x = static_cast<int>(cell % mask.width);
    *y = static_cast<int>(cell / mask.width);
  };

  std::unordered_set<int64_t> visited;
  std::vector<Polyline> out;

  auto walk = [&](int64_t start, bool closed) {
    Polyline pl;
    pl.closed = closed;
    int64_t k = start;
    while (k >= 0 && !visited.count(k)) {
      visited.insert(k);
      int x, y, d;
      decode(k, &x, &y, &d);
      // crack midpoint: lies exactly on the boundary between the two pixels
      Point p{x + 0.5 * CrackWalker::dir[d][0], y + 0.5 * CrackWalker::dir[d][1]};
      if (pl.points.empty() || pl.points.back().x != p.x || pl.points.back().y != p.y)
        pl.points.push_back(p);
      auto it = succ.find(k);
      k = (it == succ.end()) ? -1 : it->second;
    }
    if (pl.points.size() >= 2 && pl.points.front().x == pl.points.back().x &&
        pl.points.front().y == pl.points.back().y)
      pl.points.pop_back();
    out.push_back(std::move(pl));
  };

  // Open chains first (cracks without predecessors), then remaining loops.
  std::vector<int64_t> keys;
  keys.reserve(succ.size());
  for (auto& [k, s] : succ) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (int64_t k : keys)
    if (!has_pred.count(k) && !visited.count(k)) walk(k, false);
  for (int64_t k : keys)
    if (!visited.count(k)) walk(k, true);

  // Orient open chains along their dominant axis, increasing.
  for (auto& pl : out) {
    if (pl.closed || pl.points.size() < 2) continue;
    const Point f = pl.points.front(), l = pl.points.back();
    const double dx = l.x - f.x, dy = l.y - f.y;
    const bool flip = (std::abs(dx) >= std::abs(dy)) ? (dx < 0) : (dy < 0);
    if (flip) std::reverse(pl.points.begin(), pl.points.end());
  }
  std::sort(out.begin(), out.end(), [](const Polyline& a, const Polyline& b) {
    if (a.points.front().x != b.points.front().x) return a.points.front().x < b.points.front().x;
    return a.points.front().y < b.points.front().y;
  });
  return out;
}

Polyline smooth(const Polyline& p, int taps) {
  if (taps <= 1 || p.points.size() < 3) return p;
  if (taps % 2 == 0) throw Error("smoothing tap count must be odd");
  const int h = taps / 2;
  Polyline out;
  out.closed = p.closed;
  const int n = static_cast<int>(p.points.size());
  out.points.resize(n);
  for (int i = 0; i < n; ++i) {
    // symmetric window, shrunk near the ends so endpoints stay fixed
    const int hw = p.closed ? h : std::min({h, i, n - 1 - i});
    double sx = 0, sy = 0;
    int cnt = 0;
    for (int k = -hw; k <= hw; ++k) {
      int j = i + k;
      if (p.closed) j = (j % n + n) % n;
      sx += p.points[j].x;
      sy += p.points[j].y;
      ++cnt;
    }
    out.points[i] = {sx / cnt, sy / cnt};
  }
  // drop exact duplicates introduced by averaging
  Polyline dedup;
  dedup.closed = out.closed;
  for (const auto& pt : out.points)
    if (dedup.points.empty() || dist(dedup.points.back(), pt) > 1e-12)
      dedup.points.push_back(pt);
  return dedup;
}

std::vector<double> cumulative_arclength_um(const Polyline& p, const ScanMeta& meta) {
  std::vector<double> cum(p.points.size(), 0.0);
  for (size_t i = 1; i < p.points.size(); ++i)
    cum[i] = cum[i - 1] + meta.dist_um(p.points[i - 1], p.points[i]);
  return cum;
}

std::pair<double, Point> project_onto(const Polyline& p, Point pt, const ScanMeta& meta) {
  if (p.points.size() < 2) {
    if (p.points.empty()) throw Error("empty polyline");
    return {0.0, p.points.front()};
  }
  double best_d2 = std::numeric_limits<double>::max();
  Point best{};
  size_t best_i = 0;
  double best_u = 0;
  for (size_t i = 0; i + 1 < p.points.size(); ++i) {
    const Point a = p.points[i], b = p.points[i + 1];
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    double u = len2 > 0 ? dot(pt - a, ab) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const Point q = a + u * ab;
    const double d2 = dot(pt - q, pt - q);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = q;
      best_i = i;
      best_u = u;
    }
  }
  auto cum = cumulative_arclength_um(p, meta);
  const double s = cum[best_i] +
                   best_u * meta.dist_um(p.points[best_i], p.points[best_i + 1]);
  return {s, best};
}

Point point_at_arclength(const Polyline& p, Point start, double distance_um, int direction,
                         const ScanMeta& meta) {
  if (distance_um < 0) throw Error("distance must be >= 0");
  if (direction != 1 && direction != -1) throw Error("direction must be +-1");
  if (p.points.size() < 2) throw PastEnd("polyline too short");

  double near_vertex = std::numeric_limits<double>::max();
  for (const auto& v : p.points) near_vertex = std::min(near_vertex, dist(v, start));
  if (near_vertex > 2.0) throw Error("start point not on polyline");

  auto [s0, proj] = project_onto(p, start, meta);
  const double target = s0 + direction * distance_um;
  auto cum = cumulative_arclength_um(p, meta);
  if (target < -1e-9 || target > cum.back() + 1e-9)
    throw PastEnd("arc length walk past polyline end");
  const double t = std::clamp(target, 0.0, cum.back());

  const auto it = std::upper_bound(cum.begin(), cum.end(), t);
  size_t i = it == cum.begin() ? 0 : static_cast<size_t>(it - cum.begin()) - 1;
  if (i + 1 >= p.points.size()) i = p.points.size() - 2;
  const double seg = cum[i + 1] - cum[i];
  const double u = seg > 0 ? (t - cum[i]) / seg : 0.0;
  return p.points[i] + u * (p.points[i + 1] - p.points[i]);
}

Point normal_at(const Polyline& p, Point at, const ScanMeta& meta, int window) {
  if (p.points.size() < 3) throw DegenerateTangent("polyline shorter than 3 vertices");
  size_t ni = 0;
  double best = std::numeric_limits<double>::max();
  for (size_t i = 0; i < p.points.size(); ++i) {
    const double d = dist(p.points[i], at);
    if (d < best) {
      best = d;
      ni = i;
    }
  }
  // Total-least-squares line fit (in um space) over all vertices within a
  // +-window-pixel arc-length span. Vertices are dense sub-pixel samples, so a
  // fixed vertex count would quantize the slope; a physical span does not.
  const int n = static_cast<int>(p.points.size());
  const double h_um = std::max(1, window) * 0.5 * (meta.scale_x + meta.scale_y);
  auto cum = cumulative_arclength_um(p, meta);
  const double s_at = cum[ni];
  int i0 = static_cast<int>(ni), i1 = static_cast<int>(ni);
  while (i0 > 0 && s_at - cum[i0 - 1] <= h_um) --i0;
  while (i1 + 1 < n && cum[i1 + 1] - s_at <= h_um) ++i1;
  // Widen degenerate windows to at least two vertices each side when possible.
  while (i1 - i0 < 4 && (i0 > 0 || i1 + 1 < n)) {
    if (i0 > 0) --i0;
    if (i1 + 1 < n) ++i1;
  }
  if (i1 - i0 < 2) throw DegenerateTangent("tangent window shorter than 3 vertices");
  double mx = 0, my = 0;
  for (int i = i0; i <= i1; ++i) {
    mx += p.points[i].x * meta.scale_x;
    my += p.points[i].y * meta.scale_y;
  }
  const int m = i1 - i0 + 1;
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = i0; i <= i1; ++i) {
    const double dx = p.points[i].x * meta.scale_x - mx;
    const double dy = p.points[i].y * meta.scale_y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  // principal axis of the 2x2 covariance = physical tangent direction
  const double diff = sxx - syy;
  const double lambda = 0.5 * (sxx + syy + std::sqrt(diff * diff + 4 * sxy * sxy));
  Point t_um{sxy, lambda - sxx};
  if (norm(t_um) < 1e-12 * std::max(1.0, lambda)) t_um = {lambda - syy, sxy};
  const double tn = norm(t_um);
  if (tn < 1e-12) throw DegenerateTangent("zero tangent");
  const Point n_um{-t_um.y / tn, t_um.x / tn};
  Point n_px{n_um.x / meta.scale_x, n_um.y / meta.scale_y};
  const double nn = norm(n_px);
  return {n_px.x / nn, n_px.y / nn};
}

Point orient_normal(const LabelMask& mask, Point at, Point n, uint8_t target_class) {
  for (double step : {2.0, 3.0, 5.0, 8.0}) {
    for (int sign : {1, -1}) {
      const Point q = at + (sign * step) * n;
      const int x = round_px(q.x), y = round_px(q.y);
      if (mask.in_bounds(x, y) && mask.at(x, y) == target_class)
        return sign > 0 ? n : Point{-n.x, -n.y};
    }
  }
  throw DegenerateTangent("cannot orient normal toward target class");
}

bool try_ray_intersect(const Polyline& p, Point origin, Point dir, Point* hit) {
  const double dn = norm(dir);
  if (dn < 1e-12) throw Error("zero ray direction");
  const Point d{dir.x / dn, dir.y / dn};
  double best_t = std::numeric_limits<double>::max();
  bool found = false;
  for (size_t i = 0; i + 1 < p.points.size(); ++i) {
    const Point a = p.points[i], b = p.points[i + 1];
    const Point e = b - a;
    const double denom = cross(d, e);
    if (std::abs(denom) < 1e-12) continue;
    const Point ao = a - origin;
    const double t = cross(ao, e) / denom;
    const double u = cross(ao, d) / denom;
    if (t > 1e-9 && u >= -1e-9 && u <= 1 + 1e-9 && t < best_t) {
      best_t = t;
      found = true;
    }
  }
  if (found && hit) *hit = origin + best_t * d;
  return found;
}

Point ray_intersect(const Polyline& p, Point origin, Point dir) {
  Point hit;
  if (!try_ray_intersect(p, origin, dir, &hit))
    throw NoIntersection("ray misses polyline");
  return hit;
}

double shoelace_area(const std::vector<Point>& pts) {
  double s = 0;
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    s += cross(a, b);
  }
  return 0.5 * s;
}

}  // namespace asq
