#include "asq/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "asq/landmark.hpp"

namespace asq {
namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a <= -kPi) a += 2 * kPi;
  if (a > kPi) a -= 2 * kPi;
  return a;
}

double angle_of(Point v) { return std::atan2(v.y, v.x); }
std::vector<Point> circle_circle(Point O1, double r1, Point O2, double r2);
Point unit(Point v) {
  double n = norm(v);
  return {v.x / n, v.y / n};
}
Point rot(Point v, double a) {
  double c = std::cos(a), s = std::sin(a);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

// One iris leaf: a constant-thickness band bounded by concentric circular arcs
// (or parallel lines in the flat limit), anchored at A0 with a prescribed
// tangent and passing through the pupil tip E.
struct SideGeom {
  bool left = true;
  bool is_line = false;
  Point A0, E;
  Point d;  // unit tangent at A0, pointing toward the pupil
  // Arc representation
  Point O;
  double r_a = 0, r_p = 0;     // anterior / posterior radii
  bool center_anterior = false;  // center on the chamber side of the band
  double th0 = 0;              // angle of A0 about O
  double sweep = 1;            // direction of travel A0 -> E about O
  double uE = 0;               // angular extent A0 -> E (in sweep direction)
  double ext_out = 0, ext_in = 0;  // angular slack beyond A0 / beyond E
  // Line representation
  Point n_post;  // unit normal toward the posterior side
  double tip_x = 0;
  double thickness = 0;

  // Signed angular position of p about O, measured from A0 in sweep direction.
  double u_of(Point p) const { return sweep * wrap_pi(angle_of(p - O) - th0); }

  bool sector_ok(double u) const { return u >= -ext_out && u <= uE + ext_in; }

  bool in_band(Point p) const {
    if (left ? (p.x > tip_x) : (p.x < tip_x)) return false;
    if (is_line) {
      double a = dot(p - A0, d);
      double b = dot(p - A0, n_post);
      return b >= 0 && b <= thickness && a >= -900.0;
    }
    double r = dist(p, O);
    double lo = center_anterior ? r_a : r_p;
    double hi = center_anterior ? r_p : r_a;
    if (r < lo || r > hi) return false;
    return sector_ok(u_of(p));
  }

  // Most anterior y of the anterior surface at column x; NaN if none.
  double floor_y(double x) const {
    if (is_line) {
      if (std::abs(d.x) < 1e-12) return std::nan("");
      double a = (x - A0.x) / d.x;
      if (a < -900.0 || a > dist(E, A0) + 100.0) return std::nan("");
      return A0.y + a * d.y;
    }
    double dx = x - O.x;
    double disc = r_a * r_a - dx * dx;
    if (disc <= 0) return std::nan("");
    double root = std::sqrt(disc);
    double best = std::nan("");
    for (double y : {O.y - root, O.y + root}) {
      if (!sector_ok(u_of({x, y}))) continue;
      if (std::isnan(best) || y < best) best = y;
    }
    return best;
  }

  // Point on the posterior circle at column x (band-side branch).
  Point posterior_at_x(double x) const {
    double dx = x - O.x;
    double root = std::sqrt(std::max(0.0, r_p * r_p - dx * dx));
    return {x, center_anterior ? O.y + root : O.y - root};
  }
};

struct Geometry {
  PhantomSpec spec;
  Point C;        // shell center, um
  double Ri = 0, Ro = 0;
  Point Sl, Sr;   // spurs, um
  double ys = 0;  // spur line y
  Point lensC;
  double lensR = 0, pole_y = 0, half_gap = 0;
  SideGeom lft, rgt;
};

SideGeom make_side(const PhantomSpec& spec, Point C, double Ri, Point S, bool left) {
  SideGeom g;
  g.left = left;
  g.thickness = spec.iris_thickness;
  double cx = C.x;
  double tip_x = left ? cx - spec.pupil_gap / 2 : cx + spec.pupil_gap / 2;
  g.tip_x = tip_x;
  g.E = {tip_x, S.y - spec.iris_tip_rise};

  Point radial = unit(S - C);
  Point t_hat{-radial.y, radial.x};
  Point apex{cx, C.y - Ri};
  if (dot(t_hat, apex - S) < 0) t_hat = {-t_hat.x, -t_hat.y};

  double alpha = spec.angle_deg * kPi / 180.0;
  Point d1 = rot(t_hat, alpha), d2 = rot(t_hat, -alpha);
  double toward = left ? 1.0 : -1.0;  // pupil is toward +x on the left leaf
  g.d = (d1.x * toward > d2.x * toward) ? d1 : d2;

  g.A0 = spec.contact ? S + spec.contact_depth * radial : S;

  Point n{g.d.y, -g.d.x};  // perpendicular, anterior (y < 0) branch
  if (n.y > 0) n = {-n.x, -n.y};

  Point e = g.E - g.A0;
  double h = dot(e, n);
  if (std::abs(h) < 1e-9 * norm(e)) {
    g.is_line = true;
    g.n_post = {-n.x, -n.y};
    return g;
  }
  double rho = dot(e, e) / (2 * h);
  g.O = g.A0 + rho * n;
  g.r_a = std::abs(rho);
  g.center_anterior = rho > 0;
  g.r_p = g.center_anterior ? g.r_a + spec.iris_thickness : g.r_a - spec.iris_thickness;
  if (g.r_p <= 0) throw InconsistentSpec("iris thicker than its curvature radius");
  g.th0 = angle_of(g.A0 - g.O);
  g.sweep = cross(g.A0 - g.O, g.d) > 0 ? 1.0 : -1.0;
  double u = g.sweep * wrap_pi(angle_of(g.E - g.O) - g.th0);
  if (u <= 0) u += 2 * kPi;
  if (u >= kPi) throw InconsistentSpec("iris arc exceeds a half circle");
  g.uE = u;
  g.ext_out = 900.0 / g.r_a;
  g.ext_in = (2 * spec.iris_thickness + 100.0) / g.r_a;
  // The posterior band edge behind the anchor can run inside the shell circle
  // (the root flap); keep the leaf defined out to where it meets the shell so
  // the posterior surface ends exactly at that closed-form crossing.
  for (Point p : circle_circle(g.O, g.r_p, C, Ri)) {
    double u = g.sweep * wrap_pi(angle_of(p - g.O) - g.th0);
    if (u < 0 && -u < kPi / 2) g.ext_out = std::max(g.ext_out, -u + 300.0 / g.r_a);
  }
  return g;
}

Geometry build_geometry(const PhantomSpec& spec) {
  spec.validate();
  Geometry G;
  G.spec = spec;
  double cx = spec.width_um / 2;
  G.C = {cx, spec.cornea_center_y};
  G.Ri = spec.cornea_r_inner;
  G.Ro = G.Ri + spec.cornea_thickness;
  double half = spec.acw / 2;
  G.ys = G.C.y - std::sqrt(G.Ri * G.Ri - half * half);
  G.Sl = {cx - half, G.ys};
  G.Sr = {cx + half, G.ys};
  G.half_gap = spec.pupil_gap / 2;
  G.pole_y = G.ys - spec.lens_vault;
  G.lensR = spec.lens_radius;
  G.lensC = {cx, G.pole_y + G.lensR};
  G.lft = make_side(spec, G.C, G.Ri, G.Sl, true);
  G.rgt = make_side(spec, G.C, G.Ri, G.Sr, false);
  for (const SideGeom* sg : {&G.lft, &G.rgt}) {
    // A posterior surface that only grazes the shell gives an ill-defined
    // raster root; require it to exit decisively or to be effectively flat.
    if (!sg->is_line && sg->r_a < 50000 &&
        dist(sg->O, G.C) + sg->r_p < G.Ri + 400)
      throw InconsistentSpec("posterior iris grazes the shell");
  }
  return G;
}

// Posterior corneal surface y at column x (anterior branch); NaN outside.
double ceil_y(const Geometry& G, double x) {
  double dx = x - G.C.x;
  double disc = G.Ri * G.Ri - dx * dx;
  if (disc <= 0) return std::nan("");
  return G.C.y - std::sqrt(disc);
}

// Chamber floor at column x: lens cap across the gap, iris leaves elsewhere.
double floor_at(const Geometry& G, double x) {
  if (std::abs(x - G.C.x) < G.half_gap) {
    double dx = x - G.C.x;
    return G.lensC.y - std::sqrt(G.lensR * G.lensR - dx * dx);
  }
  return (x < G.C.x ? G.lft : G.rgt).floor_y(x);
}

uint8_t classify(const Geometry& G, Point p) {
  double dc = dist(p, G.C);
  if (dc >= G.Ri && dc <= G.Ro) return cls::cornea;
  if (dc < G.Ri) {
    if (G.lft.in_band(p) || G.rgt.in_band(p)) return cls::iris;
    double f = floor_at(G, p.x);
    if (!std::isnan(f) && p.y < f) return cls::chamber;
  }
  return cls::background;
}

// ---------------------------------------------------------------------------
// Closed-form ground truth

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double tol, int depth) {
  double m = (a + b) / 2;
  double lm = (a + m) / 2, rm = (m + b) / 2;
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  double l = (m - a) / 6 * (fa + 4 * flm + fm);
  double r = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(l + r - whole) < 15 * tol) return l + r + (l + r - whole) / 15;
  return adaptive_simpson(f, a, m, fa, flm, fm, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0;
  double fa = f(a), fb = f(b), fm = f((a + b) / 2);
  return adaptive_simpson(f, a, b, fa, fm, fb, tol, 40);
}

// First positive-t hit of origin + t*dir on the circle (O, r); NaN if none.
double ray_circle(Point origin, Point dir, Point O, double r) {
  Point q = origin - O;
  double b = dot(dir, q);
  double c = dot(q, q) - r * r;
  double disc = b * b - c;
  if (disc < 0) return std::nan("");
  double s = std::sqrt(disc);
  for (double t : {-b - s, -b + s})
    if (t > 1e-9) return t;
  return std::nan("");
}

// A closed path of line and circular-arc edges; area by Green's theorem, with
// the standard circular-segment correction per arc edge (|sweep| < pi).
struct PathEdge {
  Point a, b;
  bool is_arc = false;
  Point O;
  double r = 0;
};

double arc_polygon_area(const std::vector<PathEdge>& edges) {
  double area = 0;
  for (const auto& e : edges) {
    area += cross(e.a, e.b) / 2;
    if (e.is_arc) {
      double psi = wrap_pi(angle_of(e.b - e.O) - angle_of(e.a - e.O));
      area += e.r * e.r / 2 * (psi - std::sin(psi));
    }
  }
  return std::abs(area);
}

// Both intersection points of circles (O1,r1) and (O2,r2).
std::vector<Point> circle_circle(Point O1, double r1, Point O2, double r2) {
  double d = dist(O1, O2);
  if (d < 1e-12) return {};
  double a = (d * d + r1 * r1 - r2 * r2) / (2 * d);
  double h2 = r1 * r1 - a * a;
  if (h2 < 0) return {};
  double h = std::sqrt(h2);
  Point u = unit(O2 - O1);
  Point base = O1 + a * u;
  Point perp{-u.y, u.x};
  return {base + h * perp, base - h * perp};
}

struct WallFrame {
  double phi_s = 0;   // spur angle on the shell circle
  double sign = 1;    // direction of increasing anterior arc length
};

WallFrame wall_frame(const Geometry& G, Point S) {
  WallFrame w;
  w.phi_s = angle_of(S - G.C);
  w.sign = (-kPi / 2 > w.phi_s) ? 1.0 : -1.0;  // toward the apex at angle -pi/2
  return w;
}

Point wall_point(const Geometry& G, const WallFrame& w, double arc_um) {
  double phi = w.phi_s + w.sign * arc_um / G.Ri;
  return {G.C.x + G.Ri * std::cos(phi), G.C.y + G.Ri * std::sin(phi)};
}

// Where the anterior iris surface re-enters the shell circle (contact case);
// also the recess apex for TISA. NaN chord length if no crossing.
struct ContactInfo {
  bool found = false;
  Point X;
  double arc_from_spur = 0;  // along the shell, um
};

ContactInfo find_recess(const Geometry& G, const SideGeom& sg, Point S, const WallFrame& w) {
  ContactInfo ci;
  std::vector<Point> cands;
  if (sg.is_line) {
    Point p0 = sg.A0;
    double t = ray_circle(p0, sg.d, G.C, G.Ri);
    if (!std::isnan(t)) cands.push_back(p0 + t * sg.d);
  } else {
    cands = circle_circle(sg.O, sg.r_a, G.C, G.Ri);
  }
  double best = 1e300;
  for (Point p : cands) {
    if (!sg.is_line && !sg.sector_ok(sg.u_of(p))) continue;
    double u = w.sign * wrap_pi(angle_of(p - G.C) - w.phi_s);
    if (u < -1e-6) continue;  // posterior of the spur: not a recess
    double arc = G.Ri * u;
    if (arc < best) {
      best = arc;
      ci.X = p;
      ci.found = true;
    }
  }
  ci.arc_from_spur = best;
  return ci;
}

struct OpeningTruth {
  double aod = 0, tisa = 0;
  bool closed = false;
};

OpeningTruth opening_truth(const Geometry& G, const SideGeom& sg, Point S, double offset) {
  OpeningTruth out;
  WallFrame w = wall_frame(G, S);
  ContactInfo rec;
  Point start = S;  // recess apex: TISA's inner corner
  if (G.spec.contact) {
    rec = find_recess(G, sg, S, w);
    if (!rec.found) throw InconsistentSpec("contact iris never re-enters the chamber");
    if (dist(S, rec.X) >= offset) {
      out.closed = true;
      return out;
    }
    start = rec.X;
  }
  Point P = wall_point(G, w, offset);
  Point n_in = unit(G.C - P);
  double t;
  if (sg.is_line) {
    // Ray-line intersection with the anterior iris line.
    double denom = cross(n_in, sg.d);
    if (std::abs(denom) < 1e-12) throw InconsistentSpec("opening ray parallel to iris");
    t = -cross(P - sg.A0, sg.d) / denom;
  } else {
    t = ray_circle(P, n_in, sg.O, sg.r_a);
  }
  if (std::isnan(t) || t <= 0) throw InconsistentSpec("opening ray misses the iris");
  Point Q = P + t * n_in;
  if (!sg.is_line && !sg.sector_ok(sg.u_of(Q)))
    throw InconsistentSpec("opening ray hit outside the iris leaf");
  out.aod = t;

  std::vector<PathEdge> path;
  PathEdge wall{start, P, true, G.C, G.Ri};
  path.push_back(wall);
  path.push_back({P, Q, false, {}, 0});
  if (sg.is_line)
    path.push_back({Q, start, false, {}, 0});
  else
    path.push_back({Q, start, true, sg.O, sg.r_a});
  out.tisa = arc_polygon_area(path);
  return out;
}

double icurve_truth(const Geometry& G, const SideGeom& sg, Point S) {
  if (sg.is_line) return 0;
  // Peripheral endpoint: posterior circle meets the shell circle near the spur.
  std::vector<Point> cands = circle_circle(sg.O, sg.r_p, G.C, G.Ri);
  if (cands.empty()) throw InconsistentSpec("posterior iris never reaches the wall");
  Point per = cands[0];
  double best_u = std::abs(sg.u_of(per));
  for (Point p : cands) {
    if (std::abs(sg.u_of(p)) < best_u) {
      best_u = std::abs(sg.u_of(p));
      per = p;
    }
  }
  (void)S;
  Point cen = sg.posterior_at_x(sg.tip_x);
  double u1 = sg.u_of(per), u2 = sg.u_of(cen);
  if (u1 > u2) std::swap(u1, u2);
  Point chord = cen - per;
  double len = norm(chord);
  if (len < 1e-9) return 0;
  double best = 0;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    double u = u1 + (u2 - u1) * i / n;
    double th = sg.th0 + sg.sweep * u;
    Point p = sg.O + Point{sg.r_p * std::cos(th), sg.r_p * std::sin(th)};
    // Keep to the band-side branch only.
    double dside = std::abs(cross(chord, p - per)) / len;
    if (dside > best) best = dside;
  }
  return best;
}

}  // namespace

void PhantomSpec::validate() const {
  auto bad = [](const std::string& m) { return InconsistentSpec(m); };
  if (!(scale_x > 0) || !(scale_y > 0)) throw bad("pixel scale must be positive");
  if (width_px() < 64 || height_px() < 64) throw bad("raster smaller than 64x64");
  if (!(cornea_r_inner > 0) || !(cornea_thickness > 0)) throw bad("bad shell radii");
  if (!(acw > 0) || !(acw / 2 < cornea_r_inner)) throw bad("spur width vs shell radius");
  if (!(angle_deg > 0) || angle_deg > 80) throw bad("angle outside (0, 80] deg");
  if (!(iris_thickness > 0)) throw bad("iris thickness must be positive");
  if (!(pupil_gap > 0) || pupil_gap >= acw) throw bad("pupil gap outside (0, acw)");
  if (!(lens_radius > pupil_gap / 2)) throw bad("lens radius vs pupil gap");
  if (contact && !(contact_depth > 0)) throw bad("contact needs a positive depth");
  if (speck_count < 0 || speck_size < 1) throw bad("bad speck noise");
  if (speck_class != cls::iris && speck_class != cls::cornea)
    throw bad("specks must be iris or shell class");
  double ys = cornea_center_y - std::sqrt(cornea_r_inner * cornea_r_inner - acw * acw / 4);
  if (!(cornea_center_y - cornea_r_inner > 0) || !(ys < height_um))
    throw bad("shell does not fit the image");
  label_cfg.validate();
}

GroundTruth ground_truth(const PhantomSpec& spec) {
  Geometry G = build_geometry(spec);
  GroundTruth t;
  t.acw_um = spec.acw;
  t.lv_um = spec.lens_vault;
  t.acd_um = (G.ys - spec.lens_vault) - (G.C.y - G.Ri);
  t.it750_um = spec.iris_thickness;

  const SideGeom& sg = G.lft;
  OpeningTruth o500 = opening_truth(G, sg, G.Sl, 500);
  OpeningTruth o750 = opening_truth(G, sg, G.Sl, 750);
  t.aod500_um = o500.aod;
  t.aod750_um = o750.aod;
  t.tisa500_um2 = o500.tisa;
  t.tisa750_um2 = o750.tisa;
  t.closed500 = o500.closed;
  t.closed750 = o750.closed;
  t.icurve_um = icurve_truth(G, sg, G.Sl);

  double x0 = std::max(0.0, G.C.x - G.Ri);
  double x1 = std::min(spec.width_um, G.C.x + G.Ri);
  auto depth = [&](double x) {
    double c = ceil_y(G, x);
    double f = floor_at(G, x);
    if (std::isnan(c) || std::isnan(f)) return 0.0;
    return std::max(0.0, f - c);
  };
  std::vector<double> cuts = {x0, G.C.x - G.half_gap, G.C.x + G.half_gap,
                              G.lft.A0.x, G.rgt.A0.x, x1};
  std::sort(cuts.begin(), cuts.end());
  double area = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = std::max(x0, cuts[i]), b = std::min(x1, cuts[i + 1]);
    if (b > a) area += integrate(depth, a, b, 1e-3);
  }
  t.ac_area_um2 = area;

  double sx = spec.scale_x, sy = spec.scale_y;
  t.spurs_px.left = {G.Sl.x / sx, G.Sl.y / sy};
  t.spurs_px.right = {G.Sr.x / sx, G.Sr.y / sy};
  t.spurs_px.conf_left = t.spurs_px.conf_right = 1.0;
  return t;
}

PhantomOutput generate(const PhantomSpec& spec) {
  Geometry G = build_geometry(spec);
  const int W = spec.width_px(), H = spec.height_px();
  PhantomOutput out{LabelMask(W, H, Palette::Tissue), {}, {}, {}, ground_truth(spec)};
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      out.tissue.at(x, y) = classify(G, {x * spec.scale_x, y * spec.scale_y});

  if (spec.speck_count > 0) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<int> dx(2, W - spec.speck_size - 3);
    std::uniform_int_distribution<int> dy(2, H - spec.speck_size - 3);
    for (int k = 0; k < spec.speck_count; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
        int px = dx(rng), py = dy(rng);
        bool clear = true;
        for (int yy = py - 2; yy <= py + spec.speck_size + 1 && clear; ++yy)
          for (int xx = px - 2; xx <= px + spec.speck_size + 1 && clear; ++xx)
            clear = out.tissue.at(xx, yy) == cls::background;
        if (!clear) continue;
        for (int yy = py; yy < py + spec.speck_size; ++yy)
          for (int xx = px; xx < px + spec.speck_size; ++xx)
            out.tissue.at(xx, yy) = spec.speck_class;
        placed = true;
      }
      if (!placed) throw InconsistentSpec("no room for speck noise");
    }
  }

  out.spurs_px = out.truth.spurs_px;
  const int lw = (W + 1) / 2, rw = W - lw;
  out.landmark_left = encode_landmark(lw, H, out.spurs_px.left, spec.label_cfg);
  Point right_half{unmirror_x(out.spurs_px.right.x, W), out.spurs_px.right.y};
  out.landmark_right = encode_landmark(rw, H, right_half, spec.label_cfg);
  return out;
}

std::vector<PhantomSpec> sweep(const PhantomSpec& base, const std::string& vary,
                               const std::vector<double>& values) {
  std::vector<PhantomSpec> out;
  out.reserve(values.size());
  for (double v : values) {
    PhantomSpec s = base;
    if (vary == "angle_deg") s.angle_deg = v;
    else if (vary == "scale") s.scale_x = s.scale_y = v;
    else if (vary == "acw") s.acw = v;
    else if (vary == "lens_vault") s.lens_vault = v;
    else if (vary == "iris_tip_rise") s.iris_tip_rise = v;
    else if (vary == "pupil_gap") s.pupil_gap = v;
    else if (vary == "iris_thickness") s.iris_thickness = v;
    else if (vary == "contact") s.contact = v != 0;
    else if (vary == "seed") s.seed = static_cast<uint64_t>(v);
    else throw ConfigError("unknown sweep parameter: " + vary);
    out.push_back(s);
  }
  return out;
}

}  // namespace asq
