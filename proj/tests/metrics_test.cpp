#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "asq/metrics.hpp"

using namespace asq;

namespace {

// Independent ANOVA mean-squares computation of ICC(2,1), written from the
// textbook formulas rather than the library's accumulation order.
double icc_oracle(const std::vector<std::vector<double>>& v) {
  const size_t n = v.size(), k = v.front().size();
  double grand = 0;
  for (const auto& row : v)
    for (double x : row) grand += x;
  grand /= double(n * k);

  double ss_rows = 0, ss_cols = 0, ss_total = 0;
  for (size_t i = 0; i < n; ++i) {
    double rm = 0;
    for (size_t j = 0; j < k; ++j) rm += v[i][j];
    rm /= double(k);
    ss_rows += k * (rm - grand) * (rm - grand);
  }
  for (size_t j = 0; j < k; ++j) {
    double cm = 0;
    for (size_t i = 0; i < n; ++i) cm += v[i][j];
    cm /= double(n);
    ss_cols += n * (cm - grand) * (cm - grand);
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < k; ++j) ss_total += (v[i][j] - grand) * (v[i][j] - grand);

  const double msr = ss_rows / double(n - 1);
  const double msc = ss_cols / double(k - 1);
  const double mse = (ss_total - ss_rows - ss_cols) / double((n - 1) * (k - 1));
  return (msr - mse) / (msr + (k - 1) * mse + double(k) / n * (msc - mse));
}

ObserverMatrix make_matrix(const std::vector<std::vector<double>>& v) {
  ObserverMatrix m;
  m.values = v;
  for (size_t i = 0; i < v.size(); ++i) m.subject_ids.push_back("s" + std::to_string(i));
  for (size_t j = 0; j < v.front().size(); ++j) m.rater_ids.push_back("r" + std::to_string(j));
  return m;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("dice worked examples") {
  LabelMask a(16, 16, Palette::Tissue), b(16, 16, Palette::Tissue);
  // |D∩M| = 50, |D\M| = 10, |M\D| = 40  ->  dice = 100/150
  for (int i = 0; i < 50; ++i) {
    a.data[i] = cls::iris;
    b.data[i] = cls::iris;
  }
  for (int i = 50; i < 60; ++i) a.data[i] = cls::iris;
  for (int i = 60; i < 100; ++i) b.data[i] = cls::iris;
  CHECK(dice(a, b, cls::iris) == doctest::Approx(100.0 / 150.0).epsilon(1e-12));
  CHECK(dice(a, b, cls::iris) == doctest::Approx(dice(b, a, cls::iris)).epsilon(1e-15));

  CHECK(dice(a, a, cls::iris) == doctest::Approx(1.0));
  CHECK(dice(a, a, cls::chamber) == doctest::Approx(1.0));  // both empty: vacuous agreement

  LabelMask c(16, 16, Palette::Tissue), d(16, 16, Palette::Tissue);
  c.data[0] = cls::iris;
  d.data[1] = cls::iris;
  CHECK(dice(c, d, cls::iris) == doctest::Approx(0.0));
}

TEST_CASE("sensitivity and specificity worked example TP=80 FN=20 TN=850 FP=50") {
  LabelMask pred(20, 50, Palette::Tissue), truth(20, 50, Palette::Tissue);  // 1000 px
  for (int i = 0; i < 80; ++i) {
    pred.data[i] = cls::chamber;
    truth.data[i] = cls::chamber;
  }
  for (int i = 80; i < 100; ++i) truth.data[i] = cls::chamber;  // FN
  for (int i = 100; i < 150; ++i) pred.data[i] = cls::chamber;  // FP
  CHECK(sensitivity(pred, truth, cls::chamber) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(specificity(pred, truth, cls::chamber) ==
        doctest::Approx(850.0 / 900.0).epsilon(1e-12));

  CHECK(sensitivity(truth, truth, cls::chamber) == doctest::Approx(1.0));
  LabelMask empty(20, 50, Palette::Tissue);
  CHECK(sensitivity(empty, truth, cls::chamber) == doctest::Approx(0.0));
  CHECK_THROWS_AS(sensitivity(pred, empty, cls::chamber), DegenerateVariance);
}

TEST_CASE("overlap metrics equal direct pixel counting on random masks") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    LabelMask a(20, 20, Palette::Tissue), b(20, 20, Palette::Tissue);
    for (auto& v : a.data) v = static_cast<uint8_t>(rng() % 4);
    for (auto& v : b.data) v = static_cast<uint8_t>(rng() % 4);
    for (uint8_t code : {cls::iris, cls::cornea, cls::chamber}) {
      size_t tp = 0, fp = 0, fn = 0, tn = 0;
      for (size_t i = 0; i < a.data.size(); ++i) {
        const bool p = a.data[i] == code, t = b.data[i] == code;
        if (p && t)
          ++tp;
        else if (p)
          ++fp;
        else if (t)
          ++fn;
        else
          ++tn;
      }
      CHECK(dice(a, b, code) == doctest::Approx(2.0 * tp / (2.0 * tp + fp + fn)).epsilon(1e-15));
      if (tp + fn > 0)
        CHECK(sensitivity(a, b, code) == doctest::Approx(double(tp) / (tp + fn)).epsilon(1e-15));
      if (tn + fp > 0)
        CHECK(specificity(a, b, code) == doctest::Approx(double(tn) / (tn + fp)).epsilon(1e-15));
    }
  }
}

TEST_CASE("dice rejects mismatched dimensions") {
  LabelMask a(16, 16, Palette::Tissue), b(16, 20, Palette::Tissue);
  CHECK_THROWS_AS(dice(a, b, cls::iris), Error);
}

TEST_CASE("icc is 1 when raters agree perfectly and subjects differ") {
  auto m = make_matrix({{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  CHECK(icc_2_1_abs(m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("icc of an all-identical matrix is 1 by convention") {
  auto m = make_matrix({{5, 5}, {5, 5}, {5, 5}});
  CHECK(icc_2_1_abs(m) == doctest::Approx(1.0));
}

TEST_CASE("a constant rater offset pushes icc below the correlation") {
  std::vector<double> base{12, 15, 9, 20, 17, 11};
  std::vector<std::vector<double>> v;
  for (double x : base) v.push_back({x, x + 10});
  auto m = make_matrix(v);
  const double icc = icc_2_1_abs(m);
  CHECK(icc < 1.0);
  std::vector<double> shifted;
  for (double x : base) shifted.push_back(x + 10);
  CHECK(icc < pearson(base, shifted));  // absolute agreement penalizes the offset
  CHECK(icc == doctest::Approx(icc_oracle(v)).epsilon(1e-12));
}

TEST_CASE("icc matches the independent ANOVA oracle on random matrices") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> val(0, 50);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = 3 + rng() % 6, k = 2 + rng() % 3;
    std::vector<std::vector<double>> v(n, std::vector<double>(k));
    for (auto& row : v)
      for (auto& x : row) x = val(rng);
    auto m = make_matrix(v);
    double want;
    want = icc_oracle(v);
    CHECK(icc_2_1_abs(m) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("icc is invariant under shifting and scaling all cells") {
  auto v = std::vector<std::vector<double>>{{3, 5, 4}, {8, 7, 9}, {1, 2, 2}, {6, 6, 5}};
  const double base = icc_2_1_abs(make_matrix(v));
  auto shifted = v;
  for (auto& row : shifted)
    for (auto& x : row) x += 100;
  CHECK(icc_2_1_abs(make_matrix(shifted)) == doctest::Approx(base).epsilon(1e-9));
  auto scaled = v;
  for (auto& row : scaled)
    for (auto& x : row) x *= 3.5;
  CHECK(icc_2_1_abs(make_matrix(scaled)) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("observer matrix invariants") {
  ObserverMatrix tiny;
  tiny.values = {{1, 2}};
  CHECK_THROWS_AS(icc_2_1_abs(tiny), Error);
  ObserverMatrix ragged;
  ragged.values = {{1, 2}, {3}};
  CHECK_THROWS_AS(icc_2_1_abs(ragged), Error);
  ObserverMatrix nonfinite;
  nonfinite.values = {{1, 2}, {3, std::nan("")}};
  CHECK_THROWS_AS(icc_2_1_abs(nonfinite), NonFiniteCoordinate);
}

TEST_CASE("bland-altman worked examples") {
  BlandAltman ident = bland_altman({{3, 3}, {7, 7}, {1, 1}});
  CHECK(ident.mean_diff == doctest::Approx(0));
  CHECK(ident.sd_diff == doctest::Approx(0));
  CHECK(ident.loa_low == doctest::Approx(0));
  CHECK(ident.loa_high == doctest::Approx(0));

  // diffs {1, -1}: mean 0, sd sqrt(2), LoA +-1.96 sqrt(2)
  BlandAltman pm = bland_altman({{1, 0}, {-1, 0}});
  CHECK(pm.mean_diff == doctest::Approx(0).epsilon(1e-12));
  CHECK(pm.sd_diff == doctest::Approx(1.4142135623730951).epsilon(1e-9));
  CHECK(pm.loa_low == doctest::Approx(-2.7718585822512662).epsilon(1e-9));
  CHECK(pm.loa_high == doctest::Approx(2.7718585822512662).epsilon(1e-9));

  BlandAltman c = bland_altman({{6, 1}, {10, 5}, {8, 3}});  // constant diff 5
  CHECK(c.mean_diff == doctest::Approx(5));
  CHECK(c.sd_diff == doctest::Approx(0));
  CHECK(c.loa_low == doctest::Approx(5));
  CHECK(c.loa_high == doctest::Approx(5));
}

TEST_CASE("bland-altman limits contain most differences of a normal sample") {
  std::mt19937 rng(123);
  std::normal_distribution<double> noise(0.0, 2.0);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 2000; ++i) pairs.push_back({noise(rng), 0.0});
  BlandAltman ba = bland_altman(pairs);
  int inside = 0;
  for (auto [x, y] : pairs)
    if (x - y >= ba.loa_low && x - y <= ba.loa_high) ++inside;
  CHECK(double(inside) / pairs.size() >= 0.93);
}

TEST_CASE("paired t worked examples") {
  // diffs {1..5}: t = 3 / (1.5811 / sqrt(5)) = 4.2426, p = 0.013236 (df 4)
  PairedT r = paired_t({{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}});
  CHECK(r.df == 4);
  CHECK(r.t == doctest::Approx(4.242640687119285).epsilon(1e-9));
  CHECK(r.p == doctest::Approx(0.013235599563682690).epsilon(1e-6));

  PairedT sym = paired_t({{-2, 0}, {2, 0}});
  CHECK(sym.t == doctest::Approx(0).epsilon(1e-12));
  CHECK(sym.p == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(paired_t({{1, 1}, {2, 2}, {3, 3}}), DegenerateVariance);
}

TEST_CASE("two-sided student-t p-values against table values") {
  // classic table: t = 2.776 at df 4 is the 5% two-sided critical point
  CHECK(student_t_two_sided_p(2.776, 4) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(student_t_two_sided_p(0, 10) == doctest::Approx(1.0));
  CHECK(student_t_two_sided_p(-2.776, 4) ==
        doctest::Approx(student_t_two_sided_p(2.776, 4)).epsilon(1e-12));
  CHECK_THROWS_AS(student_t_two_sided_p(1.0, 0), Error);
}

TEST_CASE("rms distance basics and brute-force agreement") {
  ScanMeta unit(1, 1);
  CHECK(rms_distance({{{3, 4}, {3, 4}}}, unit) == doctest::Approx(0));
  CHECK(rms_distance({{{0, 0}, {3, 4}}}, unit) == doctest::Approx(5));

  std::mt19937 rng(55);
  std::uniform_real_distribution<double> pos(0, 100);
  std::vector<std::pair<Point, Point>> pairs;
  for (int i = 0; i < 100; ++i)
    pairs.push_back({{pos(rng), pos(rng)}, {pos(rng), pos(rng)}});
  ScanMeta meta(7.5, 12.0);
  double ss = 0;
  for (const auto& [a, b] : pairs) {
    const double dx = (a.x - b.x) * 7.5, dy = (a.y - b.y) * 12.0;
    ss += dx * dx + dy * dy;
  }
  CHECK(rms_distance(pairs, meta) == doctest::Approx(std::sqrt(ss / 100)).epsilon(1e-9));
  CHECK_THROWS_AS(rms_distance({}, meta), Error);
}
