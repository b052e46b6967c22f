#include "asq/metrics.hpp"

#include <cmath>

namespace asq {

namespace {

struct Confusion {
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion confusion(const LabelMask& pred, const LabelMask& truth, uint8_t code) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw Error("mask dimensions differ");
  Confusion c;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const bool d = pred.data[i] == code;
    const bool m = truth.data[i] == code;
    if (d && m)
      ++c.tp;
    else if (d && !m)
      ++c.fp;
    else if (!d && m)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

double lgamma_safe(double x) { return std::lgamma(x); }

// Continued fraction for the regularized incomplete beta function.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double inc_beta(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double bt = std::exp(lgamma_safe(a + b) - lgamma_safe(a) - lgamma_safe(b) +
                             a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double dice(const LabelMask& a, const LabelMask& b, uint8_t code) {
  const Confusion c = confusion(a, b, code);
  const size_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;  // both empty: vacuous perfect agreement
  return 2.0 * c.tp / static_cast<double>(denom);
}

double sensitivity(const LabelMask& pred, const LabelMask& truth, uint8_t code) {
  const Confusion c = confusion(pred, truth, code);
  if (c.tp + c.fn == 0) throw DegenerateVariance("sensitivity undefined: |M| = 0");
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double specificity(const LabelMask& pred, const LabelMask& truth, uint8_t code) {
  const Confusion c = confusion(pred, truth, code);
  if (c.tn + c.fp == 0) throw DegenerateVariance("specificity undefined: |~M| = 0");
  return static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
}

double icc_2_1_abs(const ObserverMatrix& m) {
  m.validate();
  const size_t n = m.n(), k = m.k();

  double grand = 0;
  for (const auto& row : m.values)
    for (double v : row) grand += v;
  grand /= static_cast<double>(n * k);

  std::vector<double> row_mean(n, 0), col_mean(k, 0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < k; ++j) {
      row_mean[i] += m.values[i][j] / k;
      col_mean[j] += m.values[i][j] / n;
    }

  double ssr = 0, ssc = 0, sst = 0;
  for (size_t i = 0; i < n; ++i) ssr += (row_mean[i] - grand) * (row_mean[i] - grand);
  ssr *= k;
  for (size_t j = 0; j < k; ++j) ssc += (col_mean[j] - grand) * (col_mean[j] - grand);
  ssc *= n;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < k; ++j) sst += (m.values[i][j] - grand) * (m.values[i][j] - grand);
  const double sse = sst - ssr - ssc;

  const double msr = ssr / (n - 1);
  const double msc = ssc / (k - 1);
  const double mse = std::max(0.0, sse) / ((n - 1) * (k - 1));

  const double denom = msr + (k - 1) * mse + (double(k) / n) * (msc - mse);
  if (std::abs(denom) < 1e-300) return 1.0;  // all cells identical, by convention
  return (msr - mse) / denom;
}

BlandAltman bland_altman(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw Error("bland_altman needs >= 2 pairs");
  const size_t n = pairs.size();
  double mean = 0;
  for (auto [x, y] : pairs) mean += (x - y);
  mean /= static_cast<double>(n);
  double ss = 0;
  for (auto [x, y] : pairs) {
    const double d = (x - y) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1));
  return {mean, sd, mean - 1.96 * sd, mean + 1.96 * sd};
}

double student_t_two_sided_p(double t, int df) {
  if (df < 1) throw Error("df must be >= 1");
  const double x = df / (df + t * t);
  return inc_beta(df / 2.0, 0.5, x);
}

PairedT paired_t(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw Error("paired_t needs >= 2 pairs");
  const size_t n = pairs.size();
  double mean = 0;
  for (auto [x, y] : pairs) mean += (x - y);
  mean /= static_cast<double>(n);
  double ss = 0;
  for (auto [x, y] : pairs) {
    const double d = (x - y) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1));
  if (sd <= 0) throw DegenerateVariance("zero variance of differences");
  PairedT out;
  out.df = static_cast<int>(n) - 1;
  out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  out.p = student_t_two_sided_p(out.t, out.df);
  return out;
}

double rms_distance(const std::vector<std::pair<Point, Point>>& point_pairs,
                    const ScanMeta& meta) {
  if (point_pairs.empty()) throw Error("rms_distance needs >= 1 pair");
  double ss = 0;
  for (const auto& [a, b] : point_pairs) {
    const double d = meta.dist_um(a, b);
    ss += d * d;
  }
  return std::sqrt(ss / point_pairs.size());
}

}  // namespace asq
