#pragma once

#include <string>
#include <utility>
#include <vector>

#include "asq/types.hpp"

namespace asq {

// n subjects x k raters, one measurement per cell.
struct ObserverMatrix {
  std::vector<std::vector<double>> values;  // [subject][rater]
  std::vector<std::string> subject_ids;
  std::vector<std::string> rater_ids;

  size_t n() const { return values.size(); }
  size_t k() const { return values.empty() ? 0 : values.front().size(); }

  void validate() const {
    if (n() < 2 || k() < 2) throw Error("observer matrix needs n >= 2 subjects, k >= 2 raters");
    for (const auto& row : values) {
      if (row.size() != k()) throw Error("ragged observer matrix");
      for (double v : row)
        if (!std::isfinite(v)) throw NonFiniteCoordinate("non-finite observer value");
    }
  }
};

// Overlap of one class between two equally sized masks. Both-empty class -> 1.
double dice(const LabelMask& a, const LabelMask& b, uint8_t code);
double sensitivity(const LabelMask& pred, const LabelMask& truth, uint8_t code);
double specificity(const LabelMask& pred, const LabelMask& truth, uint8_t code);

// ICC(2,1): two-way random effects, single rater, absolute agreement.
// All cells identical -> 1 by convention.
double icc_2_1_abs(const ObserverMatrix& m);

struct BlandAltman {
  double mean_diff = 0;
  double sd_diff = 0;   // n-1 denominator
  double loa_low = 0;   // mean - 1.96 sd
  double loa_high = 0;  // mean + 1.96 sd
};
BlandAltman bland_altman(const std::vector<std::pair<double, double>>& pairs);

struct PairedT {
  double t = 0;
  double p = 0;  // two-sided
  int df = 0;
};
PairedT paired_t(const std::vector<std::pair<double, double>>& pairs);

// Two-sided p for a Student-t statistic (regularized incomplete beta).
double student_t_two_sided_p(double t, int df);

// sqrt(mean squared Euclidean distance), um.
double rms_distance(const std::vector<std::pair<Point, Point>>& point_pairs,
                    const ScanMeta& meta);

}  // namespace asq
