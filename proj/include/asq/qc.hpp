#pragma once

#include <map>
#include <string>
#include <vector>

#include "asq/types.hpp"

namespace asq {

struct QCPolicy {
  double ssl_conf_threshold = 0.8;
  int max_contours_iris = 5;
  int max_contours_chamber = 6;
  int max_contours_sclera = 10;
  int min_contour_area = 0;  // speck filter, px

  void validate() const {
    if (!(ssl_conf_threshold > 0 && ssl_conf_threshold <= 1))
      throw ConfigError("ssl threshold must be in (0,1]");
    if (max_contours_iris < 1 || max_contours_chamber < 1 || max_contours_sclera < 1)
      throw ConfigError("contour limits must be >= 1");
  }
};

struct QCReport {
  bool ssl_pass_left = false;
  bool ssl_pass_right = false;
  std::map<std::string, int> contour_counts;  // iris / chamber / sclera
  bool contour_pass = false;
  bool overall_pass = false;
  std::vector<std::string> reasons;
};

bool ssl_gate(double conf, const QCPolicy& policy);

struct ContourGateResult {
  std::map<std::string, int> counts;
  bool pass = false;
  std::vector<std::string> reasons;
};
ContourGateResult contour_gate(const LabelMask& mask, const QCPolicy& policy);

QCReport assess(const LabelMask& mask, const SpurPair& spurs, const QCPolicy& policy);

}  // namespace asq
