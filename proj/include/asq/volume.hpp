#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "asq/mask_io.hpp"
#include "asq/params.hpp"
#include "asq/qc.hpp"
#include "asq/types.hpp"

namespace asq {

struct ScanResult {
  int scan_index = 0;
  ParamSet params;
  QCReport qc;
  SpurPair spurs;
  double wall_time_s = 0;
};

struct QuadrantSummary {
  double mean_aod500_um = 0;
  double mean_aod750_um = 0;
  double mean_tisa500_um2 = 0;
  double mean_tisa750_um2 = 0;
  int n = 0;  // contributing side instances (qc-pass rows only)
};

struct VolumeReport {
  std::vector<ScanResult> rows;  // sorted by scan_index
  std::map<std::string, QuadrantSummary> quadrants;  // superior/nasal/inferior/temporal
  std::vector<int> missing_indices;  // gaps up to the highest present index
  int total = 0;
  int excluded = 0;  // total - qc passing
};

// Polar angle of one side instance, degrees in [0, 360).
double side_angle_deg(int scan_index, Side side);

// Quadrant of a polar angle: superior [45,135), nasal [135,225),
// inferior [225,315), temporal elsewhere.
std::string quadrant_of(double angle_deg);

VolumeReport aggregate(std::vector<ScanResult> results);

// parameter: AOD500 | AOD750 | TISA500 | TISA750. Two rows per scan (one per
// side); the other side's value column is left empty.
std::string goniogram_csv(const VolumeReport& report, const std::string& parameter);

std::string confidence_polar_csv(const VolumeReport& report, double threshold);

struct PipelineOptions {
  QCPolicy policy;
  QuantifyConfig quant;
  int workers = 1;
};

// quantify + qc over every manifest scan; mask paths resolve against base_dir.
// Output is independent of worker count.
VolumeReport run_pipeline(const Manifest& manifest, const std::filesystem::path& base_dir,
                          const PipelineOptions& opts);

}  // namespace asq
