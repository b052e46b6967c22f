#pragma once

#include <string>
#include <vector>

#include "asq/landmark.hpp"
#include "asq/mask_io.hpp"
#include "asq/types.hpp"

namespace asq {

// Parametric anterior-segment cross-section, all lengths in um, y grows
// posteriorly (image down). The corneo-sclera is a circular shell, each iris
// leaf is a constant-thickness circular-arc band anchored at its scleral spur,
// and the lens is a spherical cap spanning the pupil gap.
struct PhantomSpec {
  double width_um = 16000;
  double height_um = 9000;
  double scale_x = 10;  // um / px
  double scale_y = 10;

  double cornea_center_y = 7300;   // x defaults to the image midline
  double cornea_r_inner = 6500;    // posterior corneal surface radius
  double cornea_thickness = 1000;  // shell thickness

  double acw = 11800;  // spur-to-spur distance

  double angle_deg = 35;       // anterior chamber angle at the recess, (0, 80]
  double iris_thickness = 450;
  double pupil_gap = 2400;     // full tip-to-tip gap
  double iris_tip_rise = 500;  // pupil-edge height anterior to the spur line

  double lens_radius = 6000;
  double lens_vault = 650;  // pole height anterior to the spur line (signed)

  bool contact = false;         // iridotrabecular contact variant
  double contact_depth = 300;   // how far the iris anchor is pushed into the wall

  int speck_count = 0;  // background speck noise (QC exercise); never touches truth
  int speck_size = 2;
  uint8_t speck_class = cls::cornea;
  uint64_t seed = 1;

  LandmarkLabelConfig label_cfg;

  void validate() const;
  int width_px() const { return static_cast<int>(std::lround(width_um / scale_x)); }
  int height_px() const { return static_cast<int>(std::lround(height_um / scale_y)); }
};

// Closed-form parameter values; the phantom is left/right symmetric, so the
// per-side parameters carry one value each.
struct GroundTruth {
  SpurPair spurs_px;
  double acw_um = 0;
  double acd_um = 0;
  double lv_um = 0;
  double ac_area_um2 = 0;
  double aod500_um = 0;
  double aod750_um = 0;
  double tisa500_um2 = 0;
  double tisa750_um2 = 0;
  double it750_um = 0;
  double icurve_um = 0;
  bool closed500 = false;
  bool closed750 = false;
};

struct PhantomOutput {
  LabelMask tissue;
  LabelMask landmark_left;   // half-image landmark label, left spur
  LabelMask landmark_right;  // right half, mirrored
  SpurPair spurs_px;
  GroundTruth truth;
};

PhantomOutput generate(const PhantomSpec& spec);

// Ground truth only (no rasterization); used by generate and by tests.
GroundTruth ground_truth(const PhantomSpec& spec);

// One spec per value, with `vary` applied. Supported names: angle_deg, scale,
// acw, lens_vault, iris_tip_rise, pupil_gap, iris_thickness, contact, seed.
std::vector<PhantomSpec> sweep(const PhantomSpec& base, const std::string& vary,
                               const std::vector<double>& values);

}  // namespace asq
