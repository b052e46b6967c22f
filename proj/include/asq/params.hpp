#pragma once

#include "asq/contours.hpp"
#include "asq/types.hpp"

namespace asq {

struct QuantifyConfig {
  int smooth_taps = 5;       // moving-average taps on interfaces (1 = off)
  int tangent_window = 16;   // half-span (px of arc) of the tangent fit for normals
  bool it_relative_mode = false;  // IT at mid-iris instead of a spur offset
  double it_offset_um = 750;
  double contact_tol_px = 3.0;  // spur-to-wall gap beyond which contact is assumed
};

// Tissue interfaces of one scan. Pieces that do not exist in the mask are left
// empty; the operations that need them raise the matching error.
struct SceneInterfaces {
  Polyline posterior_cornea;      // corneo-sclera <-> chamber
  Polyline anterior_iris_left;    // iris <-> chamber
  Polyline anterior_iris_right;
  Polyline posterior_iris_left;   // iris <-> background (downward)
  Polyline posterior_iris_right;
  Polyline anterior_lens;         // chamber lower boundary across the pupil gap

  const Polyline& anterior_iris(Side s) const {
    return s == Side::Left ? anterior_iris_left : anterior_iris_right;
  }
  const Polyline& posterior_iris(Side s) const {
    return s == Side::Left ? posterior_iris_left : posterior_iris_right;
  }
};

SceneInterfaces build_interfaces(const LabelMask& mask, const SpurPair& spurs,
                                 const QuantifyConfig& cfg = {});

double acw(const SpurPair& spurs, const ScanMeta& meta);

struct SpurAxis {
  Point mid_px;   // midpoint of the spur line
  Point axis_px;  // unit (pixel space), physically perpendicular to the spur line
  Point axis_um;  // unit (um space), oriented anteriorly (toward -y)
};
SpurAxis spur_axis(const SpurPair& spurs, const ScanMeta& meta);

double lens_vault(const SceneInterfaces& ifc, const SpurPair& spurs, const ScanMeta& meta);
double acd(const SceneInterfaces& ifc, const SpurPair& spurs, const ScanMeta& meta);
double ac_area(const LabelMask& mask, const ScanMeta& meta);

struct AodResult {
  double value_um = 0;
  bool closed = false;
  Point wall_pt;  // measurement point on the corneoscleral wall (px)
  Point iris_pt;  // hit on the anterior iris (px)
};
AodResult aod(const SceneInterfaces& ifc, const LabelMask& mask, Point spur, double offset_um,
              Side side, const ScanMeta& meta, const QuantifyConfig& cfg = {});

struct TisaResult {
  double value_um2 = 0;
  bool closed = false;
};
TisaResult tisa(const SceneInterfaces& ifc, const LabelMask& mask, Point spur, double offset_um,
                Side side, const ScanMeta& meta, const QuantifyConfig& cfg = {});

double iris_thickness(const SceneInterfaces& ifc, const LabelMask& mask, Point spur, Side side,
                      const ScanMeta& meta, const QuantifyConfig& cfg = {});

double iris_curvature(const SceneInterfaces& ifc, Side side, const ScanMeta& meta);

// All eight parameters; per-parameter failures become notes, never aborts.
ParamSet quantify_scan(const LabelMask& mask, const SpurPair& spurs, const ScanMeta& meta,
                       const QuantifyConfig& cfg = {});

}  // namespace asq
