#include "asq/qc.hpp"

#include "asq/contours.hpp"

namespace asq {

bool ssl_gate(double conf, const QCPolicy& policy) {
  policy.validate();
  if (conf < 0 || conf > 1) throw Error("confidence outside [0,1]");
  return conf >= policy.ssl_conf_threshold;
}

ContourGateResult contour_gate(const LabelMask& mask, const QCPolicy& policy) {
  policy.validate();
  if (mask.palette != Palette::Tissue) throw Error("contour_gate expects tissue palette");

  struct ClassLimit {
    const char* name;
    uint8_t code;
    int limit;
  };
  const ClassLimit checks[] = {
      {"iris", cls::iris, policy.max_contours_iris},
      {"chamber", cls::chamber, policy.max_contours_chamber},
      {"sclera", cls::cornea, policy.max_contours_sclera},
  };

  ContourGateResult r;
  r.pass = true;
  for (const auto& c : checks) {
    auto comps = connected_components(mask, c.code, 8);
    int count = 0;
    for (const auto& reg : comps)
      if (reg.area() >= policy.min_contour_area) ++count;
    r.counts[c.name] = count;
    if (count == 0) {
      r.pass = false;
      r.reasons.push_back(std::string(c.name) + "-missing");
    } else if (count > c.limit) {
      r.pass = false;
      r.reasons.push_back(std::string(c.name) + "-contours(" + std::to_string(count) + ">" +
                          std::to_string(c.limit) + ")");
    }
  }
  return r;
}

QCReport assess(const LabelMask& mask, const SpurPair& spurs, const QCPolicy& policy) {
  QCReport rep;
  rep.ssl_pass_left = ssl_gate(spurs.conf_left, policy);
  rep.ssl_pass_right = ssl_gate(spurs.conf_right, policy);
  if (!rep.ssl_pass_left) rep.reasons.push_back("ssl-left");
  if (!rep.ssl_pass_right) rep.reasons.push_back("ssl-right");

  auto gate = contour_gate(mask, policy);
  rep.contour_counts = gate.counts;
  rep.contour_pass = gate.pass;
  rep.reasons.insert(rep.reasons.end(), gate.reasons.begin(), gate.reasons.end());

  rep.overall_pass = rep.ssl_pass_left && rep.ssl_pass_right && rep.contour_pass;
  return rep;
}

}  // namespace asq
