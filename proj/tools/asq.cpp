// asq: anterior-segment label-mask quantification pipeline.
//
// Subcommands: phantom, labels, quantify, qc, metrics, volume, report.
// Exit codes: 0 ok, 1 data error, 2 config/usage error. QC failures are
// reported in the outputs and never change the exit code.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asq/landmark.hpp"
#include "asq/mask_io.hpp"
#include "asq/metrics.hpp"
#include "asq/phantom.hpp"
#include "asq/qc.hpp"
#include "asq/volume.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string opt1(const std::optional<double>& v) { return v ? fmt1(*v) : std::string(); }

fs::path resolve_out(std::string flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("ASQ_OUT_DIR")) return env;
  return ".";
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw asq::IoFailure("cannot write " + p.string());
  f << text;
}

std::string scan_name(int index, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "scan_%03d%s", index, suffix);
  return buf;
}

json side_json(const asq::SideParams& s) {
  json j;
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("aod500_um", s.aod500_um);
  put("aod750_um", s.aod750_um);
  put("tisa500_um2", s.tisa500_um2);
  put("tisa750_um2", s.tisa750_um2);
  put("it750_um", s.it750_um);
  put("icurve_um", s.icurve_um);
  j["closed500"] = s.closed500;
  j["closed750"] = s.closed750;
  return j;
}

std::string params_csv(const asq::VolumeReport& rep) {
  std::string out =
      "scan,angle_deg,acw_um,acd_um,lv_um,ac_area_um2,"
      "aod500_l,aod500_r,aod750_l,aod750_r,tisa500_l,tisa500_r,tisa750_l,tisa750_r,"
      "it750_l,it750_r,icurve_l,icurve_r,closed500_l,closed500_r,qc_pass,notes\n";
  for (const auto& r : rep.rows) {
    const auto& p = r.params;
    std::string notes;
    for (const auto& n : p.notes) notes += (notes.empty() ? "" : ";") + n;
    out += std::to_string(r.scan_index) + "," +
           fmt1(asq::side_angle_deg(r.scan_index, asq::Side::Left)) + "," + opt1(p.acw_um) +
           "," + opt1(p.acd_um) + "," + opt1(p.lv_um) + "," + opt1(p.ac_area_um2) + "," +
           opt1(p.left.aod500_um) + "," + opt1(p.right.aod500_um) + "," +
           opt1(p.left.aod750_um) + "," + opt1(p.right.aod750_um) + "," +
           opt1(p.left.tisa500_um2) + "," + opt1(p.right.tisa500_um2) + "," +
           opt1(p.left.tisa750_um2) + "," + opt1(p.right.tisa750_um2) + "," +
           opt1(p.left.it750_um) + "," + opt1(p.right.it750_um) + "," +
           opt1(p.left.icurve_um) + "," + opt1(p.right.icurve_um) + "," +
           (p.left.closed500 ? "true" : "false") + "," + (p.right.closed500 ? "true" : "false") +
           "," + (r.qc.overall_pass ? "true" : "false") + "," + notes + "\n";
  }
  return out;
}

std::string qc_csv(const asq::VolumeReport& rep) {
  std::string out = "scan,ssl_left,ssl_right,iris,chamber,sclera,contour_pass,overall_pass,reasons\n";
  for (const auto& r : rep.rows) {
    auto count = [&](const char* k) {
      auto it = r.qc.contour_counts.find(k);
      return it == r.qc.contour_counts.end() ? 0 : it->second;
    };
    std::string reasons;
    for (const auto& s : r.qc.reasons) reasons += (reasons.empty() ? "" : ";") + s;
    out += std::to_string(r.scan_index) + "," + (r.qc.ssl_pass_left ? "true" : "false") + "," +
           (r.qc.ssl_pass_right ? "true" : "false") + "," + std::to_string(count("iris")) + "," +
           std::to_string(count("chamber")) + "," + std::to_string(count("sclera")) + "," +
           (r.qc.contour_pass ? "true" : "false") + "," +
           (r.qc.overall_pass ? "true" : "false") + "," + reasons + "\n";
  }
  return out;
}

json volume_json(const asq::VolumeReport& rep) {
  json j;
  j["total"] = rep.total;
  j["excluded"] = rep.excluded;
  j["missing_indices"] = rep.missing_indices;
  for (const auto& [name, q] : rep.quadrants) {
    j["quadrants"][name] = {{"n", q.n},
                            {"mean_aod500_um", q.mean_aod500_um},
                            {"mean_aod750_um", q.mean_aod750_um},
                            {"mean_tisa500_um2", q.mean_tisa500_um2},
                            {"mean_tisa750_um2", q.mean_tisa750_um2}};
  }
  json scans = json::array();
  for (const auto& r : rep.rows) {
    json s;
    s["index"] = r.scan_index;
    s["angle_deg"] = asq::side_angle_deg(r.scan_index, asq::Side::Left);
    s["qc_pass"] = r.qc.overall_pass;
    s["wall_time_s"] = r.wall_time_s;
    s["left"] = side_json(r.params.left);
    s["right"] = side_json(r.params.right);
    if (r.params.acw_um) s["acw_um"] = *r.params.acw_um;
    if (r.params.acd_um) s["acd_um"] = *r.params.acd_um;
    if (r.params.lv_um) s["lv_um"] = *r.params.lv_um;
    if (r.params.ac_area_um2) s["ac_area_um2"] = *r.params.ac_area_um2;
    scans.push_back(s);
  }
  j["scans"] = scans;
  return j;
}

void write_run_summary(const fs::path& dir, const std::string& subcommand,
                       const asq::VolumeReport* rep, const std::vector<std::string>& artifacts) {
  json j;
  j["subcommand"] = subcommand;
  j["artifacts"] = artifacts;
  if (rep) {
    j["scans"] = rep->total;
    j["excluded"] = rep->excluded;
    double total_s = 0;
    json times = json::array();
    for (const auto& r : rep->rows) {
      times.push_back({{"index", r.scan_index}, {"wall_time_s", r.wall_time_s}});
      total_s += r.wall_time_s;
    }
    j["per_scan_wall_time"] = times;
    j["total_scan_time_s"] = total_s;
  }
  write_text(dir / "run_summary.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct PhantomArgs {
  std::string out;
  int scans = 1;
  double scale = 10, angle = 35, angle_amp = 0, angle_phase_deg = 0;
  double acw = 11800, lens_vault = 650, iris_thickness = 450, pupil_gap = 2400, tip_rise = 500;
  double cornea_radius = 6500;
  bool contact = false;
  double contact_depth = 300;
  int specks = 0, speck_size = 2;
  uint64_t seed = 1;
  std::vector<int> corrupt;  // scan indices whose spur confidence is degraded
};

int run_phantom(const PhantomArgs& a) {
  fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  asq::Manifest manifest;
  manifest.scale_x_um = manifest.scale_y_um = a.scale;
  json truth = json::array();
  std::vector<std::pair<int, asq::SpurPair>> spur_rows;
  std::vector<std::string> artifacts;

  for (int i = 0; i < a.scans; ++i) {
    asq::PhantomSpec spec;
    spec.scale_x = spec.scale_y = a.scale;
    spec.angle_deg =
        a.angle +
        a.angle_amp *
            std::sin((i * 360.0 / 128.0 + a.angle_phase_deg) * 3.14159265358979323846 / 180.0);
    spec.acw = a.acw;
    spec.cornea_r_inner = a.cornea_radius;
    spec.lens_vault = a.lens_vault;
    spec.iris_thickness = a.iris_thickness;
    spec.pupil_gap = a.pupil_gap;
    spec.iris_tip_rise = a.tip_rise;
    spec.contact = a.contact;
    spec.contact_depth = a.contact_depth;
    spec.speck_count = a.specks;
    spec.speck_size = a.speck_size;
    spec.seed = a.seed + i;
    asq::PhantomOutput out = asq::generate(spec);

    std::string mask_name = scan_name(i, ".pgm");
    asq::write_mask(out.tissue, dir / mask_name);
    asq::write_mask(out.landmark_left, dir / scan_name(i, "_L.pgm"));
    asq::write_mask(out.landmark_right, dir / scan_name(i, "_R.pgm"));

    asq::SpurPair spurs = out.spurs_px;
    for (int c : a.corrupt)
      if (c == i) spurs.conf_left = spurs.conf_right = 0.5;
    manifest.scans.push_back({i, mask_name, spurs});
    spur_rows.emplace_back(i, spurs);

    json t;
    t["index"] = i;
    t["acw_um"] = out.truth.acw_um;
    t["acd_um"] = out.truth.acd_um;
    t["lv_um"] = out.truth.lv_um;
    t["ac_area_um2"] = out.truth.ac_area_um2;
    t["aod500_um"] = out.truth.aod500_um;
    t["aod750_um"] = out.truth.aod750_um;
    t["tisa500_um2"] = out.truth.tisa500_um2;
    t["tisa750_um2"] = out.truth.tisa750_um2;
    t["it750_um"] = out.truth.it750_um;
    t["icurve_um"] = out.truth.icurve_um;
    t["closed500"] = out.truth.closed500;
    t["closed750"] = out.truth.closed750;
    truth.push_back(t);
  }
  asq::write_manifest(manifest, dir / "manifest.json");
  asq::write_spur_csv(spur_rows, dir / "spurs.csv");
  write_text(dir / "truth.json", truth.dump(2) + "\n");
  artifacts = {"manifest.json", "spurs.csv", "truth.json"};
  write_run_summary(dir, "phantom", nullptr, artifacts);
  return 0;
}

struct LabelsArgs {
  std::string out, spurs, dir;
  bool decode = false;
  int width = 0, height = 0, count = 0;
  int r_focus = 16, r_attention = 48;
};

int run_labels(const LabelsArgs& a) {
  asq::LandmarkLabelConfig cfg;
  cfg.r_focus = a.r_focus;
  cfg.r_attention = a.r_attention;
  cfg.validate();
  fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);

  if (!a.decode) {
    if (a.width < 16 || a.height < 16) throw asq::ConfigError("need --width/--height >= 16");
    auto rows = asq::read_spur_csv(a.spurs);
    const int lw = (a.width + 1) / 2, rw = a.width - lw;
    for (const auto& [idx, sp] : rows) {
      asq::LabelMask l = asq::encode_landmark(lw, a.height, sp.left, cfg);
      asq::Point rh{asq::unmirror_x(sp.right.x, a.width), sp.right.y};
      asq::LabelMask r = asq::encode_landmark(rw, a.height, rh, cfg);
      asq::write_mask(l, dir / scan_name(idx, "_L.pgm"));
      asq::write_mask(r, dir / scan_name(idx, "_R.pgm"));
    }
    write_run_summary(dir, "labels", nullptr, {"landmark halves"});
    return 0;
  }

  if (a.dir.empty() || a.count < 1 || a.width < 16)
    throw asq::ConfigError("decode needs --dir, --count and full-image --width");
  std::vector<std::pair<int, asq::SpurPair>> rows;
  for (int i = 0; i < a.count; ++i) {
    asq::LabelMask l = asq::read_mask(fs::path(a.dir) / scan_name(i, "_L.pgm"), asq::Palette::Landmark);
    asq::LabelMask r = asq::read_mask(fs::path(a.dir) / scan_name(i, "_R.pgm"), asq::Palette::Landmark);
    asq::DecodedSpur dl = asq::decode_spur(l);
    asq::DecodedSpur dr = asq::decode_spur(r);
    asq::SpurPair sp;
    sp.left = dl.centroid;
    sp.right = {asq::unmirror_x(dr.centroid.x, a.width), dr.centroid.y};
    sp.conf_left = asq::confidence_index(dl.focus_pixels, dl.centroid, cfg.square_side());
    sp.conf_right = asq::confidence_index(dr.focus_pixels, dr.centroid, cfg.square_side());
    rows.emplace_back(i, sp);
  }
  asq::write_spur_csv(rows, dir / "spurs.csv");
  write_run_summary(dir, "labels", nullptr, {"spurs.csv"});
  return 0;
}

struct PipelineArgs {
  std::string manifest, out, parameter = "AOD500";
  int workers = 1;
  asq::QCPolicy policy;
};

asq::VolumeReport run_common(const PipelineArgs& a) {
  asq::Manifest m = asq::read_manifest(a.manifest);
  asq::PipelineOptions opts;
  opts.policy = a.policy;
  opts.workers = a.workers;
  return asq::run_pipeline(m, fs::path(a.manifest).parent_path(), opts);
}

int run_quantify(const PipelineArgs& a) {
  fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  asq::VolumeReport rep = run_common(a);
  write_text(dir / "params.csv", params_csv(rep));
  write_text(dir / "quantify.json", volume_json(rep).dump(2) + "\n");
  write_run_summary(dir, "quantify", &rep, {"params.csv", "quantify.json"});
  return 0;
}

int run_qc(const PipelineArgs& a) {
  fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  asq::VolumeReport rep = run_common(a);
  write_text(dir / "qc.csv", qc_csv(rep));
  write_run_summary(dir, "qc", &rep, {"qc.csv"});
  return 0;
}

int run_volume(const PipelineArgs& a) {
  fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  asq::VolumeReport rep = run_common(a);
  std::string gname = "goniogram_" + a.parameter + ".csv";
  write_text(dir / gname, asq::goniogram_csv(rep, a.parameter));
  write_text(dir / "confidence.csv",
             asq::confidence_polar_csv(rep, a.policy.ssl_conf_threshold));
  write_text(dir / "volume.json", volume_json(rep).dump(2) + "\n");
  write_run_summary(dir, "volume", &rep, {gname, "confidence.csv", "volume.json"});
  return 0;
}

int run_report(const PipelineArgs& a) {
  fs::path dir = resolve_out(a.out);
  fs::create_directories(dir);
  asq::VolumeReport rep = run_common(a);
  std::vector<std::string> artifacts = {"params.csv", "qc.csv", "confidence.csv", "report.json"};
  write_text(dir / "params.csv", params_csv(rep));
  write_text(dir / "qc.csv", qc_csv(rep));
  for (const char* p : {"AOD500", "AOD750", "TISA500", "TISA750"}) {
    std::string name = std::string("goniogram_") + p + ".csv";
    write_text(dir / name, asq::goniogram_csv(rep, p));
    artifacts.push_back(name);
  }
  write_text(dir / "confidence.csv",
             asq::confidence_polar_csv(rep, a.policy.ssl_conf_threshold));
  write_text(dir / "report.json", volume_json(rep).dump(2) + "\n");
  write_run_summary(dir, "report", &rep, artifacts);
  return 0;
}

struct MetricsArgs {
  std::vector<std::string> dice_masks;  // two paths
  int cls = 1;
  std::string icc_csv, agreement_csv;
};

std::vector<std::vector<double>> read_csv_matrix(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw asq::IoFailure("cannot read " + p.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        numeric = false;  // header line
        break;
      }
    }
    if (numeric && !row.empty()) rows.push_back(row);
  }
  return rows;
}

int run_metrics(const MetricsArgs& a) {
  json out;
  if (!a.dice_masks.empty()) {
    if (a.dice_masks.size() != 2) throw asq::ConfigError("--dice needs exactly two masks");
    asq::LabelMask m1 = asq::read_mask(a.dice_masks[0], asq::Palette::Tissue);
    asq::LabelMask m2 = asq::read_mask(a.dice_masks[1], asq::Palette::Tissue);
    uint8_t c = static_cast<uint8_t>(a.cls);
    out["dice"] = asq::dice(m1, m2, c);
    out["sensitivity"] = asq::sensitivity(m1, m2, c);
    out["specificity"] = asq::specificity(m1, m2, c);
  }
  if (!a.icc_csv.empty()) {
    asq::ObserverMatrix m;
    m.values = read_csv_matrix(a.icc_csv);
    m.validate();
    out["icc_2_1"] = asq::icc_2_1_abs(m);
  }
  if (!a.agreement_csv.empty()) {
    auto rows = read_csv_matrix(a.agreement_csv);
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : rows) {
      if (r.size() < 2) throw asq::Error("agreement CSV needs two columns");
      pairs.emplace_back(r[0], r[1]);
    }
    asq::BlandAltman ba = asq::bland_altman(pairs);
    asq::PairedT pt = asq::paired_t(pairs);
    out["bland_altman"] = {{"mean_diff", ba.mean_diff},
                           {"sd_diff", ba.sd_diff},
                           {"loa_low", ba.loa_low},
                           {"loa_high", ba.loa_high}};
    char pbuf[32];
    std::snprintf(pbuf, sizeof(pbuf), "%.4g", pt.p);
    out["paired_t"] = {{"t", pt.t}, {"df", pt.df}, {"p", pt.p},
                       {"p_display", pbuf}, {"significant_0_05", pt.p < 0.05}};
  }
  if (out.empty()) throw asq::ConfigError("metrics: choose --dice, --icc or --agreement");
  std::cout << out.dump(2) << "\n";
  return 0;
}

void add_policy_flags(CLI::App* cmd, asq::QCPolicy& p) {
  cmd->add_option("--ssl-threshold", p.ssl_conf_threshold, "SSL confidence pass threshold");
  cmd->add_option("--max-iris", p.max_contours_iris, "max iris contours");
  cmd->add_option("--max-chamber", p.max_contours_chamber, "max chamber contours");
  cmd->add_option("--max-sclera", p.max_contours_sclera, "max sclera contours");
  cmd->add_option("--min-area", p.min_contour_area, "ignore contours below this area (px)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anterior-segment label-mask quantification"};
  app.require_subcommand(1);

  PhantomArgs pa;
  CLI::App* phantom = app.add_subcommand("phantom", "generate synthetic scans with ground truth");
  phantom->add_option("--out", pa.out, "output directory");
  phantom->add_option("--scans", pa.scans, "number of scans")->check(CLI::Range(1, 128));
  phantom->add_option("--scale", pa.scale, "um per pixel");
  phantom->add_option("--angle", pa.angle, "chamber angle, degrees");
  phantom->add_option("--angle-amp", pa.angle_amp, "sinusoidal angle modulation amplitude");
  phantom->add_option("--angle-phase-deg", pa.angle_phase_deg, "modulation phase");
  phantom->add_option("--acw", pa.acw, "chamber width, um");
  phantom->add_option("--cornea-radius", pa.cornea_radius, "inner shell radius, um");
  phantom->add_option("--lens-vault", pa.lens_vault, "lens vault, um");
  phantom->add_option("--iris-thickness", pa.iris_thickness, "iris thickness, um");
  phantom->add_option("--pupil-gap", pa.pupil_gap, "pupil gap, um");
  phantom->add_option("--tip-rise", pa.tip_rise, "pupil tip rise, um");
  phantom->add_flag("--contact", pa.contact, "iridotrabecular contact variant");
  phantom->add_option("--contact-depth", pa.contact_depth, "contact depth, um");
  phantom->add_option("--specks", pa.specks, "background speck count");
  phantom->add_option("--speck-size", pa.speck_size, "speck side, px");
  phantom->add_option("--seed", pa.seed, "noise seed");
  phantom->add_option("--corrupt", pa.corrupt, "scan indices given degraded spur confidence");

  LabelsArgs la;
  CLI::App* labels = app.add_subcommand("labels", "encode or decode landmark label masks");
  labels->add_option("--out", la.out, "output directory");
  labels->add_flag("--decode", la.decode, "decode landmark masks to a spur CSV");
  labels->add_option("--spurs", la.spurs, "spur CSV to encode");
  labels->add_option("--dir", la.dir, "directory of landmark halves to decode");
  labels->add_option("--width", la.width, "full image width, px");
  labels->add_option("--height", la.height, "image height, px");
  labels->add_option("--count", la.count, "number of scans to decode");
  labels->add_option("--r-focus", la.r_focus, "focus radius, px");
  labels->add_option("--r-attention", la.r_attention, "attention radius, px");

  PipelineArgs qa, ca, va, ra;
  CLI::App* quantify = app.add_subcommand("quantify", "per-scan parameters over a manifest");
  CLI::App* qc = app.add_subcommand("qc", "quality gates over a manifest");
  CLI::App* volume = app.add_subcommand("volume", "360-degree goniogram aggregation");
  CLI::App* report = app.add_subcommand("report", "full pipeline report");
  for (auto [cmd, args] : {std::pair{quantify, &qa}, {qc, &ca}, {volume, &va}, {report, &ra}}) {
    cmd->add_option("--manifest", args->manifest, "scan manifest")->required();
    cmd->add_option("--out", args->out, "output directory");
    cmd->add_option("--workers", args->workers, "worker threads")->check(CLI::PositiveNumber);
    add_policy_flags(cmd, args->policy);
  }
  volume->add_option("--parameter", va.parameter, "AOD500|AOD750|TISA500|TISA750");

  MetricsArgs ma;
  CLI::App* metrics = app.add_subcommand("metrics", "agreement and overlap statistics");
  metrics->add_option("--dice", ma.dice_masks, "two masks to compare")->expected(2);
  metrics->add_option("--class", ma.cls, "class code for overlap stats");
  metrics->add_option("--icc", ma.icc_csv, "subjects-by-raters CSV");
  metrics->add_option("--agreement", ma.agreement_csv, "two-column paired CSV");

  try {
    app.parse(argc, argv);
    if (*phantom) return run_phantom(pa);
    if (*labels) return run_labels(la);
    if (*quantify) return run_quantify(qa);
    if (*qc) return run_qc(ca);
    if (*volume) return run_volume(va);
    if (*report) return run_report(ra);
    if (*metrics) return run_metrics(ma);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const asq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const asq::InconsistentSpec& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
