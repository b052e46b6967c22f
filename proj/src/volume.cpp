#include "asq/volume.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

namespace asq {

namespace {

std::string fmt1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt1(*v) : std::string(); }

std::optional<double> side_value(const SideParams& sp, const std::string& parameter) {
  if (parameter == "AOD500") return sp.aod500_um;
  if (parameter == "AOD750") return sp.aod750_um;
  if (parameter == "TISA500") return sp.tisa500_um2;
  if (parameter == "TISA750") return sp.tisa750_um2;
  throw ConfigError("unknown goniogram parameter: " + parameter);
}

}  // namespace

double side_angle_deg(int scan_index, Side side) {
  double a = scan_index * (180.0 / 64.0);
  if (side == Side::Right) a += 180.0;
  return std::fmod(a, 360.0);
}

std::string quadrant_of(double angle_deg) {
  double a = std::fmod(std::fmod(angle_deg, 360.0) + 360.0, 360.0);
  if (a >= 45 && a < 135) return "superior";
  if (a >= 135 && a < 225) return "nasal";
  if (a >= 225 && a < 315) return "inferior";
  return "temporal";
}

VolumeReport aggregate(std::vector<ScanResult> results) {
  if (results.size() > 128) throw Error("more than 128 scans in one volume");
  std::sort(results.begin(), results.end(),
            [](const ScanResult& a, const ScanResult& b) { return a.scan_index < b.scan_index; });
  for (size_t i = 0; i + 1 < results.size(); ++i)
    if (results[i].scan_index == results[i + 1].scan_index)
      throw DuplicateScanIndex("scan index " + std::to_string(results[i].scan_index));

  VolumeReport rep;
  rep.total = static_cast<int>(results.size());
  rep.rows = std::move(results);

  std::set<int> present;
  int max_index = -1;
  for (const auto& r : rep.rows) {
    present.insert(r.scan_index);
    max_index = std::max(max_index, r.scan_index);
    if (!r.qc.overall_pass) ++rep.excluded;
  }
  for (int i = 0; i <= max_index; ++i)
    if (!present.count(i)) rep.missing_indices.push_back(i);

  struct Acc {
    double a5 = 0, a7 = 0, t5 = 0, t7 = 0;
    int n = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& r : rep.rows) {
    if (!r.qc.overall_pass) continue;
    for (Side s : {Side::Left, Side::Right}) {
      const SideParams& sp = s == Side::Left ? r.params.left : r.params.right;
      if (!sp.aod500_um || !sp.aod750_um || !sp.tisa500_um2 || !sp.tisa750_um2) continue;
      Acc& a = acc[quadrant_of(side_angle_deg(r.scan_index, s))];
      a.a5 += *sp.aod500_um;
      a.a7 += *sp.aod750_um;
      a.t5 += *sp.tisa500_um2;
      a.t7 += *sp.tisa750_um2;
      ++a.n;
    }
  }
  for (const char* q : {"superior", "nasal", "inferior", "temporal"}) {
    QuadrantSummary s;
    auto it = acc.find(q);
    if (it != acc.end() && it->second.n > 0) {
      s.n = it->second.n;
      s.mean_aod500_um = it->second.a5 / s.n;
      s.mean_aod750_um = it->second.a7 / s.n;
      s.mean_tisa500_um2 = it->second.t5 / s.n;
      s.mean_tisa750_um2 = it->second.t7 / s.n;
    }
    rep.quadrants[q] = s;
  }
  return rep;
}

std::string goniogram_csv(const VolumeReport& report, const std::string& parameter) {
  std::string out =
      "# goniogram " + parameter +
      "; angle: scan i left side = i*180/64 deg, right side = +180 deg\n"
      "angle_deg,value_left,value_right,pass\n";
  for (const auto& r : report.rows) {
    std::optional<double> l = side_value(r.params.left, parameter);
    std::optional<double> rr = side_value(r.params.right, parameter);
    const char* pass = r.qc.overall_pass ? "true" : "false";
    out += fmt1(side_angle_deg(r.scan_index, Side::Left)) + "," + fmt_opt(l) + ",," + pass + "\n";
    out += fmt1(side_angle_deg(r.scan_index, Side::Right)) + ",," + fmt_opt(rr) + "," + pass + "\n";
  }
  return out;
}

std::string confidence_polar_csv(const VolumeReport& report, double threshold) {
  char head[128];
  std::snprintf(head, sizeof(head),
                "# ssl confidence; pass threshold = %.2f\nangle_deg,conf,pass\n", threshold);
  std::string out = head;
  for (const auto& r : report.rows) {
    char line[96];
    std::snprintf(line, sizeof(line), "%.1f,%.4f,%s\n", side_angle_deg(r.scan_index, Side::Left),
                  r.spurs.conf_left, r.qc.ssl_pass_left ? "true" : "false");
    out += line;
    std::snprintf(line, sizeof(line), "%.1f,%.4f,%s\n", side_angle_deg(r.scan_index, Side::Right),
                  r.spurs.conf_right, r.qc.ssl_pass_right ? "true" : "false");
    out += line;
  }
  return out;
}

VolumeReport run_pipeline(const Manifest& manifest, const std::filesystem::path& base_dir,
                          const PipelineOptions& opts) {
  if (opts.workers < 1) throw ConfigError("worker count must be >= 1");
  opts.policy.validate();
  const size_t n = manifest.scans.size();
  std::vector<ScanResult> results(n);
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;

  auto work = [&]() {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      if (failed.load()) return;
      const ManifestScan& sc = manifest.scans[i];
      ScanResult& out = results[i];
      out.scan_index = sc.index;
      auto t0 = std::chrono::steady_clock::now();
      try {
        std::filesystem::path p = sc.mask_path;
        if (p.is_relative()) p = base_dir / p;
        LabelMask mask = read_mask(p, Palette::Tissue);
        ScanMeta meta = manifest.meta(sc.index);
        if (!sc.spur) {
          out.qc.reasons.push_back("spur-missing");
          out.params.notes.push_back("spur-missing");
        } else {
          out.spurs = *sc.spur;
          out.params = quantify_scan(mask, out.spurs, meta, opts.quant);
          out.qc = assess(mask, out.spurs, opts.policy);
          out.params.qc_pass = out.qc.overall_pass;
        }
      } catch (const Error& e) {
        std::lock_guard<std::mutex> g(err_mu);
        if (first_error.empty()) first_error = e.what();
        failed.store(true);
        return;
      }
      out.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  if (opts.workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < opts.workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw ManifestError("scan processing failed: " + first_error);
  return aggregate(std::move(results));
}

}  // namespace asq
