#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asq/types.hpp"

namespace asq {

// Binary P5 greymap, one byte per pixel, class codes as payload.
LabelMask read_mask(const std::filesystem::path& path, Palette palette);
void write_mask(const LabelMask& mask, const std::filesystem::path& path);

// Spur CSV: header `scan,side,x,y[,conf]`, side in {L,R}, LF endings.
std::vector<std::pair<int, SpurPair>> read_spur_csv(const std::filesystem::path& path);
void write_spur_csv(const std::vector<std::pair<int, SpurPair>>& rows,
                    const std::filesystem::path& path);

// Scan manifest: JSON {scale_x_um, scale_y_um, scans:[{index, mask_path, spur?}]}
struct ManifestScan {
  int index = 0;
  std::string mask_path;
  std::optional<SpurPair> spur;
};

struct Manifest {
  double scale_x_um = 0;
  double scale_y_um = 0;
  std::vector<ManifestScan> scans;

  ScanMeta meta(int scan_index) const { return ScanMeta(scale_x_um, scale_y_um, scan_index); }
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& m, const std::filesystem::path& path);

}  // namespace asq
