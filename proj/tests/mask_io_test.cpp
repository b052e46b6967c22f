#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "asq/mask_io.hpp"
#include "asq/phantom.hpp"

namespace fs = std::filesystem;
using namespace asq;

namespace {

fs::path tmp_dir() {
  fs::path d = fs::temp_directory_path() / "asq_mask_io_test";
  fs::create_directories(d);
  return d;
}

void write_raw(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("read_mask rejects rasters below the 16x16 floor") {
  const fs::path p = tmp_dir() / "tiny.pgm";
  write_raw(p, std::string("P5\n4 4\n255\n") + std::string(16, '\0'));
  CHECK_THROWS_AS(read_mask(p, Palette::Tissue), DimensionTooSmall);
}

TEST_CASE("all-background file reads back as background") {
  const fs::path p = tmp_dir() / "bg.pgm";
  write_raw(p, std::string("P5\n16 16\n255\n") + std::string(256, '\0'));
  LabelMask m = read_mask(p, Palette::Tissue);
  CHECK(m.width == 16);
  CHECK(m.height == 16);
  for (uint8_t v : m.data) CHECK(v == cls::background);
}

TEST_CASE("illegal class code for the palette raises IllegalClassCode") {
  std::string body(256, '\0');
  body[37] = 7;
  const fs::path p = tmp_dir() / "bad_code.pgm";
  write_raw(p, std::string("P5\n16 16\n255\n") + body);
  CHECK_THROWS_AS(read_mask(p, Palette::Tissue), IllegalClassCode);
  // code 3 is fine under the tissue palette but illegal under landmark
  body[37] = 3;
  write_raw(p, std::string("P5\n16 16\n255\n") + body);
  CHECK_NOTHROW(read_mask(p, Palette::Tissue));
  CHECK_THROWS_AS(read_mask(p, Palette::Landmark), IllegalClassCode);
}

TEST_CASE("malformed headers are rejected") {
  const fs::path p = tmp_dir() / "hdr.pgm";
  write_raw(p, "P6\n16 16\n255\n" + std::string(256, '\0'));
  CHECK_THROWS_AS(read_mask(p, Palette::Tissue), MalformedHeader);
  write_raw(p, "P5\nnope 16\n255\n" + std::string(256, '\0'));
  CHECK_THROWS_AS(read_mask(p, Palette::Tissue), MalformedHeader);
  write_raw(p, "P5\n16 16\n255\n" + std::string(100, '\0'));  // truncated payload
  CHECK_THROWS_AS(read_mask(p, Palette::Tissue), MalformedHeader);
  CHECK_THROWS_AS(read_mask(tmp_dir() / "does_not_exist.pgm", Palette::Tissue), IoFailure);
}

TEST_CASE("header comments are skipped") {
  const fs::path p = tmp_dir() / "comment.pgm";
  write_raw(p, "P5\n# a comment\n16 16\n255\n" + std::string(256, '\2'));
  LabelMask m = read_mask(p, Palette::Tissue);
  CHECK(m.at(0, 0) == cls::cornea);
}

TEST_CASE("write then read 16x16 mask round-trips") {
  LabelMask m(16, 16, Palette::Tissue);
  std::mt19937 rng(7);
  for (auto& v : m.data) v = static_cast<uint8_t>(rng() % 4);
  const fs::path p = tmp_dir() / "rt16.pgm";
  write_mask(m, p);
  CHECK(read_mask(p, Palette::Tissue) == m);
}

TEST_CASE("large random mask round-trips bit-exactly") {
  LabelMask m(2144, 1876, Palette::Tissue);
  std::mt19937 rng(11);
  for (auto& v : m.data) v = static_cast<uint8_t>(rng() % 4);
  const fs::path p = tmp_dir() / "rt_big.pgm";
  write_mask(m, p);
  CHECK(read_mask(p, Palette::Tissue) == m);
}

TEST_CASE("random masks round-trip for both palettes") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Palette pal = trial % 2 ? Palette::Landmark : Palette::Tissue;
    const int w = 16 + int(rng() % 64), h = 16 + int(rng() % 64);
    LabelMask m(w, h, pal);
    for (auto& v : m.data) v = static_cast<uint8_t>(rng() % (palette_max_code(pal) + 1));
    const fs::path p = tmp_dir() / "rt_rand.pgm";
    write_mask(m, p);
    CHECK(read_mask(p, pal) == m);
  }
}

TEST_CASE("phantom tissue mask round-trips through the file format") {
  PhantomSpec spec;
  PhantomOutput out = generate(spec);
  const fs::path p = tmp_dir() / "phantom.pgm";
  write_mask(out.tissue, p);
  CHECK(read_mask(p, Palette::Tissue) == out.tissue);
}

TEST_CASE("write to an unwritable path raises IoFailure") {
  LabelMask m(16, 16, Palette::Tissue);
  CHECK_THROWS_AS(write_mask(m, tmp_dir() / "no_such_dir" / "x.pgm"), IoFailure);
}

TEST_CASE("spur CSV pairs rows and defaults confidence to 1.0") {
  const fs::path p = tmp_dir() / "spurs.csv";
  write_raw(p, "scan,side,x,y\n0,L,100,200\n0,R,900,210\n");
  auto rows = read_spur_csv(p);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].first == 0);
  CHECK(rows[0].second.left.x == doctest::Approx(100));
  CHECK(rows[0].second.left.y == doctest::Approx(200));
  CHECK(rows[0].second.right.x == doctest::Approx(900));
  CHECK(rows[0].second.conf_left == doctest::Approx(1.0));
  CHECK(rows[0].second.conf_right == doctest::Approx(1.0));
}

TEST_CASE("spur CSV with a lone side raises MissingSide") {
  const fs::path p = tmp_dir() / "spurs_missing.csv";
  write_raw(p, "scan,side,x,y\n3,L,100,200\n");
  CHECK_THROWS_AS(read_spur_csv(p), MissingSide);
}

TEST_CASE("spur CSV validates coordinates and ordering") {
  const fs::path p = tmp_dir() / "spurs_bad.csv";
  write_raw(p, "scan,side,x,y\n0,L,nan,200\n0,R,900,210\n");
  CHECK_THROWS_AS(read_spur_csv(p), NonFiniteCoordinate);
  write_raw(p, "scan,side,x,y\n0,L,900,200\n0,R,100,210\n");
  CHECK_THROWS_AS(read_spur_csv(p), LeftRightSwapped);
  write_raw(p, "x,y\n1,2\n");
  CHECK_THROWS_AS(read_spur_csv(p), MalformedHeader);
}

TEST_CASE("spur CSV round-trips with confidence values") {
  std::vector<std::pair<int, SpurPair>> rows;
  rows.push_back({0, {{100.25, 200.5}, {900.75, 210.0}, 0.9, 0.85}});
  rows.push_back({5, {{101.0, 201.0}, {899.0, 209.0}, 1.0, 1.0}});
  const fs::path p = tmp_dir() / "spurs_rt.csv";
  write_spur_csv(rows, p);
  auto back = read_spur_csv(p);
  REQUIRE(back.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].first == rows[i].first);
    CHECK(back[i].second.left.x == doctest::Approx(rows[i].second.left.x));
    CHECK(back[i].second.right.y == doctest::Approx(rows[i].second.right.y));
    CHECK(back[i].second.conf_left == doctest::Approx(rows[i].second.conf_left));
    CHECK(back[i].second.conf_right == doctest::Approx(rows[i].second.conf_right));
  }
}

TEST_CASE("128-scan spur CSV comes back in scan order") {
  std::vector<std::pair<int, SpurPair>> rows;
  for (int i = 127; i >= 0; --i)
    rows.push_back({i, {{100.0 + i, 200}, {900.0 - i, 210}, 1.0, 1.0}});
  const fs::path p = tmp_dir() / "spurs_128.csv";
  write_spur_csv(rows, p);
  auto back = read_spur_csv(p);
  REQUIRE(back.size() == 128);
  for (int i = 0; i < 128; ++i) CHECK(back[i].first == i);
}

TEST_CASE("manifest round-trips including optional spurs") {
  Manifest m;
  m.scale_x_um = 7.5;
  m.scale_y_um = 10.0;
  m.scans.push_back({0, "scan_000.pgm", SpurPair{{10, 20}, {90, 21}, 0.95, 0.9}});
  m.scans.push_back({1, "scan_001.pgm", std::nullopt});
  const fs::path p = tmp_dir() / "manifest.json";
  write_manifest(m, p);
  Manifest back = read_manifest(p);
  CHECK(back.scale_x_um == doctest::Approx(7.5));
  CHECK(back.scale_y_um == doctest::Approx(10.0));
  REQUIRE(back.scans.size() == 2);
  CHECK(back.scans[0].index == 0);
  CHECK(back.scans[0].mask_path == "scan_000.pgm");
  REQUIRE(back.scans[0].spur.has_value());
  CHECK(back.scans[0].spur->conf_left == doctest::Approx(0.95));
  CHECK(!back.scans[1].spur.has_value());
}

TEST_CASE("broken manifests raise ManifestError") {
  const fs::path p = tmp_dir() / "manifest_bad.json";
  write_raw(p, "{not json");
  CHECK_THROWS_AS(read_manifest(p), ManifestError);
  write_raw(p, "{\"scale_x_um\": 10, \"scans\": []}");  // missing scale_y_um
  CHECK_THROWS_AS(read_manifest(p), ManifestError);
  write_raw(p, "{\"scale_x_um\": 10, \"scale_y_um\": -1, \"scans\": []}");
  CHECK_THROWS_AS(read_manifest(p), ManifestError);
}
