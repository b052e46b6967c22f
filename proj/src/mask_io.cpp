#include "asq/mask_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace asq {

namespace {

// Reads one PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (!isspace(c)) {
      tok.push_back(static_cast<char>(c));
      break;
    }
  }
  while ((c = in.get()) != EOF && !isspace(c)) tok.push_back(static_cast<char>(c));
  return tok;
}

}  // namespace

LabelMask read_mask(const std::filesystem::path& path, Palette palette) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());

  if (pnm_token(in) != "P5") throw MalformedHeader("not a P5 greymap: " + path.string());
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    throw MalformedHeader("bad P5 header in " + path.string());
  }
  if (maxval <= 0 || maxval > 255) throw MalformedHeader("unsupported maxval");
  if (w < 16 || h < 16) throw DimensionTooSmall("mask smaller than 16x16: " + path.string());

  LabelMask m(w, h, palette);
  in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(m.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(m.data.size()))
    throw MalformedHeader("truncated pixel data in " + path.string());

  const int maxc = palette_max_code(palette);
  for (size_t i = 0; i < m.data.size(); ++i)
    if (m.data[i] > maxc)
      throw IllegalClassCode("illegal class code " + std::to_string(int(m.data[i])) +
                             " at offset " + std::to_string(i) + " in " + path.string());
  return m;
}

void write_mask(const LabelMask& mask, const std::filesystem::path& path) {
  mask.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(mask.data.data()),
            static_cast<std::streamsize>(mask.data.size()));
  if (!out) throw IoFailure("write failed: " + path.string());
}

std::vector<std::pair<int, SpurPair>> read_spur_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());

  struct Half {
    std::optional<Point> pt;
    double conf = 1.0;
  };
  std::map<int, std::pair<Half, Half>> by_scan;  // L, R

  std::string line;
  if (!std::getline(in, line)) throw MalformedHeader("empty spur CSV");
  bool first = true;
  while (first ? true : static_cast<bool>(std::getline(in, line))) {
    if (first) {
      first = false;
      // header line
      if (line.rfind("scan,", 0) == 0) continue;
      throw MalformedHeader("spur CSV missing `scan,side,x,y` header");
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f_scan, f_side, f_x, f_y, f_conf;
    std::getline(ss, f_scan, ',');
    std::getline(ss, f_side, ',');
    std::getline(ss, f_x, ',');
    std::getline(ss, f_y, ',');
    std::getline(ss, f_conf, ',');
    int scan;
    Point p;
    double conf = 1.0;
    try {
      scan = std::stoi(f_scan);
      p.x = std::stod(f_x);
      p.y = std::stod(f_y);
      if (!f_conf.empty()) conf = std::stod(f_conf);
    } catch (const std::exception&) {
      throw MalformedHeader("bad spur CSV row: " + line);
    }
    if (!p.finite() || !std::isfinite(conf)) throw NonFiniteCoordinate("in row: " + line);
    auto& entry = by_scan[scan];
    if (f_side == "L") {
      entry.first.pt = p;
      entry.first.conf = conf;
    } else if (f_side == "R") {
      entry.second.pt = p;
      entry.second.conf = conf;
    } else {
      throw MalformedHeader("spur side must be L or R: " + line);
    }
  }

  std::vector<std::pair<int, SpurPair>> out;
  for (const auto& [scan, halves] : by_scan) {
    if (!halves.first.pt || !halves.second.pt)
      throw MissingSide("scan " + std::to_string(scan) + " missing a spur side");
    SpurPair sp{*halves.first.pt, *halves.second.pt, halves.first.conf, halves.second.conf};
    sp.validate();
    out.emplace_back(scan, sp);
  }
  return out;
}

void write_spur_csv(const std::vector<std::pair<int, SpurPair>>& rows,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << "scan,side,x,y,conf\n";
  char buf[160];
  for (const auto& [scan, sp] : rows) {
    snprintf(buf, sizeof buf, "%d,L,%.4f,%.4f,%.4f\n", scan, sp.left.x, sp.left.y, sp.conf_left);
    out << buf;
    snprintf(buf, sizeof buf, "%d,R,%.4f,%.4f,%.4f\n", scan, sp.right.x, sp.right.y, sp.conf_right);
    out << buf;
  }
  if (!out) throw IoFailure("write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ManifestError("bad manifest JSON: " + std::string(e.what()));
  }
  Manifest m;
  try {
    m.scale_x_um = j.at("scale_x_um").get<double>();
    m.scale_y_um = j.at("scale_y_um").get<double>();
    for (const auto& js : j.at("scans")) {
      ManifestScan s;
      s.index = js.at("index").get<int>();
      s.mask_path = js.at("mask_path").get<std::string>();
      if (js.contains("spur")) {
        const auto& sp = js["spur"];
        SpurPair pair;
        pair.left = {sp.at("left").at("x").get<double>(), sp.at("left").at("y").get<double>()};
        pair.right = {sp.at("right").at("x").get<double>(), sp.at("right").at("y").get<double>()};
        pair.conf_left = sp.at("left").value("conf", 1.0);
        pair.conf_right = sp.at("right").value("conf", 1.0);
        pair.validate();
        s.spur = pair;
      }
      m.scans.push_back(std::move(s));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ManifestError("manifest schema error: " + std::string(e.what()));
  }
  if (!(m.scale_x_um > 0) || !(m.scale_y_um > 0))
    throw ManifestError("manifest pixel scales must be positive");
  return m;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["scale_x_um"] = m.scale_x_um;
  j["scale_y_um"] = m.scale_y_um;
  j["scans"] = nlohmann::json::array();
  for (const auto& s : m.scans) {
    nlohmann::json js;
    js["index"] = s.index;
    js["mask_path"] = s.mask_path;
    if (s.spur) {
      js["spur"] = {
          {"left", {{"x", s.spur->left.x}, {"y", s.spur->left.y}, {"conf", s.spur->conf_left}}},
          {"right", {{"x", s.spur->right.x}, {"y", s.spur->right.y}, {"conf", s.spur->conf_right}}}};
    }
    j["scans"].push_back(std::move(js));
  }
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace asq
