#include "sobolev_glue/sgf.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "sobolev_glue/errors.hpp"

namespace sobolev_glue {

namespace fs = std::filesystem;

fs::path manifest_path(const fs::path& sgf) {
  fs::path m = sgf;
  m += ".manifest";
  return m;
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ParameterError("malformed real '" + std::string(text) + "'");
  return v;
}

std::string serialize_sgf(const NodeField& map) {
  const DomainSpec& dom = map.domain();
  std::string out = "SGF1 ";
  out += to_string(dom.kind());
  out += ' ' + std::to_string(map.nu());
  for (int r : dom.resolution()) out += ' ' + std::to_string(r);
  out += ' ';
  out += to_string(map.target().kind());
  out += '\n';
  for (std::size_t n = 0; n < dom.node_count(); ++n) {
    auto v = map.node(n);
    for (int c = 0; c < map.nu(); ++c) {
      if (c) out += ' ';
      out += format_real(v[c]);
    }
    out += '\n';
  }
  return out;
}

std::string serialize_manifest(const NodeField& map, const std::string& provenance) {
  std::string out;
  out += "constraint_tol: " + format_real(map.constraint_tol()) + '\n';
  out += "provenance: " + provenance + '\n';
  for (int k = 0; k < map.domain().dimension(); ++k) {
    const Axis& a = map.domain().axis(k);
    out += "axis" + std::to_string(k) + ": " + format_real(a.origin) + ' ' +
           format_real(a.length) + ' ' + std::to_string(a.count) + ' ' +
           (a.periodic ? "periodic" : "bounded") + '\n';
  }
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::map<std::string, std::string> parse_manifest(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string value = line.substr(colon + 1);
    const auto start = value.find_first_not_of(" \t");
    value = start == std::string::npos ? "" : value.substr(start);
    while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
    kv[line.substr(0, colon)] = value;
  }
  return kv;
}

// Axes for a kind with unit-length defaults; the manifest may override them.
std::vector<Axis> default_axes(DomainKind kind, const std::vector<int>& res) {
  auto need = [&](std::size_t n) {
    if (res.size() != n) throw IoError("SGF header resolution count does not match kind");
  };
  switch (kind) {
    case DomainKind::Interval: need(1); return DomainSpec::interval(res[0]).axes();
    case DomainKind::Circle: need(1); return DomainSpec::circle(res[0]).axes();
    case DomainKind::Torus: need(2); return DomainSpec::torus(res[0], res[1]).axes();
    case DomainKind::Square2D: need(2); return DomainSpec::square2d(res[0], res[1]).axes();
    case DomainKind::Cube3D:
      need(3);
      return DomainSpec::cube3d(res[0], res[1], res[2]).axes();
    case DomainKind::CollarCircle:
      need(2);
      return DomainSpec::collar_circle(res[0], res[1]).axes();
    case DomainKind::CollarTorus:
      need(3);
      return DomainSpec::collar_torus(res[0], res[1], res[2]).axes();
    case DomainKind::Box: {
      std::vector<Axis> axes;
      for (int r : res) axes.push_back(Axis{0.0, 1.0, r, false});
      return axes;
    }
  }
  return {};
}

}  // namespace

SgfContents parse_sgf(const std::string& body, const std::string* manifest) {
  std::istringstream in(body);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty SGF file");
  std::istringstream hs(header);
  std::vector<std::string> tok;
  for (std::string t; hs >> t;) tok.push_back(t);
  if (tok.size() < 5 || tok[0] != "SGF1") throw IoError("bad SGF header: " + header);

  SgfContents out;
  try {
    const DomainKind kind = domain_kind_from_string(tok[1]);
    const int nu = std::stoi(tok[2]);
    std::vector<int> res;
    for (std::size_t i = 3; i + 1 < tok.size(); ++i) res.push_back(std::stoi(tok[i]));
    out.target = TargetSpec(target_kind_from_string(tok.back()), nu);
    std::vector<Axis> axes = default_axes(kind, res);
    if (manifest) {
      auto kv = parse_manifest(*manifest);
      if (auto it = kv.find("constraint_tol"); it != kv.end())
        out.constraint_tol = parse_real(it->second);
      if (auto it = kv.find("provenance"); it != kv.end()) out.provenance = it->second;
      for (std::size_t k = 0; k < axes.size(); ++k) {
        auto it = kv.find("axis" + std::to_string(k));
        if (it == kv.end()) continue;
        std::istringstream as(it->second);
        std::string origin, length, mode;
        int count = 0;
        as >> origin >> length >> count >> mode;
        if (count != axes[k].count) throw IoError("manifest axis count disagrees with header");
        axes[k].origin = parse_real(origin);
        axes[k].length = parse_real(length);
        axes[k].periodic = (mode == "periodic");
      }
    }
    out.domain = DomainSpec(kind, std::move(axes));
    if (!manifest) out.constraint_tol = default_constraint_tol(out.domain);
  } catch (const std::invalid_argument&) {
    throw IoError("bad SGF header: " + header);
  } catch (const ParameterError& e) {
    throw IoError(std::string("bad SGF header: ") + e.what());
  }

  const std::size_t expected = out.domain.node_count() * out.target.nu();
  out.values.reserve(expected);
  for (std::string t; in >> t;) {
    try {
      out.values.push_back(parse_real(t));
    } catch (const ParameterError&) {
      throw IoError("malformed value in SGF body: " + t);
    }
  }
  if (out.values.size() != expected)
    throw IoError("SGF body holds " + std::to_string(out.values.size()) + " values, expected " +
                  std::to_string(expected));
  return out;
}

void write_sgf(const fs::path& path, const NodeField& map, const std::string& provenance) {
  write_file(path, serialize_sgf(map));
  write_file(manifest_path(path), serialize_manifest(map, provenance));
}

SgfContents read_sgf(const fs::path& path) {
  const std::string body = read_file(path);
  const fs::path mpath = manifest_path(path);
  if (fs::exists(mpath)) {
    const std::string manifest = read_file(mpath);
    return parse_sgf(body, &manifest);
  }
  return parse_sgf(body, nullptr);
}

}  // namespace sobolev_glue
