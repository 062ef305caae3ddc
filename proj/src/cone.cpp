#include "sobolev_glue/cone.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sobolev_glue/core.hpp"
#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/parallel.hpp"
#include "sobolev_glue/sgf.hpp"

namespace sobolev_glue {

namespace {

constexpr double kUnitSlack = 1e-12;

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

SampledSet::SampledSet(int m, int res, bool open, std::vector<std::uint8_t> bits)
    : m_(m), res_(res), open_(open), bits_(std::move(bits)) {
  if (m != 1 && m != 2) throw ParameterError("sampled sets support m in {1, 2}");
  if (res < 3) throw ParameterError("sampled set resolution must be >= 3");
  const std::size_t expected = m == 1 ? static_cast<std::size_t>(res)
                                      : static_cast<std::size_t>(res) * res;
  if (bits_.size() != expected) throw ParameterError("indicator size does not match grid");
}

SampledSet SampledSet::from_predicate(int m, int res, bool open,
                                      const std::function<bool(std::span<const double>)>& pred) {
  const std::size_t n = m == 1 ? static_cast<std::size_t>(res)
                               : static_cast<std::size_t>(res) * res;
  std::vector<std::uint8_t> bits(n);
  SampledSet probe(m, res, open, std::vector<std::uint8_t>(n));
  double x[2];
  for (std::size_t i = 0; i < n; ++i) {
    probe.node_coords(i, std::span<double>(x, m));
    bits[i] = pred(std::span<const double>(x, m)) ? 1 : 0;
  }
  return SampledSet(m, res, open, std::move(bits));
}

void SampledSet::node_coords(std::size_t flat, std::span<double> x) const {
  if (m_ == 1) {
    x[0] = coord(static_cast<int>(flat));
  } else {
    x[0] = coord(static_cast<int>(flat / res_));
    x[1] = coord(static_cast<int>(flat % res_));
  }
}

bool SampledSet::contains_nearest(std::span<const double> x) const {
  std::size_t flat = 0;
  for (int k = 0; k < m_; ++k) {
    const long i = std::lround((x[k] + 1.0) / spacing());
    if (i < 0 || i >= res_) return false;
    flat = flat * res_ + static_cast<std::size_t>(i);
  }
  return at(flat);
}

bool SampledSet::interior(std::size_t flat) const {
  if (!at(flat)) return false;
  if (m_ == 1) {
    const int i = static_cast<int>(flat);
    return (i == 0 || at(i - 1)) && (i == res_ - 1 || at(i + 1));
  }
  const int i = static_cast<int>(flat / res_), j = static_cast<int>(flat % res_);
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) {
      const int a = i + di, b = j + dj;
      if (a < 0 || a >= res_ || b < 0 || b >= res_) continue;
      if (!at(static_cast<std::size_t>(a) * res_ + b)) return false;
    }
  return true;
}

int ConeCertificate::bin_of(std::span<const double> x) const {
  if (m == 1) return x[0] < 0.0 ? 0 : 1;
  const double step = kTwoPi / direction_res;
  long b = std::lround(std::atan2(x[1], x[0]) / step);
  b %= direction_res;
  if (b < 0) b += direction_res;
  return static_cast<int>(b);
}

std::size_t ConeCertificate::cone_size() const {
  return static_cast<std::size_t>(std::count(directions.begin(), directions.end(), 1));
}

int default_direction_res(int m, int set_res) {
  if (m == 1) return 2;
  const double h = 2.0 / (set_res - 1);
  return std::clamp(static_cast<int>(std::lround(kTwoPi / (2.0 * h))), 16, 1024);
}

bool check_boundary_containment(const SampledSet& F, const SampledSet& G) {
  if (F.dimension() != G.dimension() || F.resolution() != G.resolution())
    throw DomainError("F and G must share dimension and resolution");
  const double h = F.spacing();
  double x[2];
  for (std::size_t n = 0; n < F.node_count(); ++n) {
    if (!F.at(n)) continue;
    F.node_coords(n, std::span<double>(x, F.dimension()));
    const double rho = norm(std::span<const double>(x, F.dimension()));
    if (rho > 1.0 + kUnitSlack || rho < 1.0 - h) continue;
    if (!G.interior(n)) return false;
  }
  return true;
}

namespace {

// For each direction bin, the outermost radius at which the widened ray
// samples leave G (-1 if they never do down to the origin).
std::vector<double> direction_reach(const SampledSet& G, int direction_res) {
  const int m = G.dimension();
  const double delta = 0.25 * G.spacing();
  const int radial = static_cast<int>(std::ceil(1.0 / delta));
  std::vector<double> reach(direction_res, -1.0);
  if (m == 1) {
    for (int b = 0; b < 2; ++b) {
      const double sign = b == 0 ? -1.0 : 1.0;
      for (int j = 0; j <= radial; ++j) {
        const double t = std::max(0.0, 1.0 - j * delta);
        const double x = sign * t;
        if (!G.contains_nearest(std::span<const double>(&x, 1))) {
          reach[b] = t;
          break;
        }
      }
    }
    return reach;
  }
  const double step = kTwoPi / direction_res;
  const int angular = std::max(1, static_cast<int>(std::ceil(3.0 * step / delta)));
  parallel_for(static_cast<std::size_t>(direction_res), [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const double center = static_cast<double>(b) * step;
      bool done = false;
      for (int j = 0; j <= radial && !done; ++j) {
        const double t = std::max(0.0, 1.0 - j * delta);
        for (int a = 0; a <= angular; ++a) {
          const double phi = center - 1.5 * step + 3.0 * step * a / angular;
          const double x[2] = {t * std::cos(phi), t * std::sin(phi)};
          if (!G.contains_nearest(std::span<const double>(x, 2))) {
            reach[b] = t;
            done = true;
            break;
          }
        }
      }
    }
  });
  return reach;
}

std::vector<std::uint8_t> directions_from_reach(const std::vector<double>& reach, double r,
                                                double delta) {
  std::vector<std::uint8_t> dirs(reach.size());
  for (std::size_t b = 0; b < reach.size(); ++b) dirs[b] = reach[b] + delta < r ? 1 : 0;
  return dirs;
}

std::vector<std::uint8_t> margin_of(const std::vector<std::uint8_t>& dirs, int m) {
  std::vector<std::uint8_t> margin(dirs.size(), 0);
  if (m == 1) return margin;
  const std::size_t n = dirs.size();
  for (std::size_t b = 0; b < n; ++b) {
    if (dirs[b]) continue;
    if (dirs[(b + 1) % n] || dirs[(b + n - 1) % n]) margin[b] = 1;
  }
  return margin;
}

}  // namespace

std::vector<std::uint8_t> cone_directions(const SampledSet& G, double r, int direction_res) {
  if (G.dimension() == 1 && direction_res != 2)
    throw ParameterError("m = 1 cones use exactly two directions");
  if (G.dimension() == 2 && direction_res < 8)
    throw ParameterError("m = 2 cones need at least 8 directions");
  return directions_from_reach(direction_reach(G, direction_res), r, 0.25 * G.spacing());
}

ConeCertificate find_cone(const SampledSet& F, const SampledSet& G, const ConeOptions& options) {
  if (options.ladder_steps < 2) throw ParameterError("ladder needs at least 2 steps");
  if (!check_boundary_containment(F, G))
    throw PreconditionError("boundary hypothesis F ∩ ∂B_1 ⊆ G fails on the samples");
  const int m = F.dimension();
  const int ndir = options.direction_res.value_or(default_direction_res(m, F.resolution()));
  if (m == 1 && ndir != 2) throw ParameterError("m = 1 cones use exactly two directions");
  if (m == 2 && ndir < 8) throw ParameterError("m = 2 cones need at least 8 directions");

  ConeCertificate cert;
  cert.m = m;
  cert.direction_res = ndir;
  const std::vector<double> reach = direction_reach(G, ndir);
  const double delta = 0.25 * G.spacing();

  struct Sample {
    double rho;
    int bin;
  };
  std::vector<Sample> f_samples;
  double x[2];
  for (std::size_t n = 0; n < F.node_count(); ++n) {
    if (!F.at(n)) continue;
    F.node_coords(n, std::span<double>(x, m));
    const double rho = norm(std::span<const double>(x, m));
    if (rho > 1.0 + kUnitSlack || rho == 0.0) continue;
    f_samples.push_back({rho, cert.bin_of(std::span<const double>(x, m))});
  }

  // Ladder radii largest first; with max_radius, those up to the cap come
  // first and the larger ones follow in increasing order.
  const int K = options.ladder_steps;
  std::vector<double> ladder;
  for (int k = 1; k < K; ++k) ladder.push_back(1.0 - static_cast<double>(k) / K);
  if (options.max_radius) {
    const double cap = *options.max_radius;
    std::stable_partition(ladder.begin(), ladder.end(), [&](double r) { return r <= cap; });
    const auto above = std::find_if(ladder.begin(), ladder.end(), [&](double r) { return r > cap; });
    std::reverse(above, ladder.end());
  }
  for (const double r : ladder) {
    auto dirs = directions_from_reach(reach, r, delta);
    const bool captured = std::all_of(f_samples.begin(), f_samples.end(), [&](const Sample& s) {
      return s.rho < r || dirs[s.bin];
    });
    if (!captured) continue;
    cert.r = r;
    cert.margin = margin_of(dirs, m);
    cert.directions = std::move(dirs);
    cert.verified = verify_cone(F, G, cert);
    if (cert.verified) return cert;
  }
  throw ResolutionError("no radius on the ladder yields a verified cone; refine the grids");
}

bool verify_cone(const SampledSet& F, const SampledSet& G, const ConeCertificate& cert) {
  if (F.dimension() != G.dimension() || F.resolution() != G.resolution()) return false;
  if (cert.m != F.dimension()) return false;
  if (!(cert.r > 0.0 && cert.r < 1.0)) return false;
  if (cert.directions.size() != static_cast<std::size_t>(cert.direction_res)) return false;
  const int m = F.dimension();
  double x[2];
  for (std::size_t n = 0; n < G.node_count(); ++n) {
    G.node_coords(n, std::span<double>(x, m));
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += x[k] * x[k];
    const double rho = std::sqrt(s);
    if (rho < cert.r || rho > 1.0 + kUnitSlack) continue;
    const bool in_cone = cert.directions[cert.bin_of(std::span<const double>(x, m))] != 0;
    if (F.at(n) && !in_cone) return false;  // F \ B_r ⊆ C
    if (in_cone && !G.at(n)) return false;  // C ∩ (B̄_1 \ B_r) ⊆ G
  }
  return true;
}

std::string serialize_set(const SampledSet& set) {
  std::string out = "SET1 " + std::to_string(set.dimension()) + ' ' +
                    std::to_string(set.resolution()) + ' ' +
                    (set.is_open() ? "open" : "closed") + '\n';
  const std::size_t row = static_cast<std::size_t>(set.resolution());
  for (std::size_t i = 0; i < set.node_count(); ++i) {
    out += set.at(i) ? '1' : '0';
    if ((i + 1) % row == 0) out += '\n';
  }
  return out;
}

SampledSet parse_set(const std::string& text) {
  std::istringstream in(text);
  std::string magic, mode;
  int m = 0, res = 0;
  if (!(in >> magic >> m >> res >> mode) || magic != "SET1" ||
      (mode != "open" && mode != "closed"))
    throw IoError("bad SET1 header");
  std::vector<std::uint8_t> bits;
  for (char c; in.get(c);) {
    if (c == '0' || c == '1') bits.push_back(c == '1');
    else if (!std::isspace(static_cast<unsigned char>(c))) throw IoError("bad indicator character");
  }
  try {
    return SampledSet(m, res, mode == "open", std::move(bits));
  } catch (const ParameterError& e) {
    throw IoError(std::string("bad set file: ") + e.what());
  }
}

std::string serialize_cone(const ConeCertificate& cert) {
  std::string out = "CONE1 " + format_real(cert.r) + ' ' + std::to_string(cert.direction_res) + '\n';
  for (auto b : cert.directions) out += b ? '1' : '0';
  out += '\n';
  return out;
}

ConeCertificate parse_cone(const std::string& text) {
  std::istringstream in(text);
  std::string magic, r;
  int ndir = 0;
  if (!(in >> magic >> r >> ndir) || magic != "CONE1" || ndir < 2)
    throw IoError("bad CONE1 header");
  ConeCertificate cert;
  cert.m = ndir == 2 ? 1 : 2;
  cert.direction_res = ndir;
  try {
    cert.r = parse_real(r);
  } catch (const ParameterError&) {
    throw IoError("bad CONE1 radius");
  }
  for (char c; in.get(c);) {
    if (c == '0' || c == '1') cert.directions.push_back(c == '1');
    else if (!std::isspace(static_cast<unsigned char>(c))) throw IoError("bad direction character");
  }
  if (cert.directions.size() != static_cast<std::size_t>(ndir))
    throw IoError("direction bit count does not match header");
  cert.margin = margin_of(cert.directions, cert.m);
  return cert;
}

}  // namespace sobolev_glue
