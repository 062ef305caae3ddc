#include "sobolev_glue/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sobolev_glue/errors.hpp"

namespace sobolev_glue {

namespace {

constexpr std::array<std::pair<DomainKind, std::string_view>, 8> kDomainNames{{
    {DomainKind::Interval, "interval"},
    {DomainKind::Circle, "circle"},
    {DomainKind::Torus, "torus"},
    {DomainKind::Square2D, "square2d"},
    {DomainKind::Cube3D, "cube3d"},
    {DomainKind::CollarCircle, "collar-circle"},
    {DomainKind::CollarTorus, "collar-torus"},
    {DomainKind::Box, "box"},
}};

constexpr std::array<std::pair<TargetKind, std::string_view>, 3> kTargetNames{{
    {TargetKind::Euclidean, "euclidean"},
    {TargetKind::Circle, "circle"},
    {TargetKind::Sphere, "sphere"},
}};

Axis segment(int n) { return Axis{0.0, 1.0, n, false}; }
Axis loop(int n, double length) { return Axis{0.0, length, n, true}; }

}  // namespace

std::string_view to_string(DomainKind kind) {
  for (const auto& [k, name] : kDomainNames)
    if (k == kind) return name;
  return "box";
}

DomainKind domain_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kDomainNames)
    if (n == name) return k;
  throw ParameterError("unknown domain kind '" + std::string(name) + "'");
}

std::string_view to_string(TargetKind kind) {
  for (const auto& [k, name] : kTargetNames)
    if (k == kind) return name;
  return "euclidean";
}

TargetKind target_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kTargetNames)
    if (n == name) return k;
  throw ParameterError("unknown target kind '" + std::string(name) + "'");
}

DomainSpec::DomainSpec(DomainKind kind, std::vector<Axis> axes)
    : kind_(kind), axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 3)
    throw ParameterError("domains must have 1 to 3 axes");
  for (const Axis& a : axes_) {
    if (a.count < (a.periodic ? 3 : 2))
      throw ParameterError("axis resolution too small (need >= 2, or >= 3 if periodic)");
    if (!(a.length > 0.0) || !std::isfinite(a.length) || !std::isfinite(a.origin))
      throw ParameterError("axis length must be positive and finite");
  }
  strides_.assign(axes_.size(), 1);
  for (int k = static_cast<int>(axes_.size()) - 2; k >= 0; --k)
    strides_[k] = strides_[k + 1] * static_cast<std::size_t>(axes_[k + 1].count);
  node_count_ = strides_[0] * static_cast<std::size_t>(axes_[0].count);
}

DomainSpec DomainSpec::interval(int n) { return {DomainKind::Interval, {segment(n)}}; }
DomainSpec DomainSpec::circle(int n) { return {DomainKind::Circle, {loop(n, kTwoPi)}}; }
DomainSpec DomainSpec::torus(int n0, int n1) {
  return {DomainKind::Torus, {loop(n0, 1.0), loop(n1, 1.0)}};
}
DomainSpec DomainSpec::square2d(int n0, int n1) {
  return {DomainKind::Square2D, {segment(n0), segment(n1)}};
}
DomainSpec DomainSpec::cube3d(int n_w, int n0, int n1) {
  return {DomainKind::Cube3D, {loop(n_w, 1.0), segment(n0), segment(n1)}};
}
DomainSpec DomainSpec::collar_circle(int n_theta, int n_depth, double depth) {
  return {DomainKind::CollarCircle,
          {loop(n_theta, kTwoPi), Axis{0.0, depth, n_depth, false}}};
}
DomainSpec DomainSpec::collar_torus(int n0, int n1, int n_depth, double depth) {
  return {DomainKind::CollarTorus,
          {loop(n0, 1.0), loop(n1, 1.0), Axis{0.0, depth, n_depth, false}}};
}
DomainSpec DomainSpec::box(std::vector<Axis> axes) {
  return {DomainKind::Box, std::move(axes)};
}

std::vector<int> DomainSpec::resolution() const {
  std::vector<int> r;
  for (const Axis& a : axes_) r.push_back(a.count);
  return r;
}

std::size_t DomainSpec::cell_count() const noexcept {
  std::size_t c = 1;
  for (const Axis& a : axes_) c *= static_cast<std::size_t>(a.cells());
  return c;
}

double DomainSpec::cell_volume() const noexcept {
  double v = 1.0;
  for (const Axis& a : axes_) v *= a.spacing();
  return v;
}

double DomainSpec::max_spacing() const noexcept {
  double h = 0.0;
  for (const Axis& a : axes_) h = std::max(h, a.spacing());
  return h;
}

double DomainSpec::volume() const noexcept {
  double v = 1.0;
  for (const Axis& a : axes_) v *= a.length;
  return v;
}

std::size_t DomainSpec::flat_index(std::span<const int> idx) const {
  std::size_t f = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    int i = idx[k];
    const Axis& a = axes_[k];
    if (a.periodic) {
      i %= a.count;
      if (i < 0) i += a.count;
    } else if (i < 0 || i >= a.count) {
      throw DomainError("node index out of range");
    }
    f += static_cast<std::size_t>(i) * strides_[k];
  }
  return f;
}

void DomainSpec::multi_index(std::size_t flat, std::span<int> idx) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    idx[k] = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
  }
}

void DomainSpec::node_coords(std::size_t flat, std::span<double> x) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const int i = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
    x[k] = axes_[k].coord(i);
  }
}

double DomainSpec::node_weight(std::size_t flat) const {
  double w = 1.0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const int i = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
    const Axis& a = axes_[k];
    double wk = a.spacing();
    if (!a.periodic && (i == 0 || i == a.count - 1)) wk *= 0.5;
    w *= wk;
  }
  return w;
}

bool DomainSpec::is_valid_face(const Face& face) const noexcept {
  return face.axis >= 0 && face.axis < dimension() && !axes_[face.axis].periodic &&
         dimension() >= 2;
}

DomainSpec DomainSpec::face_domain(const Face& face) const {
  if (!is_valid_face(face)) throw DomainError("invalid face for this domain");
  std::vector<Axis> rest;
  for (int k = 0; k < dimension(); ++k)
    if (k != face.axis) rest.push_back(axes_[k]);
  const bool all_periodic =
      std::all_of(rest.begin(), rest.end(), [](const Axis& a) { return a.periodic; });
  if (all_periodic && rest.size() == 1 && rest[0] == loop(rest[0].count, kTwoPi))
    return {DomainKind::Circle, rest};
  if (all_periodic && rest.size() == 2 && rest[0] == loop(rest[0].count, 1.0) &&
      rest[1] == loop(rest[1].count, 1.0))
    return {DomainKind::Torus, rest};
  if (rest.size() == 1 && rest[0] == segment(rest[0].count))
    return {DomainKind::Interval, rest};
  if (rest.size() == 2 && rest[0] == segment(rest[0].count) &&
      rest[1] == segment(rest[1].count))
    return {DomainKind::Square2D, rest};
  return {DomainKind::Box, rest};
}

TargetSpec::TargetSpec(TargetKind kind, int nu) : kind_(kind), nu_(nu) {
  if (nu < 1) throw ParameterError("target dimension must be positive");
  if (kind == TargetKind::Circle && nu != 2)
    throw ParameterError("circle target requires nu = 2");
  if (kind == TargetKind::Sphere && nu < 2)
    throw ParameterError("sphere target requires nu >= 2");
}

double TargetSpec::distance(std::span<const double> y) const {
  if (kind_ == TargetKind::Euclidean) return 0.0;
  double s = 0.0;
  for (double v : y) s += v * v;
  return std::abs(std::sqrt(s) - 1.0);
}

void TargetSpec::project(std::span<double> y) const {
  if (kind_ == TargetKind::Euclidean) return;
  double s = 0.0;
  for (double v : y) s += v * v;
  const double norm = std::sqrt(s);
  if (!(norm > 0.0)) throw SingularityError("projection onto N undefined at the origin");
  for (double& v : y) v /= norm;
}

std::vector<double> project_to_target(std::span<const double> y,
                                      const TargetSpec& target) {
  if (static_cast<int>(y.size()) != target.nu())
    throw ParameterError("vector dimension does not match target");
  std::vector<double> out(y.begin(), y.end());
  target.project(out);
  return out;
}

double default_constraint_tol(const DomainSpec& domain) {
  return 10.0 * domain.max_spacing();
}

NodeField::NodeField(DomainSpec domain, TargetSpec target, std::vector<double> values,
                     std::optional<double> constraint_tol)
    : domain_(std::move(domain)),
      target_(target),
      values_(std::move(values)),
      constraint_tol_(constraint_tol.value_or(default_constraint_tol(domain_))) {
  if (values_.size() != domain_.node_count() * static_cast<std::size_t>(target_.nu()))
    throw ParameterError("value array length does not match grid size x nu");
  if (!(constraint_tol_ >= 0.0)) throw ParameterError("constraint_tol must be >= 0");
  for (double v : values_)
    if (!std::isfinite(v)) throw ParameterError("map values must be finite");
  if (target_.is_manifold()) {
    const double worst = max_constraint_violation();
    if (worst > constraint_tol_) {
      std::ostringstream msg;
      msg << "map leaves the target manifold: max dist " << worst << " > tol "
          << constraint_tol_;
      throw PreconditionError(msg.str());
    }
  }
}

double NodeField::max_constraint_violation() const {
  double worst = 0.0;
  for (std::size_t n = 0; n < domain_.node_count(); ++n)
    worst = std::max(worst, target_.distance(node(n)));
  return worst;
}

std::vector<double> NodeField::evaluate(std::span<const double> point) const {
  std::vector<double> out(nu());
  evaluate_into(point, out);
  return out;
}

void NodeField::evaluate_into(std::span<const double> point, std::span<double> out) const {
  const int dim = domain_.dimension();
  if (static_cast<int>(point.size()) != dim)
    throw DomainError("point dimension does not match domain");
  std::array<std::size_t, 3> lo{}, hi{};
  std::array<double, 3> frac{};
  for (int k = 0; k < dim; ++k) {
    const Axis& a = domain_.axis(k);
    const double h = a.spacing();
    double u = (point[k] - a.origin) / h;
    int i = 0;
    if (a.periodic) {
      u = std::fmod(u, static_cast<double>(a.count));
      if (u < 0.0) u += a.count;
      i = std::min(static_cast<int>(std::floor(u)), a.count - 1);
      frac[k] = u - i;
      lo[k] = static_cast<std::size_t>(i) * domain_.stride(k);
      hi[k] = static_cast<std::size_t>((i + 1) % a.count) * domain_.stride(k);
    } else {
      const double slack = 1e-9 * (a.count - 1);
      if (!(u >= -slack && u <= (a.count - 1) + slack))
        throw DomainError("evaluation point outside the domain");
      u = std::clamp(u, 0.0, static_cast<double>(a.count - 1));
      i = std::min(static_cast<int>(std::floor(u)), a.count - 2);
      frac[k] = u - i;
      lo[k] = static_cast<std::size_t>(i) * domain_.stride(k);
      hi[k] = lo[k] + domain_.stride(k);
    }
  }
  const int nu_ = nu();
  std::fill(out.begin(), out.end(), 0.0);
  for (int corner = 0; corner < (1 << dim); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < dim; ++k) {
      const bool up = (corner >> k) & 1;
      w *= up ? frac[k] : 1.0 - frac[k];
      flat += up ? hi[k] : lo[k];
    }
    if (w == 0.0) continue;
    const double* v = values_.data() + flat * nu_;
    for (int c = 0; c < nu_; ++c) out[c] += w * v[c];
  }
}

std::vector<double> evaluate(const NodeField& map, std::span<const double> point) {
  return map.evaluate(point);
}

namespace {

// Visits (face-flat, volume-flat) index pairs of a face layer.
template <class Fn>
void for_each_face_node(const DomainSpec& domain, const Face& face, const DomainSpec& fdom,
                        Fn&& fn) {
  const int layer = face.high ? domain.axis(face.axis).count - 1 : 0;
  std::vector<int> fidx(fdom.dimension()), vidx(domain.dimension());
  for (std::size_t f = 0; f < fdom.node_count(); ++f) {
    fdom.multi_index(f, fidx);
    for (int k = 0, j = 0; k < domain.dimension(); ++k)
      vidx[k] = (k == face.axis) ? layer : fidx[j++];
    fn(f, domain.flat_index(vidx));
  }
}

}  // namespace

TraceMap extract_trace(const GridMap& map, const Face& face) {
  const DomainSpec& dom = map.domain();
  if (!dom.is_valid_face(face)) throw DomainError("face identifier invalid for this domain");
  DomainSpec fdom = dom.face_domain(face);
  const int nu = map.nu();
  std::vector<double> vals(fdom.node_count() * nu);
  for_each_face_node(dom, face, fdom, [&](std::size_t f, std::size_t v) {
    auto src = map.node(v);
    std::copy(src.begin(), src.end(), vals.begin() + static_cast<std::ptrdiff_t>(f * nu));
  });
  return TraceMap(std::move(fdom), map.target(), std::move(vals), map.constraint_tol());
}

GridMap set_boundary(const GridMap& map, const Face& face, const TraceMap& trace) {
  const DomainSpec& dom = map.domain();
  if (!dom.is_valid_face(face)) throw DomainError("face identifier invalid for this domain");
  const DomainSpec fdom = dom.face_domain(face);
  if (fdom.axes() != trace.domain().axes())
    throw DomainError("trace grid does not match the face grid");
  if (!(trace.target() == map.target())) throw DomainError("trace target differs");
  const int nu = map.nu();
  std::vector<double> vals(map.values().begin(), map.values().end());
  for_each_face_node(dom, face, fdom, [&](std::size_t f, std::size_t v) {
    auto src = trace.node(f);
    std::copy(src.begin(), src.end(), vals.begin() + static_cast<std::ptrdiff_t>(v * nu));
  });
  return GridMap(dom, map.target(), std::move(vals), map.constraint_tol());
}

double sup_distance(const NodeField& a, const NodeField& b) {
  if (a.domain().axes() != b.domain().axes() || a.nu() != b.nu())
    throw DomainError("sup distance needs maps on the same grid");
  double worst = 0.0;
  for (std::size_t n = 0; n < a.domain().node_count(); ++n) {
    auto x = a.node(n), y = b.node(n);
    double s = 0.0;
    for (int c = 0; c < a.nu(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

}  // namespace sobolev_glue
