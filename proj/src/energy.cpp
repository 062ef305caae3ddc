#include "sobolev_glue/energy.hpp"

#include <cmath>

#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/kernels.hpp"
#include "sobolev_glue/parallel.hpp"

namespace sobolev_glue {

namespace {

void require_dirichlet_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("p must lie in (1, inf)");
}

}  // namespace

PenaltySpec PenaltySpec::distance_power(const TargetSpec& manifold, double eps, double power) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("penalty eps must be positive");
  if (!(power >= 1.0)) throw ParameterError("penalty power must be >= 1");
  PenaltySpec spec;
  spec.kind_ = Kind::DistancePower;
  spec.eps_ = eps;
  spec.power_ = power;
  spec.manifold_ = manifold;
  return spec;
}

double PenaltySpec::value(std::span<const double> y) const {
  if (kind_ == Kind::None) return 0.0;
  const double d = manifold_.distance(y);
  return d == 0.0 ? 0.0 : std::pow(d / eps_, power_);
}

void PenaltySpec::add_gradient(std::span<const double> y, double weight,
                               std::span<double> grad) const {
  if (kind_ == Kind::None || !manifold_.is_manifold()) return;
  double s = 0.0;
  for (double v : y) s += v * v;
  const double norm = std::sqrt(s);
  if (norm == 0.0) return;
  const double signed_dist = norm - 1.0;
  const double d = std::abs(signed_dist);
  if (d == 0.0) return;
  // d/dy (d/eps)^q = q d^(q-1) / eps^q * sign(|y|-1) * y/|y|
  const double coef = weight * power_ * std::pow(d, power_ - 1.0) / std::pow(eps_, power_) *
                      (signed_dist > 0.0 ? 1.0 : -1.0) / norm;
  for (std::size_t c = 0; c < y.size(); ++c) grad[c] += coef * y[c];
}

DirichletOperator::DirichletOperator(DomainSpec domain, int nu)
    : domain_(std::move(domain)), nu_(nu) {
  const int dim = domain_.dimension();
  const std::size_t ncell = domain_.cell_count();
  low_.reserve(ncell);
  high_.assign(dim, {});
  for (auto& h : high_) h.reserve(ncell);
  std::vector<int> cidx(dim, 0), nidx(dim);
  for (std::size_t c = 0; c < ncell; ++c) {
    low_.push_back(domain_.flat_index(cidx));
    for (int k = 0; k < dim; ++k) {
      nidx = cidx;
      nidx[k] += 1;  // flat_index wraps periodic axes
      high_[k].push_back(domain_.flat_index(nidx));
    }
    for (int k = dim - 1; k >= 0; --k) {
      if (++cidx[k] < domain_.axis(k).cells()) break;
      cidx[k] = 0;
    }
  }
}

double DirichletOperator::energy(std::span<const double> values, double p) const {
  return evaluate(values, p, nullptr);
}

double DirichletOperator::energy_and_gradient(std::span<const double> values, double p,
                                              std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  return evaluate(values, p, grad.data());
}

double DirichletOperator::evaluate(std::span<const double> values, double p,
                                   double* grad) const {
  require_dirichlet_p(p);
  if (values.size() != domain_.node_count() * static_cast<std::size_t>(nu_))
    throw DomainError("value array does not match the operator's grid");
  const auto& kern = kernels::active_kernels();
  const int dim = domain_.dimension();
  const std::size_t ncell = low_.size();
  std::vector<double> sq(ncell, 0.0), hi(ncell), lo(ncell);
  std::vector<double> diffs(grad ? ncell * dim * nu_ : ncell);
  for (int k = 0; k < dim; ++k) {
    const double inv_h = 1.0 / domain_.axis(k).spacing();
    for (int c = 0; c < nu_; ++c) {
      for (std::size_t i = 0; i < ncell; ++i) {
        hi[i] = values[high_[k][i] * nu_ + c];
        lo[i] = values[low_[i] * nu_ + c];
      }
      double* diff = grad ? diffs.data() + (k * nu_ + c) * ncell : diffs.data();
      kern.forward_diff_sq(hi.data(), lo.data(), ncell, inv_h, diff, sq.data());
    }
  }
  std::vector<double> weights(grad ? ncell : 0);
  const double e = kern.dirichlet_weights(sq.data(), ncell, p, domain_.cell_volume(),
                                          grad ? weights.data() : nullptr);
  if (grad) {
    for (int k = 0; k < dim; ++k) {
      const double inv_h = 1.0 / domain_.axis(k).spacing();
      for (int c = 0; c < nu_; ++c) {
        const double* diff = diffs.data() + (k * nu_ + c) * ncell;
        for (std::size_t i = 0; i < ncell; ++i) {
          const double g = weights[i] * diff[i] * inv_h;
          grad[high_[k][i] * nu_ + c] += g;
          grad[low_[i] * nu_ + c] -= g;
        }
      }
    }
  }
  return e;
}

double penalty_energy(const DomainSpec& domain, std::span<const double> values,
                      const PenaltySpec& penalty, double* grad) {
  if (penalty.kind() == PenaltySpec::Kind::None) return 0.0;
  const int nu = penalty.manifold().nu();
  if (values.size() != domain.node_count() * static_cast<std::size_t>(nu))
    throw ParameterError("penalty manifold dimension does not match the map");
  double sum = 0.0;
  for (std::size_t n = 0; n < domain.node_count(); ++n) {
    const auto y = values.subspan(n * nu, nu);
    const double w = domain.node_weight(n);
    sum += w * penalty.value(y);
    if (grad) penalty.add_gradient(y, w, std::span<double>(grad + n * nu, nu));
  }
  return sum;
}

EnergyReport dirichlet_p_energy(const NodeField& map, double p) {
  require_dirichlet_p(p);
  DirichletOperator op(map.domain(), map.nu());
  return EnergyReport{op.energy(map.values(), p), p, std::nullopt,
                      map.domain().resolution(), "forward-difference cell sum"};
}

namespace {

// Integral over one cell Q x Q of |G (x - y)|^p |x - y|^(-(sp+2)) for an
// affine map with Jacobian columns g1, g2: polar coordinates around x - y,
// radial part in closed form, angular part by the midpoint rule.
class SelfCell2D {
 public:
  SelfCell2D(double h1, double h2, double s, double p) : p_(p) {
    const double beta = p - s * p - 1.0;  // radial power after the Jacobian rho
    constexpr int kAngles = 1024;
    dphi_ = kTwoPi / kAngles;
    for (int q = 0; q < kAngles; ++q) {
      const double phi = (q + 0.5) * dphi_;
      const double a = std::abs(std::cos(phi)), b = std::abs(std::sin(phi));
      const double R = std::min(a > 0 ? h1 / a : HUGE_VAL, b > 0 ? h2 / b : HUGE_VAL);
      const double radial = h1 * h2 * std::pow(R, beta + 1) / (beta + 1) -
                            (a * h2 + b * h1) * std::pow(R, beta + 2) / (beta + 2) +
                            a * b * std::pow(R, beta + 3) / (beta + 3);
      cos_.push_back(std::cos(phi));
      sin_.push_back(std::sin(phi));
      radial_.push_back(radial);
    }
  }

  double operator()(std::span<const double> g1, std::span<const double> g2) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < radial_.size(); ++q) {
      double n2 = 0.0;
      for (std::size_t c = 0; c < g1.size(); ++c) {
        const double v = g1[c] * cos_[q] + g2[c] * sin_[q];
        n2 += v * v;
      }
      if (n2 > 0.0) sum += std::pow(n2, 0.5 * p_) * radial_[q];
    }
    return sum * dphi_;
  }

 private:
  double p_;
  double dphi_;
  std::vector<double> cos_, sin_, radial_;
};

}  // namespace

EnergyReport gagliardo_energy(const TraceMap& u, double s, double p) {
  if (!(s > 0.0 && s < 1.0)) throw ParameterError("s must lie in (0, 1)");
  if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("p must be >= 1");
  const DomainSpec& base = u.domain();
  const int d = base.dimension();
  if (d != 1 && d != 2) throw ParameterError("Gagliardo energy needs a 1D or 2D base");
  const int nu = u.nu();
  const std::size_t ncell = base.cell_count();
  const double vol = base.cell_volume();

  // Cell midpoints: coordinates, interpolated values, affine slopes.
  std::vector<std::vector<double>> mid_x(d, std::vector<double>(ncell));
  std::vector<std::vector<double>> mid_u(nu, std::vector<double>(ncell));
  std::vector<double> slopes(ncell * nu * d);
  std::vector<int> cidx(d, 0), nidx(d);
  for (std::size_t c = 0; c < ncell; ++c) {
    for (int k = 0; k < d; ++k)
      mid_x[k][c] = base.axis(k).origin + (cidx[k] + 0.5) * base.axis(k).spacing();
    std::array<std::size_t, 4> corner{};
    for (int m = 0; m < (1 << d); ++m) {
      for (int k = 0; k < d; ++k) nidx[k] = cidx[k] + ((m >> k) & 1);
      corner[m] = base.flat_index(nidx);
    }
    for (int comp = 0; comp < nu; ++comp) {
      auto val = [&](int m) { return u.node(corner[m])[comp]; };
      if (d == 1) {
        mid_u[comp][c] = 0.5 * (val(0) + val(1));
        slopes[c * nu + comp] = (val(1) - val(0)) / base.axis(0).spacing();
      } else {
        mid_u[comp][c] = 0.25 * (val(0) + val(1) + val(2) + val(3));
        slopes[(c * d + 0) * nu + comp] =
            0.5 * ((val(1) - val(0)) + (val(3) - val(2))) / base.axis(0).spacing();
        slopes[(c * d + 1) * nu + comp] =
            0.5 * ((val(2) - val(0)) + (val(3) - val(1))) / base.axis(1).spacing();
      }
    }
    for (int k = d - 1; k >= 0; --k) {
      if (++cidx[k] < base.axis(k).cells()) break;
      cidx[k] = 0;
    }
  }

  const auto& kern = kernels::active_kernels();
  const double alpha = 0.5 * p;
  const double beta = 0.5 * (s * p + d);
  std::vector<double> rows(ncell);
  parallel_for(ncell, [&](std::size_t begin, std::size_t end) {
    std::vector<double> diff2(ncell), dist2(ncell);
    for (std::size_t i = begin; i < end; ++i) {
      std::fill(diff2.begin(), diff2.end(), 0.0);
      std::fill(dist2.begin(), dist2.end(), 0.0);
      for (int comp = 0; comp < nu; ++comp)
        kern.accumulate_sq_diff(mid_u[comp][i], mid_u[comp].data(), ncell, 0.0, diff2.data());
      for (int k = 0; k < d; ++k) {
        const Axis& a = base.axis(k);
        kern.accumulate_sq_diff(mid_x[k][i], mid_x[k].data(), ncell,
                                a.periodic ? a.length : 0.0, dist2.data());
      }
      diff2[i] = 0.0;
      dist2[i] = 1.0;
      rows[i] = kern.pow_ratio_sum(diff2.data(), dist2.data(), ncell, alpha, beta);
    }
  });

  // Diagonal cells.
  const double radial_power = p - s * p - 1.0;
  double diag = 0.0;
  if (d == 1) {
    const double h = base.axis(0).spacing();
    const double cell_factor = 2.0 * std::pow(h, radial_power + 2.0) /
                               ((radial_power + 1.0) * (radial_power + 2.0));
    for (std::size_t c = 0; c < ncell; ++c) {
      double n2 = 0.0;
      for (int comp = 0; comp < nu; ++comp) n2 += slopes[c * nu + comp] * slopes[c * nu + comp];
      if (n2 > 0.0) diag += std::pow(n2, 0.5 * p) * cell_factor;
    }
  } else {
    const SelfCell2D self(base.axis(0).spacing(), base.axis(1).spacing(), s, p);
    for (std::size_t c = 0; c < ncell; ++c) {
      std::span<const double> g1(slopes.data() + (c * d + 0) * nu, nu);
      std::span<const double> g2(slopes.data() + (c * d + 1) * nu, nu);
      diag += self(g1, g2);
    }
  }

  double off = 0.0;
  for (double r : rows) off += r;
  return EnergyReport{off * vol * vol + diag, p, s, base.resolution(),
                      "cell-midpoint pairs + exact affine self-cell term"};
}

EnergyReport penalized_energy(const GridMap& map, const PenaltySpec& penalty, double p) {
  EnergyReport r = dirichlet_p_energy(map, p);
  r.value += penalty_energy(map.domain(), map.values(), penalty);
  r.quadrature = "forward-difference cell sum + trapezoid node penalty";
  return r;
}

}  // namespace sobolev_glue
