#include "sobolev_glue/folding.hpp"

#include <algorithm>
#include <cmath>

#include "sobolev_glue/energy.hpp"
#include "sobolev_glue/errors.hpp"
#include "sobolev_glue/parallel.hpp"

namespace sobolev_glue {

std::string_view to_string(FoldRegion region) {
  switch (region) {
    case FoldRegion::Sigma0: return "Sigma0";
    case FoldRegion::SigmaSharp: return "SigmaSharp";
    case FoldRegion::Sigma1: return "Sigma1";
  }
  return "?";
}

FoldRegion classify_region(double x1, double x2) noexcept {
  if (x1 <= 0.5 * x2) return FoldRegion::Sigma0;
  if (x1 <= x2) return FoldRegion::SigmaSharp;
  return FoldRegion::Sigma1;
}

FoldSource fold_source(double x1, double x2) noexcept {
  switch (classify_region(x1, x2)) {
    case FoldRegion::Sigma0: return {false, 2.0 * x1, x2 - 2.0 * x1};
    case FoldRegion::SigmaSharp: return {true, x2, 2.0 * x1 - x2};
    case FoldRegion::Sigma1: break;
  }
  return {true, x1, x2};
}

namespace {

void check_foldable(const GridMap& u0, const GridMap& u1) {
  const DomainSpec& dom = u0.domain();
  if (!(dom == u1.domain())) throw DomainError("fold inputs live on different grids");
  if (!(u0.target() == u1.target())) throw DomainError("fold inputs have different targets");
  const int dim = dom.dimension();
  if (dim != 2 && dim != 3) throw DomainError("fold needs a 2D or 3D grid");
  if (dom.axis(dim - 1).periodic || dom.axis(dim - 2).periodic)
    throw DomainError("the two folded axes must be non-periodic");
}

double face_error(const GridMap& a, const GridMap& b, const Face& face) {
  return sup_distance(extract_trace(a, face), extract_trace(b, face));
}

}  // namespace

std::pair<GridMap, FoldReport> fold(const GridMap& u0, const GridMap& u1,
                                    const FoldOptions& options) {
  check_foldable(u0, u1);
  const DomainSpec& dom = u0.domain();
  const int dim = dom.dimension();
  const double tol = options.trace_tol.value_or(10.0 * dom.max_spacing());
  const Face bottom = dom.bottom_face();
  const double mismatch = face_error(u0, u1, bottom);
  if (mismatch > tol)
    throw PreconditionError("bottom traces of U0 and U1 differ by " + std::to_string(mismatch) +
                            " > trace_tol " + std::to_string(tol));

  const Axis& a1 = dom.axis(dim - 2);
  const Axis& a2 = dom.axis(dim - 1);
  const int nu = u0.nu();
  const std::size_t nodes = dom.node_count();
  std::vector<double> out(nodes * nu);
  std::vector<double> violation(nodes, 0.0);
  parallel_for(nodes, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(dim);
    for (std::size_t n = begin; n < end; ++n) {
      dom.node_coords(n, x);
      const double t1 = (x[dim - 2] - a1.origin) / a1.length;
      const double t2 = (x[dim - 1] - a2.origin) / a2.length;
      const FoldSource src = fold_source(t1, t2);
      x[dim - 2] = a1.origin + std::clamp(src.x1, 0.0, 1.0) * a1.length;
      x[dim - 1] = a2.origin + std::clamp(src.x2, 0.0, 1.0) * a2.length;
      std::span<double> y(out.data() + n * nu, nu);
      (src.from_u1 ? u1 : u0).evaluate_into(x, y);
      violation[n] = u0.target().distance(y);
      u0.target().project(y);
    }
  });

  GridMap folded(dom, u0.target(), std::move(out), u0.constraint_tol());
  FoldReport report = verify_fold_traces(folded, u0, u1, options.p);
  report.constraint_violation = *std::max_element(violation.begin(), violation.end());
  return {std::move(folded), report};
}

FoldReport verify_fold_traces(const GridMap& folded, const GridMap& u0, const GridMap& u1,
                              double p) {
  check_foldable(u0, u1);
  if (!(folded.domain() == u0.domain())) throw DomainError("folded map is on another grid");
  const int dim = u0.domain().dimension();
  FoldReport r;
  r.p = p;
  r.trace_bottom_error = face_error(folded, u0, Face{dim - 1, false});
  r.trace_left_error = face_error(folded, u0, Face{dim - 2, false});
  r.trace_right_error = face_error(folded, u1, Face{dim - 2, true});
  r.energy_in_0 = dirichlet_p_energy(u0, p).value;
  r.energy_in_1 = dirichlet_p_energy(u1, p).value;
  r.energy_out = dirichlet_p_energy(folded, p).value;
  const double denom = r.energy_in_0 + r.energy_in_1;
  r.ratio = denom > 0.0 ? r.energy_out / denom : 0.0;
  return r;
}

namespace {

// Largest singular values squared of the two fold Jacobians.
constexpr double kSigma0Sq = 0.5 * (9.0 + 8.06225774829854965236);   // (9 + sqrt 65)/2
constexpr double kSigmaSharpSq = 0.5 * (6.0 + 4.47213595499957939282);  // (6 + sqrt 20)/2

}  // namespace

double fold_energy_bound_sum(double p) {
  return 0.5 * (std::pow(kSigma0Sq, 0.5 * p) + std::pow(kSigmaSharpSq, 0.5 * p)) + 1.0;
}

double fold_energy_bound_max(double p) {
  return 0.5 * std::max(std::pow(kSigma0Sq, 0.5 * p), std::pow(kSigmaSharpSq, 0.5 * p)) + 1.0;
}

}  // namespace sobolev_glue
