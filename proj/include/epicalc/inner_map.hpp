#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "epicalc/linalg.hpp"

namespace epicalc {

// Groups classified as zero when ||x_J||_inf falls below this cutoff; the
// gradient formula degenerates as a block approaches the origin, so near-zero
// blocks are treated as exactly zero.
inline constexpr double kGroupZeroEps = 1e-12;

struct GroupStructure {
  std::vector<std::vector<int>> groups;  // partition of [0, n)
  double q = 2.0;

  int total_dim() const;
  double conjugate() const { return q / (q - 1.0); }
  // Throws unless the blocks are nonempty, disjoint, and cover [0, n).
  void validate() const;
};

enum class MapKind { GroupQNorm, QConeResidual, Smooth, Custom };

// Mapping with one-sided first- and second-order expansions along parabolas:
//   F(x + t w + t^2 z / 2) = F(x) + t dF(x)(w) + t^2/2 F''(x; w, z) + o(t^2).
// semiderivative is positively homogeneous of degree 1 in w. jacobian_at
// returns the Jacobian when dF(x) is linear at x, and nullopt at kink points.
struct InnerMap {
  int dim_in = 0;
  int dim_out = 0;
  MapKind kind = MapKind::Custom;
  std::function<Vec(const Vec&)> value;
  std::function<Vec(const Vec&, const Vec&)> semiderivative;                 // dF(x)(w)
  std::function<Vec(const Vec&, const Vec&, const Vec&)> parabolic;          // F''(x;w,z)
  std::function<double(const Vec&, const Vec&, const Vec&)> scalarized_second;  // d^2(xi F)(x)(w)
  std::function<std::optional<Mat>(const Vec&)> jacobian_at;
  std::optional<GroupStructure> groups;
};

// Blockwise q-norm map x |-> (||x_{J_1}||_q, ..., ||x_{J_m}||_q), q > 1.
InnerMap group_qnorm_map(const GroupStructure& gs);

// Indices of groups whose norm is suspiciously small but not classified zero;
// callers may surface these in diagnostics.
std::vector<int> group_near_zero_diagnostics(const GroupStructure& gs, const Vec& x,
                                             double warn_below = 1e-8);

// Residual of the q-order cone: x = (x1, x2) |-> ||x2||_q - x1 (scalar output).
InnerMap qcone_residual_map(int n, double q);

// Twice differentiable map from user-supplied value/Jacobian/Hessian-tensor
// callables. The constructor cross-checks the supplied derivatives against
// central finite differences at the probe points and throws
// "derivative data inconsistent" on mismatch.
InnerMap smooth_map(int dim_in, int dim_out,
                    std::function<Vec(const Vec&)> value,
                    std::function<Mat(const Vec&)> jacobian,
                    std::function<std::vector<Mat>(const Vec&)> hessian_tensor,
                    const std::vector<Vec>& probe_points);

}  // namespace epicalc
