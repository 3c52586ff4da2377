#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "epicalc/extreal.hpp"
#include "epicalc/linalg.hpp"
#include "epicalc/polyhedron.hpp"

namespace epicalc {

// One twice-differentiable representative, valid on an open superset of the
// polyhedral region it is paired with.
struct SmoothPiece {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

struct PwtdPiece {
  Polyhedron region;
  SmoothPiece fn;
};

// Index sets driving the piecewise calculus at a query (y, w[, z]):
//   j_y    pieces whose region contains y
//   j_yw   those whose tangent cone at y contains w
//   j_ywz  those whose second-order tangent set at (y, w) contains z
struct IndexSets {
  std::vector<std::size_t> j_y;
  std::vector<std::size_t> j_yw;
  std::optional<std::vector<std::size_t>> j_ywz;
};

struct PwtdTol {
  PolyTol poly{};
  double eps_cons = 1e-8;  // piece agreement (relative to 1 + |value|)
  double eps_crit = 1e-8;  // critical-cone slack (relative to 1 + |<v,w>|)
};

// Piecewise twice differentiable function: finitely many (region, piece)
// pairs whose union of regions is the domain. Pieces are either stored
// explicitly or produced on demand by a factory plus a locator that lists the
// candidate piece indices near a point (used for product-structured
// functions, where full enumeration would be exponential).
//
// The function value is +inf outside the union of regions. Immutable after
// construction; all operations are pure.
class PwtdFunction {
 public:
  using PieceFactory = std::function<PwtdPiece(std::size_t)>;
  using Locator = std::function<std::vector<std::size_t>(const Vec&)>;

  PwtdFunction() = default;
  PwtdFunction(int dim, std::vector<PwtdPiece> pieces);
  PwtdFunction(int dim, std::size_t count, PieceFactory factory, Locator locator);

  int dim() const { return dim_; }
  std::size_t piece_count() const { return explicit_ ? pieces_.size() : lazy_count_; }
  bool is_lazy() const { return !explicit_; }
  PwtdPiece piece(std::size_t i) const;
  // Candidate piece indices whose region may contain y (ascending order).
  std::vector<std::size_t> candidates(const Vec& y) const;

  // Per-point description of the subdifferential as a polyhedron; supplied by
  // instance builders, never derived from the pieces.
  std::function<Polyhedron(const Vec&)> subdiff_provider;
  // Asserts Clarke regularity on the domain (so the regular and basic
  // subdifferentials agree wherever this function is queried).
  bool regular_flag = false;

 private:
  int dim_ = 0;
  bool explicit_ = true;
  std::vector<PwtdPiece> pieces_;
  std::size_t lazy_count_ = 0;
  PieceFactory factory_;
  Locator locator_;
};

ExtReal eval(const PwtdFunction& psi, const Vec& y, const PwtdTol& tol = PwtdTol{});

IndexSets index_sets(const PwtdFunction& psi, const Vec& y, const Vec& w,
                     const Vec* z = nullptr, const PwtdTol& tol = PwtdTol{});

// d psi(y)(w): gradient form on the agreeing active pieces, +inf when w
// leaves every tangent cone. Throws "point outside domain" when y is not in
// the domain and "inconsistent PWTD data" when active pieces disagree.
ExtReal subderivative(const PwtdFunction& psi, const Vec& y, const Vec& w,
                      const PwtdTol& tol = PwtdTol{});

// d^2 psi(y)(w) (no subgradient): Hessian quadratic form on agreeing pieces.
ExtReal second_subderivative_plain(const PwtdFunction& psi, const Vec& y, const Vec& w,
                                   const PwtdTol& tol = PwtdTol{});

// d^2 psi(y|v)(w): the plain form gated by the critical cone
// {w : d psi(y)(w) = <v,w>}. Requires a regular subdifferential; pass
// caller_asserts_regular when no provider/flag can certify it.
ExtReal second_subderivative(const PwtdFunction& psi, const Vec& y, const Vec& v, const Vec& w,
                             bool caller_asserts_regular = false, const PwtdTol& tol = PwtdTol{});

// d^2 psi(y)(w|z): plain second form plus the gradient term on pieces whose
// second-order tangent set admits z; +inf when none does. Never -inf.
ExtReal parabolic_subderivative(const PwtdFunction& psi, const Vec& y, const Vec& w, const Vec& z,
                                const PwtdTol& tol = PwtdTol{});

// A_psi(y, w) = subdifferential at y intersected with {xi : <xi,w> = d psi(y)(w)}.
Polyhedron active_multipliers(const PwtdFunction& psi, const Vec& y, const Vec& w,
                              const PwtdTol& tol = PwtdTol{});

// Conjugate of z |-> d^2 psi(y)(w|z) at zstar: -d^2 psi(y)(w) on the active
// multiplier set, +inf elsewhere.
ExtReal parabolic_conjugate_value(const PwtdFunction& psi, const Vec& y, const Vec& w,
                                  const Vec& zstar, const PwtdTol& tol = PwtdTol{});

struct RegularityWitness {
  ExtReal lhs;  // inf_z { d^2 psi(y)(w|z) - <v,z> }, evaluated in closed form
  ExtReal rhs;  // d^2 psi(y|v)(w)
};

// Closed-form witness that the parabolic and second subderivatives agree at
// (y, v, w); equality of the two fields is the tested contract.
RegularityWitness pwtd_parabolic_regularity_witness(const PwtdFunction& psi, const Vec& y,
                                                    const Vec& v, const Vec& w,
                                                    const PwtdTol& tol = PwtdTol{});

// d psi(y) materialized as a piecewise linear function over the tangent cones
// of the active regions. Piece order follows ascending original index.
PwtdFunction materialize_subderivative(const PwtdFunction& psi, const Vec& y,
                                       const PwtdTol& tol = PwtdTol{});

// Build-time validation: gradient/Hessian self-checks on sampled points of
// each region and cross-piece agreement on sampled region intersections.
// Throws "inconsistent PWTD data" / "derivative data inconsistent" on failure.
void validate_pwtd(const PwtdFunction& psi, const PwtdTol& tol = PwtdTol{});

}  // namespace epicalc
