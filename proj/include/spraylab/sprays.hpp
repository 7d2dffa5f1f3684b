#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spraylab/geometry.hpp"

namespace spraylab {

enum class SprayKind { Stereographic, AmbientStereographic, GroupAction, ProductSubmersion, Iterated, Custom };

std::string to_string(SprayKind kind);

/// A spray on a trivial bundle base x R^fiber_dim: s(y, 0) = y and s(y, v) stays on the base.
/// For sprays of the projection X x Y -> X the X-component is carried through unchanged,
/// and submersion_domain() names X.
class Spray {
 public:
  using EvalFn = std::function<Vector(const Vector& base_point, const Vector& fiber)>;
  using InverseFn = std::function<Vector(const Vector& base_point, const Vector& target)>;

  Spray(SprayKind kind, VarietySpec base, int fiber_dim, EvalFn eval, InverseFn inverse = {},
        nlohmann::json params = nlohmann::json::object());

  SprayKind kind() const { return kind_; }
  const VarietySpec& base() const { return base_; }
  int fiber_dim() const { return fiber_dim_; }

  Vector eval(const Vector& base_point, const Vector& fiber) const;

  bool has_inverse() const { return static_cast<bool>(inverse_); }
  /// Exact local inverse: the fiber vector v with eval(base_point, v) = target.
  Vector inverse(const Vector& base_point, const Vector& target) const;

  /// X when this is a spray for the projection X x Y -> X.
  const std::optional<VarietySpec>& submersion_domain() const { return submersion_domain_; }
  void set_submersion_domain(VarietySpec domain) { submersion_domain_ = std::move(domain); }

  /// {"kind", "base", "fiber_dim", "params"}.
  nlohmann::json descriptor() const;

 private:
  SprayKind kind_;
  VarietySpec base_;
  int fiber_dim_;
  EvalFn eval_;
  InverseFn inverse_;
  nlohmann::json params_;
  std::optional<VarietySpec> submersion_domain_;
};

/// ((4 - |w|^2) p + 4 w) / (4 + |w|^2), the inverse of stereographic projection from -p onto
/// the tangent hyperplane through p. w is a tangent vector in ambient coordinates.
Vector inverse_stereographic(const Vector& p, const Vector& w);
/// Stereographic projection of q from -p onto p + T_p S^n, returned as the tangent vector w.
/// Throws AntipodeError at q = -p.
Vector stereographic_projection(const Vector& p, const Vector& q);

/// Fiber coordinates in the frame sphere_tangent_basis(p); fiber_dim n.
Spray stereographic_spray(int n);

/// Trivialized variant: fiber R^{n+1}, the fiber vector is projected onto T_p S^n first.
/// Its fiber coordinates are globally smooth, which the approximation pipeline needs.
Spray ambient_stereographic_spray(int n);

/// g acting on a point y of the target variety (ambient coordinates).
using GroupAction = std::function<Vector(const ComplexMatrix& g, const Vector& y)>;

/// O(m)/SO(m) on S^{m-1} by matrix-vector product; U(m)/SU(m) on S^{2m-1} in C^m.
GroupAction linear_sphere_action(const VarietySpec& group);
/// G acting on itself by left multiplication.
GroupAction left_multiplication(const VarietySpec& group);

struct GroupSprayOptions {
  /// When set, the fiber vector passes through shrink_map(., c) before the Cayley transform.
  std::optional<double> shrink;
};

/// The group element g(v) used by the group-action spray. For SU(m), m >= 3, it is the
/// ordered product of Cayley transforms of the individual basis directions, which keeps
/// the determinant exactly one.
ComplexMatrix group_element(const VarietySpec& group, const Vector& fiber, const GroupSprayOptions& options = {});

/// s(y, v) = g(v) . y with g(v) = cayley(sum v_i B_i) over lie_algebra_basis(group).
Spray group_action_spray(const VarietySpec& group, const VarietySpec& target, GroupAction action,
                         GroupSprayOptions options = {});
/// Picks linear_sphere_action or left_multiplication from the target.
Spray group_action_spray(const VarietySpec& group, const VarietySpec& target, GroupSprayOptions options = {});

/// Spray for the projection X x Y -> X: ((x, y), v) -> (x, s_Y(y, v)).
Spray product_submersion_spray(const VarietySpec& domain, const Spray& target_spray);

/// s^(k)(z, v_1..v_k) = s(s^(k-1)(z, v_1..v_{k-1}), v_k).
Spray iterated_spray(const Spray& inner, int k);

/// Degenerate fixture s(y, v) = y. Not dominating.
Spray constant_spray(const VarietySpec& base, int fiber_dim);

// --- verification -------------------------------------------------------------

struct AxiomSample {
  double zero_section = 0;
  double membership = 0;
  double fiber = 0;
};

struct AxiomReport {
  bool pass = false;
  double tol = 0;
  double max_zero_section = 0;
  double max_membership = 0;
  double max_fiber = 0;
  double max_violation = 0;
  std::vector<AxiomSample> per_sample;
};

struct AxiomOptions {
  int n_samples = 1000;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  /// Fiber vectors are drawn with norm uniform in [0, max_fiber_norm].
  double max_fiber_norm = 10.0;
};

AxiomReport verify_spray_axioms(const Spray& spray, const AxiomOptions& options = {});

struct DominanceSample {
  int rank = 0;
  /// Smallest singular value over the largest.
  double relative_sigma_min = 0;
};

struct DominanceReport {
  bool pass = false;
  int required_rank = 0;
  int min_rank = 0;
  int max_rank = 0;
  double min_relative_sigma = 0;
  std::vector<DominanceSample> per_sample;
};

struct DominanceOptions {
  int n_samples = 1000;
  std::uint64_t seed = 0;
  /// Central-difference step is fd_step * (1 + |y|).
  double fd_step = 1e-5;
  double rank_tol = 1e-6;
};

/// Central-difference fiber derivative at v = 0, projected onto T_y Y (or onto the
/// Y-directions for submersion sprays), with numerical rank from the singular values.
Matrix fiber_derivative(const Spray& spray, const Vector& base_point, const Vector& at_fiber, double fd_step);
DominanceReport verify_dominating(const Spray& spray, const DominanceOptions& options = {});

// --- local inversion ------------------------------------------------------------

struct NewtonConfig {
  double tol = 1e-11;
  int max_iter = 50;
  double fd_step = 1e-7;
  /// Fiber vectors beyond this norm are treated as outside the injectivity neighborhood.
  double max_fiber_norm = 3.0;
};

/// Fiber vector xi with s(y, xi) = q: the attached exact inverse when present, otherwise
/// damped Gauss-Newton from xi = 0. Throws DivergenceError when no solution is found
/// near the zero section.
Vector spray_local_inverse(const Spray& spray, const Vector& base_point, const Vector& target,
                           const NewtonConfig& config = {});

}  // namespace spraylab
