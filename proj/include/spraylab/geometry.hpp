#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "spraylab/errors.hpp"

namespace spraylab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Points stored column-wise, one ambient point per column.
using PointSet = Eigen::MatrixXd;

using Rng = std::mt19937_64;

inline constexpr double kDefaultMemberTol = 1e-10;
inline constexpr double kSingularConditionLimit = 1e12;

/// Which variety a point is supposed to live on. Complex groups and odd spheres in C^m
/// are realified: entries are stored as interleaved (re, im) pairs, matrices row-major.
class VarietySpec {
 public:
  enum class Kind { Sphere, FermatSphere, O, SO, U, SU, Product };

  static VarietySpec sphere(int n);
  /// x_0^{2k} + ... + x_n^{2k} = 1.
  static VarietySpec fermat_sphere(int n, int k);
  static VarietySpec orthogonal(int m);
  static VarietySpec special_orthogonal(int m);
  static VarietySpec unitary(int m);
  static VarietySpec special_unitary(int m);
  static VarietySpec product(std::vector<VarietySpec> parts);

  /// Parses names as produced by name(): "S2", "Fermat(2,6)", "SO(3)", "Product(S1,S2)".
  static VarietySpec parse(std::string_view text);

  Kind kind() const { return kind_; }
  /// Sphere dimension n (Sphere, FermatSphere).
  int n() const { return n_; }
  /// Matrix size m (groups).
  int m() const { return n_; }
  /// Half exponent k of a Fermat sphere.
  int k() const { return k_; }
  const std::vector<VarietySpec>& parts() const { return parts_; }

  bool is_group() const;
  bool is_complex_group() const { return kind_ == Kind::U || kind_ == Kind::SU; }

  Eigen::Index ambient_dim() const;
  /// Manifold dimension.
  int dim() const;
  std::string name() const;

  friend bool operator==(const VarietySpec&, const VarietySpec&) = default;

 private:
  VarietySpec(Kind kind, int n, int k, std::vector<VarietySpec> parts);

  Kind kind_;
  int n_;
  int k_;
  std::vector<VarietySpec> parts_;
};

// --- realification helpers -------------------------------------------------

Vector interleave(const ComplexVector& z);
ComplexVector deinterleave(const Vector& x);
/// Row-major flattening.
Vector flatten(const Matrix& a);
Matrix unflatten(const Vector& x, Eigen::Index rows, Eigen::Index cols);
/// Row-major interleaved flattening of a complex matrix.
Vector realify(const ComplexMatrix& a);
ComplexMatrix complexify(const Vector& x, Eigen::Index rows, Eigen::Index cols);

/// Group element of G stored at ambient point p (real groups come back with zero imaginary part).
ComplexMatrix group_matrix(const Vector& p, const VarietySpec& group);
Vector group_point(const ComplexMatrix& g, const VarietySpec& group);

/// Splits an ambient point of a product variety into its factors.
std::vector<Vector> split_product(const Vector& p, const VarietySpec& product);
Vector join_product(const std::vector<Vector>& parts);

// --- membership -------------------------------------------------------------

void require_finite(const Vector& p, std::string_view what);

/// Largest residual of the defining equations of V at p. Throws ShapeError on dimension mismatch.
double membership_violation(const Vector& p, const VarietySpec& variety);

bool is_member(const Vector& p, const VarietySpec& variety, double tol = kDefaultMemberTol);

// --- algebraic building blocks ---------------------------------------------

/// Q = (I - A)(I + A)^{-1}. Orthogonal for skew-symmetric A, unitary for skew-Hermitian A.
/// The transform is an involution, so it also inverts itself.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> cayley(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.rows() != a.cols()) throw ShapeError("cayley: matrix must be square");
  const Mat id = Mat::Identity(a.rows(), a.cols());
  const Eigen::PartialPivLU<Mat> lu(id + a);
  // I - A and I + A commute, so either order of the product works.
  if (!(lu.rcond() * kSingularConditionLimit >= 1.0))
    throw SingularityError("cayley: I + A is numerically singular");
  return lu.solve(id - a);
}

/// h(v) = c v / (1 + |v|^2); maps R^n into the ball of radius c/2 with h'(0) = c I.
template <typename Derived>
typename Derived::PlainObject shrink_map(const Eigen::MatrixBase<Derived>& v, double c) {
  if (!(c > 0.0)) throw DomainError("shrink_map: c must be positive");
  if (!v.allFinite()) throw DomainError("shrink_map: non-finite input");
  return (c / (1.0 + v.squaredNorm())) * v;
}

/// Coordinate-wise x_i^k; sends the Fermat sphere of exponent 2k onto the round sphere.
Vector fermat_power_map(const Vector& x, int k);
/// Coordinate-wise real k-th root (odd k).
Vector fermat_power_inverse(const Vector& y, int k);

/// Radial homeomorphism S^n -> Fermat sphere of exponent 2k.
Vector to_fermat_sphere(const Vector& x, int k);

/// Orthonormal basis of the tangent hyperplane at p, one vector per column. Seeds are the
/// coordinate axes in increasing order with the axis of largest |p_i| dropped.
Matrix sphere_tangent_basis(const Vector& p);

/// Orthonormal tangent basis of the variety at p (columns, ambient coordinates).
Matrix tangent_basis(const Vector& p, const VarietySpec& variety);

/// Fixed basis of the Lie algebra of a group: so(m), u(m) or su(m).
std::vector<ComplexMatrix> lie_algebra_basis(const VarietySpec& group);

/// Random point on V (Gaussian-normalized spheres, QR-based groups).
Vector random_point(const VarietySpec& variety, Rng& rng);

/// Quasi-uniform point set on S^n: uniform angles on S^1, a Fibonacci lattice on S^2,
/// seeded Gaussian points for n >= 3.
PointSet quasi_uniform_sphere(int n, Eigen::Index count, std::uint64_t seed = 0);

}  // namespace spraylab
