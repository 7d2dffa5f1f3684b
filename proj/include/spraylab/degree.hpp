#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spraylab/geometry.hpp"

namespace spraylab {

/// A map S^{2k-1} -> GL_p(C); eval takes unit vectors of C^k.
struct MatrixSphereMap {
  int k = 1;
  int p = 1;
  std::function<ComplexMatrix(const ComplexVector&)> eval;
  std::string name;
};

/// Self-map of S^n in ambient coordinates.
using SphereMap = std::function<Vector(const Vector&)>;

enum class DegreeMethod { PreimageCount, Winding, UnitaryFormula };

std::string to_string(DegreeMethod method);

struct Preimage {
  Vector point;
  int sign = 0;
  double jacobian_det = 0;
};

struct DegreeReport {
  long value = 0;
  DegreeMethod method = DegreeMethod::PreimageCount;
  int sphere_dim = 0;

  // preimage counting
  Vector regular_value;
  std::vector<Preimage> preimages;
  int redraws = 0;
  double max_residual = 0;
  double min_abs_det = 0;
  /// Degree at a second, independent regular value.
  std::optional<long> cross_check;

  // winding
  double winding_raw = 0;

  // unitary formula
  int k = 0;
  long psi_degree = 0;
  long raw_value = 0;
  int calibration = 1;
  std::vector<double> reduction_margins;
  std::vector<DegreeReport> sub_reports;
};

struct SphereDegreeOptions {
  std::uint64_t seed = 0;
  /// 0 means 200 n.
  int n_starts = 0;
  Eigen::Index grid = Eigen::Index{1} << 16;
  /// Winding for n = 1 cross-checked by preimage counting, preimage counting for n >= 2.
  std::optional<DegreeMethod> method;
  int max_redraws = 5;
  double dedup_radius = 1e-6;
  double newton_tol = 1e-11;
  int newton_max_iter = 60;
  double det_floor = 1e-8;
  double fd_step = 1e-6;
  int max_dim = 5;
};

/// Topological degree of a self-map of S^n: winding integral on S^1, signed preimage count
/// otherwise. Orientations use outward-normal-first tangent frames.
DegreeReport sphere_degree(const SphereMap& map, int n, const SphereDegreeOptions& options = {});

/// Tangent frame at p with det[p, T] > 0.
Matrix oriented_tangent_basis(const Vector& p);

// --- matrix-valued sphere maps ---------------------------------------------------

/// F(x) = |x| f(x / |x|), F(0) = 0.
std::function<ComplexMatrix(const ComplexVector&)> homogeneous_extension(const MatrixSphereMap& f);

/// (x, y) -> [[F(x) (x) I_q, -I_p (x) G(y)^*], [I_p (x) G(y), F(x)^* (x) I_q]].
MatrixSphereMap sharp_product(const MatrixSphereMap& f, const MatrixSphereMap& g);

inline constexpr int kDefaultAkCap = 6;

/// A_k restricted to the unit sphere; values are 2^{k-1} x 2^{k-1}.
MatrixSphereMap a_k(int k, int cap = kDefaultAkCap);
/// The homogeneous extension A_k, evaluated directly from the block recursion.
ComplexMatrix a_k_matrix(const ComplexVector& z);

/// z -> z^d as a 1 x 1 map (negative d uses conjugate powers, equal to z^d on |z| = 1).
MatrixSphereMap scalar_power_map(int d);

struct UnitaryDegreeOptions {
  SphereDegreeOptions sphere;
  /// Sample count used to pick each column-reduction frame.
  int reduction_samples = 4096;
  double min_margin = 0.25;
  bool apply_calibration = true;
};

/// deg f = (-1)^{k-1} deg(psi) / (k-1)! with psi the normalized first column. Maps into
/// GL_p with p > k are first homotoped into GL_k by last-column reduction. The orientation
/// calibration (see orientation_calibration) is applied as c^{k-1}.
DegreeReport unitary_degree(const MatrixSphereMap& f, const UnitaryDegreeOptions& options = {});

/// Sign c with c * raw(a_2) = 1, computed once.
int orientation_calibration();

/// The map S^{2k-1} -> S^{2k-1}, x -> h_1(x) / |h_1(x)| after reduction into GL_k.
SphereMap first_column_map(const MatrixSphereMap& f, const UnitaryDegreeOptions& options,
                           std::vector<double>* margins = nullptr);

// --- identities -------------------------------------------------------------------

struct AkIdentityReport {
  int k = 0;
  int n_samples = 0;
  double tol = 1e-10;
  double linearity = 0;
  double unitarity = 0;
  double determinant = 0;
  /// SU (k >= 2) or U (k = 1) membership of values on the sphere.
  double group_membership = 0;
  bool pass = false;
};

AkIdentityReport verify_ak_identities(int k, int n_samples, std::uint64_t seed, double tol = 1e-10);

// --- reference self-maps of spheres -------------------------------------------------

SphereMap identity_map();
SphereMap antipodal_map();
/// z -> z^d on S^1.
SphereMap circle_power_map(int d);
/// S^n -> Fermat sphere -> S^n: x -> (x / |x|_{2k})^k.
SphereMap fermat_self_map(int k);

}  // namespace spraylab
