#pragma once

#include <optional>
#include <vector>

#include "spraylab/geometry.hpp"

namespace spraylab {

using Exponent = std::vector<int>;

/// Exponents of all monomials of total degree <= degree in dim variables, graded by degree
/// and lexicographically decreasing within a degree (x_0 first).
std::vector<Exponent> monomial_exponents(int dim, int degree);
Eigen::Index monomial_count(int dim, int degree);

/// Monomial values at x, in monomial_exponents order.
Vector monomial_values(const Vector& x, const std::vector<Exponent>& exponents);
/// Design matrix, one row per point (column of nodes).
Matrix design_matrix(const PointSet& nodes, const std::vector<Exponent>& exponents);

/// Dense polynomial map R^input_dim -> R^output_dim of total degree <= degree, together with
/// stored test nodes and the residual measured on them.
struct PolynomialMap {
  int input_dim = 0;
  int output_dim = 0;
  int degree = 0;
  std::vector<Exponent> exponents;
  /// output_dim x exponents.size().
  Matrix coefficients;
  PointSet test_nodes;
  /// output_dim x test_nodes.cols().
  Matrix test_values;
  double test_residual = 0;

  static PolynomialMap zero(int input_dim, int output_dim, int degree = 0);

  Vector eval(const Vector& x) const;
  /// One output column per node.
  Matrix eval_all(const PointSet& nodes) const;
  /// max over test nodes of |eval - test_values|.
  double residual_on_test_nodes() const;
  /// Sets coefficient of the monomial with exponent e in the given output.
  void set_term(int output, const Exponent& e, double value);
};

/// numerator / denominator with a scalar denominator polynomial.
struct RationalMap {
  PolynomialMap numerator;
  PolynomialMap denominator;

  static RationalMap polynomial(PolynomialMap numerator);
  Vector eval(const Vector& x) const;
  int input_dim() const { return numerator.input_dim; }
  int output_dim() const { return numerator.output_dim; }
};

RationalMap identity_rational_map(int dim);
/// z -> z^d on S^1 in real coordinates (conjugate powers for d < 0).
RationalMap circle_power_rational_map(int d);
/// x -> R x.
RationalMap linear_rational_map(const Matrix& r);

struct FitStep {
  int degree = 0;
  Eigen::Index basis_size = 0;
  double train_rms = 0;
  double train_max = 0;
  double holdout_max = 0;
  bool ridge = false;
  /// Frobenius norm of the coefficient table.
  double coefficient_norm = 0;
  /// sqrt(train_rms^2 + ridge_lambda |c|^2 / n_train), the quantity the ridge solve minimizes.
  double penalized_rms = 0;
};

struct PolynomialFit {
  PolynomialMap map;
  std::vector<FitStep> history;
  bool target_met = false;
};

/// Raised when the maximal degree is reached without meeting the held-out target.
class DegreeExhaustedError : public Error {
 public:
  DegreeExhaustedError(const std::string& what, PolynomialFit best) : Error(what), best_(std::move(best)) {}
  const PolynomialFit& best() const { return best_; }

 private:
  PolynomialFit best_;
};

struct FitOptions {
  int min_degree = 1;
  double ridge = 1e-12;
};

/// Least-squares fit of values (one column per node) in the ambient monomial basis. Even-indexed
/// nodes train, odd-indexed nodes are held out; D escalates from min_degree until the held-out
/// max residual is <= target_resid. The first D that succeeds is returned.
PolynomialFit fit_polynomial(const PointSet& nodes, const Matrix& values, const VarietySpec& domain,
                             double target_resid, int max_degree, const FitOptions& options = {});

}  // namespace spraylab
