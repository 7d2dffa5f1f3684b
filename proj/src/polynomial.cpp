#include "spraylab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spraylab {

namespace {

void exponents_of_degree(int dim, int remaining, int index, Exponent& current, std::vector<Exponent>& out) {
  if (index == dim - 1) {
    current[static_cast<std::size_t>(index)] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<std::size_t>(index)] = e;
    exponents_of_degree(dim, remaining - e, index + 1, current, out);
  }
}

Vector least_squares(const Matrix& a, const Vector& b, bool ridge, double lambda) {
  if (!ridge) return a.householderQr().solve(b);
  Matrix augmented(a.rows() + a.cols(), a.cols());
  augmented << a, std::sqrt(lambda) * Matrix::Identity(a.cols(), a.cols());
  Vector rhs = Vector::Zero(a.rows() + a.cols());
  rhs.head(a.rows()) = b;
  return augmented.householderQr().solve(rhs);
}

}  // namespace

std::vector<Exponent> monomial_exponents(int dim, int degree) {
  if (dim < 1) throw DomainError("monomial_exponents: dim must be >= 1");
  if (degree < 0) throw DomainError("monomial_exponents: degree must be >= 0");
  std::vector<Exponent> out;
  Exponent current(static_cast<std::size_t>(dim), 0);
  for (int d = 0; d <= degree; ++d) exponents_of_degree(dim, d, 0, current, out);
  return out;
}

Eigen::Index monomial_count(int dim, int degree) {
  // binomial(dim + degree, degree)
  Eigen::Index count = 1;
  for (int i = 1; i <= degree; ++i) count = count * (dim + i) / i;
  return count;
}

Vector monomial_values(const Vector& x, const std::vector<Exponent>& exponents) {
  int max_exp = 0;
  for (const auto& e : exponents)
    for (int v : e) max_exp = std::max(max_exp, v);
  Matrix powers(x.size(), max_exp + 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    powers(i, 0) = 1.0;
    for (int p = 1; p <= max_exp; ++p) powers(i, p) = powers(i, p - 1) * x(i);
  }
  Vector out(static_cast<Eigen::Index>(exponents.size()));
  for (std::size_t j = 0; j < exponents.size(); ++j) {
    double v = 1.0;
    for (std::size_t i = 0; i < exponents[j].size(); ++i) v *= powers(static_cast<Eigen::Index>(i), exponents[j][i]);
    out(static_cast<Eigen::Index>(j)) = v;
  }
  return out;
}

Matrix design_matrix(const PointSet& nodes, const std::vector<Exponent>& exponents) {
  Matrix a(nodes.cols(), static_cast<Eigen::Index>(exponents.size()));
  for (Eigen::Index r = 0; r < nodes.cols(); ++r) a.row(r) = monomial_values(nodes.col(r), exponents).transpose();
  return a;
}

PolynomialMap PolynomialMap::zero(int input_dim, int output_dim, int degree) {
  PolynomialMap out;
  out.input_dim = input_dim;
  out.output_dim = output_dim;
  out.degree = degree;
  out.exponents = monomial_exponents(input_dim, degree);
  out.coefficients = Matrix::Zero(output_dim, static_cast<Eigen::Index>(out.exponents.size()));
  return out;
}

Vector PolynomialMap::eval(const Vector& x) const {
  if (x.size() != input_dim) throw ShapeError("PolynomialMap: expected input of dimension " + std::to_string(input_dim));
  if (coefficients.cols() != static_cast<Eigen::Index>(exponents.size()) || coefficients.rows() != output_dim)
    throw ShapeError("PolynomialMap: coefficient table does not match the monomial basis");
  return coefficients * monomial_values(x, exponents);
}

Matrix PolynomialMap::eval_all(const PointSet& nodes) const {
  Matrix out(output_dim, nodes.cols());
  for (Eigen::Index j = 0; j < nodes.cols(); ++j) out.col(j) = eval(nodes.col(j));
  return out;
}

double PolynomialMap::residual_on_test_nodes() const {
  if (test_nodes.cols() == 0) return 0.0;
  return (eval_all(test_nodes) - test_values).cwiseAbs().maxCoeff();
}

void PolynomialMap::set_term(int output, const Exponent& e, double value) {
  const auto it = std::find(exponents.begin(), exponents.end(), e);
  if (it == exponents.end()) throw DomainError("PolynomialMap: exponent outside the monomial basis");
  coefficients(output, it - exponents.begin()) = value;
}

RationalMap RationalMap::polynomial(PolynomialMap numerator) {
  RationalMap out;
  out.denominator = PolynomialMap::zero(numerator.input_dim, 1, 0);
  out.denominator.coefficients(0, 0) = 1.0;
  out.numerator = std::move(numerator);
  return out;
}

Vector RationalMap::eval(const Vector& x) const {
  const double den = denominator.eval(x)(0);
  if (den == 0.0) throw SingularityError("RationalMap: denominator vanishes");
  return numerator.eval(x) / den;
}

RationalMap identity_rational_map(int dim) {
  PolynomialMap p = PolynomialMap::zero(dim, dim, 1);
  for (int i = 0; i < dim; ++i) {
    Exponent e(static_cast<std::size_t>(dim), 0);
    e[static_cast<std::size_t>(i)] = 1;
    p.set_term(i, e, 1.0);
  }
  return RationalMap::polynomial(std::move(p));
}

RationalMap circle_power_rational_map(int d) {
  // Re and Im of (x + i y)^d = sum_j C(d, j) x^{d-j} (i y)^j; negative d uses (x - i y)^{|d|}.
  const int n = std::abs(d);
  const double flip = d < 0 ? -1.0 : 1.0;
  PolynomialMap p = PolynomialMap::zero(2, 2, n);
  double binom = 1.0;
  for (int j = 0; j <= n; ++j) {
    const Exponent e{n - j, j};
    const double sign = j % 2 == 1 ? flip : 1.0;
    switch (j % 4) {
      case 0: p.set_term(0, e, sign * binom); break;
      case 1: p.set_term(1, e, sign * binom); break;
      case 2: p.set_term(0, e, -sign * binom); break;
      case 3: p.set_term(1, e, -sign * binom); break;
    }
    binom = binom * (n - j) / (j + 1);
  }
  return RationalMap::polynomial(std::move(p));
}

RationalMap linear_rational_map(const Matrix& r) {
  const int dim = static_cast<int>(r.cols());
  PolynomialMap p = PolynomialMap::zero(dim, static_cast<int>(r.rows()), 1);
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < dim; ++j) {
      Exponent e(static_cast<std::size_t>(dim), 0);
      e[static_cast<std::size_t>(j)] = 1;
      p.set_term(i, e, r(i, j));
    }
  return RationalMap::polynomial(std::move(p));
}

PolynomialFit fit_polynomial(const PointSet& nodes, const Matrix& values, const VarietySpec& domain,
                             double target_resid, int max_degree, const FitOptions& options) {
  if (nodes.rows() != domain.ambient_dim())
    throw ShapeError("fit_polynomial: nodes do not live in the ambient space of " + domain.name());
  if (values.cols() != nodes.cols()) throw ShapeError("fit_polynomial: one value column per node is required");
  if (!(target_resid >= 0.0)) throw DomainError("fit_polynomial: target residual must be >= 0");
  if (max_degree < options.min_degree) throw DomainError("fit_polynomial: max degree below min degree");

  const Eigen::Index n_train = (nodes.cols() + 1) / 2;
  const Eigen::Index n_hold = nodes.cols() / 2;
  PointSet train(nodes.rows(), n_train), hold(nodes.rows(), n_hold);
  Matrix train_values(values.rows(), n_train), hold_values(values.rows(), n_hold);
  for (Eigen::Index j = 0; j < nodes.cols(); ++j) {
    if (j % 2 == 0) {
      train.col(j / 2) = nodes.col(j);
      train_values.col(j / 2) = values.col(j);
    } else {
      hold.col(j / 2) = nodes.col(j);
      hold_values.col(j / 2) = values.col(j);
    }
  }

  const int input_dim = static_cast<int>(nodes.rows());
  const int output_dim = static_cast<int>(values.rows());
  PolynomialFit result;
  double best_holdout = std::numeric_limits<double>::infinity();
  for (int d = options.min_degree; d <= max_degree; ++d) {
    const auto exponents = monomial_exponents(input_dim, d);
    const Eigen::Index basis = static_cast<Eigen::Index>(exponents.size());
    if (n_train < basis) {
      if (result.history.empty())
        throw DomainError("fit_polynomial: " + std::to_string(n_train) + " training samples for a basis of " +
                          std::to_string(basis));
      break;
    }
    const Matrix a = design_matrix(train, exponents);
    const Eigen::ColPivHouseholderQR<Matrix> rank_probe(a);
    const bool ridge = rank_probe.rank() < basis;

    PolynomialMap candidate;
    candidate.input_dim = input_dim;
    candidate.output_dim = output_dim;
    candidate.degree = d;
    candidate.exponents = exponents;
    candidate.coefficients.resize(output_dim, basis);
    for (int o = 0; o < output_dim; ++o)
      candidate.coefficients.row(o) = least_squares(a, train_values.row(o).transpose(), ridge, options.ridge).transpose();

    const Matrix train_error = candidate.coefficients * a.transpose() - train_values;
    FitStep step;
    step.degree = d;
    step.basis_size = basis;
    step.ridge = ridge;
    const double n = static_cast<double>(std::max<Eigen::Index>(1, n_train));
    step.train_rms = std::sqrt(train_error.squaredNorm() / n);
    step.train_max = train_error.size() ? train_error.cwiseAbs().maxCoeff() : 0.0;
    step.coefficient_norm = candidate.coefficients.norm();
    step.penalized_rms =
        std::sqrt(step.train_rms * step.train_rms + options.ridge * step.coefficient_norm * step.coefficient_norm / n);
    candidate.test_nodes = hold;
    candidate.test_values = hold_values;
    step.holdout_max = n_hold ? candidate.residual_on_test_nodes() : step.train_max;
    candidate.test_residual = step.holdout_max;
    result.history.push_back(step);

    if (step.holdout_max < best_holdout) {
      best_holdout = step.holdout_max;
      result.map = candidate;
    }
    if (step.holdout_max <= target_resid) {
      result.map = std::move(candidate);
      result.target_met = true;
      return result;
    }
  }
  const std::string message = "fit_polynomial: held-out residual " + std::to_string(best_holdout) +
                              " above target after degree " + std::to_string(result.history.back().degree);
  throw DegreeExhaustedError(message, std::move(result));
}

}  // namespace spraylab
