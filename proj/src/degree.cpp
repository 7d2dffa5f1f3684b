#include "spraylab/degree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spraylab/parallel.hpp"

namespace spraylab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

long factorial(int n) {
  long out = 1;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Unitary U(w) with U(w) e_last = w; continuous on the unit sphere minus {-e_last}.
ComplexMatrix column_section(const ComplexVector& w) {
  const Eigen::Index p = w.size();
  const std::complex<double> wp = w(p - 1);
  const ComplexVector head = w.head(p - 1);
  ComplexMatrix u(p, p);
  u.topLeftCorner(p - 1, p - 1) =
      ComplexMatrix::Identity(p - 1, p - 1) - head * head.adjoint() / (1.0 + std::conj(wp));
  const std::complex<double> beta = (1.0 + wp) / (1.0 + std::conj(wp));
  u.bottomLeftCorner(1, p - 1) = -beta * head.adjoint();
  u.topRightCorner(p - 1, 1) = head;
  u(p - 1, p - 1) = wp;
  return u;
}

Vector normalized(const Vector& x) { return x / x.norm(); }

// Central-difference Jacobian of map along the columns of frame, through the normalizing retraction.
Matrix sphere_jacobian(const SphereMap& map, const Vector& x, const Matrix& frame, double h) {
  Matrix jac(x.size(), frame.cols());
  for (Eigen::Index j = 0; j < frame.cols(); ++j)
    jac.col(j) = (map(normalized(x + h * frame.col(j))) - map(normalized(x - h * frame.col(j)))) / (2.0 * h);
  return jac;
}

struct NewtonOutcome {
  bool converged = false;
  Vector point;
  double residual = 0;
};

NewtonOutcome newton_on_sphere(const SphereMap& map, const Vector& start, const Vector& target,
                               const SphereDegreeOptions& options) {
  NewtonOutcome out;
  Vector x = start;
  double r = (map(x) - target).norm();
  for (int iter = 0; iter < options.newton_max_iter; ++iter) {
    if (r <= options.newton_tol) break;
    const Matrix frame = sphere_tangent_basis(x);
    const Matrix jac = sphere_jacobian(map, x, frame, options.fd_step);
    Vector step = -jac.completeOrthogonalDecomposition().solve(map(x) - target);
    if (!step.allFinite()) break;
    if (step.norm() > 0.5) step *= 0.5 / step.norm();
    double t = 1.0;
    Vector trial = normalized(x + frame * step);
    double r_trial = (map(trial) - target).norm();
    while (!(r_trial < r) && t > 1e-6) {
      t *= 0.5;
      trial = normalized(x + t * (frame * step));
      r_trial = (map(trial) - target).norm();
    }
    if (!(r_trial < r)) break;
    x = trial;
    r = r_trial;
  }
  out.converged = r <= options.newton_tol;
  out.point = x;
  out.residual = r;
  return out;
}

struct PreimageCount {
  long degree = 0;
  Vector regular_value;
  std::vector<Preimage> preimages;
  int redraws = 0;
  double max_residual = 0;
  double min_abs_det = 0;
};

// Signed preimage count at a regular value drawn from rng; redraws on near-singular preimages.
PreimageCount count_preimages(const SphereMap& map, int n, const PointSet& starts, Rng& rng,
                              const SphereDegreeOptions& options) {
  const auto sphere = VarietySpec::sphere(n);
  PreimageCount result;
  for (int attempt = 0; attempt <= options.max_redraws; ++attempt) {
    const Vector y = random_point(sphere, rng);
    std::vector<NewtonOutcome> outcomes(static_cast<std::size_t>(starts.cols()));
    parallel_for(outcomes.size(), [&](std::size_t i) {
      outcomes[i] = newton_on_sphere(map, starts.col(static_cast<Eigen::Index>(i)), y, options);
    });

    std::vector<Preimage> found;
    double max_residual = 0.0;
    for (const auto& o : outcomes) {
      if (!o.converged) continue;
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Preimage& p) {
        return (p.point - o.point).norm() < options.dedup_radius;
      });
      if (duplicate) continue;
      found.push_back({o.point, 0, 0.0});
      max_residual = std::max(max_residual, o.residual);
    }

    const Matrix target_frame = oriented_tangent_basis(y);
    bool regular = true;
    double min_abs_det = std::numeric_limits<double>::infinity();
    for (auto& p : found) {
      const Matrix jac = sphere_jacobian(map, p.point, oriented_tangent_basis(p.point), options.fd_step);
      p.jacobian_det = (target_frame.transpose() * jac).determinant();
      p.sign = p.jacobian_det > 0.0 ? 1 : -1;
      min_abs_det = std::min(min_abs_det, std::abs(p.jacobian_det));
      if (std::abs(p.jacobian_det) < options.det_floor) regular = false;
    }
    if (!regular) {
      ++result.redraws;
      continue;
    }
    std::sort(found.begin(), found.end(), [](const Preimage& a, const Preimage& b) {
      return std::lexicographical_compare(a.point.data(), a.point.data() + a.point.size(), b.point.data(),
                                          b.point.data() + b.point.size());
    });
    result.degree = 0;
    for (const auto& p : found) result.degree += p.sign;
    result.regular_value = y;
    result.preimages = std::move(found);
    result.max_residual = max_residual;
    result.min_abs_det = result.preimages.empty() ? 0.0 : min_abs_det;
    return result;
  }
  throw DegeneracyError("sphere_degree: no regular value found after " + std::to_string(options.max_redraws) +
                        " redraws");
}

DegreeReport preimage_degree(const SphereMap& map, int n, const SphereDegreeOptions& options) {
  const int n_starts = options.n_starts > 0 ? options.n_starts : 200 * n;
  const PointSet starts = quasi_uniform_sphere(n, n_starts, options.seed ^ 0x5eedULL);
  Rng rng(options.seed);
  const PreimageCount first = count_preimages(map, n, starts, rng, options);
  const PreimageCount second = count_preimages(map, n, starts, rng, options);
  if (first.degree != second.degree)
    throw InconsistencyError("sphere_degree: preimage counts disagree across regular values (" +
                             std::to_string(first.degree) + " vs " + std::to_string(second.degree) + ")");
  DegreeReport report;
  report.method = DegreeMethod::PreimageCount;
  report.sphere_dim = n;
  report.value = first.degree;
  report.regular_value = first.regular_value;
  report.preimages = first.preimages;
  report.redraws = first.redraws + second.redraws;
  report.max_residual = std::max(first.max_residual, second.max_residual);
  report.min_abs_det = first.min_abs_det;
  report.cross_check = second.degree;
  return report;
}

DegreeReport winding_degree(const SphereMap& map, const SphereDegreeOptions& options) {
  const Eigen::Index count = options.grid;
  if (count < 8) throw DomainError("sphere_degree: winding grid too small");
  const PointSet grid = quasi_uniform_sphere(1, count);
  std::vector<double> angle(static_cast<std::size_t>(count));
  parallel_for(angle.size(), [&](std::size_t i) {
    const Vector y = map(grid.col(static_cast<Eigen::Index>(i)));
    angle[i] = std::atan2(y(1), y(0));
  });
  double total = 0.0;
  double max_step = 0.0;
  for (std::size_t i = 0; i < angle.size(); ++i) {
    double step = angle[(i + 1) % angle.size()] - angle[i];
    step -= kTwoPi * std::round(step / kTwoPi);
    max_step = std::max(max_step, std::abs(step));
    total += step;
  }
  if (max_step > std::numbers::pi / 2)
    throw DegeneracyError("sphere_degree: winding grid too coarse for this map");
  DegreeReport report;
  report.method = DegreeMethod::Winding;
  report.sphere_dim = 1;
  report.winding_raw = total / kTwoPi;
  report.value = std::lround(report.winding_raw);
  report.max_residual = std::abs(report.winding_raw - static_cast<double>(report.value));
  return report;
}

}  // namespace

std::string to_string(DegreeMethod method) {
  switch (method) {
    case DegreeMethod::PreimageCount: return "preimage_count";
    case DegreeMethod::Winding: return "winding";
    case DegreeMethod::UnitaryFormula: return "unitary_formula";
  }
  return "preimage_count";
}

Matrix oriented_tangent_basis(const Vector& p) {
  Matrix frame = sphere_tangent_basis(p);
  Matrix full(p.size(), p.size());
  full.col(0) = p;
  full.rightCols(frame.cols()) = frame;
  if (full.determinant() < 0.0) frame.col(0) *= -1.0;
  return frame;
}

DegreeReport sphere_degree(const SphereMap& map, int n, const SphereDegreeOptions& options) {
  if (n < 1) throw DomainError("sphere_degree: n must be >= 1");
  if (n > options.max_dim)
    throw SizeError("sphere_degree: n = " + std::to_string(n) + " exceeds the cap " + std::to_string(options.max_dim));
  const DegreeMethod method = options.method.value_or(n == 1 ? DegreeMethod::Winding : DegreeMethod::PreimageCount);
  if (method == DegreeMethod::UnitaryFormula) throw DomainError("sphere_degree: unitary formula needs a matrix map");
  if (method == DegreeMethod::Winding) {
    if (n != 1) throw DomainError("sphere_degree: winding is only defined on S^1");
    DegreeReport report = winding_degree(map, options);
    if (!options.method) {
      const DegreeReport check = preimage_degree(map, 1, options);
      if (check.value != report.value)
        throw InconsistencyError("sphere_degree: winding " + std::to_string(report.value) +
                                 " disagrees with preimage count " + std::to_string(check.value));
      report.cross_check = check.value;
    }
    return report;
  }
  return preimage_degree(map, n, options);
}

// --- matrix maps ---------------------------------------------------------------------

std::function<ComplexMatrix(const ComplexVector&)> homogeneous_extension(const MatrixSphereMap& f) {
  return [f](const ComplexVector& x) -> ComplexMatrix {
    if (x.size() != f.k) throw ShapeError("homogeneous_extension: expected a vector in C^" + std::to_string(f.k));
    const double r = x.norm();
    if (r == 0.0) return ComplexMatrix::Zero(f.p, f.p);
    return r * f.eval(x / r);
  };
}

MatrixSphereMap sharp_product(const MatrixSphereMap& f, const MatrixSphereMap& g) {
  auto big_f = homogeneous_extension(f);
  auto big_g = homogeneous_extension(g);
  const int k = f.k;
  const int l = g.k;
  const int p = f.p;
  const int q = g.p;
  MatrixSphereMap out;
  out.k = k + l;
  out.p = 2 * p * q;
  out.name = "(" + f.name + " # " + g.name + ")";
  out.eval = [=](const ComplexVector& z) -> ComplexMatrix {
    if (z.size() != k + l) throw ShapeError("sharp_product: dimension mismatch");
    const ComplexMatrix fx = big_f(z.head(k));
    const ComplexMatrix gy = big_g(z.tail(l));
    const ComplexMatrix ip = ComplexMatrix::Identity(p, p);
    const ComplexMatrix iq = ComplexMatrix::Identity(q, q);
    ComplexMatrix m(2 * p * q, 2 * p * q);
    m.topLeftCorner(p * q, p * q) = kron(fx, iq);
    m.topRightCorner(p * q, p * q) = -kron(ip, gy.adjoint());
    m.bottomLeftCorner(p * q, p * q) = kron(ip, gy);
    m.bottomRightCorner(p * q, p * q) = kron(fx.adjoint(), iq);
    return m;
  };
  return out;
}

ComplexMatrix a_k_matrix(const ComplexVector& z) {
  const Eigen::Index k = z.size();
  if (k < 1) throw ShapeError("a_k_matrix: empty argument");
  if (k == 1) return ComplexMatrix::Constant(1, 1, z(0));
  const ComplexMatrix prev = a_k_matrix(z.head(k - 1));
  const Eigen::Index r = prev.rows();
  ComplexMatrix out(2 * r, 2 * r);
  out.topLeftCorner(r, r) = prev;
  out.topRightCorner(r, r) = -std::conj(z(k - 1)) * ComplexMatrix::Identity(r, r);
  out.bottomLeftCorner(r, r) = z(k - 1) * ComplexMatrix::Identity(r, r);
  out.bottomRightCorner(r, r) = prev.adjoint();
  return out;
}

MatrixSphereMap a_k(int k, int cap) {
  if (k < 1) throw DomainError("a_k: k must be >= 1");
  if (k > cap) throw SizeError("a_k: k = " + std::to_string(k) + " exceeds the cap " + std::to_string(cap));
  MatrixSphereMap out;
  out.k = k;
  out.p = 1 << (k - 1);
  out.name = "a_" + std::to_string(k);
  out.eval = [k](const ComplexVector& z) -> ComplexMatrix {
    if (z.size() != k) throw ShapeError("a_k: dimension mismatch");
    return a_k_matrix(z);
  };
  return out;
}

MatrixSphereMap scalar_power_map(int d) {
  MatrixSphereMap out;
  out.k = 1;
  out.p = 1;
  out.name = "power(" + std::to_string(d) + ")";
  out.eval = [d](const ComplexVector& z) -> ComplexMatrix {
    if (z.size() != 1) throw ShapeError("scalar_power_map: dimension mismatch");
    const std::complex<double> base = d >= 0 ? z(0) : std::conj(z(0));
    std::complex<double> value = 1.0;
    for (int i = 0; i < std::abs(d); ++i) value *= base;
    return ComplexMatrix::Constant(1, 1, value);
  };
  return out;
}

SphereMap first_column_map(const MatrixSphereMap& f, const UnitaryDegreeOptions& options,
                           std::vector<double>* margins) {
  if (f.k > f.p)
    throw DomainError("unitary_degree: needs k <= p, got k = " + std::to_string(f.k) + ", p = " + std::to_string(f.p));
  using Eval = std::function<ComplexMatrix(const ComplexVector&)>;
  Eval current = f.eval;
  const int k = f.k;

  Rng rng(options.sphere.seed ^ 0xc01u);
  const auto sphere = VarietySpec::sphere(2 * k - 1);
  std::vector<ComplexVector> samples;
  samples.reserve(static_cast<std::size_t>(options.reduction_samples));
  for (int i = 0; i < options.reduction_samples; ++i) samples.push_back(deinterleave(random_point(sphere, rng)));

  for (int p = f.p; p > k; --p) {
    // Image of the normalized last column on the samples.
    std::vector<ComplexVector> columns(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) { columns[i] = current(samples[i]).col(p - 1).normalized(); });

    // The reduction frame sends u to e_p; -u must stay away from the column image.
    const std::complex<double> phases[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    double best_margin = -1.0;
    ComplexVector best;
    for (int j = 0; j < p; ++j)
      for (const auto& phase : phases) {
        ComplexVector u = ComplexVector::Zero(p);
        u(j) = phase;
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& c : columns) margin = std::min(margin, (c + u).norm());
        if (margin > best_margin) {
          best_margin = margin;
          best = u;
        }
      }
    if (best_margin < options.min_margin)
      throw InconsistencyError("unitary_degree: column reduction margin " + std::to_string(best_margin) +
                               " below " + std::to_string(options.min_margin) + " at size " + std::to_string(p));
    if (margins) margins->push_back(best_margin);

    const ComplexMatrix frame = column_section(best).adjoint();
    current = [previous = current, frame, p](const ComplexVector& z) -> ComplexMatrix {
      const ComplexMatrix m = frame * previous(z);
      const ComplexVector w = m.col(p - 1).normalized();
      const ComplexMatrix reduced = column_section(w).adjoint() * m;
      return reduced.topLeftCorner(p - 1, p - 1);
    };
  }

  return [current](const Vector& x) -> Vector {
    const ComplexVector column = current(deinterleave(x)).col(0);
    return interleave(column.normalized());
  };
}

DegreeReport unitary_degree(const MatrixSphereMap& f, const UnitaryDegreeOptions& options) {
  DegreeReport report;
  report.method = DegreeMethod::UnitaryFormula;
  report.k = f.k;
  report.sphere_dim = 2 * f.k - 1;
  const SphereMap psi = first_column_map(f, options, &report.reduction_margins);
  const DegreeReport inner = sphere_degree(psi, 2 * f.k - 1, options.sphere);
  report.psi_degree = inner.value;
  const long divisor = factorial(f.k - 1);
  if (inner.value % divisor != 0)
    throw InconsistencyError("unitary_degree: deg(psi) = " + std::to_string(inner.value) +
                             " is not divisible by (k-1)! = " + std::to_string(divisor));
  report.raw_value = ((f.k - 1) % 2 == 0 ? 1 : -1) * inner.value / divisor;
  report.calibration = options.apply_calibration ? orientation_calibration() : 1;
  const long factor = (report.calibration == -1 && (f.k - 1) % 2 == 1) ? -1 : 1;
  report.value = factor * report.raw_value;
  report.regular_value = inner.regular_value;
  report.preimages = inner.preimages;
  report.cross_check = inner.cross_check;
  report.sub_reports.push_back(inner);
  return report;
}

int orientation_calibration() {
  static const int calibration = [] {
    UnitaryDegreeOptions options;
    options.apply_calibration = false;
    const long raw = unitary_degree(a_k(2), options).raw_value;
    if (raw != 1 && raw != -1)
      throw InconsistencyError("orientation_calibration: raw degree of a_2 is " + std::to_string(raw));
    return static_cast<int>(raw);
  }();
  return calibration;
}

// --- identities ------------------------------------------------------------------------

AkIdentityReport verify_ak_identities(int k, int n_samples, std::uint64_t seed, double tol) {
  const MatrixSphereMap map = a_k(k);  // enforces the cap
  AkIdentityReport report;
  report.k = k;
  report.n_samples = n_samples;
  report.tol = tol;
  const auto group = k == 1 ? VarietySpec::unitary(map.p) : VarietySpec::special_unitary(map.p);

  struct Sample {
    double linearity, unitarity, determinant, membership;
  };
  std::vector<Sample> samples(static_cast<std::size_t>(std::max(0, n_samples)));
  parallel_for(samples.size(), [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    Rng rng(seq);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> radius(0.5, 1.5);
    auto random_c = [&] {
      ComplexVector z(k);
      for (int j = 0; j < k; ++j) z(j) = {normal(rng), normal(rng)};
      return ComplexVector(radius(rng) / z.norm() * z);
    };
    const ComplexVector u = random_c();
    const ComplexVector v = random_c();
    const double alpha = normal(rng);
    const double beta = normal(rng);
    Sample& s = samples[i];
    s.linearity =
        (a_k_matrix(alpha * u + beta * v) - alpha * a_k_matrix(u) - beta * a_k_matrix(v)).cwiseAbs().maxCoeff();
    const ComplexMatrix a = a_k_matrix(u);
    const double r2 = u.squaredNorm();
    s.unitarity = (a * a.adjoint() - r2 * ComplexMatrix::Identity(map.p, map.p)).cwiseAbs().maxCoeff();
    // A_1(z) = z is 1 x 1, so det A_1 = z_1; for k >= 2 det A_k = |z|^(2^(k-1)).
    const std::complex<double> expected = k == 1 ? u(0) : std::complex<double>(std::pow(r2, 1 << (k - 2)), 0.0);
    s.determinant = std::abs(a.determinant() - expected);
    s.membership = membership_violation(realify(map.eval(u / u.norm())), group);
  });
  for (const auto& s : samples) {
    report.linearity = std::max(report.linearity, s.linearity);
    report.unitarity = std::max(report.unitarity, s.unitarity);
    report.determinant = std::max(report.determinant, s.determinant);
    report.group_membership = std::max(report.group_membership, s.membership);
  }
  report.pass = n_samples > 0 && report.linearity <= tol && report.unitarity <= tol && report.determinant <= tol &&
                report.group_membership <= 1e-12;
  return report;
}

// --- reference maps -------------------------------------------------------------------------

SphereMap identity_map() {
  return [](const Vector& x) -> Vector { return x; };
}

SphereMap antipodal_map() {
  return [](const Vector& x) -> Vector { return -x; };
}

SphereMap circle_power_map(int d) {
  return [d](const Vector& x) -> Vector {
    if (x.size() != 2) throw ShapeError("circle_power_map: expected a point of S^1");
    const std::complex<double> z(x(0), x(1));
    const std::complex<double> base = d >= 0 ? z : std::conj(z);
    std::complex<double> w = 1.0;
    for (int i = 0; i < std::abs(d); ++i) w *= base;
    return (Vector(2) << w.real(), w.imag()).finished();
  };
}

SphereMap fermat_self_map(int k) {
  if (k < 1 || k % 2 == 0) throw DomainError("fermat_self_map: k must be a positive odd integer");
  return [k](const Vector& x) -> Vector { return fermat_power_map(to_fermat_sphere(x, k), k); };
}

}  // namespace spraylab
