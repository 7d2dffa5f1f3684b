#include "spraylab/sprays.hpp"

#include <algorithm>
#include <cmath>

#include "spraylab/parallel.hpp"

namespace spraylab {

namespace {

Rng sample_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

Vector random_fiber(int dim, double max_norm, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  const double radius = std::uniform_real_distribution<double>(0.0, max_norm)(rng);
  const double norm = v.norm();
  return norm > 0.0 ? Vector(radius / norm * v) : v;
}

// Realified Lie algebra basis as columns, for recovering fiber coordinates.
Matrix lie_coordinate_matrix(const VarietySpec& group) {
  const auto basis = lie_algebra_basis(group);
  Matrix b(2 * group.m() * group.m(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = realify(basis[i]);
  return b;
}

bool uses_block_product(const VarietySpec& group) {
  return group.kind() == VarietySpec::Kind::SU && group.m() >= 3;
}

// Tangent directions along which the spray must be surjective.
Matrix required_tangent(const Spray& spray, const Vector& z) {
  if (!spray.submersion_domain()) return tangent_basis(z, spray.base());
  const auto parts = split_product(z, spray.base());
  const VarietySpec& target = spray.base().parts()[1];
  const Matrix t = tangent_basis(parts[1], target);
  Matrix out = Matrix::Zero(z.size(), t.cols());
  out.bottomRows(t.rows()) = t;
  return out;
}

}  // namespace

std::string to_string(SprayKind kind) {
  switch (kind) {
    case SprayKind::Stereographic: return "stereographic";
    case SprayKind::AmbientStereographic: return "ambient-stereographic";
    case SprayKind::GroupAction: return "group";
    case SprayKind::ProductSubmersion: return "product";
    case SprayKind::Iterated: return "iterated";
    case SprayKind::Custom: return "custom";
  }
  return "custom";
}

// --- Spray --------------------------------------------------------------------

Spray::Spray(SprayKind kind, VarietySpec base, int fiber_dim, EvalFn eval, InverseFn inverse,
             nlohmann::json params)
    : kind_(kind),
      base_(std::move(base)),
      fiber_dim_(fiber_dim),
      eval_(std::move(eval)),
      inverse_(std::move(inverse)),
      params_(std::move(params)) {
  if (fiber_dim_ < 1) throw DomainError("Spray: fiber dimension must be positive");
}

Vector Spray::eval(const Vector& base_point, const Vector& fiber) const {
  if (base_point.size() != base_.ambient_dim())
    throw ShapeError("Spray::eval: base point has dimension " + std::to_string(base_point.size()) +
                     ", expected " + std::to_string(base_.ambient_dim()));
  if (fiber.size() != fiber_dim_)
    throw ShapeError("Spray::eval: fiber vector has dimension " + std::to_string(fiber.size()) +
                     ", expected " + std::to_string(fiber_dim_));
  return eval_(base_point, fiber);
}

Vector Spray::inverse(const Vector& base_point, const Vector& target) const {
  if (!inverse_) throw DomainError("Spray::inverse: no exact inverse attached");
  if (base_point.size() != base_.ambient_dim() || target.size() != base_.ambient_dim())
    throw ShapeError("Spray::inverse: dimension mismatch");
  return inverse_(base_point, target);
}

nlohmann::json Spray::descriptor() const {
  return {{"kind", to_string(kind_)}, {"base", base_.name()}, {"fiber_dim", fiber_dim_}, {"params", params_}};
}

// --- stereographic --------------------------------------------------------------

Vector inverse_stereographic(const Vector& p, const Vector& w) {
  const double w2 = w.squaredNorm();
  return ((4.0 - w2) * p + 4.0 * w) / (4.0 + w2);
}

Vector stereographic_projection(const Vector& p, const Vector& q) {
  const double c = p.dot(q);
  if (1.0 + c <= 1e-14) throw AntipodeError("stereographic projection undefined at the antipode");
  return 2.0 / (1.0 + c) * (q - c * p);
}

Spray stereographic_spray(int n) {
  auto eval = [](const Vector& p, const Vector& v) -> Vector {
    return inverse_stereographic(p, sphere_tangent_basis(p) * v);
  };
  auto inverse = [](const Vector& p, const Vector& q) -> Vector {
    return sphere_tangent_basis(p).transpose() * stereographic_projection(p, q);
  };
  return Spray(SprayKind::Stereographic, VarietySpec::sphere(n), n, eval, inverse, {{"n", n}});
}

Spray ambient_stereographic_spray(int n) {
  auto eval = [](const Vector& p, const Vector& v) -> Vector {
    return inverse_stereographic(p, v - v.dot(p) * p);
  };
  auto inverse = [](const Vector& p, const Vector& q) -> Vector { return stereographic_projection(p, q); };
  return Spray(SprayKind::AmbientStereographic, VarietySpec::sphere(n), n + 1, eval, inverse, {{"n", n}});
}

// --- group actions --------------------------------------------------------------

GroupAction linear_sphere_action(const VarietySpec& group) {
  if (!group.is_group()) throw DomainError("linear_sphere_action: not a group");
  if (group.is_complex_group())
    return [](const ComplexMatrix& g, const Vector& y) -> Vector { return interleave(g * deinterleave(y)); };
  return [](const ComplexMatrix& g, const Vector& y) -> Vector { return g.real() * y; };
}

GroupAction left_multiplication(const VarietySpec& group) {
  if (!group.is_group()) throw DomainError("left_multiplication: not a group");
  if (group.is_complex_group()) {
    const int m = group.m();
    return [m](const ComplexMatrix& g, const Vector& y) -> Vector { return realify(g * complexify(y, m, m)); };
  }
  const int m = group.m();
  return [m](const ComplexMatrix& g, const Vector& y) -> Vector {
    return flatten(g.real() * unflatten(y, m, m));
  };
}

ComplexMatrix group_element(const VarietySpec& group, const Vector& fiber, const GroupSprayOptions& options) {
  const auto basis = lie_algebra_basis(group);
  if (fiber.size() != static_cast<Eigen::Index>(basis.size()))
    throw ShapeError("group_element: fiber dimension " + std::to_string(fiber.size()) + " does not match dim " +
                     group.name() + " = " + std::to_string(basis.size()));
  const Vector v = options.shrink ? Vector(shrink_map(fiber, *options.shrink)) : fiber;
  const int m = group.m();
  if (uses_block_product(group)) {
    ComplexMatrix g = ComplexMatrix::Identity(m, m);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double t = v(static_cast<Eigen::Index>(i));
      if (t != 0.0) g = g * cayley(ComplexMatrix(t * basis[i]));
    }
    return g;
  }
  ComplexMatrix a = ComplexMatrix::Zero(m, m);
  for (std::size_t i = 0; i < basis.size(); ++i) a += v(static_cast<Eigen::Index>(i)) * basis[i];
  if (!group.is_complex_group()) return cayley(Matrix(a.real())).cast<std::complex<double>>();
  return cayley(a);
}

Spray group_action_spray(const VarietySpec& group, const VarietySpec& target, GroupAction action,
                         GroupSprayOptions options) {
  if (!group.is_group()) throw DomainError("group_action_spray: " + group.name() + " is not a matrix group");
  const int fiber_dim = static_cast<int>(lie_algebra_basis(group).size());
  auto eval = [group, action, options](const Vector& y, const Vector& v) -> Vector {
    return action(group_element(group, v, options), y);
  };

  Spray::InverseFn inverse;
  const bool self_action = target.is_group() && target.m() == group.m() &&
                           target.is_complex_group() == group.is_complex_group();
  if (self_action && !options.shrink && !uses_block_product(group)) {
    const Matrix coords = lie_coordinate_matrix(group);
    // q = cayley(A) y, so A = cayley(q y^*) and the fiber vector solves coords * v = A.
    inverse = [group, target, coords](const Vector& y, const Vector& q) -> Vector {
      const ComplexMatrix g = group_matrix(q, target) * group_matrix(y, target).adjoint();
      const ComplexMatrix a = cayley(g);
      return coords.colPivHouseholderQr().solve(realify(a));
    };
  }
  nlohmann::json params = {{"group", group.name()}, {"space", target.name()}};
  if (options.shrink) params["shrink"] = *options.shrink;
  return Spray(SprayKind::GroupAction, target, fiber_dim, eval, inverse, params);
}

Spray group_action_spray(const VarietySpec& group, const VarietySpec& target, GroupSprayOptions options) {
  if (!group.is_group()) throw DomainError("group_action_spray: " + group.name() + " is not a matrix group");
  if (target.is_group()) {
    if (target.m() != group.m() || target.is_complex_group() != group.is_complex_group())
      throw ShapeError("group_action_spray: " + group.name() + " cannot act on " + target.name());
    return group_action_spray(group, target, left_multiplication(group), options);
  }
  const Eigen::Index expected = group.is_complex_group() ? 2 * group.m() : group.m();
  if (target.kind() != VarietySpec::Kind::Sphere || target.ambient_dim() != expected)
    throw ShapeError("group_action_spray: " + group.name() + " cannot act linearly on " + target.name());
  return group_action_spray(group, target, linear_sphere_action(group), options);
}

// --- composite sprays --------------------------------------------------------------

Spray product_submersion_spray(const VarietySpec& domain, const Spray& target_spray) {
  const VarietySpec base = VarietySpec::product({domain, target_spray.base()});
  const Eigen::Index split = domain.ambient_dim();
  auto eval = [split, target_spray](const Vector& z, const Vector& v) -> Vector {
    Vector out(z.size());
    out.head(split) = z.head(split);
    out.tail(z.size() - split) = target_spray.eval(z.tail(z.size() - split), v);
    return out;
  };
  Spray::InverseFn inverse;
  if (target_spray.has_inverse()) {
    inverse = [split, target_spray](const Vector& z, const Vector& q) -> Vector {
      if (z.head(split) != q.head(split))
        throw DomainError("product spray inverse: target lies in a different fiber");
      return target_spray.inverse(z.tail(z.size() - split), q.tail(q.size() - split));
    };
  }
  Spray out(SprayKind::ProductSubmersion, base, target_spray.fiber_dim(), eval, inverse,
            {{"domain", domain.name()}, {"target_spray", target_spray.descriptor()}});
  out.set_submersion_domain(domain);
  return out;
}

Spray iterated_spray(const Spray& inner, int k) {
  if (k < 1) throw DomainError("iterated_spray: k must be >= 1");
  const int m = inner.fiber_dim();
  auto eval = [inner, k, m](const Vector& z, const Vector& v) -> Vector {
    Vector out = z;
    for (int i = 0; i < k; ++i) out = inner.eval(out, v.segment(static_cast<Eigen::Index>(i) * m, m));
    return out;
  };
  Spray out(SprayKind::Iterated, inner.base(), k * m, eval, {}, {{"inner", inner.descriptor()}, {"k", k}});
  if (inner.submersion_domain()) out.set_submersion_domain(*inner.submersion_domain());
  return out;
}

Spray constant_spray(const VarietySpec& base, int fiber_dim) {
  auto eval = [](const Vector& y, const Vector&) -> Vector { return y; };
  return Spray(SprayKind::Custom, base, fiber_dim, eval, {}, {{"fixture", "constant"}});
}

// --- verification -------------------------------------------------------------------

AxiomReport verify_spray_axioms(const Spray& spray, const AxiomOptions& options) {
  AxiomReport report;
  report.tol = options.tol;
  report.per_sample.resize(static_cast<std::size_t>(std::max(0, options.n_samples)));
  const VarietySpec& base = spray.base();
  const Eigen::Index split = spray.submersion_domain() ? spray.submersion_domain()->ambient_dim() : 0;

  parallel_for(report.per_sample.size(), [&](std::size_t i) {
    Rng rng = sample_rng(options.seed, i);
    const Vector y = random_point(base, rng);
    const Vector v = random_fiber(spray.fiber_dim(), options.max_fiber_norm, rng);
    AxiomSample& s = report.per_sample[i];
    s.zero_section = (spray.eval(y, Vector::Zero(spray.fiber_dim())) - y).cwiseAbs().maxCoeff();
    const Vector q = spray.eval(y, v);
    s.membership = membership_violation(q, base);
    if (split > 0) s.fiber = (q.head(split) - y.head(split)).cwiseAbs().maxCoeff();
  });

  for (const auto& s : report.per_sample) {
    report.max_zero_section = std::max(report.max_zero_section, s.zero_section);
    report.max_membership = std::max(report.max_membership, s.membership);
    report.max_fiber = std::max(report.max_fiber, s.fiber);
  }
  report.max_violation = std::max({report.max_zero_section, report.max_membership, report.max_fiber});
  report.pass = report.max_violation <= options.tol;
  return report;
}

Matrix fiber_derivative(const Spray& spray, const Vector& base_point, const Vector& at_fiber, double fd_step) {
  const double h = fd_step * (1.0 + base_point.norm());
  Matrix jac(base_point.size(), spray.fiber_dim());
  for (int j = 0; j < spray.fiber_dim(); ++j) {
    Vector plus = at_fiber;
    Vector minus = at_fiber;
    plus(j) += h;
    minus(j) -= h;
    jac.col(j) = (spray.eval(base_point, plus) - spray.eval(base_point, minus)) / (2.0 * h);
  }
  return jac;
}

DominanceReport verify_dominating(const Spray& spray, const DominanceOptions& options) {
  DominanceReport report;
  report.per_sample.resize(static_cast<std::size_t>(std::max(0, options.n_samples)));
  report.required_rank = spray.submersion_domain() ? spray.base().parts()[1].dim() : spray.base().dim();

  parallel_for(report.per_sample.size(), [&](std::size_t i) {
    Rng rng = sample_rng(options.seed, i);
    const Vector y = random_point(spray.base(), rng);
    const Matrix jac = fiber_derivative(spray, y, Vector::Zero(spray.fiber_dim()), options.fd_step);
    const Matrix projected = required_tangent(spray, y).transpose() * jac;
    const Eigen::JacobiSVD<Matrix> svd(projected);
    const Vector& sigma = svd.singularValues();
    DominanceSample& s = report.per_sample[i];
    const double top = sigma.size() > 0 ? sigma(0) : 0.0;
    if (top > 0.0) {
      s.rank = static_cast<int>((sigma.array() >= options.rank_tol * top).count());
      s.relative_sigma_min = sigma(sigma.size() - 1) / top;
    }
  });

  report.min_rank = report.per_sample.empty() ? 0 : report.per_sample.front().rank;
  report.max_rank = report.min_rank;
  report.min_relative_sigma = report.per_sample.empty() ? 0.0 : 1.0;
  for (const auto& s : report.per_sample) {
    report.min_rank = std::min(report.min_rank, s.rank);
    report.max_rank = std::max(report.max_rank, s.rank);
    report.min_relative_sigma = std::min(report.min_relative_sigma, s.relative_sigma_min);
  }
  report.pass = !report.per_sample.empty() && report.min_rank == report.required_rank &&
                report.max_rank == report.required_rank;
  return report;
}

// --- local inversion ------------------------------------------------------------------

Vector spray_local_inverse(const Spray& spray, const Vector& base_point, const Vector& target,
                           const NewtonConfig& config) {
  const int dim = spray.fiber_dim();
  if (target == base_point) return Vector::Zero(dim);

  auto residual = [&](const Vector& v) { return (spray.eval(base_point, v) - target).norm(); };
  Vector v = Vector::Zero(dim);

  if (spray.has_inverse()) {
    try {
      v = spray.inverse(base_point, target);
    } catch (const AntipodeError& e) {
      throw DivergenceError(std::string("spray_local_inverse: ") + e.what());
    } catch (const SingularityError& e) {
      throw DivergenceError(std::string("spray_local_inverse: ") + e.what());
    }
    if (!v.allFinite() || v.norm() > config.max_fiber_norm)
      throw DivergenceError("spray_local_inverse: target outside the injectivity neighborhood");
    if (residual(v) <= config.tol) return v;
  }

  double r = residual(v);
  for (int iter = 0; iter < config.max_iter; ++iter) {
    if (r <= config.tol) return v;
    const Matrix jac = fiber_derivative(spray, base_point, v, config.fd_step);
    const Vector step = -jac.completeOrthogonalDecomposition().solve(spray.eval(base_point, v) - target);
    double t = 1.0;
    Vector trial = v + step;
    double r_trial = residual(trial);
    while (!(r_trial < r) && t > 1e-6) {
      t *= 0.5;
      trial = v + t * step;
      r_trial = residual(trial);
    }
    if (!(r_trial < r)) break;
    v = trial;
    r = r_trial;
    if (v.norm() > config.max_fiber_norm)
      throw DivergenceError("spray_local_inverse: Newton left the injectivity neighborhood");
  }
  if (r <= config.tol) return v;
  throw DivergenceError("spray_local_inverse: no convergence (residual " + std::to_string(r) + ")");
}

}  // namespace spraylab
