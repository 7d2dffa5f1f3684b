#include "spraylab/approx.hpp"

#include <algorithm>
#include <cmath>

#include "spraylab/parallel.hpp"

namespace spraylab {

namespace {

bool is_round_sphere(const VarietySpec& v) { return v.kind() == VarietySpec::Kind::Sphere; }

Vector project_to_target(const Vector& z, Eigen::Index split) { return z.tail(z.size() - split); }

std::string error_type(const Error& e) {
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const HomotopyTooWildError*>(&e)) return "homotopy_too_wild";
  if (dynamic_cast<const InconsistencyError*>(&e)) return "inconsistency";
  if (dynamic_cast<const DegeneracyError*>(&e)) return "degeneracy";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const SizeError*>(&e)) return "size";
  if (dynamic_cast<const SingularityError*>(&e)) return "singularity";
  return "error";
}

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const DegreeExhaustedError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(name, error_type(e), std::string(name) + ": " + e.what());
  }
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

}  // namespace

PointMap Homotopy::at(double t) const {
  return [eval = eval, t](const Vector& x) -> Vector { return eval(x, t); };
}

HomotopyCheck check_homotopy(const Homotopy& h, int n_samples, std::uint64_t seed, double member_tol,
                             double f0_tol) {
  HomotopyCheck out;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n_samples; ++i) {
    const Vector x = random_point(h.domain, rng);
    const double t = unit(rng);
    out.max_membership = std::max(out.max_membership, membership_violation(h.eval(x, t), h.target));
    out.max_f0_mismatch = std::max(out.max_f0_mismatch, (h.eval(x, 0.0) - h.f0.eval(x)).norm());
  }
  out.pass = out.max_membership <= member_tol && out.max_f0_mismatch <= f0_tol;
  return out;
}

// --- tracking -----------------------------------------------------------------------------

EtaTable track_eta(const Homotopy& h, const Spray& spray, const PointSet& grid, const TrackConfig& config) {
  if (!spray.submersion_domain() || !(*spray.submersion_domain() == h.domain))
    throw DomainError("track_eta: spray must be a spray for the projection " + h.domain.name() + " x Y -> " +
                      h.domain.name());
  if (!(spray.base() == VarietySpec::product({h.domain, h.target})))
    throw DomainError("track_eta: spray base " + spray.base().name() + " does not match the homotopy");
  if (grid.rows() != h.domain.ambient_dim()) throw ShapeError("track_eta: grid points do not lie in " + h.domain.name());

  const auto count = static_cast<std::size_t>(grid.cols());
  const Eigen::Index split = h.domain.ambient_dim();
  auto lifted = [&](Eigen::Index j, double t) -> Vector { return join_product({grid.col(j), h.eval(grid.col(j), t)}); };

  std::vector<Vector> start(count);
  parallel_for(count, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    start[j] = join_product({grid.col(col), h.f0.eval(grid.col(col))});
  });

  EtaTable table;
  table.grid = grid;
  table.nodes = {0.0, 1.0};
  std::vector<Matrix> blocks;
  std::vector<Vector> current = start;
  std::size_t i = 0;
  while (i + 1 < table.nodes.size()) {
    const double t_next = table.nodes[i + 1];
    Matrix block(spray.fiber_dim(), grid.cols());
    std::vector<Vector> next(count);
    std::vector<double> residual(count, 0.0);
    try {
      parallel_for(count, [&](std::size_t j) {
        const auto col = static_cast<Eigen::Index>(j);
        const Vector target = lifted(col, t_next);
        const Vector eta = spray_local_inverse(spray, current[j], target, config.newton);
        next[j] = spray.eval(current[j], eta);
        residual[j] = (next[j] - target).norm();
        if (!(residual[j] <= config.tol))
          throw DivergenceError("track_eta: node residual " + std::to_string(residual[j]) + " above tolerance");
        block.col(col) = eta;
      });
    } catch (const DivergenceError&) {
      if (table.intervals() >= config.max_intervals)
        throw HomotopyTooWildError("track_eta: partition needs more than " + std::to_string(config.max_intervals) +
                                   " intervals");
      const double mid = 0.5 * (table.nodes[i] + t_next);
      table.nodes.insert(table.nodes.begin() + static_cast<std::ptrdiff_t>(i + 1), mid);
      continue;
    }
    for (double r : residual) table.max_node_residual = std::max(table.max_node_residual, r);
    blocks.push_back(std::move(block));
    current = std::move(next);
    ++i;
  }

  const int m = table.intervals();
  table.eta.resize(static_cast<Eigen::Index>(m) * spray.fiber_dim(), grid.cols());
  for (int b = 0; b < m; ++b)
    table.eta.middleRows(static_cast<Eigen::Index>(b) * spray.fiber_dim(), spray.fiber_dim()) =
        blocks[static_cast<std::size_t>(b)];
  table.spray = m == 1 ? spray : iterated_spray(spray, m);

  std::vector<double> final_residual(count, 0.0);
  parallel_for(count, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    const Vector reached = table.spray->eval(start[j], table.eta.col(col));
    final_residual[j] = (project_to_target(reached, split) - h.eval(grid.col(col), 1.0)).norm();
  });
  for (double r : final_residual) table.max_final_residual = std::max(table.max_final_residual, r);
  if (!(table.max_final_residual <= config.tol))
    throw InconsistencyError("track_eta: residual at t = 1 is " + std::to_string(table.max_final_residual));
  return table;
}

// --- assembly -----------------------------------------------------------------------------

RegularApproximation::RegularApproximation(Spray spray, VarietySpec domain, VarietySpec target, RationalMap f0,
                                           PolynomialMap beta)
    : spray_(std::move(spray)),
      domain_(std::move(domain)),
      target_(std::move(target)),
      f0_(std::move(f0)),
      beta_(std::move(beta)) {}

Vector RegularApproximation::eval(const Vector& x) const {
  const Vector z = spray_.eval(join_product({x, f0_.eval(x)}), beta_.eval(x));
  return project_to_target(z, domain_.ambient_dim());
}

PointMap RegularApproximation::evaluator() const {
  return [self = *this](const Vector& x) -> Vector { return self.eval(x); };
}

RegularApproximation assemble_regular_map(const Homotopy& h, const Spray& spray, const PolynomialMap& beta) {
  if (beta.input_dim != h.domain.ambient_dim())
    throw ShapeError("assemble_regular_map: beta input dimension " + std::to_string(beta.input_dim) +
                     " differs from the ambient dimension of " + h.domain.name());
  if (beta.output_dim != spray.fiber_dim())
    throw ShapeError("assemble_regular_map: beta output dimension " + std::to_string(beta.output_dim) +
                     " differs from the spray fiber dimension " + std::to_string(spray.fiber_dim()));
  if (h.f0.input_dim() != h.domain.ambient_dim() || h.f0.output_dim() != h.target.ambient_dim())
    throw ShapeError("assemble_regular_map: f0 dimensions do not match the homotopy");
  if (!(spray.base() == VarietySpec::product({h.domain, h.target})))
    throw ShapeError("assemble_regular_map: spray base does not match the homotopy");
  return RegularApproximation(spray, h.domain, h.target, h.f0, beta);
}

ErrorReport approximation_error(const PointMap& g, const PointMap& f, const VarietySpec& domain, const PointSet& grid,
                                double fd_step) {
  if (!is_round_sphere(domain)) throw DomainError("approximation_error: domain must be a sphere");
  const auto count = static_cast<std::size_t>(grid.cols());
  std::vector<ErrorReport> local(count);
  parallel_for(count, [&](std::size_t j) {
    const Vector x = grid.col(static_cast<Eigen::Index>(j));
    ErrorReport& r = local[j];
    r.c0 = (g(x) - f(x)).norm();
    const Matrix frame = sphere_tangent_basis(x);
    for (Eigen::Index c = 0; c < frame.cols(); ++c) {
      const Vector plus = (x + fd_step * frame.col(c)).normalized();
      const Vector minus = (x - fd_step * frame.col(c)).normalized();
      const Vector dg = (g(plus) - g(minus)) / (2.0 * fd_step);
      const Vector df = (f(plus) - f(minus)) / (2.0 * fd_step);
      r.c1 = std::max(r.c1, (dg - df).norm());
    }
  });
  ErrorReport out;
  for (const auto& r : local) {
    out.c0 = std::max(out.c0, r.c0);
    out.c1 = std::max(out.c1, r.c1);
  }
  return out;
}

// --- pipeline -----------------------------------------------------------------------------

PointSet approximation_grid(const VarietySpec& domain, Eigen::Index size, std::uint64_t seed) {
  if (!is_round_sphere(domain)) throw DomainError("approximation_grid: domain must be a sphere");
  if (size == 0) size = domain.n() == 1 ? Eigen::Index{1} << 10 : Eigen::Index{1} << 12;
  return quasi_uniform_sphere(domain.n(), size, seed);
}

Spray pipeline_spray(const Homotopy& h) {
  if (is_round_sphere(h.target)) return product_submersion_spray(h.domain, ambient_stereographic_spray(h.target.n()));
  if (h.target.is_group() && h.target.kind() != VarietySpec::Kind::O)
    return product_submersion_spray(h.domain, group_action_spray(h.target, h.target));
  throw DomainError("approximate: unsupported target " + h.target.name());
}

ApproximationResult approximate(const PointMap& f, const Homotopy& h, const ApproximationConfig& config) {
  const PointSet grid = stage("setup", [&] { return approximation_grid(h.domain, config.grid_size, config.seed); });
  const auto count = static_cast<std::size_t>(grid.cols());
  const Eigen::Index split = h.domain.ambient_dim();

  std::vector<double> endpoint_gap(count, 0.0);
  parallel_for(count, [&](std::size_t j) {
    const Vector x = grid.col(static_cast<Eigen::Index>(j));
    endpoint_gap[j] = (h.eval(x, 1.0) - f(x)).norm();
  });
  const double gap = *std::max_element(endpoint_gap.begin(), endpoint_gap.end());
  if (!(gap <= 1e-10))
    throw PipelineError("setup", "domain", "approximate: homotopy endpoint differs from f by " + std::to_string(gap));

  const Spray base_spray = stage("setup", [&] { return pipeline_spray(h); });
  const EtaTable table = stage("track_eta", [&] { return track_eta(h, base_spray, grid, config.track); });
  const Spray& spray = *table.spray;

  double fit_target = config.fit_target > 0.0 ? config.fit_target : config.target_c0 / 4.0;
  int min_degree = 1;
  std::optional<PolynomialFit> fit;
  std::vector<FitStep> history;
  std::string status = "ok";
  int refinements = 0;
  std::optional<RegularApproximation> approx;
  ErrorReport errors;

  for (;;) {
    FitOptions options;
    options.min_degree = min_degree;
    try {
      fit = stage("fit_polynomial",
                  [&] { return fit_polynomial(grid, table.eta, h.domain, fit_target, config.max_degree, options); });
    } catch (const DegreeExhaustedError& e) {
      fit = e.best();
      status = "degree_exhausted";
    }
    history.insert(history.end(), fit->history.begin(), fit->history.end());
    approx.emplace(stage("assemble_regular_map", [&] { return assemble_regular_map(h, spray, fit->map); }));
    errors = stage("approximation_error",
                   [&] { return approximation_error(approx->evaluator(), f, h.domain, grid, config.fd_step); });
    if (status != "ok" || errors.c0 <= config.target_c0) break;
    if (refinements >= config.max_refinements) {
      status = "target_not_met";
      break;
    }
    ++refinements;
    fit_target /= 10.0;
    min_degree = fit->map.degree;
  }
  approx->c0 = errors.c0;
  approx->c1 = errors.c1;

  ApproximationResult result(*approx);
  result.status = status;
  result.target_met = status == "ok" && errors.c0 <= config.target_c0;
  result.intervals = table.intervals();
  result.partition = table.nodes;
  result.tracking_node_residual = table.max_node_residual;
  result.fit_history = std::move(history);
  result.fit_target = fit_target;
  result.refinements = refinements;
  result.grid_size = grid.cols();

  // Residual chain c0 <= L |beta - eta| + tracking residual.
  struct Local {
    double lipschitz = 0, beta = 0, tracking = 0, membership = 0;
  };
  std::vector<Local> local(count);
  parallel_for(count, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    const Vector x = grid.col(col);
    const Vector z0 = join_product({x, h.f0.eval(x)});
    const Vector beta = approx->beta().eval(x);
    const Vector eta = table.eta.col(col);
    Local& l = local[j];
    l.lipschitz = std::max(spectral_norm(fiber_derivative(spray, z0, beta, 1e-6)),
                           spectral_norm(fiber_derivative(spray, z0, eta, 1e-6)));
    l.beta = (beta - eta).norm();
    l.tracking = (project_to_target(spray.eval(z0, eta), split) - f(x)).norm();
    l.membership = membership_violation(approx->eval(x), h.target);
  });
  for (const auto& l : local) {
    result.chain.lipschitz = std::max(result.chain.lipschitz, l.lipschitz);
    result.chain.beta_residual = std::max(result.chain.beta_residual, l.beta);
    result.chain.tracking_residual = std::max(result.chain.tracking_residual, l.tracking);
    result.max_membership = std::max(result.max_membership, l.membership);
  }
  result.chain.c0 = errors.c0;
  result.chain.bound = result.chain.lipschitz * result.chain.beta_residual + result.chain.tracking_residual;
  result.chain.holds = errors.c0 <= result.chain.bound + 1e-12;

  if (config.check_degree && is_round_sphere(h.domain) && h.domain == h.target && h.domain.n() <= 2) {
    DegreeCheck check;
    const DegreeReport source = stage("degree_check", [&] { return sphere_degree(f, h.domain.n(), config.degree); });
    const DegreeReport image =
        stage("degree_check", [&] { return sphere_degree(approx->evaluator(), h.domain.n(), config.degree); });
    check.source = source.value;
    check.approximation = image.value;
    check.method = to_string(image.method);
    check.agree = source.value == image.value;
    result.degree = check;
  }
  return result;
}

}  // namespace spraylab
