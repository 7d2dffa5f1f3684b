#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spraylab/degree.hpp"
#include "spraylab/polynomial.hpp"
#include "spraylab/sprays.hpp"

namespace spraylab {

using PointMap = std::function<Vector(const Vector&)>;

/// F: X x [0, 1] -> Y with F(., 0) given exactly by the rational map f0.
struct Homotopy {
  VarietySpec domain;
  VarietySpec target;
  std::function<Vector(const Vector& x, double t)> eval;
  RationalMap f0;
  std::string name;
  nlohmann::json params = nlohmann::json::object();

  PointMap at(double t) const;
};

struct HomotopyCheck {
  double max_membership = 0;
  double max_f0_mismatch = 0;
  bool pass = false;
};

/// Samples (x, t) and checks Y-membership of F(x, t) and F(x, 0) = f0(x).
HomotopyCheck check_homotopy(const Homotopy& h, int n_samples, std::uint64_t seed, double member_tol = 1e-10,
                             double f0_tol = 1e-12);

struct TrackConfig {
  NewtonConfig newton;
  double tol = 1e-10;
  int max_intervals = 64;
};

struct EtaTable {
  /// Partition 0 = t_0 < ... < t_m = 1.
  std::vector<double> nodes;
  PointSet grid;
  /// Stacked per-interval fiber vectors, one column per grid point.
  Matrix eta;
  /// Largest residual at any partition node, and at t = 1 through the iterated spray.
  double max_node_residual = 0;
  double max_final_residual = 0;
  /// The spray whose fiber is eta: the input spray (one interval) or its iterate.
  std::optional<Spray> spray;

  int intervals() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Chains local spray inverses along an adaptively bisected partition of [0, 1]. The spray is a
/// spray for the projection X x Y -> X whose base is Product(X, Y).
EtaTable track_eta(const Homotopy& h, const Spray& spray, const PointSet& grid, const TrackConfig& config = {});

/// g(x) = Y-part of s((x, f0(x)), beta(x)).
class RegularApproximation {
 public:
  RegularApproximation(Spray spray, VarietySpec domain, VarietySpec target, RationalMap f0, PolynomialMap beta);

  const Spray& spray() const { return spray_; }
  const VarietySpec& domain() const { return domain_; }
  const VarietySpec& target() const { return target_; }
  const RationalMap& f0() const { return f0_; }
  const PolynomialMap& beta() const { return beta_; }

  Vector eval(const Vector& x) const;
  PointMap evaluator() const;

  double c0 = 0;
  double c1 = 0;

 private:
  Spray spray_;
  VarietySpec domain_;
  VarietySpec target_;
  RationalMap f0_;
  PolynomialMap beta_;
};

RegularApproximation assemble_regular_map(const Homotopy& h, const Spray& spray, const PolynomialMap& beta);

struct ErrorReport {
  double c0 = 0;
  double c1 = 0;
};

/// c0 = max |g - f| on the grid; c1 = max over grid points and tangent-frame directions of the
/// central-difference discrepancy |dg(e) - df(e)|. The domain must be a sphere.
ErrorReport approximation_error(const PointMap& g, const PointMap& f, const VarietySpec& domain, const PointSet& grid,
                                double fd_step = 1e-6);

struct ApproximationConfig {
  double target_c0 = 1e-3;
  /// Held-out target for the first fit; later fits tighten it tenfold. 0 means target_c0 / 4.
  double fit_target = 0;
  int max_degree = 20;
  int max_refinements = 6;
  /// 0 means 2^10 points on S^1 and 2^12 otherwise.
  Eigen::Index grid_size = 0;
  TrackConfig track;
  double fd_step = 1e-6;
  bool check_degree = true;
  SphereDegreeOptions degree;
  std::uint64_t seed = 0;
};

struct ResidualChain {
  double lipschitz = 0;
  double beta_residual = 0;
  double tracking_residual = 0;
  double bound = 0;
  double c0 = 0;
  bool holds = false;
};

struct DegreeCheck {
  long source = 0;
  long approximation = 0;
  std::string method;
  bool agree = false;
};

struct ApproximationResult {
  explicit ApproximationResult(RegularApproximation a) : approximation(std::move(a)) {}

  RegularApproximation approximation;
  /// "ok", "degree_exhausted" or "target_not_met".
  std::string status;
  bool target_met = false;
  int intervals = 0;
  std::vector<double> partition;
  double tracking_node_residual = 0;
  std::vector<FitStep> fit_history;
  double fit_target = 0;
  int refinements = 0;
  ResidualChain chain;
  double max_membership = 0;
  Eigen::Index grid_size = 0;
  std::optional<DegreeCheck> degree;
};

/// Failure inside approximate, tagged with the stage that raised it.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, std::string error_type, const std::string& what)
      : Error(what), stage_(std::move(stage)), error_type_(std::move(error_type)) {}
  const std::string& stage() const { return stage_; }
  const std::string& error_type() const { return error_type_; }

 private:
  std::string stage_;
  std::string error_type_;
};

/// Default evaluation grid for a sphere domain.
PointSet approximation_grid(const VarietySpec& domain, Eigen::Index size = 0, std::uint64_t seed = 0);

/// track_eta -> fit_polynomial -> assemble_regular_map with the ambient stereographic spray on a
/// sphere target or the left-multiplication Cayley spray on a group target.
ApproximationResult approximate(const PointMap& f, const Homotopy& h, const ApproximationConfig& config = {});

/// The product-submersion spray used by approximate for this homotopy.
Spray pipeline_spray(const Homotopy& h);

}  // namespace spraylab
