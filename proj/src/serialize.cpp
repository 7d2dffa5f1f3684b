#include "spraylab/serialize.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace spraylab {

using nlohmann::json;

std::string decimal_string(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_decimal(const std::string& s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw UsageError("parse_decimal: '" + s + "' is not a decimal number");
  return x;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const Matrix& a) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    entries.push_back(std::move(row));
  }
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"entries", std::move(entries)}};
}

json to_json(const ComplexMatrix& a) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back({a(i, j).real(), a(i, j).imag()});
    entries.push_back(std::move(row));
  }
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"entries", std::move(entries)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& entries = j.at("entries");
  if (!entries.is_array() || static_cast<Eigen::Index>(entries.size()) != rows)
    throw ShapeError("matrix_from_json: row count mismatch");
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = entries[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ShapeError("matrix_from_json: column count mismatch");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& e = row[static_cast<std::size_t>(k)];
      a(i, k) = e.is_string() ? parse_decimal(e.get<std::string>()) : e.get<double>();
    }
  }
  return a;
}

json to_json(const AxiomReport& r, bool per_sample) {
  json out = {{"pass", r.pass},
              {"tol", r.tol},
              {"max_violation", r.max_violation},
              {"max_zero_section", r.max_zero_section},
              {"max_membership", r.max_membership},
              {"max_fiber", r.max_fiber},
              {"n_samples", r.per_sample.size()}};
  if (per_sample) {
    json samples = json::array();
    for (const auto& s : r.per_sample)
      samples.push_back({{"zero_section", s.zero_section}, {"membership", s.membership}, {"fiber", s.fiber}});
    out["per_sample"] = std::move(samples);
  }
  return out;
}

json to_json(const DominanceReport& r, bool per_sample) {
  json out = {{"pass", r.pass},
              {"required_rank", r.required_rank},
              {"min_rank", r.min_rank},
              {"max_rank", r.max_rank},
              {"min_relative_sigma", r.min_relative_sigma},
              {"n_samples", r.per_sample.size()}};
  if (per_sample) {
    json samples = json::array();
    for (const auto& s : r.per_sample) samples.push_back({{"rank", s.rank}, {"relative_sigma_min", s.relative_sigma_min}});
    out["per_sample"] = std::move(samples);
  }
  return out;
}

json to_json(const DegreeReport& r) {
  json out = {{"value", r.value}, {"method", to_string(r.method)}, {"sphere_dim", r.sphere_dim}};
  if (r.method == DegreeMethod::UnitaryFormula) {
    out["k"] = r.k;
    out["psi_degree"] = r.psi_degree;
    out["raw_value"] = r.raw_value;
    out["calibration"] = r.calibration;
    out["reduction_margins"] = r.reduction_margins;
    json subs = json::array();
    for (const auto& s : r.sub_reports) subs.push_back(to_json(s));
    out["psi_report"] = subs.empty() ? json() : subs.front();
    return out;
  }
  if (r.method == DegreeMethod::Winding) {
    out["winding_raw"] = r.winding_raw;
    out["max_residual"] = r.max_residual;
  } else {
    out["regular_value"] = to_json(r.regular_value);
    json pre = json::array();
    for (const auto& p : r.preimages)
      pre.push_back({{"point", to_json(p.point)}, {"sign", p.sign}, {"jacobian_det", p.jacobian_det}});
    out["preimages"] = std::move(pre);
    out["redraws"] = r.redraws;
    out["max_residual"] = r.max_residual;
    out["min_abs_det"] = r.min_abs_det;
  }
  out["cross_check"] = r.cross_check ? json(*r.cross_check) : json();
  return out;
}

json to_json(const AkIdentityReport& r) {
  return {{"k", r.k},
          {"n_samples", r.n_samples},
          {"tol", r.tol},
          {"linearity", r.linearity},
          {"unitarity", r.unitarity},
          {"determinant", r.determinant},
          {"determinant_formula", r.k == 1 ? "z1" : "|z|^" + std::to_string(1 << (r.k - 1))},
          {"group_membership", r.group_membership},
          {"pass", r.pass}};
}

json to_json(const PolynomialMap& p, bool include_test_nodes) {
  json exps = json::array();
  for (const auto& e : p.exponents) exps.push_back(e);
  json coeffs = json::array();
  for (Eigen::Index o = 0; o < p.coefficients.rows(); ++o) {
    json row = json::array();
    for (Eigen::Index j = 0; j < p.coefficients.cols(); ++j) row.push_back(decimal_string(p.coefficients(o, j)));
    coeffs.push_back(std::move(row));
  }
  json out = {{"input_dim", p.input_dim},
              {"output_dim", p.output_dim},
              {"degree", p.degree},
              {"exponents", std::move(exps)},
              {"coefficients", std::move(coeffs)},
              {"test_residual", decimal_string(p.test_residual)},
              {"n_test_nodes", p.test_nodes.cols()}};
  if (include_test_nodes) {
    out["test_nodes"] = to_json(Matrix(p.test_nodes));
    out["test_values"] = to_json(p.test_values);
  }
  return out;
}

PolynomialMap polynomial_from_json(const json& j) {
  PolynomialMap p = PolynomialMap::zero(j.at("input_dim").get<int>(), j.at("output_dim").get<int>(),
                                        j.at("degree").get<int>());
  std::vector<Exponent> exps;
  for (const auto& e : j.at("exponents")) exps.push_back(e.get<Exponent>());
  if (exps != p.exponents) throw ShapeError("polynomial_from_json: exponents are not the standard monomial basis");
  const auto& coeffs = j.at("coefficients");
  if (static_cast<int>(coeffs.size()) != p.output_dim) throw ShapeError("polynomial_from_json: output count mismatch");
  for (int o = 0; o < p.output_dim; ++o) {
    const auto& row = coeffs[static_cast<std::size_t>(o)];
    if (static_cast<Eigen::Index>(row.size()) != p.coefficients.cols())
      throw ShapeError("polynomial_from_json: coefficient count does not match the basis size");
    for (Eigen::Index k = 0; k < p.coefficients.cols(); ++k)
      p.coefficients(o, k) = parse_decimal(row[static_cast<std::size_t>(k)].get<std::string>());
  }
  if (j.contains("test_nodes")) {
    p.test_nodes = matrix_from_json(j.at("test_nodes"));
    p.test_values = matrix_from_json(j.at("test_values"));
  }
  if (j.contains("test_residual")) p.test_residual = parse_decimal(j.at("test_residual").get<std::string>());
  return p;
}

json to_json(const RationalMap& r) {
  return {{"numerator", to_json(r.numerator)}, {"denominator", to_json(r.denominator)}};
}

json to_json(const RegularApproximation& g) {
  return {{"domain", g.domain().name()},
          {"target", g.target().name()},
          {"spray", g.spray().descriptor()},
          {"f0", to_json(g.f0())},
          {"beta", to_json(g.beta())},
          {"errors", {{"c0", g.c0}, {"c1", g.c1}}}};
}

json to_json(const ApproximationResult& r) {
  json history = json::array();
  for (const auto& s : r.fit_history)
    history.push_back({{"degree", s.degree},
                       {"basis_size", s.basis_size},
                       {"train_rms", s.train_rms},
                       {"train_max", s.train_max},
                       {"holdout_max", s.holdout_max},
                       {"ridge", s.ridge},
                       {"coefficient_norm", s.coefficient_norm},
                       {"penalized_rms", s.penalized_rms}});
  json out = {{"status", r.status},
              {"target_met", r.target_met},
              {"approximation", to_json(r.approximation)},
              {"grid_size", r.grid_size},
              {"tracking",
               {{"intervals", r.intervals}, {"partition", r.partition}, {"max_node_residual", r.tracking_node_residual}}},
              {"fit", {{"final_target", r.fit_target}, {"refinements", r.refinements}, {"history", std::move(history)}}},
              {"residual_chain",
               {{"lipschitz", r.chain.lipschitz},
                {"beta_residual", r.chain.beta_residual},
                {"tracking_residual", r.chain.tracking_residual},
                {"bound", r.chain.bound},
                {"c0", r.chain.c0},
                {"holds", r.chain.holds}}},
              {"max_membership", r.max_membership}};
  if (r.degree)
    out["degree"] = {{"source", r.degree->source},
                     {"approximation", r.degree->approximation},
                     {"method", r.degree->method},
                     {"agree", r.degree->agree}};
  else
    out["degree"] = nullptr;
  return out;
}

}  // namespace spraylab
