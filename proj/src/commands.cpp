#include "spraylab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spraylab/approx.hpp"
#include "spraylab/demos.hpp"
#include "spraylab/serialize.hpp"

namespace spraylab {

using nlohmann::json;

namespace {

VarietySpec variety_field(const json& spec, const char* key, const std::string& fallback) {
  return VarietySpec::parse(spec.value(key, fallback));
}

SphereDegreeOptions sphere_options(const json& spec, std::uint64_t seed) {
  SphereDegreeOptions o;
  o.seed = seed;
  o.n_starts = spec.value("n_starts", o.n_starts);
  o.grid = spec.value("grid", o.grid);
  o.max_dim = spec.value("max_dim", o.max_dim);
  if (spec.contains("method")) {
    const auto m = spec.at("method").get<std::string>();
    if (m == "winding") o.method = DegreeMethod::Winding;
    else if (m == "preimage_count") o.method = DegreeMethod::PreimageCount;
    else throw UsageError("degree: unknown method '" + m + "'");
  }
  return o;
}

SphereMap sphere_map_from_json(const json& spec, int& n) {
  const std::string name = spec.at("map").get<std::string>();
  if (name == "fermat") {
    n = spec.value("n", 2);
    return fermat_self_map(spec.value("k", 3));
  }
  if (name == "identity" || name == "antipodal") {
    n = spec.value("n", 2);
    return name == "identity" ? identity_map() : antipodal_map();
  }
  if (name == "circle-power") {
    n = 1;
    return circle_power_map(spec.at("d").get<int>());
  }
  throw UsageError("degree: unknown map '" + name + "'");
}

bool is_matrix_map(const std::string& name) { return name == "a_k" || name == "power" || name == "sharp"; }

// Symbolic entry of A_k: 0, or sign * z_var (optionally conjugated).
struct Term {
  int var = 0;
  int sign = 1;
  bool conj = false;

  std::string str() const {
    if (var == 0) return "0";
    std::string z = "z" + std::to_string(var);
    if (conj) z = "conj(" + z + ")";
    return sign < 0 ? "-" + z : z;
  }
};

std::vector<std::vector<Term>> symbolic_ak(int k) {
  if (k == 1) return {{Term{1, 1, false}}};
  const auto prev = symbolic_ak(k - 1);
  const std::size_t r = prev.size();
  std::vector<std::vector<Term>> out(2 * r, std::vector<Term>(2 * r));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      out[i][j] = prev[i][j];
      const Term& t = prev[j][i];
      out[r + i][r + j] = t.var == 0 ? Term{} : Term{t.var, t.sign, !t.conj};
    }
  for (std::size_t i = 0; i < r; ++i) {
    out[i][r + i] = Term{k, -1, true};
    out[r + i][i] = Term{k, 1, false};
  }
  return out;
}

json echo(const RunConfig& config) {
  return {{"command", config.command}, {"seed", config.seed}, {"config", config.config}};
}

}  // namespace

Spray spray_from_json(const json& spec) {
  if (!spec.is_object() || !spec.contains("kind")) throw UsageError("verify-spray: config needs a \"kind\"");
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "stereographic") return stereographic_spray(spec.value("n", 2));
  if (kind == "ambient-stereographic") return ambient_stereographic_spray(spec.value("n", 2));
  if (kind == "group") {
    const VarietySpec group = variety_field(spec, "group", "SO(3)");
    const VarietySpec space = spec.contains("space") ? variety_field(spec, "space", "") : group;
    GroupSprayOptions options;
    if (spec.contains("shrink")) options.shrink = spec.at("shrink").get<double>();
    return group_action_spray(group, space, options);
  }
  if (kind == "product") {
    if (!spec.contains("target_spray")) throw UsageError("verify-spray: product spray needs \"target_spray\"");
    return product_submersion_spray(variety_field(spec, "domain", "S1"), spray_from_json(spec.at("target_spray")));
  }
  if (kind == "iterated") {
    if (!spec.contains("inner")) throw UsageError("verify-spray: iterated spray needs \"inner\"");
    return iterated_spray(spray_from_json(spec.at("inner")), spec.value("k", 2));
  }
  if (kind == "constant") {
    const VarietySpec base = variety_field(spec, "base", "S2");
    return constant_spray(base, spec.value("fiber_dim", base.dim()));
  }
  throw UsageError("verify-spray: unknown spray kind '" + kind + "'");
}

MatrixSphereMap matrix_map_from_json(const json& spec) {
  const std::string name = spec.at("map").get<std::string>();
  if (name == "a_k") return a_k(spec.at("k").get<int>(), spec.value("cap", kDefaultAkCap));
  if (name == "power") return scalar_power_map(spec.at("d").get<int>());
  if (name == "sharp") return sharp_product(matrix_map_from_json(spec.at("f")), matrix_map_from_json(spec.at("g")));
  throw UsageError("degree: '" + name + "' is not a matrix-valued map");
}

CommandResult cmd_verify_spray(const json& spec, std::uint64_t seed) {
  const Spray spray = spray_from_json(spec);
  AxiomOptions axiom;
  axiom.seed = seed;
  axiom.n_samples = spec.value("n_samples", axiom.n_samples);
  axiom.tol = spec.value("tol", axiom.tol);
  axiom.max_fiber_norm = spec.value("max_fiber_norm", axiom.max_fiber_norm);
  DominanceOptions dom;
  dom.seed = seed;
  dom.n_samples = axiom.n_samples;
  dom.fd_step = spec.value("fd_step", dom.fd_step);
  dom.rank_tol = spec.value("rank_tol", dom.rank_tol);
  const bool per_sample = spec.value("per_sample", true);

  const AxiomReport axioms = verify_spray_axioms(spray, axiom);
  const DominanceReport dominance = verify_dominating(spray, dom);
  CommandResult out;
  out.report = {{"spray", spray.descriptor()},
                {"axioms", to_json(axioms, per_sample)},
                {"dominance", to_json(dominance, per_sample)},
                {"pass", axioms.pass && dominance.pass}};
  out.exit_code = axioms.pass && dominance.pass ? kExitPass : kExitFailure;
  return out;
}

CommandResult cmd_degree(const json& spec, std::uint64_t seed) {
  if (!spec.is_object() || !spec.contains("map")) throw UsageError("degree: config needs a \"map\"");
  const std::string name = spec.at("map").get<std::string>();
  CommandResult out;
  long value = 0;
  bool consistent = true;
  if (is_matrix_map(name)) {
    const MatrixSphereMap f = matrix_map_from_json(spec);
    UnitaryDegreeOptions options;
    options.sphere = sphere_options(spec, seed);
    options.reduction_samples = spec.value("reduction_samples", options.reduction_samples);
    options.min_margin = spec.value("min_margin", options.min_margin);
    const DegreeReport report = unitary_degree(f, options);
    value = report.value;
    out.report = {{"map", f.name}, {"k", f.k}, {"p", f.p}, {"degree", to_json(report)}};
    if (name == "power") {
      SphereDegreeOptions oracle = options.sphere;
      oracle.method = DegreeMethod::Winding;
      const DegreeReport check = sphere_degree(circle_power_map(spec.at("d").get<int>()), 1, oracle);
      out.report["oracle"] = to_json(check);
      consistent = check.value == value;
    }
  } else {
    int n = 0;
    const SphereMap map = sphere_map_from_json(spec, n);
    const DegreeReport report = sphere_degree(map, n, sphere_options(spec, seed));
    value = report.value;
    out.report = {{"map", name}, {"n", n}, {"degree", to_json(report)}};
  }
  out.report["value"] = value;
  out.report["consistent"] = consistent;
  bool pass = consistent;
  if (spec.contains("expect")) {
    const long expected = spec.at("expect").get<long>();
    out.report["expect"] = expected;
    pass = pass && expected == value;
  }
  out.report["pass"] = pass;
  out.exit_code = pass ? kExitPass : kExitFailure;
  return out;
}

CommandResult cmd_make_ak(const json& spec, std::uint64_t seed) {
  if (!spec.is_object() || !spec.contains("k")) throw UsageError("make-ak: config needs \"k\"");
  const int k = spec.at("k").get<int>();
  const MatrixSphereMap map = a_k(k, spec.value("cap", kDefaultAkCap));
  const auto symbolic = symbolic_ak(k);
  json entries = json::array();
  for (const auto& row : symbolic) {
    json r = json::array();
    for (const auto& t : row) r.push_back(t.str());
    entries.push_back(std::move(r));
  }
  const AkIdentityReport identities =
      verify_ak_identities(k, spec.value("n_samples", 1000), seed, spec.value("tol", 1e-10));
  CommandResult out;
  out.report = {{"map", map.name},
                {"k", map.k},
                {"p", map.p},
                {"entries", {{"rows", map.p}, {"cols", map.p}, {"entries", std::move(entries)}}},
                {"identities", to_json(identities)},
                {"pass", identities.pass}};
  out.exit_code = identities.pass ? kExitPass : kExitFailure;
  return out;
}

CommandResult cmd_approximate(const json& spec, std::uint64_t seed) {
  if (!spec.is_object() || !spec.contains("demo")) throw UsageError("approximate: config needs a \"demo\"");
  const Demo demo = make_demo(spec.at("demo").get<std::string>(), spec.value("params", json::object()));
  ApproximationConfig config;
  config.seed = seed;
  config.degree.seed = seed;
  config.target_c0 = spec.value("target_c0", config.target_c0);
  config.fit_target = spec.value("fit_target", config.fit_target);
  config.max_degree = spec.value("max_degree", config.max_degree);
  config.max_refinements = spec.value("max_refinements", config.max_refinements);
  config.grid_size = spec.value("grid_size", config.grid_size);
  config.check_degree = spec.value("check_degree", config.check_degree);
  if (spec.contains("track")) {
    const auto& t = spec.at("track");
    config.track.tol = t.value("tol", config.track.tol);
    config.track.max_intervals = t.value("max_intervals", config.track.max_intervals);
  }

  CommandResult out;
  try {
    const ApproximationResult result = approximate(demo.f, demo.homotopy, config);
    const bool degree_ok = !result.degree || result.degree->agree;
    const bool pass = result.status == "ok" && result.target_met && result.max_membership <= 1e-12 &&
                      result.chain.holds && degree_ok;
    std::cerr << "residual chain: c0 = " << result.chain.c0 << " <= L * beta + tracking = " << result.chain.bound
              << (result.chain.holds ? " (holds)" : " (VIOLATED)") << '\n';
    out.report = {{"demo", demo.name}, {"result", to_json(result)}, {"pass", pass}};
    if (result.status == "degree_exhausted")
      out.report["error"] = {{"stage", "fit_polynomial"},
                             {"type", "degree_exhausted"},
                             {"message", "maximal degree reached without meeting the fit target; best effort reported"}};
    out.exit_code = pass ? kExitPass : kExitFailure;
  } catch (const PipelineError& e) {
    out.report = {{"demo", demo.name},
                  {"result", nullptr},
                  {"pass", false},
                  {"error", {{"stage", e.stage()}, {"type", e.error_type()}, {"message", e.what()}}}};
    out.exit_code = kExitFailure;
  }
  return out;
}

CommandResult run_command(const RunConfig& config) {
  CommandResult out;
  try {
    if (config.command == "verify-spray") out = cmd_verify_spray(config.config, config.seed);
    else if (config.command == "degree") out = cmd_degree(config.config, config.seed);
    else if (config.command == "make-ak") out = cmd_make_ak(config.config, config.seed);
    else if (config.command == "approximate") out = cmd_approximate(config.config, config.seed);
    else throw UsageError("unknown command '" + config.command + "'");
  } catch (const UsageError& e) {
    out = {kExitUsage, {{"error", {{"type", "usage"}, {"message", e.what()}}}}};
  } catch (const nlohmann::json::exception& e) {
    out = {kExitUsage, {{"error", {{"type", "usage"}, {"message", e.what()}}}}};
  } catch (const Error& e) {
    out = {kExitFailure, {{"error", {{"type", "failure"}, {"message", e.what()}}}}};
  } catch (const std::exception& e) {
    out = {kExitFailure, {{"error", {{"type", "internal"}, {"message", e.what()}}}}};
  }
  json report = echo(config);
  report["exit_code"] = out.exit_code;
  report["report"] = std::move(out.report);
  out.report = std::move(report);
  return out;
}

std::string format_report(const json& report) { return report.dump(2) + "\n"; }

void write_report_atomic(const std::string& path, const json& report) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + tmp.string() + "' for writing");
    os << format_report(report);
    if (!os.flush()) throw Error("cannot write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"spraylab: dominating sprays, regular approximation and degree calculus"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_path;
  for (const char* name : {"verify-spray", "degree", "make-ak", "approximate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", out_path, "Report path (standard output when omitted)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  RunConfig run;
  run.command = app.get_subcommands().front()->get_name();
  run.seed = seed;
  run.out_path = out_path;
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "spraylab: cannot read config '" << config_path << "'\n";
      return kExitUsage;
    }
    try {
      run.config = json::parse(is);
    } catch (const json::parse_error& e) {
      std::cerr << "spraylab: invalid JSON in '" << config_path << "': " << e.what() << '\n';
      return kExitUsage;
    }
  }

  const CommandResult result = run_command(run);
  try {
    if (run.out_path.empty()) std::cout << format_report(result.report);
    else write_report_atomic(run.out_path, result.report);
  } catch (const std::exception& e) {
    std::cerr << "spraylab: " << e.what() << '\n';
    return kExitFailure;
  }
  if (result.report.at("report").contains("error"))
    std::cerr << "spraylab: " << result.report.at("report").at("error").at("message").get<std::string>() << '\n';
  return result.exit_code;
}

}  // namespace spraylab
