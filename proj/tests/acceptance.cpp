#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "spraylab/approx.hpp"
#include "spraylab/degree.hpp"
#include "spraylab/demos.hpp"
#include "spraylab/sprays.hpp"

using namespace spraylab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "ok " : "FAILED ") + what);
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Criterion 1: axioms at 1e-10 over 1000 samples and dominance rank dim Y at every sample.
Outcome spray_axioms() {
  Outcome o;
  std::vector<std::pair<std::string, Spray>> sprays;
  for (int n = 1; n <= 3; ++n) sprays.emplace_back("stereographic S" + std::to_string(n), stereographic_spray(n));
  const std::vector<std::pair<VarietySpec, VarietySpec>> actions = {
      {VarietySpec::special_orthogonal(2), VarietySpec::sphere(1)},
      {VarietySpec::special_orthogonal(3), VarietySpec::sphere(2)},
      {VarietySpec::orthogonal(3), VarietySpec::sphere(2)},
      {VarietySpec::unitary(2), VarietySpec::sphere(3)},
      {VarietySpec::special_unitary(2), VarietySpec::sphere(3)},
  };
  for (const auto& [g, y] : actions) sprays.emplace_back(g.name() + " on " + y.name(), group_action_spray(g, y));
  std::uint64_t seed = 100;
  for (const auto& [name, s] : sprays) {
    AxiomOptions a;
    a.n_samples = 1000;
    a.tol = 1e-10;
    a.seed = seed;
    DominanceOptions d;
    d.n_samples = 1000;
    d.seed = seed++;
    const AxiomReport ar = verify_spray_axioms(s, a);
    const DominanceReport dr = verify_dominating(s, d);
    const int dim_y = s.base().dim();
    o.check(ar.pass && ar.max_violation <= 1e-10 && dr.min_rank == dim_y && dr.max_rank == dim_y,
            name + " axiom violation " + fmt(ar.max_violation) + ", rank " + std::to_string(dr.min_rank) + ".." +
                std::to_string(dr.max_rank) + " / " + std::to_string(dim_y));
  }
  return o;
}

// Criterion 2: iterated spray against a hand-written nested composition.
Outcome iterated_spray_check() {
  Outcome o;
  const std::vector<std::pair<std::string, Spray>> inners = {
      {"stereographic S2", stereographic_spray(2)},
      {"SO(3) on S2", group_action_spray(VarietySpec::special_orthogonal(3), VarietySpec::sphere(2))},
      {"SU(2) on SU(2)", group_action_spray(VarietySpec::special_unitary(2), VarietySpec::special_unitary(2))},
  };
  Rng rng(200);
  std::normal_distribution<double> normal;
  for (const auto& [name, inner] : inners)
    for (int k = 1; k <= 4; ++k) {
      const Spray it = iterated_spray(inner, k);
      const int m = inner.fiber_dim();
      double worst = 0.0;
      for (int i = 0; i < 500; ++i) {
        const Vector y = random_point(inner.base(), rng);
        Vector v(m * k);
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = normal(rng);
        Vector direct = y;
        for (int b = 0; b < k; ++b) direct = inner.eval(direct, v.segment(m * b, m));
        worst = std::max(worst, (it.eval(y, v) - direct).norm());
      }
      o.check(worst <= 1e-12, name + " k=" + std::to_string(k) + " max deviation " + fmt(worst));
    }
  return o;
}

// Criterion 3: a_k identities.
Outcome ak_identities() {
  Outcome o;
  for (int k = 1; k <= 4; ++k) {
    const AkIdentityReport r = verify_ak_identities(k, 1000, 300 + k, 1e-10);
    const bool members = k == 1 || r.group_membership <= 1e-12;
    o.check(r.pass && members, "k=" + std::to_string(k) + " linearity " + fmt(r.linearity) + ", unitarity " +
                                   fmt(r.unitarity) + ", determinant " + fmt(r.determinant) + ", membership " +
                                   fmt(r.group_membership));
  }
  return o;
}

// Criterion 4: degree calculus.
Outcome degree_calculus() {
  Outcome o;
  for (int k = 1; k <= 3; ++k) {
    const DegreeReport r = unitary_degree(a_k(k));
    long factorial = 1;
    for (int i = 2; i < k; ++i) factorial *= i;
    o.check(r.value == 1, "deg a_" + std::to_string(k) + " = " + std::to_string(r.value));
    o.check(r.psi_degree % factorial == 0,
            "deg psi = " + std::to_string(r.psi_degree) + " divisible by " + std::to_string(factorial));
  }
  const std::vector<std::pair<std::string, MatrixSphereMap>> family = {
      {"a_1", a_k(1)}, {"z^2", scalar_power_map(2)}, {"z^-1", scalar_power_map(-1)}, {"a_2", a_k(2)}};
  for (const auto& [fname, f] : family)
    for (const auto& [gname, g] : family) {
      if (f.k + g.k > 3) continue;
      const long df = unitary_degree(f).value;
      const long dg = unitary_degree(g).value;
      const long dfg = unitary_degree(sharp_product(f, g)).value;
      o.check(dfg == df * dg, "deg(" + fname + " # " + gname + ") = " + std::to_string(dfg) + " vs " +
                                  std::to_string(df) + " * " + std::to_string(dg));
    }
  for (int d = -3; d <= 3; ++d) {
    SphereDegreeOptions w;
    w.method = DegreeMethod::Winding;
    SphereDegreeOptions p;
    p.method = DegreeMethod::PreimageCount;
    const long wd = sphere_degree(circle_power_map(d), 1, w).value;
    const long pd = sphere_degree(circle_power_map(d), 1, p).value;
    o.check(wd == d && pd == d, "z^" + std::to_string(d) + " winding " + std::to_string(wd) + ", preimages " +
                                    std::to_string(pd));
  }
  for (int n = 1; n <= 2; ++n) {
    const long v = sphere_degree(fermat_self_map(3), n).value;
    o.check(v == 1, "Fermat k=3 on S" + std::to_string(n) + " degree " + std::to_string(v));
  }
  return o;
}

// Winding number of a loop on S^1 by phase unwrapping on a fine uniform grid.
long winding_number(const PointMap& g, int samples = 1 << 14) {
  double total = 0.0;
  Vector prev = g((Vector(2) << 1.0, 0.0).finished());
  for (int i = 1; i <= samples; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / samples;
    const Vector cur = g((Vector(2) << std::cos(theta), std::sin(theta)).finished());
    total += std::atan2(prev(0) * cur(1) - prev(1) * cur(0), prev.dot(cur));
    prev = cur;
  }
  return std::lround(total / (2.0 * std::numbers::pi));
}

// Nested bases: the ridge objective is nonincreasing in D, and the training residual is nonincreasing
// until it reaches the ridge floor.
bool monotone_fit(const std::vector<FitStep>& h, Outcome& o) {
  double objective_increase = 0.0, raw_increase = 0.0;
  bool ok = true;
  for (std::size_t i = 1; i < h.size(); ++i) {
    objective_increase = std::max(objective_increase, h[i].penalized_rms / h[i - 1].penalized_rms - 1.0);
    raw_increase = std::max(raw_increase, h[i].train_rms - h[i - 1].train_rms);
    ok = ok && h[i].penalized_rms <= h[i - 1].penalized_rms * (1.0 + 1e-10);
    if (h[i].train_rms > 1e-10) ok = ok && h[i].train_rms <= h[i - 1].train_rms * (1.0 + 1e-9);
  }
  o.notes.push_back("    ridge objective largest relative increase " + fmt(objective_increase) +
                    ", train rms largest absolute increase " + fmt(raw_increase) + " (final " +
                    fmt(h.empty() ? 0.0 : h.back().train_rms) + ")");
  return ok;
}

// Criterion 5: approximation pipeline.
Outcome approximation_pipeline() {
  Outcome o;
  {
    const Demo demo = make_demo("s1-power-2-wiggle");
    // The demo is f(theta) = exp(i (2 theta + 0.3 sin theta)).
    double demo_gap = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / 1000;
      const double phase = 2.0 * theta + 0.3 * std::sin(theta);
      const Vector x = (Vector(2) << std::cos(theta), std::sin(theta)).finished();
      demo_gap = std::max(demo_gap, (demo.f(x) - (Vector(2) << std::cos(phase), std::sin(phase)).finished()).norm());
    }
    o.check(demo_gap <= 1e-12, "wiggle demo matches exp(i(2t + 0.3 sin t)) to " + fmt(demo_gap));
    ApproximationConfig c;
    c.target_c0 = 1e-3;
    const ApproximationResult r = approximate(demo.f, demo.homotopy, c);
    const RegularApproximation& g = r.approximation;
    o.check(r.status == "ok" && g.c0 <= 1e-3, "S1 c0 = " + fmt(g.c0) + " at D = " + std::to_string(g.beta().degree));
    // Independent dense check off the pipeline grid.
    Rng rng(500);
    double member = 0.0, dense_c0 = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Vector x = random_point(VarietySpec::sphere(1), rng);
      const Vector y = g.eval(x);
      member = std::max(member, std::abs(y.norm() - 1.0));
      dense_c0 = std::max(dense_c0, (y - demo.f(x)).norm());
    }
    o.check(member <= 1e-12, "g on S1 to " + fmt(member) + " over 10^4 random points");
    o.check(dense_c0 <= 1e-3, "dense c0 = " + fmt(dense_c0));
    const long w = winding_number(g.evaluator());
    o.check(w == 2 && r.degree && r.degree->approximation == 2,
            "deg g = " + std::to_string(w) + " (phase unwrapping), " +
                (r.degree ? std::to_string(r.degree->approximation) : std::string("none")) + " (pipeline)");
    o.check(r.chain.holds, "residual chain c0 " + fmt(r.chain.c0) + " <= " + fmt(r.chain.bound));

    // Training residual over the whole degree range on the tracked fiber map.
    const PointSet nodes = approximation_grid(demo.homotopy.domain);
    const EtaTable table = track_eta(demo.homotopy, pipeline_spray(demo.homotopy), nodes);
    std::vector<FitStep> history;
    try {
      history = fit_polynomial(nodes, table.eta, demo.homotopy.domain, 0.0, 20).history;
    } catch (const DegreeExhaustedError& e) {
      history = e.best().history;
    }
    o.check(history.size() == 20 && monotone_fit(history, o), "fit history over D = 1..20");
  }
  {
    const Demo demo = make_demo("s2-identity-bump");
    ApproximationConfig c;
    c.target_c0 = 1e-2;
    const ApproximationResult r = approximate(demo.f, demo.homotopy, c);
    const RegularApproximation& g = r.approximation;
    o.check(r.status == "ok" && g.c0 <= 1e-2, "S2 c0 = " + fmt(g.c0) + " at D = " + std::to_string(g.beta().degree));
    o.check(r.max_membership <= 1e-12, "g on S2 to " + fmt(r.max_membership));
    SphereDegreeOptions p;
    p.method = DegreeMethod::PreimageCount;
    p.seed = 501;
    const long d = sphere_degree(g.evaluator(), 2, p).value;
    o.check(d == 1 && r.degree && r.degree->approximation == 1, "deg g = " + std::to_string(d));
    // Refinement rounds restart at the previous degree; keep one step per degree.
    std::vector<FitStep> steps;
    for (const auto& step : r.fit_history)
      if (steps.empty() || step.degree > steps.back().degree) steps.push_back(step);
    o.check(!steps.empty() && monotone_fit(steps, o), "S2 fit history over D = 1.." + std::to_string(steps.back().degree));
  }
  return o;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Criterion 6: byte-identical CLI reports.
Outcome determinism() {
  Outcome o;
  const char* env = std::getenv("SPRAYLAB_CLI_PATH");
  const std::string cli = env != nullptr ? env : SPRAYLAB_CLI_DEFAULT;
  if (!fs::exists(cli)) {
    o.check(false, "no spraylab binary at " + cli);
    return o;
  }
  const fs::path dir = fs::temp_directory_path() / ("spraylab_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"verify-spray", R"j({"kind":"group","group":"SO(3)","space":"S2"})j"},
      {"degree", R"j({"map":"a_k","k":3})j"},
      {"make-ak", R"j({"k":4})j"},
      {"approximate", R"j({"demo":"s1-power-2-wiggle"})j"},
  };
  int index = 0;
  for (const auto& [command, config] : cases) {
    const fs::path cfg = dir / (command + ".json");
    std::ofstream(cfg) << config;
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "1", "2"}) {
      const fs::path out = dir / ("out" + std::to_string(index++) + ".json");
      const std::string line = std::string("SPRAYLAB_THREADS=") + threads + " " + cli + " " + command + " --config " +
                               cfg.string() + " --seed 42 --out " + out.string() + " 2>/dev/null";
      const int status = std::system(line.c_str());
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      if (code != 0) o.check(false, command + " exit code " + std::to_string(code));
      outputs.push_back(read_file(out));
    }
    o.check(!outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2],
            command + " reports byte-identical (" + std::to_string(outputs[0].size()) + " bytes)");
  }
  fs::remove_all(dir);
  return o;
}

struct Criterion {
  int id;
  const char* label;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "spray_axioms", 10.0, spray_axioms},
      {2, "iterated_spray", 5.0, iterated_spray_check},
      {3, "ak_identities", 10.0, ak_identities},
      {4, "degree_calculus", 60.0, degree_calculus},
      {5, "approximation_pipeline", 120.0, approximation_pipeline},
      {6, "determinism", 120.0, determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& c : criteria) selected.push_back(c.id);

  bool all = true;
  for (int id : selected) {
    const Criterion* c = nullptr;
    for (const auto& k : criteria)
      if (k.id == id) c = &k;
    if (c == nullptr) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c->run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(seconds < c->limit_seconds, "runtime " + fmt(seconds) + " s < " + fmt(c->limit_seconds) + " s");
    for (const auto& n : o.notes) std::cout << "    " << n << '\n';
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c->id << " " << c->label << " (" << fmt(seconds)
              << " s, limit " << fmt(c->limit_seconds) << " s)\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
