#include "spraylab/demos.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <regex>

namespace spraylab {

namespace {

std::complex<double> complex_power(std::complex<double> z, int d) {
  const std::complex<double> base = d >= 0 ? z : std::conj(z);
  std::complex<double> out = 1.0;
  for (int i = 0; i < std::abs(d); ++i) out *= base;
  return out;
}

Vector from_complex(std::complex<double> z) { return (Vector(2) << z.real(), z.imag()).finished(); }

Demo identity_demo(const nlohmann::json& params) {
  const int n = params.value("n", 1);
  return Demo{"identity",
              Homotopy{VarietySpec::sphere(n), VarietySpec::sphere(n),
                       [](const Vector& x, double) -> Vector { return x; }, identity_rational_map(n + 1), "identity",
                       {{"n", n}}},
              [](const Vector& x) -> Vector { return x; }};
}

Demo rotation_demo(const nlohmann::json& params) {
  const double angle = params.value("angle", 0.3);
  auto rotate = [](const Vector& x, double a) -> Vector {
    return (Vector(2) << std::cos(a) * x(0) - std::sin(a) * x(1), std::sin(a) * x(0) + std::cos(a) * x(1)).finished();
  };
  return Demo{"s1-rotation",
              Homotopy{VarietySpec::sphere(1), VarietySpec::sphere(1),
                       [rotate, angle](const Vector& x, double t) -> Vector { return rotate(x, angle * t); },
                       identity_rational_map(2), "s1-rotation", {{"angle", angle}}},
              [rotate, angle](const Vector& x) -> Vector { return rotate(x, angle); }};
}

Demo power_wiggle_demo(int d, const nlohmann::json& params) {
  const double amplitude = params.value("amplitude", 0.3);
  // exp(i (d theta + a t sin theta)) = z^d exp(i a t y).
  auto eval = [d, amplitude](const Vector& x, double t) -> Vector {
    const std::complex<double> z(x(0), x(1));
    return from_complex(complex_power(z, d) * std::polar(1.0, amplitude * t * x(1)));
  };
  const std::string name = "s1-power-" + std::to_string(d) + "-wiggle";
  return Demo{name,
              Homotopy{VarietySpec::sphere(1), VarietySpec::sphere(1), eval, circle_power_rational_map(d), name,
                       {{"d", d}, {"amplitude", amplitude}}},
              [eval](const Vector& x) -> Vector { return eval(x, 1.0); }};
}

Demo bump_demo(const nlohmann::json& params) {
  const double amplitude = params.value("amplitude", 0.2);
  const int steps = params.value("steps", 64);
  return Demo{"s2-identity-bump",
              Homotopy{VarietySpec::sphere(2), VarietySpec::sphere(2),
                       [amplitude, steps](const Vector& x, double t) -> Vector {
                         return bump_flow(x, t, amplitude, steps);
                       },
                       identity_rational_map(3), "s2-identity-bump", {{"amplitude", amplitude}, {"steps", steps}}},
              [amplitude, steps](const Vector& x) -> Vector { return bump_flow(x, 1.0, amplitude, steps); }};
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, DemoFactory>& registry() {
  static std::map<std::string, DemoFactory> r{
      {"identity", identity_demo},
      {"s1-rotation", rotation_demo},
      {"s2-identity-bump", bump_demo},
  };
  return r;
}

}  // namespace

Vector bump_field(const Vector& x, double amplitude) {
  if (x.size() != 3) throw ShapeError("bump_field: expected a point of S^2");
  const Vector e1 = Vector::Unit(3, 0);
  return amplitude * std::exp(-2.0 * (1.0 - x(2))) * (e1 - x(0) * x);
}

Vector bump_flow(const Vector& x, double t, double amplitude, int steps) {
  if (t == 0.0) return x;
  const double h = t / steps;
  Vector y = x;
  for (int i = 0; i < steps; ++i) {
    const Vector k1 = bump_field(y, amplitude);
    const Vector k2 = bump_field(y + 0.5 * h * k1, amplitude);
    const Vector k3 = bump_field(y + 0.5 * h * k2, amplitude);
    const Vector k4 = bump_field(y + h * k3, amplitude);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    y.normalize();
  }
  return y;
}

Demo make_demo(const std::string& name, const nlohmann::json& params) {
  {
    const std::lock_guard lock(registry_mutex());
    const auto it = registry().find(name);
    if (it != registry().end()) return it->second(params);
  }
  static const std::regex power_pattern(R"(s1-power-(-?\d+)-wiggle)");
  std::smatch match;
  if (std::regex_match(name, match, power_pattern)) return power_wiggle_demo(std::stoi(match[1].str()), params);
  throw UsageError("unknown demo '" + name + "'");
}

void register_demo(const std::string& name, DemoFactory factory) {
  const std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::vector<std::string> demo_names() {
  const std::lock_guard lock(registry_mutex());
  std::vector<std::string> out;
  for (const auto& [name, factory] : registry()) out.push_back(name);
  out.push_back("s1-power-<d>-wiggle");
  return out;
}

}  // namespace spraylab
