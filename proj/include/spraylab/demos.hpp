#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spraylab/approx.hpp"

namespace spraylab {

/// A map f together with a homotopy from an exact regular map to f.
struct Demo {
  std::string name;
  Homotopy homotopy;
  PointMap f;
};

using DemoFactory = std::function<Demo(const nlohmann::json& params)>;

/// Built-in families: "identity", "s1-rotation", "s1-power-<d>-wiggle", "s2-identity-bump".
/// Parameters not given keep their defaults.
Demo make_demo(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

/// Registers an evaluator under a name; later registrations replace earlier ones.
void register_demo(const std::string& name, DemoFactory factory);
std::vector<std::string> demo_names();

/// Tangent field 0.2 exp(-2 (1 - x.e3)) (e1 - (e1.x) x) on S^2.
Vector bump_field(const Vector& x, double amplitude = 0.2);
/// Time-t flow of bump_field, RK4 with steps steps and projection back to the sphere.
Vector bump_flow(const Vector& x, double t, double amplitude = 0.2, int steps = 64);

}  // namespace spraylab
