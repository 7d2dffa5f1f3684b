#include <gtest/gtest.h>

#include <cmath>

#include "spraylab/sprays.hpp"

using namespace spraylab;

namespace {

AxiomOptions axiom_options(int n = 200, std::uint64_t seed = 1) {
  AxiomOptions o;
  o.n_samples = n;
  o.seed = seed;
  return o;
}

DominanceOptions dominance_options(int n = 200, std::uint64_t seed = 1) {
  DominanceOptions o;
  o.n_samples = n;
  o.seed = seed;
  return o;
}

Vector random_vector(int dim, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = scale * normal(rng);
  return v;
}

}  // namespace

TEST(Stereographic, InverseIsCollinearWithAntipode) {
  // q lies on the sphere and on the line through -p and p + w.
  Rng rng(2);
  const auto s2 = VarietySpec::sphere(2);
  for (int i = 0; i < 100; ++i) {
    const Vector p = random_point(s2, rng);
    Vector w = random_vector(3, rng, 2.0);
    w -= w.dot(p) * p;
    const Vector q = inverse_stereographic(p, w);
    EXPECT_NEAR(q.norm(), 1.0, 1e-14);
    const Vector a = q + p;
    const Vector b = 2 * p + w;
    EXPECT_LE((a - a.dot(b) / b.squaredNorm() * b).norm(), 1e-14);
  }
}

TEST(Stereographic, ProjectionInvertsAndRejectsAntipode) {
  Rng rng(3);
  const auto s3 = VarietySpec::sphere(3);
  for (int i = 0; i < 100; ++i) {
    const Vector p = random_point(s3, rng);
    const Vector q = random_point(s3, rng);
    const Vector w = stereographic_projection(p, q);
    EXPECT_LE(std::abs(w.dot(p)), 1e-12);
    EXPECT_LE((inverse_stereographic(p, w) - q).norm(), 1e-10);
  }
  const Vector p = Vector::Unit(3, 0);
  EXPECT_THROW(stereographic_projection(p, Vector(-p)), AntipodeError);
  EXPECT_EQ(inverse_stereographic(p, Vector::Zero(3)), p);
}

TEST(Stereographic, FiberDerivativeAtZeroIsTheTangentFrame) {
  const Spray s = stereographic_spray(2);
  Rng rng(4);
  const Vector p = random_point(VarietySpec::sphere(2), rng);
  const Matrix jac = fiber_derivative(s, p, Vector::Zero(2), 1e-5);
  EXPECT_LE((jac - sphere_tangent_basis(p)).norm(), 1e-9);
}

TEST(Stereographic, SpraysPassAxiomsAndDominance) {
  for (int n = 1; n <= 3; ++n) {
    for (const Spray& s : {stereographic_spray(n), ambient_stereographic_spray(n)}) {
      const auto axioms = verify_spray_axioms(s, axiom_options());
      EXPECT_TRUE(axioms.pass) << n << " " << axioms.max_violation;
      const auto dom = verify_dominating(s, dominance_options());
      EXPECT_TRUE(dom.pass) << n;
      EXPECT_EQ(dom.min_rank, n);
      EXPECT_EQ(dom.required_rank, n);
    }
  }
}

TEST(GroupSpray, ElementsLieInTheGroup) {
  Rng rng(5);
  for (const auto& g : {VarietySpec::special_orthogonal(3), VarietySpec::orthogonal(3), VarietySpec::unitary(2),
                        VarietySpec::special_unitary(2), VarietySpec::special_unitary(3)}) {
    const int dim = static_cast<int>(lie_algebra_basis(g).size());
    for (int i = 0; i < 20; ++i) {
      const ComplexMatrix m = group_element(g, random_vector(dim, rng, 3.0));
      const VarietySpec identity_component = g.kind() == VarietySpec::Kind::O ? VarietySpec::special_orthogonal(3) : g;
      EXPECT_LE(membership_violation(group_point(m, identity_component), identity_component), 1e-12) << g.name();
    }
    EXPECT_LE((group_element(g, Vector::Zero(dim)) - ComplexMatrix::Identity(g.m(), g.m())).norm(), 0.0);
  }
}

TEST(GroupSpray, ShrinkOptionKeepsClosure) {
  GroupSprayOptions options;
  options.shrink = 1.0;
  const Spray s = group_action_spray(VarietySpec::special_orthogonal(3), VarietySpec::sphere(2), options);
  EXPECT_TRUE(verify_spray_axioms(s, axiom_options()).pass);
  EXPECT_TRUE(verify_dominating(s, dominance_options()).pass);
  EXPECT_TRUE(s.descriptor()["params"].contains("shrink"));
}

TEST(GroupSpray, ActionsOnSpheresAndGroups) {
  const std::vector<std::pair<VarietySpec, VarietySpec>> cases = {
      {VarietySpec::special_orthogonal(2), VarietySpec::sphere(1)},
      {VarietySpec::special_orthogonal(3), VarietySpec::sphere(2)},
      {VarietySpec::orthogonal(3), VarietySpec::sphere(2)},
      {VarietySpec::unitary(2), VarietySpec::sphere(3)},
      {VarietySpec::special_unitary(2), VarietySpec::sphere(3)},
      {VarietySpec::special_orthogonal(3), VarietySpec::special_orthogonal(3)},
      {VarietySpec::unitary(2), VarietySpec::unitary(2)},
      {VarietySpec::special_unitary(3), VarietySpec::special_unitary(3)},
  };
  for (const auto& [g, y] : cases) {
    const Spray s = group_action_spray(g, y);
    const auto axioms = verify_spray_axioms(s, axiom_options(100));
    EXPECT_TRUE(axioms.pass) << g.name() << " on " << y.name() << " " << axioms.max_violation;
    const auto dom = verify_dominating(s, dominance_options(100));
    EXPECT_TRUE(dom.pass) << g.name() << " on " << y.name();
    EXPECT_EQ(dom.min_rank, y.dim());
  }
}

TEST(GroupSpray, CircleActionMatchesRotationClosedForm) {
  // so(2) basis E_01 - E_10 with v: Cayley gives the rotation by 2 atan(v).
  const Spray s = group_action_spray(VarietySpec::special_orthogonal(2), VarietySpec::sphere(1));
  const Vector y = Vector::Unit(2, 0);
  const double v = 0.4;
  const double angle = 2.0 * std::atan(v);
  const Vector expected = (Vector(2) << std::cos(angle), std::sin(angle)).finished();
  EXPECT_LE((s.eval(y, Vector::Constant(1, v)) - expected).norm(), 1e-15);
}

TEST(ConstantSpray, FailsDominanceWithRankZero) {
  const Spray s = constant_spray(VarietySpec::sphere(2), 2);
  EXPECT_TRUE(verify_spray_axioms(s, axiom_options()).pass);
  const auto dom = verify_dominating(s, dominance_options());
  EXPECT_FALSE(dom.pass);
  EXPECT_EQ(dom.max_rank, 0);
}

TEST(ProductSpray, CarriesDomainAndDominatesFibers) {
  const auto x = VarietySpec::sphere(1);
  const Spray s = product_submersion_spray(x, ambient_stereographic_spray(2));
  EXPECT_EQ(s.base(), VarietySpec::product({x, VarietySpec::sphere(2)}));
  ASSERT_TRUE(s.submersion_domain());
  Rng rng(6);
  const Vector z = random_point(s.base(), rng);
  const Vector out = s.eval(z, random_vector(3, rng));
  EXPECT_EQ(out.head(2), z.head(2));
  EXPECT_TRUE(verify_spray_axioms(s, axiom_options()).pass);
  const auto dom = verify_dominating(s, dominance_options());
  EXPECT_TRUE(dom.pass);
  EXPECT_EQ(dom.required_rank, 2);
}

TEST(IteratedSpray, EqualsNestedComposition) {
  Rng rng(7);
  const Spray inner = group_action_spray(VarietySpec::special_orthogonal(3), VarietySpec::sphere(2));
  for (int k = 1; k <= 4; ++k) {
    const Spray it = iterated_spray(inner, k);
    EXPECT_EQ(it.fiber_dim(), 3 * k);
    for (int i = 0; i < 50; ++i) {
      const Vector y = random_point(VarietySpec::sphere(2), rng);
      const Vector v = random_vector(3 * k, rng);
      Vector direct = y;
      for (int b = 0; b < k; ++b) direct = inner.eval(direct, v.segment(3 * b, 3));
      EXPECT_LE((it.eval(y, v) - direct).norm(), 1e-12);
    }
  }
  EXPECT_THROW(iterated_spray(inner, 0), DomainError);
}

TEST(SprayShape, RejectsWrongSizes) {
  const Spray s = stereographic_spray(2);
  EXPECT_THROW(s.eval(Vector::Unit(3, 0), Vector::Zero(3)), ShapeError);
  EXPECT_THROW(s.eval(Vector::Unit(4, 0), Vector::Zero(2)), ShapeError);
}

TEST(Descriptor, HasKindBaseFiberAndParams) {
  const auto d = group_action_spray(VarietySpec::special_orthogonal(3), VarietySpec::sphere(2)).descriptor();
  EXPECT_EQ(d["kind"], "group");
  EXPECT_EQ(d["base"], "S2");
  EXPECT_EQ(d["fiber_dim"], 3);
  EXPECT_TRUE(d["params"].is_object());
}

TEST(LocalInverse, ExactInverseRoundTrip) {
  const Spray s = stereographic_spray(2);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const Vector y = random_point(VarietySpec::sphere(2), rng);
    const Vector v = random_vector(2, rng, 0.5);
    const Vector q = s.eval(y, v);
    const Vector xi = spray_local_inverse(s, y, q);
    EXPECT_LE((xi - v).norm(), 1e-10);
  }
  EXPECT_EQ(spray_local_inverse(s, Vector::Unit(3, 0), Vector::Unit(3, 0)), Vector::Zero(2));
}

TEST(LocalInverse, NewtonWithoutExactInverse) {
  const Spray s = group_action_spray(VarietySpec::special_unitary(3), VarietySpec::special_unitary(3));
  Rng rng(9);
  const Vector y = random_point(VarietySpec::special_unitary(3), rng);
  const Vector v = random_vector(8, rng, 0.2);
  const Vector q = s.eval(y, v);
  const Vector xi = spray_local_inverse(s, y, q);
  EXPECT_LE((s.eval(y, xi) - q).norm(), 1e-11);
}

TEST(LocalInverse, AntipodeDiverges) {
  const Spray s = stereographic_spray(2);
  const Vector p = Vector::Unit(3, 0);
  EXPECT_THROW(spray_local_inverse(s, p, Vector(-p)), DivergenceError);
  // Far targets leave the injectivity neighborhood of radius 3.
  const Vector far = s.eval(p, Vector::Constant(2, 5.0));
  EXPECT_THROW(spray_local_inverse(s, p, far), DivergenceError);
}
