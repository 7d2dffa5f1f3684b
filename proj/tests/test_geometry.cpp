#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spraylab/geometry.hpp"

using namespace spraylab;

namespace {

std::vector<VarietySpec> all_varieties() {
  return {VarietySpec::sphere(1),        VarietySpec::sphere(2),           VarietySpec::sphere(3),
          VarietySpec::fermat_sphere(2, 3), VarietySpec::orthogonal(3),   VarietySpec::special_orthogonal(2),
          VarietySpec::special_orthogonal(3), VarietySpec::unitary(2),    VarietySpec::special_unitary(2),
          VarietySpec::special_unitary(3),
          VarietySpec::product({VarietySpec::sphere(1), VarietySpec::sphere(2)})};
}

}  // namespace

TEST(VarietySpec, DimensionsMatchClosedForms) {
  EXPECT_EQ(VarietySpec::sphere(2).dim(), 2);
  EXPECT_EQ(VarietySpec::sphere(2).ambient_dim(), 3);
  EXPECT_EQ(VarietySpec::special_orthogonal(3).dim(), 3);
  EXPECT_EQ(VarietySpec::orthogonal(3).ambient_dim(), 9);
  EXPECT_EQ(VarietySpec::unitary(2).dim(), 4);
  EXPECT_EQ(VarietySpec::unitary(2).ambient_dim(), 8);
  EXPECT_EQ(VarietySpec::special_unitary(3).dim(), 8);
  EXPECT_EQ(VarietySpec::product({VarietySpec::sphere(1), VarietySpec::sphere(2)}).dim(), 3);
  EXPECT_EQ(VarietySpec::product({VarietySpec::sphere(1), VarietySpec::sphere(2)}).ambient_dim(), 5);
}

TEST(VarietySpec, NamesRoundTripThroughParse) {
  for (const auto& v : all_varieties()) EXPECT_EQ(VarietySpec::parse(v.name()), v) << v.name();
  EXPECT_EQ(VarietySpec::parse("SO(3)").name(), "SO(3)");
  EXPECT_EQ(VarietySpec::parse("Fermat(2,6)").k(), 3);
  EXPECT_THROW(VarietySpec::parse("T2"), UsageError);
}

TEST(Realification, RoundTrips) {
  Rng rng(1);
  const ComplexMatrix a = ComplexMatrix::Random(3, 3);
  EXPECT_EQ(complexify(realify(a), 3, 3), a);
  const ComplexVector z = ComplexVector::Random(4);
  EXPECT_EQ(deinterleave(interleave(z)), z);
  const Vector x = interleave(z);
  EXPECT_EQ(x(0), z(0).real());
  EXPECT_EQ(x(1), z(0).imag());
  const Matrix m = Matrix::Random(2, 3);
  EXPECT_EQ(flatten(m)(1), m(0, 1));
  EXPECT_EQ(unflatten(flatten(m), 2, 3), m);
}

TEST(Membership, RandomPointsAreMembers) {
  Rng rng(7);
  for (const auto& v : all_varieties())
    for (int i = 0; i < 50; ++i) {
      const Vector p = random_point(v, rng);
      EXPECT_LE(membership_violation(p, v), 1e-12) << v.name();
    }
}

TEST(Membership, RejectsPerturbedPoints) {
  Rng rng(8);
  for (const auto& v : all_varieties()) {
    Vector p = random_point(v, rng);
    p(0) += 1e-3;
    EXPECT_FALSE(is_member(p, v)) << v.name();
  }
  EXPECT_THROW(membership_violation(Vector::Zero(4), VarietySpec::sphere(2)), ShapeError);
}

TEST(Membership, DeterminantSeparatesOAndSO) {
  Matrix reflection = Matrix::Identity(3, 3);
  reflection(0, 0) = -1.0;
  EXPECT_TRUE(is_member(flatten(reflection), VarietySpec::orthogonal(3)));
  EXPECT_FALSE(is_member(flatten(reflection), VarietySpec::special_orthogonal(3)));
  ComplexMatrix phase = ComplexMatrix::Identity(2, 2);
  phase(0, 0) = std::polar(1.0, 0.4);
  EXPECT_TRUE(is_member(realify(phase), VarietySpec::unitary(2)));
  EXPECT_FALSE(is_member(realify(phase), VarietySpec::special_unitary(2)));
}

TEST(Cayley, SkewMatricesMapToOrthogonalAndUnitary) {
  Rng rng(3);
  const Matrix r = Matrix::Random(4, 4);
  const Matrix skew = r - r.transpose();
  const Matrix q = cayley(skew);
  EXPECT_LE((q.transpose() * q - Matrix::Identity(4, 4)).norm(), 1e-13);
  EXPECT_NEAR(q.determinant(), 1.0, 1e-13);

  const ComplexMatrix c = ComplexMatrix::Random(3, 3);
  const ComplexMatrix skew_h = c - c.adjoint();
  const ComplexMatrix u = cayley(skew_h);
  EXPECT_LE((u.adjoint() * u - ComplexMatrix::Identity(3, 3)).norm(), 1e-13);
}

TEST(Cayley, IsAnInvolution) {
  const Matrix r = Matrix::Random(3, 3);
  const Matrix skew = r - r.transpose();
  EXPECT_LE((cayley(cayley(skew)) - skew).norm(), 1e-12);
}

TEST(Cayley, ClosedFormInDimensionTwo) {
  // A = [[0, -a], [a, 0]] gives the rotation by 2 atan(a) with a sign flip: Q = [[c, s], [-s, c]].
  const double a = 0.7;
  Matrix skew(2, 2);
  skew << 0, -a, a, 0;
  const double c = (1 - a * a) / (1 + a * a);
  const double s = 2 * a / (1 + a * a);
  Matrix expected(2, 2);
  expected << c, s, -s, c;
  EXPECT_LE((cayley(skew) - expected).norm(), 1e-15);
}

TEST(Cayley, SingularInputThrows) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = -1.0;
  EXPECT_THROW(cayley(a), SingularityError);
  EXPECT_THROW(cayley(Matrix::Zero(2, 3)), ShapeError);
}

TEST(ShrinkMap, BoundedWithUnitDerivativeScale) {
  const double c = 1.5;
  Rng rng(4);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 200; ++i) {
    Vector v(3);
    for (int j = 0; j < 3; ++j) v(j) = 5.0 * normal(rng);
    EXPECT_LE(shrink_map(v, c).norm(), c / 2 + 1e-15);
  }
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    const Vector e = Vector::Unit(3, j);
    const Vector d = (shrink_map(Vector(h * e), c) - shrink_map(Vector(-h * e), c)) / (2 * h);
    EXPECT_LE((d - c * e).norm(), 1e-9);
  }
  EXPECT_THROW(shrink_map(Vector::Ones(2), 0.0), DomainError);
}

TEST(Fermat, PowerMapSendsFermatSphereToRoundSphere) {
  Rng rng(5);
  const auto sphere = VarietySpec::sphere(2);
  const auto fermat = VarietySpec::fermat_sphere(2, 3);
  for (int i = 0; i < 100; ++i) {
    const Vector x = to_fermat_sphere(random_point(sphere, rng), 3);
    EXPECT_LE(membership_violation(x, fermat), 1e-13);
    const Vector y = fermat_power_map(x, 3);
    EXPECT_LE(membership_violation(y, sphere), 1e-13);
    EXPECT_LE((fermat_power_inverse(y, 3) - x).norm(), 1e-13);
  }
  EXPECT_THROW(fermat_power_map(Vector::Unit(3, 0), 2), DomainError);
  EXPECT_THROW(fermat_power_map(Vector::Ones(3), 3), DomainError);
}

TEST(TangentBasis, OrthonormalAndTangent) {
  Rng rng(6);
  for (const auto& v : all_varieties()) {
    if (v.kind() == VarietySpec::Kind::FermatSphere) continue;
    const Vector p = random_point(v, rng);
    const Matrix t = tangent_basis(p, v);
    ASSERT_EQ(t.cols(), v.dim()) << v.name();
    EXPECT_LE((t.transpose() * t - Matrix::Identity(t.cols(), t.cols())).norm(), 1e-12) << v.name();
    // Moving along a tangent direction changes the defining equations only to second order.
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      const double h = 1e-5;
      EXPECT_LE(membership_violation(Vector(p + h * t.col(j)), v), 1e-8) << v.name();
    }
  }
}

TEST(TangentBasis, SphereFrameDropsDominantAxis) {
  const Vector p = Vector::Unit(3, 2);
  const Matrix t = sphere_tangent_basis(p);
  EXPECT_LE((t - Matrix::Identity(3, 3).leftCols(2)).norm(), 1e-15);
}

TEST(LieAlgebra, BasisSizesAndStructure) {
  EXPECT_EQ(lie_algebra_basis(VarietySpec::special_orthogonal(3)).size(), 3u);
  EXPECT_EQ(lie_algebra_basis(VarietySpec::orthogonal(4)).size(), 6u);
  EXPECT_EQ(lie_algebra_basis(VarietySpec::unitary(2)).size(), 4u);
  EXPECT_EQ(lie_algebra_basis(VarietySpec::special_unitary(3)).size(), 8u);
  for (const auto& g : {VarietySpec::special_orthogonal(3), VarietySpec::unitary(3), VarietySpec::special_unitary(3)})
    for (const auto& b : lie_algebra_basis(g)) {
      EXPECT_LE((b + b.adjoint()).norm(), 0.0) << g.name();
      if (g.kind() == VarietySpec::Kind::SU) {
        EXPECT_LE(std::abs(b.trace()), 0.0);
      }
    }
  const auto so3 = lie_algebra_basis(VarietySpec::special_orthogonal(3));
  EXPECT_EQ(so3[0](0, 1), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(so3[0](1, 0), std::complex<double>(-1.0, 0.0));
}

TEST(QuasiUniform, PointsOnSphereAndDeterministic) {
  for (int n : {1, 2, 3, 5}) {
    const PointSet a = quasi_uniform_sphere(n, 256, 11);
    const PointSet b = quasi_uniform_sphere(n, 256, 11);
    EXPECT_EQ(a, b);
    for (Eigen::Index j = 0; j < a.cols(); ++j) EXPECT_NEAR(a.col(j).norm(), 1.0, 1e-14);
  }
  const PointSet circle = quasi_uniform_sphere(1, 8);
  EXPECT_NEAR(circle(0, 2), std::cos(std::numbers::pi / 2), 1e-15);
  EXPECT_NEAR(circle(1, 2), 1.0, 1e-15);
  // Fibonacci lattice: z-coordinates are equally spaced.
  const PointSet fib = quasi_uniform_sphere(2, 10);
  EXPECT_NEAR(fib(2, 0), 0.9, 1e-15);
  EXPECT_NEAR(fib(2, 9), -0.9, 1e-15);
}

TEST(Products, SplitAndJoin) {
  const auto prod = VarietySpec::product({VarietySpec::sphere(1), VarietySpec::sphere(2)});
  Rng rng(9);
  const Vector p = random_point(prod, rng);
  const auto parts = split_product(p, prod);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].size(), 2);
  EXPECT_EQ(parts[1].size(), 3);
  EXPECT_EQ(join_product(parts), p);
}
