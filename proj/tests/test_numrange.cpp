#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qgeom/numrange.hpp"

using namespace qgeom;

namespace {

OpList paulis() { return {pauli_x(), pauli_y(), pauli_z()}; }

HermitianOperator diag(std::vector<double> v) {
  CMat m = CMat::Zero(v.size(), v.size());
  for (size_t i = 0; i < v.size(); ++i) m(i, i) = v[i];
  return HermitianOperator(m);
}

HermitianOperator sym(int i, int j, int d = 3) {
  CMat m = CMat::Zero(d, d);
  m(i, j) = m(j, i) = 1;
  return HermitianOperator(m);
}

}  // namespace

TEST_CASE("support of the Pauli triple") {
  for (const auto& n : fibonacci_sphere(50)) {
    auto s = support(paulis(), n);
    CHECK(s.value == doctest::Approx(1.0));
    CHECK((s.point - n).norm() < 1e-9);
    CHECK(std::abs(s.point.dot(n) - s.value) < 1e-9);
    CHECK(s.witness.norm() == doctest::Approx(1.0));
  }
  RVec bad = RVec::Ones(3);
  CHECK_THROWS_AS(support(paulis(), bad), DomainError);
}

TEST_CASE("single operator range is the spectral interval") {
  Rng rng(2);
  auto x = random_hermitian(5, rng);
  auto es = hermitian_eigensystem(x);
  CHECK(support({x}, RVec::Constant(1, 1.0)).value == doctest::Approx(es.values(4)));
  CHECK(support({x}, RVec::Constant(1, -1.0)).value == doctest::Approx(-es.values(0)));
}

TEST_CASE("commuting operators give the joint eigenvalue hull") {
  OpList ops{diag({1, 0, 0}), diag({0, 1, 0})};
  auto body = jnr_approximate(ops, circle_directions(40));
  auto h = body.inner_hull();
  CHECK(h.affine_dim == 2);
  CHECK(h.vertex_ids.size() == 3);
  for (int v : h.vertex_ids) {
    const auto& p = body.inner_vertices[v];
    bool joint = (p - RVec::Unit(2, 0)).norm() < 1e-9 || (p - RVec::Unit(2, 1)).norm() < 1e-9 ||
                 p.norm() < 1e-9;
    CHECK(joint);
  }
  // Directions along the edge normals are degenerate and get expanded.
  CHECK(body.degenerate_samples > 0);
}

TEST_CASE("Pauli ball approximation") {
  auto body = jnr_approximate(paulis(), fibonacci_sphere(1000));
  CHECK_FALSE(body.unbounded);
  CHECK(body.inner_within_outer());
  auto h = body.inner_hull();
  double inner_gap = 1.0 - h.min_facet_distance(RVec::Zero(3));
  auto outer = body.outer_vertices();
  REQUIRE(outer.bounded);
  double outer_gap = 0;
  for (const auto& v : outer.vertices) outer_gap = std::max(outer_gap, v.norm() - 1.0);
  CHECK(inner_gap < 0.01);
  CHECK(outer_gap < 0.01);
  CHECK(inner_gap > 0);
}

TEST_CASE("too few directions are flagged unbounded") {
  std::vector<RVec> dirs{RVec::Unit(3, 0), RVec::Unit(3, 1), RVec::Unit(3, 2)};
  auto body = jnr_approximate(paulis(), dirs);
  CHECK(body.unbounded);
}

TEST_CASE("antipodal support states are orthogonal") {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    OpList ops{random_hermitian(4, rng), random_hermitian(4, rng), random_hermitian(4, rng)};
    for (const auto& n : fibonacci_sphere(12)) {
      auto a = support(ops, n), b = support(ops, RVec(-n));
      if (a.degenerate || b.degenerate) continue;
      CHECK(std::norm(a.witness.dot(b.witness)) < 1e-9);
    }
  }
}

TEST_CASE("support function properties") {
  Rng rng(6);
  OpList ops{random_hermitian(4, rng), random_hermitian(4, rng), random_hermitian(4, rng)};
  std::normal_distribution<double> g;
  auto h = [&](const RVec& y) { return y.norm() * support(ops, RVec(y / y.norm())).value; };
  for (int t = 0; t < 30; ++t) {
    RVec a(3), b(3);
    for (int i = 0; i < 3; ++i) a(i) = g(rng), b(i) = g(rng);
    CHECK(h(a + b) <= h(a) + h(b) + 1e-12);
  }
  // Shifting one operator by c·1 shifts that coordinate of every support point.
  OpList shifted = ops;
  shifted[1] = ops[1] + HermitianOperator::identity(4) * 0.75;
  for (const auto& n : fibonacci_sphere(20)) {
    auto a = support(ops, n), b = support(shifted, n);
    RVec d = b.point - a.point;
    CHECK(std::abs(d(1) - 0.75) < 1e-9);
    CHECK(std::abs(d(0)) < 1e-9);
  }
}

TEST_CASE("spectrahedron membership") {
  CHECK(spectrahedron_contains(HermitianOperator::identity(2), {pauli_x()}, RVec::Zero(1)));
  // Elliptope: unit diagonal, off-diagonals (x, y, z).
  OpList gens{sym(0, 1), sym(0, 2), sym(1, 2)};
  auto id = HermitianOperator::identity(3);
  CHECK(spectrahedron_contains(id, gens, RVec::Ones(3)));
  // (1,1,1) is a rank-one boundary point; (1,1,-1) has determinant -4.
  CHECK_FALSE(spectrahedron_contains(id, gens, RVec::Constant(3, 1.001)));
  CHECK(spectrahedron_contains(id, gens, RVec::Zero(3)));
  RVec b(3);
  b << 1, 1, -1;
  CHECK_FALSE(spectrahedron_contains(id, gens, b));
  RVec t(3);
  t << 1, -1, -1;
  CHECK(spectrahedron_contains(id, gens, t));
  CHECK_FALSE(spectrahedron_contains(id, gens, RVec::Constant(3, 1.1)));
}

TEST_CASE("spectrahedron is polar to the numerical range") {
  Rng rng(8);
  OpList ops{random_hermitian(3, rng), random_hermitian(3, rng), random_hermitian(3, rng)};
  // Centre the range at the origin so that it is strictly interior.
  RVec c = RVec::Zero(3);
  for (int i = 0; i < 3; ++i) c(i) = ops[i].trace() / 3;
  for (int i = 0; i < 3; ++i) ops[i] = ops[i] - HermitianOperator::identity(3) * c(i);
  OpList neg;
  for (auto& x : ops) neg.push_back(x * -1.0);
  auto id = HermitianOperator::identity(3);
  for (const auto& n : fibonacci_sphere(60)) {
    double h = support(ops, n).value;
    RVec y = n / h;  // boundary of the polar body
    CHECK(spectrahedron_contains(id, neg, RVec(y * 0.999)));
    CHECK_FALSE(spectrahedron_contains(id, neg, RVec(y * 1.001)));
    // Pairing with the boundary point of the range.
    auto s = support(ops, n);
    if (!s.degenerate) CHECK(std::abs(s.point.dot(y) - 1.0) < 1e-6);
  }
}

TEST_CASE("qutrit classification") {
  CHECK_THROWS_AS(classify_qutrit_jnr(diag({1, 0, 0}), diag({0, 1, 0}), diag({1, 2, 7})),
                  CommonEigenvectorError);
  auto c = classify_qutrit_jnr(sym(0, 1), sym(0, 2), sym(1, 2));
  CHECK(c.e == 4);
  CHECK(c.s == 0);

  auto dep = classify_qutrit_jnr(sym(0, 1), sym(0, 2), sym(0, 1) * 2.0);
  CHECK(dep.degenerate_input);

  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    auto r = classify_qutrit_jnr(random_hermitian(3, rng), random_hermitian(3, rng), random_hermitian(3, rng));
    CHECK(r.s <= 1);
    CHECK(r.e <= 4);
    if (r.s == 1) CHECK(r.e <= 2);
  }
}

TEST_CASE("one-shot distinguishability of unitaries") {
  CMat id = CMat::Identity(2, 2);
  CHECK_FALSE(one_shot_distinguishable(id, id).distinguishable);
  auto r = one_shot_distinguishable(id, pauli_z().matrix());
  CHECK(r.distinguishable);
  CHECK(std::abs(std::abs(r.witness(0)) - std::abs(r.witness(1))) < 1e-9);
  CHECK(r.overlap < 1e-9);
  CMat v = CMat::Identity(2, 2);
  v(1, 1) = std::polar(1.0, std::numbers::pi / 100);
  auto q = one_shot_distinguishable(id, v);
  CHECK_FALSE(q.distinguishable);
  REQUIRE(q.separating.size() == 2);
  CHECK(q.separating(0) > 0.99);
  CHECK_THROWS_AS(one_shot_distinguishable(id, id * 2.0), DomainError);

  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    CMat u = random_unitary(4, rng), w = random_unitary(4, rng);
    auto res = one_shot_distinguishable(u, w);
    if (res.distinguishable) {
      CHECK(std::abs(res.witness.dot(u.adjoint() * w * res.witness)) < 1e-9);
    } else {
      Eigen::ComplexEigenSolver<CMat> es(u.adjoint() * w);
      for (int i = 0; i < 4; ++i) {
        cplx z = es.eigenvalues()(i);
        CHECK(res.separating(0) * z.real() + res.separating(1) * z.imag() > 0);
      }
    }
  }
}
