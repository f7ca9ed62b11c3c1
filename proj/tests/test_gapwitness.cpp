#include "doctest.h"

#include <cmath>

#include "qgeom/gapwitness.hpp"

using namespace qgeom;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(a + (b - a) * i / (n - 1));
  return g;
}

RVec spectrum(const HermitianOperator& h) { return hermitian_eigensystem(h).values; }

}  // namespace

TEST_CASE("chain assembly") {
  SpinChainSpec xy{2, {{{0, 1}, "XX", 0.5}, {{0, 1}, "YY", 0.5}}};
  auto s = spectrum(build_chain(xy));
  CHECK(s(0) == doctest::Approx(-1));
  CHECK(s(1) == doctest::Approx(0).epsilon(1e-12));
  CHECK(s(2) == doctest::Approx(0).epsilon(1e-12));
  CHECK(s(3) == doctest::Approx(1));
  SpinChainSpec ising{2, {{{0, 1}, "XX", 1.0}}};
  auto si = spectrum(build_chain(ising));
  CHECK(si(0) == doctest::Approx(-1));
  CHECK(si(1) == doctest::Approx(-1));
  CHECK(si(2) == doctest::Approx(1));

  // Site 0 is the most significant factor.
  SpinChainSpec z0{3, {{{0}, "Z", 1.0}}};
  CMat m = build_chain(z0).matrix();
  CMat expect = tensor(tensor(pauli_z().matrix(), CMat(CMat::Identity(2, 2))), CMat(CMat::Identity(2, 2)));
  CHECK((m - expect).norm() == 0);
  SpinChainSpec y1{2, {{{1}, "Y", 1.0}}};
  CHECK((build_chain(y1).matrix() - tensor(CMat(CMat::Identity(2, 2)), pauli_y().matrix())).norm() == 0);

  Rng rng(1);
  std::uniform_int_distribution<int> site(0, 4), lab(0, 3);
  for (int t = 0; t < 10; ++t) {
    SpinChainSpec r{5, {}};
    for (int k = 0; k < 6; ++k) {
      int a = site(rng), b = (a + 1 + site(rng) % 4) % 5;
      std::string l{"IXYZ"[lab(rng)], "IXYZ"[lab(rng)]};
      r.terms.push_back({{a, b}, l, 0.3 * k - 0.7});
    }
    CMat h = CMat(build_chain_sparse(r));
    CHECK((h - h.adjoint()).norm() < 1e-14);
  }
  SpinChainSpec bad{3, {{{0, 0}, "XX", 1.0}}};
  CHECK_THROWS_AS(build_chain(bad), DimensionError);
  SpinChainSpec big{15, {}};
  CHECK_THROWS_AS(build_chain_sparse(big), DomainError);
}

TEST_CASE("XY model and witness operator") {
  ChainOptions open{Boundary::open, false};
  CHECK(witness_v_spec(3, open).terms.size() == 2);
  auto v = gap_witness_v(5, open);
  CHECK(std::abs(v.matrix().trace()) < 1e-12);
  CHECK((v.matrix() - v.matrix().adjoint()).norm() < 1e-14);
  auto h4 = xy_hamiltonian(4, 0.0, open);
  auto v4 = gap_witness_v(4, open);
  CHECK((h4.matrix() * v4.matrix() - v4.matrix() * h4.matrix()).norm() > 0.1);
  // Closed rings conserve the witness current.
  for (double g : {0.0, 0.5, 1.0}) {
    auto h = xy_hamiltonian(6, g), w = gap_witness_v(6);
    CHECK((h.matrix() * w.matrix() - w.matrix() * h.matrix()).norm() < 1e-12);
  }
  CHECK_THROWS_AS(xy_hamiltonian(2, 0.0), DomainError);
  CHECK_THROWS_AS(xy_hamiltonian(4, 0.0, {Boundary::periodic, true}), DomainError);
  auto tapered = xy_spec(8, 0.0, {Boundary::open, true});
  CHECK(tapered.terms.front().coeff == doctest::Approx(1.0 / 6));
  CHECK(tapered.terms[2].coeff == doctest::Approx(2.0 / 6));
  CHECK(tapered.terms[6].coeff == doctest::Approx(0.5));
}

TEST_CASE("lanczos agrees with dense eigensolver") {
  auto h = build_chain_sparse(xy_spec(8, 0.3));
  auto ep = lanczos_lowest(h, 4, 7);
  auto dense = spectrum(HermitianOperator(CMat(h)));
  for (int i = 0; i < 4; ++i) CHECK(std::abs(ep.values(i) - dense(i)) < 1e-9);
  for (int i = 0; i < 4; ++i)
    CHECK((h * ep.vectors.col(i) - ep.values(i) * ep.vectors.col(i)).norm() < 1e-8);
  CHECK(std::abs(true_gap(h, 3) - true_gap(HermitianOperator(CMat(h)))) < 1e-9);
}

TEST_CASE("ground curves") {
  auto id = HermitianOperator::zero(2);
  auto flat = ground_curve(pauli_z(), id, linspace(0, 1, 11));
  for (const auto& s : flat.samples) CHECK(s.e0 == doctest::Approx(-1));

  auto c = ground_curve(pauli_z(), pauli_x(), linspace(-2, 2, 41));
  for (const auto& s : c.samples) {
    CHECK(s.h == doctest::Approx(-1 / std::sqrt(1 + s.lambda * s.lambda)));
    CHECK(s.h + s.lambda * s.v == doctest::Approx(s.e0));
  }
  // Concavity and the envelope identity dE0/dλ = ⟨V⟩.
  auto h = xy_hamiltonian(6, 0.5, {Boundary::open, false});
  auto v = gap_witness_v(6, {Boundary::open, false});
  auto grid = linspace(0, 1, 51);
  auto cv = ground_curve(h, v, grid);
  for (size_t i = 1; i + 1 < grid.size(); ++i) {
    const auto &a = cv.samples[i - 1], &b = cv.samples[i], &d = cv.samples[i + 1];
    CHECK(b.e0 >= (a.e0 + d.e0) / 2 - 1e-10);
    CHECK(std::abs(b.h + b.lambda * b.v - b.e0) < 1e-8);
    if (b.e1 - b.e0 > 1e-2) {
      const double step = 1e-4;
      double fd = (cv.solve(b.lambda + step).e0 - cv.solve(b.lambda - step).e0) / (2 * step);
      CHECK(std::abs(fd - b.v) < 1e-4 * std::max(1.0, std::abs(b.v)));
    }
  }
}

TEST_CASE("true gap") {
  CHECK(true_gap(pauli_z()) == doctest::Approx(2));
  CMat d = CMat::Zero(3, 3);
  d(2, 2) = 1;
  CHECK(true_gap(HermitianOperator(d)) == doctest::Approx(1));
  CHECK(true_gap(HermitianOperator::identity(3)) == 0);
  CHECK(true_gap(xy_hamiltonian(8, 1.0)) > 0);
}

TEST_CASE("gap bounds on closed XY rings") {
  std::vector<double> grid = linspace(0, 1.5, 61);
  double prev = 1e9;
  for (int n : {6, 8}) {
    for (double g : {0.0, 0.5}) {
      auto h = xy_hamiltonian(n, g);
      auto v = gap_witness_v(n);
      auto curve = ground_curve(h, v, grid);
      auto r = gap_upper_bound(curve, 40, true_gap(h));
      CHECK(r.plateau);
      CHECK(r.true_gap.has_value());
      CHECK(*r.true_gap <= r.epsilon + 1e-6);
      CHECK(r.consistent);
      // ⟨H⟩ is constant on the initial plateau.
      for (const auto& s : curve.samples) {
        if (s.lambda >= r.lambda_star - 0.05) break;
        CHECK(std::abs(s.h - curve.samples.front().h) < 1e-9);
      }
      if (g == 0.0) {
        // First crossing from joint (H, V) diagonalisation: 2 for N=6, 2·sqrt(2 − √2) for N=8.
        CHECK(r.epsilon == doctest::Approx(n == 6 ? 2.0 : 2 * std::sqrt(2 - std::sqrt(2.0))).epsilon(1e-6));
        CHECK(r.epsilon < prev);
        prev = r.epsilon;
      } else {
        CHECK(r.epsilon > 0.05);
      }
    }
  }
}

TEST_CASE("open chains violate the plateau precondition") {
  ChainOptions open{Boundary::open, false};
  auto curve = ground_curve(xy_hamiltonian(6, 0.5, open), gap_witness_v(6, open), linspace(0, 1, 21));
  auto r = gap_upper_bound(curve);
  CHECK_FALSE(r.plateau);
  CHECK_FALSE(r.consistent);
  CHECK(r.message.find("unsuitable") != std::string::npos);
}

TEST_CASE("degenerate ground energy") {
  CMat d = CMat::Zero(3, 3);
  d(2, 2) = 1;
  CMat w = CMat::Zero(3, 3);
  w(0, 1) = w(1, 0) = 1;
  auto curve = ground_curve(HermitianOperator(d), HermitianOperator(w), linspace(0, 1, 5));
  auto r = gap_upper_bound(curve, 40, 1.0);
  CHECK(r.degenerate_ground);
  CHECK(r.epsilon == 0);
  CHECK(r.consistent);
}

TEST_CASE("cusp decomposition") {
  CMat a = CMat::Zero(3, 3), b = CMat::Zero(3, 3);
  a(0, 0) = 1, a(1, 1) = -1, a(2, 2) = 0.5;
  b(0, 0) = 0.2, b(1, 2) = b(2, 1) = 1;
  CVec e0 = CVec::Zero(3);
  e0(0) = 1;
  CHECK(cusp_decomposition_check(HermitianOperator(a), HermitianOperator(b), e0));
  Rng rng(9);
  CHECK_FALSE(cusp_decomposition_check(random_hermitian(4, rng), random_hermitian(4, rng), random_pure(4, rng)));
  auto h = xy_hamiltonian(6, 0.5), v = gap_witness_v(6);
  auto ground = hermitian_eigensystem(h).vectors.col(0);
  CHECK(cusp_decomposition_check(h, v, ground));
}
