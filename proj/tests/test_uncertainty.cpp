#include "doctest.h"

#include <cmath>

#include "qgeom/uncertainty.hpp"

using namespace qgeom;

namespace {

CVec ket(int d, int i) {
  CVec v = CVec::Zero(d);
  v(i) = 1;
  return v;
}

}  // namespace

TEST_CASE("variance") {
  CHECK(variance(pauli_z(), ket(2, 0)) == doctest::Approx(0.0));
  CVec plus = CVec::Ones(2) / std::sqrt(2.0);
  CHECK(variance(pauli_z(), plus) == doctest::Approx(1.0));
  CHECK(variance(pauli_z(), DensityMatrix::maximally_mixed(2)) == doctest::Approx(1.0));
  Rng rng(1);
  auto x = random_hermitian(4, rng);
  auto rho = random_density(4, rng);
  double m = expectation(x, rho);
  CHECK(variance(x, rho) == doctest::Approx(expectation(x * x.matrix().norm(), rho) * 0 +
                                           (x.matrix() * x.matrix() * rho.matrix()).trace().real() - m * m));
}

TEST_CASE("minimal sum of variances") {
  auto z = pauli_z();
  CHECK(min_sum_variances(z, z).value == doctest::Approx(0.0));
  auto half = spin_operators(1);
  auto b = min_sum_variances(half.jx, half.jy);
  CHECK(std::abs(b.value - 0.25) < 1e-9);
  auto one = spin_operators(2);
  auto b1 = min_sum_variances(one.jx, one.jy);
  CHECK(std::abs(b1.value - 0.4375) < 1e-9);
  // Equality condition: the minimizer equals the certificate's mean values.
  CHECK(std::abs(b1.x - expectation(one.jx, b1.certificate)) < 1e-6);
  CHECK(std::abs(b1.y - expectation(one.jy, b1.certificate)) < 1e-6);
  CHECK(variance(one.jx, b1.certificate) + variance(one.jy, b1.certificate) >= b1.value - 1e-6);
  auto s32 = spin_operators(3);
  CHECK(std::abs(min_sum_variances(s32.jx, s32.jy).value - 0.6009) < 1e-3);
}

TEST_CASE("symmetry and shift invariance") {
  Rng rng(3);
  for (int t = 0; t < 4; ++t) {
    auto x = random_hermitian(3, rng), y = random_hermitian(3, rng);
    double v = min_sum_variances(x, y).value;
    CHECK(std::abs(min_sum_variances(y, x).value - v) < 1e-9);
    CHECK(std::abs(min_sum_variances(x + HermitianOperator::identity(3) * 1.3, y).value - v) < 1e-9);
  }
}

TEST_CASE("independent random-restart oracle") {
  Rng rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 3; ++t) {
    auto x = random_hermitian(4, rng), y = random_hermitian(4, rng);
    auto b = min_sum_variances(x, y);
    // Direct descent over pure states from random starts.
    auto obj = [&](const RVec& p) {
      CVec psi(4);
      for (int i = 0; i < 4; ++i) psi(i) = cplx(p(2 * i), p(2 * i + 1));
      return variance(x, psi) + variance(y, psi);
    };
    double best = 1e9;
    for (int s = 0; s < 20; ++s) {
      RVec p0(8);
      for (int i = 0; i < 8; ++i) p0(i) = g(rng);
      auto r = nelder_mead(obj, p0, 0.3, 1e-10, 20000);
      r = nelder_mead(obj, r.x, 0.01, 1e-12, 20000);
      best = std::min(best, r.f);
    }
    CHECK(best >= b.value - 1e-9);
    CHECK(best - b.value < 1e-6);
    CHECK(paraboloid_certificate(x, y, b, fibonacci_sphere(400)));
  }
  auto h = spin_operators(1);
  CHECK(paraboloid_certificate(h.jx, h.jy, min_sum_variances(h.jx, h.jy), fibonacci_sphere(200)));
  auto z = pauli_z();
  auto bz = min_sum_variances(z, z * 2.0);
  CHECK(bz.value == doctest::Approx(0.0));
  CHECK(paraboloid_certificate(z, z * 2.0, bz, fibonacci_sphere(100)));
}

TEST_CASE("sector approximants") {
  auto z = pauli_z();
  // a = b = eigenvalue on its eigenprojector.
  CHECK(expectation(sector_bound_operator(z, 1, 1), ket(2, 0)) == doctest::Approx(0.0));
  CVec plus = CVec::Ones(2) / std::sqrt(2.0);
  // ⟨A⟩ = Δ² + (⟨Z⟩+1)(⟨Z⟩−1) = 1 − 1 on |+⟩.
  CHECK(expectation(sector_bound_operator(z, -1, 1), plus) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(expectation(sector_bound_operator(z, -1, 1), plus) <= variance(z, plus));
  CHECK_THROWS_AS(sector_bound_operator(z, 1, -1), DomainError);

  Rng rng(7);
  auto x = random_hermitian(4, rng);
  int inside = 0, exceeded = 0;
  for (int t = 0; t < 500; ++t) {
    CVec psi = random_pure(4, rng);
    double m = expectation(x, psi);
    double a = m - 0.3, b = m + 0.2;
    CHECK(expectation(sector_bound_operator(x, a, b), psi) <= variance(x, psi) + 1e-12);
    ++inside;
    // Outside the sector the approximant overshoots the variance.
    if (expectation(sector_bound_operator(x, m + 0.1, m + 0.5), psi) > variance(x, psi)) ++exceeded;
  }
  CHECK(exceeded == 500);
}

TEST_CASE("sector sum bounds") {
  auto s = spin_operators(2);
  auto p = default_partition(s.jx, 5e-4);
  CHECK(p.delta() < 5e-4);
  CHECK_NOTHROW(p.validate(s.jx));
  auto r = sector_sum_bound(s.jx, s.jy, p, p);
  CHECK(r.delta < 1e-3);
  CHECK(r.c <= 0.4375 + 1e-9);
  CHECK(0.4375 <= r.c + r.delta + 1e-9);
  CHECK(std::abs(r.c - 0.4375) < 1e-3);

  SectorPartition bad{{-1, 0.5, 1}};
  CHECK_THROWS_AS(bad.validate(s.jx), DomainError);

  // Single-sector coarse bound and refinement monotonicity.
  SectorPartition coarse{{-1, 0, 1}};
  double prev = sector_sum_bound(s.jx, s.jy, coarse, coarse).c;
  SectorPartition cur = coarse;
  for (int k = 0; k < 5; ++k) {
    cur = refine(cur);
    double c = sector_sum_bound(s.jx, s.jy, cur, cur).c;
    CHECK(c >= prev - 1e-12);
    prev = c;
  }
  for (int tj = 1; tj <= 4; ++tj) {
    auto sp = spin_operators(tj);
    double exact = min_sum_variances(sp.jx, sp.jy).value;
    auto px = default_partition(sp.jx, 1e-2);
    auto rb = sector_sum_bound(sp.jx, sp.jy, px, px);
    CHECK(rb.c <= exact + 1e-9);
    CHECK(exact <= rb.c + rb.delta + 1e-9);
  }
}

TEST_CASE("uncertainty range cover") {
  auto s = spin_operators(2);
  auto p = default_partition(s.jx, 0.02);
  auto cover = uncertainty_range_cover(s.jx, s.jy, p, p, circle_directions(64));
  Rng rng(11);
  int outside = 0;
  for (int t = 0; t < 10000; ++t) {
    CVec psi = random_pure(3, rng);
    RVec v(2);
    v << variance(s.jx, psi), variance(s.jy, psi);
    if (!cover.contains(v)) ++outside;
  }
  CHECK(outside == 0);

  CMat a = CMat::Zero(2, 2), b = CMat::Zero(2, 2);
  a(0, 0) = 1, b(1, 1) = 1;
  HermitianOperator x(a), y(b);
  auto c2 = uncertainty_range_cover(x, y, default_partition(x), default_partition(y), circle_directions(32));
  CHECK(c2.contains(RVec::Zero(2)));

  auto zero = HermitianOperator::zero(2);
  auto z = pauli_z();
  auto c3 = uncertainty_range_cover(z, zero, default_partition(z, 0.05), default_partition(zero), circle_directions(16));
  CHECK(c3.delta_y == 0);
  for (const auto& h : c3.padded) CHECK(h.affine_dim <= 2);
  RVec on(2), off(2);
  on << 0.5, 0.0;
  off << 0.5, 0.1;
  CHECK(c3.contains(on));
  CHECK_FALSE(c3.contains(off));
}
