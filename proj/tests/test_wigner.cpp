#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qgeom/wigner.hpp"

using namespace qgeom;

namespace {

CMat shift_x(int p) {
  CMat x = CMat::Zero(p, p);
  for (int n = 0; n < p; ++n) x((n + 1) % p, n) = 1;
  return x;
}

CMat clock_z(int p) {
  CMat z = CMat::Zero(p, p);
  for (int n = 0; n < p; ++n) z(n, n) = std::polar(1.0, 2 * std::numbers::pi * n / p);
  return z;
}

CMat mpow(const CMat& m, int k) {
  CMat r = CMat::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) r = r * m;
  return r;
}

// Displacement straight from its definition, one prime at a time.
CMat oracle_displacement(int x, int q, const std::vector<int>& dims) {
  CMat out = CMat::Ones(1, 1);
  auto xd = wh_digits(x, dims), qd = wh_digits(q, dims);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const int p = dims[k];
    cplx minus_kappa = -std::polar(1.0, std::numbers::pi / p);
    cplx phase = 1;
    for (int i = 0; i < xd[k] * qd[k]; ++i) phase *= minus_kappa;
    out = tensor(out, CMat(phase * mpow(shift_x(p), xd[k]) * mpow(clock_z(p), qd[k])));
  }
  return out;
}

CMat oracle_phase_point(int x, int q, const std::vector<int>& dims) {
  const int d = wh_dim(dims);
  CMat sum = CMat::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) sum += oracle_displacement(a, b, dims);
  CMat dx = oracle_displacement(x, q, dims);
  return dx * sum * dx.adjoint() / d;
}

double max_abs(const RMat& m) { return m.cwiseAbs().maxCoeff(); }

DensityMatrix conj_state(const CMat& u, const DensityMatrix& rho) {
  return DensityMatrix(HermitianOperator::symmetrized(u * rho.matrix() * u.adjoint()));
}

}  // namespace

TEST_CASE("dimension validation") {
  CHECK_THROWS_AS(check_wh_dims({2}), DimensionError);
  CHECK_THROWS_AS(check_wh_dims({9}), DimensionError);
  CHECK_THROWS_AS(check_wh_dims({3, 3}), DimensionError);
  CHECK_THROWS_AS(check_wh_dims({}), DimensionError);
  CHECK_NOTHROW(check_wh_dims({3, 5}));
  CHECK(factor_odd_squarefree(15) == std::vector<int>{3, 5});
  CHECK(factor_odd_squarefree(7) == std::vector<int>{7});
  CHECK_THROWS_AS(factor_odd_squarefree(9), DimensionError);
  CHECK_THROWS_AS(factor_odd_squarefree(12), DimensionError);
  CHECK_THROWS_AS(wigner_of(DensityMatrix::maximally_mixed(4), {2, 2}), DimensionError);
}

TEST_CASE("displacement operators") {
  for (auto dims : {std::vector<int>{3}, std::vector<int>{5}, std::vector<int>{3, 5}}) {
    const int d = wh_dim(dims);
    for (int x = 0; x < d; ++x)
      for (int q = 0; q < d; ++q) {
        CMat dxq = wh_displacement(x, q, dims);
        CHECK((dxq - oracle_displacement(x, q, dims)).norm() < 1e-12);
        CHECK((dxq * dxq.adjoint() - CMat::Identity(d, d)).norm() < 1e-12);
      }
  }
  CHECK((wh_displacement(0, 0, {5}) - CMat::Identity(5, 5)).norm() < 1e-14);
  CHECK((wh_displacement(1, 0, {3}) - shift_x(3)).norm() < 1e-14);
  for (int p : {3, 5, 7}) {
    CMat x = wh_displacement(1, 0, {p}), z = wh_displacement(0, 1, {p});
    cplx omega = std::polar(1.0, 2 * std::numbers::pi / p);
    CHECK((z * x - omega * x * z).norm() < 1e-12);
    CHECK((mpow(x, p) - CMat::Identity(p, p)).norm() < 1e-12);
    CHECK((mpow(z, p) - CMat::Identity(p, p)).norm() < 1e-12);
  }
  Rng rng(3);
  std::uniform_int_distribution<int> u(0, 4);
  for (int t = 0; t < 30; ++t) {
    int x1 = u(rng), q1 = u(rng), x2 = u(rng), q2 = u(rng);
    CMat prod = wh_displacement(x1, q1, {5}) * wh_displacement(x2, q2, {5});
    CMat target = wh_displacement((x1 + x2) % 5, (q1 + q2) % 5, {5});
    cplx phase = (target.adjoint() * prod).trace() / 5.0;
    CHECK(std::abs(std::abs(phase) - 1) < 1e-12);
    CHECK((prod - phase * target).norm() < 1e-12);
  }
}

TEST_CASE("phase point operators") {
  for (auto dims : {std::vector<int>{3}, std::vector<int>{5}, std::vector<int>{3, 5}}) {
    const int d = wh_dim(dims);
    CMat total = CMat::Zero(d, d);
    std::vector<CMat> all;
    for (int x = 0; x < d; ++x)
      for (int q = 0; q < d; ++q) {
        CMat a = phase_point(x, q, dims).matrix();
        if (d <= 5) CHECK((a - oracle_phase_point(x, q, dims)).norm() < 1e-10);
        CHECK((a - a.adjoint()).norm() < 1e-12);
        CHECK(std::abs(a.trace() - cplx(1)) < 1e-12);
        CMat dxq = wh_displacement(x, q, dims);
        CHECK((a - dxq * phase_point(0, 0, dims).matrix() * dxq.adjoint()).norm() < 1e-12);
        total += a;
        all.push_back(a);
      }
    CHECK((total - d * CMat::Identity(d, d)).norm() < 1e-10);
    if (d > 5) {
      CHECK((all[17] - oracle_phase_point(17 / d, 17 % d, dims)).norm() < 1e-10);
      continue;
    }
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = 0; j < all.size(); ++j) {
        cplx ip = (all[i] * all[j]).trace();
        CHECK(std::abs(ip - cplx(i == j ? d : 0)) < 1e-10);
      }
  }
}

TEST_CASE("Wigner functions of simple states") {
  auto uniform = wigner_of(DensityMatrix::maximally_mixed(5), {5});
  CHECK(max_abs(uniform.values.array() - 1.0 / 25) < 1e-14);

  CVec zero = CVec::Zero(3);
  zero(0) = 1;
  auto w0 = wigner_of(DensityMatrix::pure(zero), {3});
  for (int x = 1; x < 3; ++x)
    for (int q = 0; q < 3; ++q) CHECK(std::abs(w0.values(x, q)) < 1e-14);
  RVec zm = wigner_x_marginal(w0);
  CHECK(std::abs(zm(0) - 1) < 1e-12);
  CHECK(std::abs(w0.total() - 1) < 1e-12);

  CVec psi = CVec::Zero(5);
  psi(0) = psi(1) = 1 / std::sqrt(2.0);
  auto rho = DensityMatrix::pure(psi);
  auto w = wigner_of(rho, {5});
  int negatives = 0;
  for (int x = 0; x < 5; ++x)
    for (int q = 0; q < 5; ++q) {
      double direct = (rho.matrix() * oracle_phase_point(x, q, {5})).trace().real() / 5;
      CHECK(std::abs(w.values(x, q) - direct) < 1e-12);
      if (w.values(x, q) < -1e-6) ++negatives;
    }
  CHECK(negatives > 0);
  CHECK(w.values.minCoeff() < -0.05);
}

TEST_CASE("reconstruction, marginals and covariance") {
  Rng rng(11);
  for (auto dims : {std::vector<int>{3}, std::vector<int>{5}, std::vector<int>{3, 5}}) {
    const int d = wh_dim(dims);
    std::vector<CMat> x_proj(d);
    for (int q = 0; q < d; ++q) {
      CMat s = CMat::Zero(d, d);
      for (int x = 0; x < d; ++x) s += phase_point(x, q, dims).matrix();
      x_proj[q] = s / d;
      CHECK((x_proj[q] * x_proj[q] - x_proj[q]).norm() < 1e-10);
      CHECK(std::abs(x_proj[q].trace() - cplx(1)) < 1e-10);
      CMat shift = wh_displacement(1, 0, dims);
      CHECK((shift * x_proj[q] - x_proj[q] * shift).norm() < 1e-10);
    }
    for (int t = 0; t < 50; ++t) {
      auto rho = t % 2 ? random_density(d, rng) : DensityMatrix::pure(random_pure(d, rng));
      auto w = wigner_of(rho, dims);
      CHECK(std::abs(w.total() - 1) < 1e-10);
      CHECK(hs_distance(state_of(w).matrix(), rho.matrix()) < 1e-10);
      RVec zm = wigner_x_marginal(w), xm = wigner_q_marginal(w);
      for (int k = 0; k < d; ++k) {
        CHECK(std::abs(zm(k) - rho.matrix()(k, k).real()) < 1e-10);
        CHECK(std::abs(xm(k) - (rho.matrix() * x_proj[k]).trace().real()) < 1e-10);
        CHECK(zm(k) > -1e-10);
        CHECK(xm(k) > -1e-10);
      }
      if (t < 5) {
        int a = static_cast<int>(rng() % d), b = static_cast<int>(rng() % d);
        auto moved = wigner_of(conj_state(wh_displacement(a, b, dims), rho), dims);
        double err = 0;
        for (int x = 0; x < d; ++x)
          for (int q = 0; q < d; ++q)
            err = std::max(err, std::abs(moved.values(wh_add(x, a, dims), wh_add(q, b, dims)) - w.values(x, q)));
        CHECK(err < 1e-10);
      }
    }
  }
  WignerTable bad{{3}, RMat::Constant(3, 3, 0.2)};
  CHECK_THROWS_AS(state_of(bad), DomainError);
  WignerTable negative{{3}, RMat::Zero(3, 3)};
  negative.values(0, 0) = 1.5;
  negative.values(1, 1) = -0.5;
  CHECK_THROWS_AS(state_of(negative), DomainError);
}

TEST_CASE("channel transition matrices") {
  Rng rng(5);
  for (auto dims : {std::vector<int>{3}, std::vector<int>{5}, std::vector<int>{3, 5}}) {
    const int d = wh_dim(dims);
    auto ch = random_channel(d, 3, rng);
    RMat t = channel_transition(ch, dims);
    // Expand ρ = Σ W(in) A_in, so each column is the Wigner function of ε(A_in).
    for (int in = 0; in < d * d; in += (d > 5 ? 37 : 1)) {
      CMat out = apply_kraus(ch.kraus(), phase_point(in / d, in % d, dims).matrix());
      RVec col = wigner_of_operator(out, dims).flat();
      CHECK((t.col(in) - col).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(std::abs(t.col(in).sum() - 1) < 1e-9);
    }
    for (int k = 0; k < (d > 5 ? 2 : 10); ++k) {
      auto rho = random_density(d, rng);
      RVec lhs = wigner_of(apply_channel(ch, rho), dims).flat();
      RVec rhs = t * wigner_of(rho, dims).flat();
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  const std::vector<int> dims{5};
  RMat id = channel_transition(KrausChannel::identity(5), dims);
  CHECK((id - RMat::Identity(25, 25)).cwiseAbs().maxCoeff() < 1e-10);

  CMat disp = wh_displacement(2, 3, dims);
  RMat perm = channel_transition(KrausChannel({disp}), dims);
  for (int x = 0; x < 5; ++x)
    for (int q = 0; q < 5; ++q)
      for (int xi = 0; xi < 5; ++xi)
        for (int qi = 0; qi < 5; ++qi) {
          bool hit = x == (xi + 2) % 5 && q == (qi + 3) % 5;
          CHECK(std::abs(perm(x * 5 + q, xi * 5 + qi) - (hit ? 1.0 : 0.0)) < 1e-10);
        }

  std::vector<CMat> dep;
  for (int x = 0; x < 5; ++x)
    for (int q = 0; q < 5; ++q) dep.push_back(wh_displacement(x, q, dims) / 5.0);
  RMat uniform = channel_transition(KrausChannel(dep), dims);
  CHECK(max_abs(uniform.array() - 1.0 / 25) < 1e-10);

  CHECK_THROWS_AS(channel_transition(KrausChannel::identity(3), dims), DimensionError);
}

TEST_CASE("Weyl-Heisenberg covariant conversion") {
  Rng rng(9);
  const std::vector<int> dims{3};
  auto sigma = random_density(3, rng);

  auto same = wh_convertible(sigma, sigma, dims);
  REQUIRE(same);
  CHECK(std::abs(same->values(0, 0) - 1) < 1e-9);
  CHECK(std::abs(same->total() - 1) < 1e-12);

  auto moved = wh_convertible(conj_state(wh_displacement(1, 2, dims), sigma), sigma, dims);
  REQUIRE(moved);
  CHECK(std::abs(moved->values(1, 2) - 1) < 1e-9);

  RMat weights = RMat::Zero(3, 3);
  for (int x = 0; x < 3; ++x)
    for (int q = 0; q < 3; ++q) weights(x, q) = std::uniform_real_distribution<double>(0, 1)(rng);
  weights /= weights.sum();
  CMat mixed = CMat::Zero(3, 3);
  for (int x = 0; x < 3; ++x)
    for (int q = 0; q < 3; ++q) {
      CMat dxq = wh_displacement(x, q, dims);
      mixed += weights(x, q) * dxq * sigma.matrix() * dxq.adjoint();
    }
  auto rho_mixed = DensityMatrix(HermitianOperator::symmetrized(mixed));
  auto kernel = wh_convertible(rho_mixed, sigma, dims);
  REQUIRE(kernel);
  CHECK(max_abs(kernel->values - weights) < 1e-8);

  for (int p : {3, 5}) {
    std::vector<int> pd{p};
    auto pure = DensityMatrix::pure(random_pure(p, rng));
    CMat twirl = CMat::Zero(p, p);
    for (int x = 0; x < p; ++x)
      for (int q = 0; q < p; ++q) {
        CMat dxq = wh_displacement(x, q, pd);
        twirl += dxq * pure.matrix() * dxq.adjoint() / static_cast<double>(p * p);
      }
    CHECK((twirl - CMat::Identity(p, p) / p).norm() < 1e-12);
    auto k = wh_convertible(DensityMatrix(HermitianOperator::symmetrized(twirl)), pure, pd);
    REQUIRE(k);
    CHECK(k->values.minCoeff() >= 0);
    CHECK(std::abs(k->total() - 1) < 1e-12);
    auto image = wigner_convolve(*k, wigner_of(pure, pd));
    CHECK(max_abs(image.values.array() - 1.0 / (p * p)) < 1e-9);
    if (p == 3) CHECK(max_abs(k->values.array() - 1.0 / 9) < 1e-8);

    CHECK_FALSE(wh_convertible(pure, DensityMatrix::maximally_mixed(p), pd));
    auto pure_same = wh_convertible(pure, pure, pd);
    REQUIRE(pure_same);
    CHECK(max_abs(wigner_convolve(*pure_same, wigner_of(pure, pd)).values - wigner_of(pure, pd).values) < 1e-9);
  }
}
