#include "qgeom/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qgeom/parallel.hpp"

namespace qgeom {

double variance(const HermitianOperator& x, const DensityMatrix& rho) {
  double m = expectation(x, rho);
  double m2 = (x.matrix() * x.matrix() * rho.matrix()).trace().real();
  return std::max(0.0, m2 - m * m);
}

double variance(const HermitianOperator& x, const CVec& psi) {
  CVec v = psi / psi.norm();
  CVec xv = x.matrix() * v;
  double m = v.dot(xv).real();
  return std::max(0.0, xv.squaredNorm() - m * m);
}

namespace {

struct Ground {
  double value;
  CVec vec;
};

Ground ground(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

}  // namespace

VarianceBound min_sum_variances(const HermitianOperator& x, const HermitianOperator& y,
                                const MinSumOptions& opt) {
  if (x.dim() != y.dim()) throw DimensionError("min_sum_variances: dimension mismatch");
  const CMat& xm = x.matrix();
  const CMat& ym = y.matrix();
  const CMat q = xm * xm + ym * ym;
  auto ex = hermitian_eigensystem(x), ey = hermitian_eigensystem(y);
  const double x0 = ex.values(0), x1 = ex.values(x.dim() - 1);
  const double y0 = ey.values(0), y1 = ey.values(y.dim() - 1);
  const int g = std::max(opt.grid, 2);

  auto f = [&](double a, double b) {
    Eigen::SelfAdjointEigenSolver<CMat> es(q - 2 * a * xm - 2 * b * ym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0) + a * a + b * b;
  };
  std::vector<double> vals(g * g);
  parallel_for(g * g, opt.threads, [&](int idx) {
    double a = x0 + (x1 - x0) * (idx / g) / (g - 1);
    double b = y0 + (y1 - y0) * (idx % g) / (g - 1);
    vals[idx] = f(a, b);
  });
  std::vector<int> order(g * g);
  for (int i = 0; i < g * g; ++i) order[i] = i;
  const int starts = std::min(opt.starts, g * g);
  std::partial_sort(order.begin(), order.begin() + starts, order.end(),
                    [&](int a, int b) { return vals[a] < vals[b]; });

  VarianceBound best;
  best.value = std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    double a = x0 + (x1 - x0) * (order[s] / g) / (g - 1);
    double b = y0 + (y1 - y0) * (order[s] % g) / (g - 1);
    CVec psi;
    // Moving (a, b) to the ground state's means never increases λ_min + a² + b².
    for (int it = 0; it < opt.max_iter; ++it) {
      psi = ground(q - 2 * a * xm - 2 * b * ym).vec;
      double na = expectation(x, psi), nb = expectation(y, psi);
      double step = std::hypot(na - a, nb - b);
      a = na, b = nb;
      if (step < 1e-15) break;
    }
    double v = variance(x, psi) + variance(y, psi);
    if (v < best.value) {
      best.value = v;
      best.x = a;
      best.y = b;
      best.certificate = psi;
    }
  }
  best.value = std::max(0.0, best.value);
  return best;
}

HermitianOperator sector_bound_operator(const HermitianOperator& x, double a, double b) {
  if (a > b) throw DomainError("sector_bound_operator requires a <= b");
  const int d = x.dim();
  return HermitianOperator::symmetrized(x.matrix() * x.matrix() - (a + b) * x.matrix() +
                                        a * b * CMat::Identity(d, d));
}

double SectorPartition::delta() const {
  double g = 0;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) g = std::max(g, breakpoints[i + 1] - breakpoints[i]);
  return g * g / 4;
}

void SectorPartition::validate(const HermitianOperator& x) const {
  if (breakpoints.empty()) throw DomainError("sector partition is empty");
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1])) throw DomainError("breakpoints must be strictly increasing");
  auto es = hermitian_eigensystem(x);
  for (int i = 0; i < es.values.size(); ++i) {
    double e = es.values(i);
    bool found = false;
    for (double b : breakpoints)
      if (std::abs(b - e) <= 1e-10 * std::max(1.0, std::abs(e))) found = true;
    if (!found) throw DomainError("partition misses eigenvalue " + std::to_string(e));
  }
}

SectorPartition default_partition(const HermitianOperator& x, double tol) {
  auto es = hermitian_eigensystem(x);
  SectorPartition p;
  for (int i = 0; i < es.values.size(); ++i) {
    double e = es.values(i);
    if (p.breakpoints.empty() || e - p.breakpoints.back() > 1e-10 * std::max(1.0, std::abs(e)))
      p.breakpoints.push_back(e);
  }
  while (p.delta() >= tol) p = refine(p);
  return p;
}

SectorPartition refine(const SectorPartition& p) {
  SectorPartition r;
  for (size_t i = 0; i < p.breakpoints.size(); ++i) {
    r.breakpoints.push_back(p.breakpoints[i]);
    if (i + 1 < p.breakpoints.size()) r.breakpoints.push_back((p.breakpoints[i] + p.breakpoints[i + 1]) / 2);
  }
  return r;
}

namespace {

std::vector<std::pair<double, double>> sectors_of(const SectorPartition& p) {
  std::vector<std::pair<double, double>> s;
  if (p.breakpoints.size() == 1) s.emplace_back(p.breakpoints[0], p.breakpoints[0]);
  for (size_t i = 0; i + 1 < p.breakpoints.size(); ++i) s.emplace_back(p.breakpoints[i], p.breakpoints[i + 1]);
  return s;
}

}  // namespace

SectorBound sector_sum_bound(const HermitianOperator& x, const HermitianOperator& y,
                             const SectorPartition& px, const SectorPartition& py, int threads) {
  if (x.dim() != y.dim()) throw DimensionError("sector_sum_bound: dimension mismatch");
  px.validate(x);
  py.validate(y);
  auto sx = sectors_of(px), sy = sectors_of(py);
  std::vector<HermitianOperator> ax, ay;
  for (auto [a, b] : sx) ax.push_back(sector_bound_operator(x, a, b));
  for (auto [a, b] : sy) ay.push_back(sector_bound_operator(y, a, b));
  const int n = static_cast<int>(sx.size() * sy.size());
  std::vector<double> vals(n);
  parallel_for(n, threads, [&](int k) { vals[k] = lambda_min(ax[k / sy.size()] + ay[k % sy.size()]); });
  int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  SectorBound r;
  r.c = vals[best];
  r.delta = px.delta() + py.delta();
  r.sector_x = best / static_cast<int>(sy.size());
  r.sector_y = best % static_cast<int>(sy.size());
  return r;
}

UncertaintyCover uncertainty_range_cover(const HermitianOperator& x, const HermitianOperator& y,
                                         const SectorPartition& px, const SectorPartition& py,
                                         const std::vector<RVec>& directions, int threads) {
  px.validate(x);
  py.validate(y);
  UncertaintyCover cover;
  cover.delta_x = px.delta();
  cover.delta_y = py.delta();
  auto sx = sectors_of(px), sy = sectors_of(py);
  std::vector<RVec> corners;
  for (double a : {0.0, cover.delta_x})
    for (double b : {0.0, cover.delta_y}) {
      RVec c(2);
      c << a, b;
      corners.push_back(c);
    }
  JnrOptions jo;
  jo.threads = threads;
  for (size_t i = 0; i < sx.size(); ++i)
    for (size_t j = 0; j < sy.size(); ++j) {
      OpList ops{sector_bound_operator(x, sx[i].first, sx[i].second),
                 sector_bound_operator(y, sy[j].first, sy[j].second)};
      auto body = jnr_approximate(ops, directions, jo);
      auto outer = body.outer_vertices();
      const auto& base = outer.bounded ? outer.vertices : body.inner_vertices;
      std::vector<RVec> pts;
      for (const auto& v : base)
        for (const auto& c : corners) pts.push_back(v + c);
      cover.padded.push_back(convex_hull(pts));
      cover.bodies.push_back(std::move(body));
      cover.sectors.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  return cover;
}

bool UncertaintyCover::contains(const RVec& point, double tol) const {
  for (const auto& h : padded)
    if (h.contains(point, tol)) return true;
  return false;
}

bool paraboloid_certificate(const HermitianOperator& x, const HermitianOperator& y,
                            const VarianceBound& bound, const std::vector<RVec>& directions) {
  auto z = HermitianOperator::symmetrized(x.matrix() * x.matrix() + y.matrix() * y.matrix());
  OpList ops{x, y, z};
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& n : directions) {
    auto s = support(ops, RVec(n / n.norm()));
    lowest = std::min(lowest, variance(x, s.witness) + variance(y, s.witness));
  }
  double cert = variance(x, bound.certificate) + variance(y, bound.certificate);
  return lowest >= bound.value - 1e-6 && std::abs(cert - bound.value) <= 1e-6;
}

}  // namespace qgeom
