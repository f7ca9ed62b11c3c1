#include "qgeom/gapwitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qgeom/numrange.hpp"
#include "qgeom/parallel.hpp"

namespace qgeom {

void SpinChainSpec::validate() const {
  if (sites < 1 || sites > kMaxChainSites)
    throw DomainError("spin chain must have between 1 and " + std::to_string(kMaxChainSites) + " sites");
  for (const auto& t : terms) {
    if (t.sites.size() != t.labels.size()) throw DimensionError("term sites and labels differ in length");
    for (size_t i = 0; i < t.sites.size(); ++i) {
      if (t.sites[i] < 0 || t.sites[i] >= sites) throw DimensionError("term site out of range");
      for (size_t j = 0; j < i; ++j)
        if (t.sites[i] == t.sites[j]) throw DimensionError("term sites must be distinct");
      if (std::string("IXYZ").find(t.labels[i]) == std::string::npos)
        throw DomainError(std::string("unknown Pauli label ") + t.labels[i]);
    }
    if (!std::isfinite(t.coeff)) throw DomainError("term coefficient is not finite");
  }
}

SparseOp build_chain_sparse(const SpinChainSpec& spec) {
  spec.validate();
  const int n = spec.sites;
  const long dim = 1L << n;
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim * spec.terms.size());
  for (const auto& t : spec.terms) {
    for (long b = 0; b < dim; ++b) {
      long out = b;
      cplx ph = t.coeff;
      for (size_t k = 0; k < t.sites.size(); ++k) {
        const int shift = n - 1 - t.sites[k];
        const int bit = (b >> shift) & 1;
        switch (t.labels[k]) {
          case 'X':
            out ^= 1L << shift;
            break;
          case 'Y':
            out ^= 1L << shift;
            ph *= bit ? cplx(0, -1) : cplx(0, 1);
            break;
          case 'Z':
            if (bit) ph = -ph;
            break;
          default:
            break;
        }
      }
      trips.emplace_back(out, b, ph);
    }
  }
  SparseOp m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(cplx(0.0));
  return m;
}

HermitianOperator build_chain(const SpinChainSpec& spec) {
  if (spec.sites > kMaxDenseSites)
    throw DomainError("dense chains are limited to " + std::to_string(kMaxDenseSites) +
                      " sites; use build_chain_sparse");
  return HermitianOperator(CMat(build_chain_sparse(spec)));
}

namespace {

void check_chain_length(int n) {
  if (n < 3 || n > kMaxChainSites) throw DomainError("chain length must be in [3, 14]");
}

double bond_factor(int b, int n, const ChainOptions& opt) {
  if (!opt.taper) return 1.0;
  int e = std::min(b, n - 2 - b);
  return e < 2 ? (e + 1) / 3.0 : 1.0;
}

void check_taper(const ChainOptions& opt) {
  if (opt.taper && opt.boundary == Boundary::periodic)
    throw DomainError("tapering applies to open chains only");
}

}  // namespace

SpinChainSpec xy_spec(int n, double gamma, const ChainOptions& opt) {
  check_chain_length(n);
  check_taper(opt);
  SpinChainSpec s;
  s.sites = n;
  const int bonds = opt.boundary == Boundary::periodic ? n : n - 1;
  for (int b = 0; b < bonds; ++b) {
    int i = b, j = (b + 1) % n;
    double f = bond_factor(b, n, opt);
    s.terms.push_back({{i, j}, "XX", f * (1 + gamma) / 2});
    s.terms.push_back({{i, j}, "YY", f * (1 - gamma) / 2});
  }
  return s;
}

SpinChainSpec witness_v_spec(int n, const ChainOptions& opt) {
  check_chain_length(n);
  check_taper(opt);
  SpinChainSpec s;
  s.sites = n;
  std::vector<int> centers;
  if (opt.boundary == Boundary::periodic) {
    for (int c = 0; c < n; ++c) centers.push_back(c);
  } else {
    for (int c = 1; c + 1 < n; ++c) centers.push_back(c);
  }
  for (int c : centers) {
    int l = (c - 1 + n) % n, r = (c + 1) % n;
    double f = opt.boundary == Boundary::open ? std::min(bond_factor(c - 1, n, opt), bond_factor(c, n, opt)) : 1.0;
    s.terms.push_back({{l, c, r}, "XZY", f});
    s.terms.push_back({{l, c, r}, "YZX", -f});
  }
  return s;
}

HermitianOperator xy_hamiltonian(int n, double gamma, const ChainOptions& opt) {
  return build_chain(xy_spec(n, gamma, opt));
}

HermitianOperator gap_witness_v(int n, const ChainOptions& opt) { return build_chain(witness_v_spec(n, opt)); }

namespace {

double gershgorin(const SparseOp& a) {
  double m = 0;
  for (int r = 0; r < a.outerSize(); ++r) {
    double s = 0;
    for (SparseOp::InnerIterator it(a, r); it; ++it) s += std::abs(it.value());
    m = std::max(m, s);
  }
  return m;
}

}  // namespace

Eigenpairs lanczos_lowest(const SparseOp& a, int count, unsigned long long seed, double tol) {
  const int n = static_cast<int>(a.rows());
  count = std::min(count, n);
  if (n <= 64) {
    Eigen::SelfAdjointEigenSolver<CMat> es{CMat(a)};
    return {es.eigenvalues().head(count), es.eigenvectors().leftCols(count)};
  }
  const double scale = std::max(gershgorin(a), 1e-300);
  Rng rng(seed);
  std::normal_distribution<double> g;
  std::vector<CVec> found;
  std::vector<double> vals;

  auto orth = [&](CVec& w, const std::vector<CVec>& basis) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) w -= q.dot(w) * q;
  };

  for (int k = 0; k < count; ++k) {
    CVec start(n);
    for (int i = 0; i < n; ++i) start(i) = cplx(g(rng), g(rng));
    orth(start, found);
    start.normalize();
    const int mmax = std::min(n - k, 160);
    double theta = 0;
    CVec ritz;
    bool converged = false;
    for (int restart = 0; restart < 60 && !converged; ++restart) {
      std::vector<CVec> q{start};
      std::vector<double> alpha, beta;
      for (int m = 0; m < mmax; ++m) {
        CVec w = a * q[m];
        double al = q[m].dot(w).real();
        alpha.push_back(al);
        w -= al * q[m];
        if (m > 0) w -= beta[m - 1] * q[m - 1];
        orth(w, q);
        orth(w, found);
        double be = w.norm();
        const int sz = m + 1;
        bool invariant = be < 1e-14 * scale;
        if (sz % 8 == 0 || invariant || sz == mmax) {
          RMat t = RMat::Zero(sz, sz);
          for (int i = 0; i < sz; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < sz) t(i, i + 1) = t(i + 1, i) = beta[i];
          }
          Eigen::SelfAdjointEigenSolver<RMat> es(t);
          theta = es.eigenvalues()(0);
          RVec s = es.eigenvectors().col(0);
          double res = invariant ? 0.0 : be * std::abs(s(sz - 1));
          if (res < tol * scale || invariant || sz == mmax) {
            ritz = CVec::Zero(n);
            for (int i = 0; i < sz; ++i) ritz += s(i) * q[i];
            orth(ritz, found);
            ritz.normalize();
            double r = (a * ritz - theta * ritz).norm();
            converged = r < std::max(tol * scale, 1e-13 * scale) * 10 || invariant;
            start = ritz;
            break;
          }
        }
        beta.push_back(be);
        q.push_back(w / be);
      }
    }
    found.push_back(ritz);
    vals.push_back(theta);
  }
  std::vector<int> ord(count);
  for (int i = 0; i < count; ++i) ord[i] = i;
  std::sort(ord.begin(), ord.end(), [&](int x, int y) { return vals[x] < vals[y]; });
  Eigenpairs out{RVec(count), CMat(n, count)};
  for (int i = 0; i < count; ++i) {
    out.values(i) = vals[ord[i]];
    out.vectors.col(i) = found[ord[i]];
  }
  return out;
}

namespace {

struct FamilySolver {
  SparseOp h, v;
  double hs, vs;
  int dense_limit;
  unsigned long long seed;

  std::pair<GroundSample, CVec> solve(double lambda) const {
    SparseOp m = h + lambda * v;
    const double scale = std::max(hs + std::abs(lambda) * vs, 1e-300);
    double e0, e1;
    CVec psi;
    if (m.rows() <= dense_limit) {
      Eigen::SelfAdjointEigenSolver<CMat> es{CMat(m)};
      e0 = es.eigenvalues()(0);
      e1 = m.rows() > 1 ? es.eigenvalues()(1) : e0;
      psi = es.eigenvectors().col(0);
    } else {
      auto ep = lanczos_lowest(m, 2, seed);
      e0 = ep.values(0);
      e1 = ep.values(1);
      psi = ep.vectors.col(0);
    }
    GroundSample s;
    s.lambda = lambda;
    s.e0 = e0;
    s.e1 = e1;
    s.degenerate = e1 - e0 < 1e-9 * scale;
    s.h = psi.dot(h * psi).real();
    s.v = psi.dot(v * psi).real();
    return {s, psi};
  }
};

}  // namespace

GroundCurve ground_curve(const SparseOp& h, const SparseOp& v, const std::vector<double>& grid,
                         const CurveOptions& opt) {
  if (h.rows() != v.rows() || h.rows() != h.cols() || v.rows() != v.cols())
    throw DimensionError("ground_curve: operator dimensions differ");
  if (grid.empty()) throw DomainError("ground_curve: empty lambda grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("ground_curve: lambda grid must be sorted");
  auto fs = std::make_shared<FamilySolver>(FamilySolver{h, v, gershgorin(h), gershgorin(v), opt.dense_limit, opt.seed});

  GroundCurve c;
  c.scale = std::max(fs->hs, fs->vs);
  auto [first, ref] = fs->solve(grid.front());
  c.reference = ref;
  CVec vr = v * ref;
  c.v_residual = (vr - ref.dot(vr) * ref).norm();

  c.samples.resize(grid.size());
  std::vector<CVec> states(grid.size());
  parallel_for(static_cast<int>(grid.size()), opt.threads, [&](int i) {
    auto r = i == 0 ? std::make_pair(first, ref) : fs->solve(grid[i]);
    r.first.overlap = std::norm(ref.dot(r.second));
    c.samples[i] = r.first;
  });
  CVec refc = ref;
  c.solve = [fs, refc](double lambda) {
    auto r = fs->solve(lambda);
    r.first.overlap = std::norm(refc.dot(r.second));
    return r.first;
  };
  return c;
}

GroundCurve ground_curve(const HermitianOperator& h, const HermitianOperator& v, const std::vector<double>& grid,
                         const CurveOptions& opt) {
  if (h.dim() != v.dim()) throw DimensionError("ground_curve: operator dimensions differ");
  SparseOp hs = h.matrix().sparseView(), vs = v.matrix().sparseView();
  return ground_curve(hs, vs, grid, opt);
}

GapReport gap_upper_bound(const GroundCurve& curve, int bisection_steps, std::optional<double> known_gap) {
  GapReport r;
  r.true_gap = known_gap;
  const auto& s = curve.samples;
  if (s.empty()) throw DomainError("gap_upper_bound: empty curve");
  r.degenerate_ground = s.front().degenerate;
  const double tol = 1e-6 * std::max(curve.scale, 1.0);
  r.plateau = curve.v_residual <= tol && (s.size() < 2 || s[1].overlap >= 1 - 1e-6);
  if (!r.plateau && !r.degenerate_ground) {
    r.message = "ground state at the first grid point is not an eigenvector of V (residual " +
                std::to_string(curve.v_residual) + "); the witness is unsuitable for this Hamiltonian";
    r.consistent = false;
    r.epsilon = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  if (r.degenerate_ground) {
    r.message = "degenerate ground energy at the first grid point; the bound is trivially zero";
    r.epsilon = 0;
    r.lambda_star = s.front().lambda;
    return r;
  }
  size_t jump = 0;
  for (size_t i = 1; i < s.size(); ++i)
    if (s[i].overlap < 0.5) {
      jump = i;
      break;
    }
  if (jump == 0) {
    r.message = "no ground-state change on the lambda grid; extend the grid";
    r.epsilon = std::numeric_limits<double>::infinity();
    r.lambda_star = s.back().lambda;
    if (known_gap) r.consistent = *known_gap <= r.epsilon;
    return r;
  }
  double lo = s[jump - 1].lambda, hi = s[jump].lambda;
  GroundSample after = s[jump];
  for (int it = 0; it < bisection_steps && curve.solve; ++it) {
    double mid = (lo + hi) / 2;
    if (mid <= lo || mid >= hi) break;
    auto m = curve.solve(mid);
    if (m.overlap >= 0.5) {
      lo = mid;
    } else {
      hi = mid;
      // Right at the crossing the two levels mix; keep the last cleanly resolved state.
      if (m.e1 - m.e0 > 1e-7 * std::max(curve.scale, 1.0)) after = m;
    }
  }
  r.lambda_star = hi;
  r.epsilon = std::max(0.0, after.h - s.front().h);
  r.message = "jump located";
  if (known_gap) r.consistent = *known_gap <= r.epsilon + 1e-6;
  return r;
}

double true_gap(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h.matrix(), Eigen::EigenvaluesOnly);
  const auto& v = es.eigenvalues();
  double scale = std::max(std::abs(v(0)), std::abs(v(v.size() - 1)));
  for (int i = 1; i < v.size(); ++i)
    if (v(i) - v(0) > 1e-9 * scale) return v(i) - v(0);
  return 0.0;
}

double true_gap(const SparseOp& h, unsigned long long seed) {
  if (h.rows() <= 256) return true_gap(HermitianOperator(CMat(h)));
  const double scale = gershgorin(h);
  for (int count = 4; count <= 64; count *= 2) {
    auto ep = lanczos_lowest(h, count, seed);
    for (int i = 1; i < ep.values.size(); ++i)
      if (ep.values(i) - ep.values(0) > 1e-9 * scale) return ep.values(i) - ep.values(0);
  }
  return 0.0;
}

bool cusp_decomposition_check(const HermitianOperator& x, const HermitianOperator& y, const CVec& psi,
                              int directions) {
  if (x.dim() != y.dim() || x.dim() != psi.size()) throw DimensionError("cusp check: dimension mismatch");
  CVec p = psi / psi.norm();
  auto residual = [&](const HermitianOperator& a) {
    CVec ap = a.matrix() * p;
    return (ap - p.dot(ap) * p).norm();
  };
  if (residual(x) > 1e-8 || residual(y) > 1e-8) return false;
  const int d = x.dim();
  if (d == 1) return true;
  Eigen::HouseholderQR<CMat> qr{CMat(p)};
  CMat full = qr.householderQ() * CMat::Identity(d, d);
  CMat q = full.rightCols(d - 1);
  OpList whole{x, y};
  OpList perp{HermitianOperator::symmetrized(q.adjoint() * x.matrix() * q),
              HermitianOperator::symmetrized(q.adjoint() * y.matrix() * q)};
  RVec p0(2);
  p0 << expectation(x, p), expectation(y, p);
  for (const auto& n : circle_directions(directions)) {
    double hw = support(whole, n).value;
    double hsplit = std::max(n.dot(p0), support(perp, n).value);
    if (std::abs(hw - hsplit) > 1e-6) return false;
  }
  return true;
}

}  // namespace qgeom
