#include "qgeom/entangle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qgeom/parallel.hpp"

namespace qgeom {

namespace {

void check_dims(const HermitianOperator& h, const DimensionSpec& dims) {
  if (dims.size() == 0) throw DimensionError("empty dimension spec");
  dims.check(h.dim());
}

void check_bipartite(const HermitianOperator& h, const DimensionSpec& dims) {
  check_dims(h, dims);
  if (dims.size() != 2) throw DimensionError("a bipartite dimension spec is required");
}

CVec kron_vec(const CVec& a, const CVec& b) {
  CVec r(a.size() * b.size());
  for (int i = 0; i < a.size(); ++i) r.segment(i * b.size(), b.size()) = a(i) * b;
  return r;
}

std::vector<unsigned long long> restart_seeds(unsigned long long seed, int n) {
  Rng rng(seed);
  std::vector<unsigned long long> s(n);
  for (auto& x : s) x = rng();
  return s;
}

CVec top_vector(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  return es.eigenvectors().col(m.rows() - 1);
}

// Euclidean projection of a real vector onto the probability simplex.
RVec project_simplex(const RVec& v) {
  RVec s = v;
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  double cum = 0, theta = 0;
  for (int i = 0; i < s.size(); ++i) {
    cum += s(i);
    double t = (cum - 1) / (i + 1);
    if (s(i) - t > 0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

double min_eig(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

CVec ProductAnsatz::state() const {
  if (factors.empty()) throw DimensionError("empty product ansatz");
  CVec s = factors[0];
  for (size_t i = 1; i < factors.size(); ++i) s = kron_vec(s, factors[i]);
  return s;
}

double product_expectation(const HermitianOperator& h, const ProductAnsatz& a) {
  return expectation(h, a.state());
}

HermitianOperator reduced_operator(const HermitianOperator& h, const DimensionSpec& dims, const ProductAnsatz& a,
                                   int k) {
  check_dims(h, dims);
  if (static_cast<int>(a.factors.size()) != dims.size()) throw DimensionError("ansatz does not match dims");
  CVec left = CVec::Ones(1), right = CVec::Ones(1);
  for (int i = 0; i < k; ++i) left = kron_vec(left, a.factors[i]);
  for (int i = k + 1; i < dims.size(); ++i) right = kron_vec(right, a.factors[i]);
  const int dk = dims.local_dims[k];
  const int r = static_cast<int>(right.size());
  CMat p = CMat::Zero(h.dim(), dk);
  for (int l = 0; l < left.size(); ++l)
    for (int j = 0; j < dk; ++j) p.block((l * dk + j) * r, j, r, 1) = left(l) * right;
  return HermitianOperator::symmetrized(p.adjoint() * h.matrix() * p);
}

namespace {

std::pair<double, ProductAnsatz> seesaw_run(const HermitianOperator& h, const DimensionSpec& dims, ProductAnsatz a,
                                            const SeesawOptions& opt) {
  double value = product_expectation(h, a);
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double v = value;
    for (int k = 0; k < dims.size(); ++k) {
      auto red = reduced_operator(h, dims, a, k);
      Eigen::SelfAdjointEigenSolver<CMat> es(red.matrix());
      a.factors[k] = es.eigenvectors().col(red.dim() - 1);
      v = es.eigenvalues()(red.dim() - 1);
    }
    bool done = v - value < opt.tol * std::max(1.0, std::abs(v));
    value = std::max(value, v);
    if (done) break;
  }
  return {value, a};
}

}  // namespace

SepBounds seesaw_product_max(const HermitianOperator& h, const DimensionSpec& dims, const SeesawOptions& opt) {
  check_dims(h, dims);
  SepBounds b;
  b.upper = std::numeric_limits<double>::infinity();
  if (dims.size() == 1) {
    auto es = hermitian_eigensystem(h);
    b.lower = b.upper = es.values(h.dim() - 1);
    b.witness.factors = {es.vectors.col(h.dim() - 1)};
    return b;
  }
  const int n = std::max(1, opt.restarts);
  auto seeds = restart_seeds(opt.seed, n);
  std::vector<std::pair<double, ProductAnsatz>> runs(n);
  parallel_for(n, opt.threads, [&](int r) {
    Rng rng(seeds[r]);
    ProductAnsatz a;
    for (int d : dims.local_dims) a.factors.push_back(random_pure(d, rng));
    runs[r] = seesaw_run(h, dims, a, opt);
  });
  auto best = std::max_element(runs.begin(), runs.end(),
                               [](const auto& x, const auto& y) { return x.first < y.first; });
  b.lower = best->first;
  b.witness = best->second;
  b.restarts = n;
  return b;
}

OpList qubit_qudit_components(const HermitianOperator& h, const DimensionSpec& dims) {
  check_bipartite(h, dims);
  if (dims.local_dims[0] != 2) throw DimensionError("qubit-qudit split needs a qubit first factor");
  const int d = dims.local_dims[1];
  const CMat sig[4] = {CMat::Identity(2, 2), pauli_x().matrix(), pauli_y().matrix(), pauli_z().matrix()};
  OpList out;
  for (const auto& s : sig)
    out.push_back(partial_trace(HermitianOperator::symmetrized(h.matrix() * tensor(s, CMat(CMat::Identity(d, d)))),
                                dims, 0));
  return out;
}

namespace {

double cone_value(const RVec& p, bool reduced, double h0) {
  if (reduced) return (h0 + p.norm()) / 2;
  return (p(0) + p.tail(3).norm()) / 2;
}

}  // namespace

SepBounds qubit_qudit_sep_max(const HermitianOperator& h, const DimensionSpec& dims, const QubitQuditOptions& opt) {
  auto comps = qubit_qudit_components(h, dims);
  const int d = dims.local_dims[1];
  const CMat& m0 = comps[0].matrix();
  const double h0 = m0.trace().real() / d;
  const bool reduced =
      opt.simplify_identity && (m0 - h0 * CMat::Identity(d, d)).norm() <= 1e-12 * std::max(1.0, m0.norm());
  OpList ops = reduced ? OpList(comps.begin() + 1, comps.end()) : comps;
  const int k = static_cast<int>(ops.size());

  auto dirs = sphere_directions(k, opt.directions, opt.seed);
  JnrOptions jo;
  jo.threads = opt.threads;
  auto body = jnr_approximate(ops, dirs, jo);

  SepBounds b;
  b.lower = -std::numeric_limits<double>::infinity();
  CVec best_beta;
  for (const auto& n : dirs) {
    auto s = support(ops, n);
    double v = cone_value(s.point, reduced, h0);
    if (v > b.lower) {
      b.lower = v;
      best_beta = s.witness;
    }
  }

  // Polish the witness by alternating updates; the result is an attained value.
  ProductAnsatz a;
  a.factors = {CVec::Zero(2), best_beta};
  a.factors[0] = top_vector(reduced_operator(h, dims, {{CVec::Ones(2) / std::sqrt(2.0), best_beta}}, 0).matrix());
  SeesawOptions so;
  auto polished = seesaw_run(h, dims, a, so);
  b.witness = polished.second;
  b.lower = polished.first;
  b.restarts = 1;

  auto outer = body.outer_vertices();
  if (!outer.bounded) {
    b.upper = std::numeric_limits<double>::infinity();
  } else {
    b.upper = -std::numeric_limits<double>::infinity();
    for (const auto& v : outer.vertices) b.upper = std::max(b.upper, cone_value(v, reduced, h0));
    b.upper = std::max(b.upper, b.lower);
  }
  return b;
}

SepRange sep_numerical_range(const OpList& ops, const DimensionSpec& dims, const std::vector<RVec>& directions,
                             const SeesawOptions& seesaw, const QubitQuditOptions& qq) {
  if (ops.empty()) throw DimensionError("no operators");
  for (const auto& o : ops) check_dims(o, dims);
  SepRange r;
  const int k = static_cast<int>(ops.size());
  r.body.k = k;
  if (dims.size() == 1) {
    JnrOptions jo;
    jo.threads = seesaw.threads;
    r.body = jnr_approximate(ops, directions, jo);
    r.rigorous_outer = true;
    return r;
  }
  const bool qubit_qudit = dims.size() == 2 && dims.local_dims[0] == 2;
  r.rigorous_outer = qubit_qudit;
  const int n = static_cast<int>(directions.size());
  std::vector<RVec> pts(n);
  std::vector<HalfSpace> hs(n);
  SeesawOptions inner = seesaw;
  inner.threads = 1;
  QubitQuditOptions qin = qq;
  qin.threads = 1;
  parallel_for(n, seesaw.threads, [&](int i) {
    const RVec& dir = directions[i];
    if (dir.size() != k) throw DimensionError("direction dimension mismatch");
    auto h = combine(ops, dir);
    SepBounds b = qubit_qudit ? qubit_qudit_sep_max(h, dims, qin) : seesaw_product_max(h, dims, inner);
    pts[i] = expectations(ops, b.witness.state());
    hs[i] = {dir, qubit_qudit ? b.upper : b.lower};
  });
  r.body.inner_vertices = pts;
  for (const auto& h : hs) {
    if (!std::isfinite(h.offset)) {
      r.body.unbounded = true;
      continue;
    }
    r.body.outer_halfspaces.push_back(h);
  }
  return r;
}

CMat project_density(const CMat& x) {
  CMat h = (x + x.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  RVec w = project_simplex(es.eigenvalues());
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

bool is_ppt(const CMat& rho, const DimensionSpec& dims, double tol) {
  dims.check(static_cast<int>(rho.rows()));
  return min_eig(rho) >= -tol && min_eig(partial_transpose(rho, dims, 0)) >= -tol;
}

namespace {

// Dykstra's alternating projections onto the density set and its partial-transpose image.
CMat project_ppt(const CMat& z, const DimensionSpec& dims, const PptOptions& opt) {
  CMat x = z, p = CMat::Zero(z.rows(), z.cols()), q = p;
  for (int it = 0; it < opt.dykstra_iter; ++it) {
    CMat y = project_density(x + p);
    p = x + p - y;
    CMat xn = partial_transpose(project_density(partial_transpose(CMat(y + q), dims, 0)), dims, 0);
    q = y + q - xn;
    // x can stall for several sweeps while the correction terms still move, so
    // also require the two projections to agree.
    double change = std::max((xn - x).norm(), (y - xn).norm());
    x = xn;
    if (change < opt.dykstra_tol) break;
  }
  return x;
}

// Mixes with the identity just enough to make ρ and ρ^{T_A} positive semidefinite.
CMat make_feasible(const CMat& x, const DimensionSpec& dims) {
  const int d = static_cast<int>(x.rows());
  CMat r = (x + x.adjoint()) / 2.0;
  r /= r.trace().real();
  double m = std::min(min_eig(r), min_eig(partial_transpose(r, dims, 0)));
  if (m < 0) {
    double t = -m / (1.0 / d - m);
    r = (1 - t) * r + t * CMat::Identity(d, d) / d;
  }
  return r;
}

}  // namespace

PptResult ppt_max(const HermitianOperator& h, const DimensionSpec& dims, const PptOptions& opt) {
  check_bipartite(h, dims);
  const int d = h.dim();
  const double scale = std::max(h.norm(), 1e-300);
  const CMat g = h.matrix() / scale;
  CMat rho = CMat::Identity(d, d) / d;
  double value = (g.cwiseProduct(rho.transpose())).sum().real();
  PptResult res;
  double step = 1.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    CMat next = project_ppt(rho + step * g, dims, opt);
    double v = (g.cwiseProduct(next.transpose())).sum().real();
    double delta = (next - rho).norm();
    rho = next;
    res.iterations = it;
    if (std::abs(v - value) < opt.tol * std::max(1.0, std::abs(v)) && delta < std::sqrt(opt.tol)) {
      value = v;
      res.converged = true;
      break;
    }
    value = v;
    step = std::min(step * 1.5, 1e4);
  }
  CMat feasible = make_feasible(rho, dims);
  res.state = DensityMatrix(HermitianOperator::symmetrized(feasible), 1e-9);
  res.value = expectation(h, res.state);
  return res;
}

ConvexBodyApprox ppt_numerical_range(const OpList& ops, const DimensionSpec& dims, const std::vector<RVec>& directions,
                                     const PptOptions& opt, int threads) {
  if (ops.empty()) throw DimensionError("no operators");
  const int k = static_cast<int>(ops.size());
  const int n = static_cast<int>(directions.size());
  ConvexBodyApprox body;
  body.k = k;
  body.inner_vertices.resize(n);
  body.outer_halfspaces.resize(n);
  parallel_for(n, threads, [&](int i) {
    if (directions[i].size() != k) throw DimensionError("direction dimension mismatch");
    auto r = ppt_max(combine(ops, directions[i]), dims, opt);
    RVec p(k);
    for (int j = 0; j < k; ++j) p(j) = expectation(ops[j], r.state);
    body.inner_vertices[i] = p;
    body.outer_halfspaces[i] = {directions[i], r.value};
  });
  return body;
}

OpList traceless_basis(int d) {
  if (d < 1) throw DimensionError("basis dimension must be positive");
  OpList out;
  const double s = 1 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      CMat a = CMat::Zero(d, d), b = CMat::Zero(d, d);
      a(j, k) = a(k, j) = s;
      b(j, k) = cplx(0, -s);
      b(k, j) = cplx(0, s);
      out.push_back(HermitianOperator::symmetrized(a));
      out.push_back(HermitianOperator::symmetrized(b));
    }
  for (int l = 1; l < d; ++l) {
    CMat c = CMat::Zero(d, d);
    const double f = 1 / std::sqrt(double(l) * (l + 1));
    for (int j = 0; j < l; ++j) c(j, j) = f;
    c(l, l) = -l * f;
    out.push_back(HermitianOperator::symmetrized(c));
  }
  return out;
}

OpList ppt_dual_generators(const DimensionSpec& dims) {
  if (dims.size() != 2) throw DimensionError("a bipartite dimension spec is required");
  const int d = dims.total();
  OpList out;
  for (const auto& g : traceless_basis(d)) {
    CMat m = CMat::Zero(2 * d, 2 * d);
    m.topLeftCorner(d, d) = g.matrix();
    m.bottomRightCorner(d, d) = partial_transpose(g.matrix(), dims, 0);
    out.push_back(HermitianOperator::symmetrized(-double(d) * m));
  }
  return out;
}

bool in_ppt_polar(const OpList& gtilde, const RVec& x, double tol) {
  return lambda_max(combine(gtilde, x)) <= 1 + tol;
}

PptDualityReport ppt_duality_check(const DimensionSpec& dims, int samples, unsigned long long seed) {
  auto gt = ppt_dual_generators(dims);
  auto basis = traceless_basis(dims.total());
  const int d = dims.total();
  auto coords = [&](const CMat& rho) {
    RVec x(basis.size());
    for (size_t i = 0; i < basis.size(); ++i) x(i) = (basis[i].matrix().cwiseProduct(rho.transpose())).sum().real();
    return x;
  };
  PptDualityReport r;
  r.samples = samples;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  for (int s = 0; s < samples; ++s) {
    CMat rho;
    switch (s % 3) {
      case 0:
      {
        CMat gmat = random_ginibre(d, 1 + s % d, rng);
        rho = gmat * gmat.adjoint();
        rho /= rho.trace().real();
        break;
      }
      case 1: {
        // Separable: mixture of a few product states.
        rho = CMat::Zero(d, d);
        double tot = 0;
        for (int t = 0; t < 3; ++t) {
          double w = u(rng);
          CVec p = kron_vec(random_pure(dims.local_dims[0], rng), random_pure(dims.local_dims[1], rng));
          rho += w * p * p.adjoint();
          tot += w;
        }
        rho /= tot;
        break;
      }
      default: {
        // Noisy entangled pure state, straddling the PPT boundary.
        CVec p = random_pure(d, rng);
        double w = u(rng);
        rho = w * p * p.adjoint() + (1 - w) * CMat::Identity(d, d) / d;
      }
    }
    bool ppt = is_ppt(rho, dims, 1e-10);
    bool polar = in_ppt_polar(gt, coords(rho), 1e-10);
    r.ppt_count += ppt;
    r.agreements += ppt == polar;
  }
  r.mixed_inside = in_ppt_polar(gt, RVec::Zero(basis.size()));
  CVec bell = CVec::Zero(d);
  const int m = std::min(dims.local_dims[0], dims.local_dims[1]);
  for (int i = 0; i < m; ++i) bell(i * dims.local_dims[1] + i) = 1 / std::sqrt(double(m));
  r.bell_excluded = !in_ppt_polar(gt, coords(bell * bell.adjoint()));
  return r;
}

double lambda_plus(const HermitianOperator& h, const CVec& psi, const CVec& phi) {
  const double a = expectation(h, psi), b = expectation(h, phi);
  const cplx c = psi.dot(h.matrix() * phi);
  return (a + b + std::sqrt(4 * std::norm(c) + (a - b) * (a - b))) / 2;
}

double chi_functional(const HermitianOperator& h, const CVec& psi, const CVec& phi) {
  if (psi.size() != h.dim() || phi.size() != h.dim()) throw DimensionError("chi: dimension mismatch");
  // |ψ⟩⊗|φ⟩ reshaped as M = ψφᵀ: (H⊗1) → HM, (1⊗H) → MHᵀ, SWAP → Mᵀ.
  const CMat m = psi * phi.transpose();
  const CMat& hm = h.matrix();
  auto ip = [&](const CMat& y) { return m.cwiseProduct(y.conjugate()).sum(); };
  auto inner = [&](const CMat& y) { return std::conj(ip(y)); };
  const double hl = inner(hm * m).real(), hr = inner(m * hm.transpose()).real();
  const double plus = hl + hr, minus = hl - hr;
  const double hhswap = inner(hm * m.transpose() * hm.transpose()).real();
  return (plus + std::sqrt(std::max(0.0, 4 * hhswap + minus * minus))) / 2;
}

namespace {

// Orthonormal 2-column basis of span(c), filled at random when rank-deficient.
CMat orthonormal_pair(const CMat& c, Rng& rng) {
  CMat m = c;
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU);
  CMat u = svd.matrixU();
  const double top = svd.singularValues()(0);
  if (svd.singularValues()(1) <= 1e-10 * std::max(top, 1e-300)) {
    CVec r = random_pure(static_cast<int>(c.rows()), rng);
    r -= u.col(0) * u.col(0).dot(r);
    u.col(1) = r.normalized();
  }
  return u;
}

struct Schmidt2Run {
  double value;
  CMat a, b;  // m×2 and n×2, ψ_{ij} = Σ_r a_ir b_jr
};

Schmidt2Run schmidt2_run(const HermitianOperator& h, int m, int n, Rng& rng, const SeesawOptions& opt) {
  CMat a = CMat::Zero(m, 2), b = CMat::Zero(n, 2);
  for (int r = 0; r < 2; ++r) {
    a.col(r) = random_pure(m, rng);
    b.col(r) = random_pure(n, rng);
  }
  double value = -std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double v = 0;
    for (int side = 0; side < 2; ++side) {
      const CMat fixed = orthonormal_pair(side == 0 ? b : a, rng);
      const int dfree = side == 0 ? m : n;
      CMat map = CMat::Zero(m * n, 2 * dfree);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          for (int r = 0; r < 2; ++r) {
            if (side == 0)
              map(i * n + j, i * 2 + r) = fixed(j, r);
            else
              map(i * n + j, j * 2 + r) = fixed(i, r);
          }
      CMat red = map.adjoint() * h.matrix() * map;
      Eigen::SelfAdjointEigenSolver<CMat> es((red + red.adjoint()) / 2.0);
      CVec x = es.eigenvectors().col(2 * dfree - 1);
      v = es.eigenvalues()(2 * dfree - 1);
      CMat freem(dfree, 2);
      for (int i = 0; i < dfree; ++i)
        for (int r = 0; r < 2; ++r) freem(i, r) = x(i * 2 + r);
      if (side == 0) {
        a = freem;
        b = fixed;
      } else {
        b = freem;
        a = fixed;
      }
    }
    bool done = v - value < opt.tol * std::max(1.0, std::abs(v));
    value = std::max(value, v);
    if (done) break;
  }
  return {value, a, b};
}

}  // namespace

Schmidt2Result schmidt2_max(const HermitianOperator& h, const DimensionSpec& dims, const SeesawOptions& opt) {
  check_bipartite(h, dims);
  const int m = dims.local_dims[0], n = dims.local_dims[1];
  if (m < 2 || n < 2) throw DimensionError("Schmidt rank 2 needs local dimensions of at least 2");
  const int runs = std::max(1, opt.restarts);
  auto seeds = restart_seeds(opt.seed, runs);
  std::vector<Schmidt2Run> res(runs);
  parallel_for(runs, opt.threads, [&](int r) {
    Rng rng(seeds[r]);
    res[r] = schmidt2_run(h, m, n, rng, opt);
  });
  const auto& best = *std::max_element(res.begin(), res.end(),
                                       [](const auto& x, const auto& y) { return x.value < y.value; });
  CMat psi_m = best.a * best.b.transpose();
  Eigen::JacobiSVD<CMat> svd(psi_m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CMat u = svd.matrixU(), v = svd.matrixV().conjugate();
  Schmidt2Result out;
  out.psi = kron_vec(u.col(0), v.col(0));
  out.phi = kron_vec(u.col(1), v.col(1));
  out.value = lambda_plus(h, out.psi, out.phi);
  CMat hp(2, 2);
  hp << out.psi.dot(h.matrix() * out.psi), out.psi.dot(h.matrix() * out.phi), out.phi.dot(h.matrix() * out.psi),
      out.phi.dot(h.matrix() * out.phi);
  CVec top = top_vector((hp + hp.adjoint()) / 2.0);
  out.angle = std::atan2(std::abs(top(1)), std::abs(top(0)));
  out.chi = chi_functional(h, out.psi, out.phi);
  out.swap_overlap = std::norm(out.psi.dot(out.phi));
  if (std::abs(out.chi - out.value) > 1e-8 * std::max(1.0, std::abs(out.value)))
    throw std::logic_error("schmidt2_max: chi functional disagrees with the two-level eigenvalue");
  return out;
}

void Graph::validate() const {
  if (n < 1) throw DimensionError("graph needs at least one vertex");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw DimensionError("edge endpoint out of range");
    if (a == b) throw DomainError("self-loops are not allowed");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) throw DomainError("duplicate edge");
  }
}

HermitianOperator clique_matrix(const Graph& g) {
  g.validate();
  if (g.n > 4) throw DomainError("clique_matrix supports at most 4 vertices");
  const int n = g.n, d = n * n;
  CMat a = CMat::Zero(d, d);
  for (auto [x, y] : g.edges) {
    const int ab = x * n + y, ba = y * n + x;
    for (int r : {ab, ba})
      for (int c : {ab, ba}) a(r, c) += 0.5;
  }
  return HermitianOperator(a);
}

}  // namespace qgeom
