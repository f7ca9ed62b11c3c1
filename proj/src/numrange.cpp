#include "qgeom/numrange.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qgeom/nnls.hpp"
#include "qgeom/parallel.hpp"

namespace qgeom {

namespace {

void check_ops(const OpList& ops) {
  if (ops.empty()) throw DimensionError("need at least one operator");
  for (const auto& x : ops)
    if (x.dim() != ops.front().dim()) throw DimensionError("operators differ in dimension");
}

// Orthonormal basis of the complement of unit vector n (k × (k−1)).
RMat complement_basis(const RVec& n) {
  const int k = static_cast<int>(n.size());
  RMat a = RMat::Identity(k, k) - n * n.transpose();
  Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(k - 1);
}

std::vector<RVec> sub_directions(int k) {
  std::vector<RVec> out;
  if (k == 1) {
    out.push_back(RVec::Constant(1, 1.0));
    out.push_back(RVec::Constant(1, -1.0));
  } else if (k == 2) {
    for (int i = 0; i < 8; ++i) {
      double t = 2 * std::numbers::pi * i / 8;
      RVec u(2);
      u << std::cos(t), std::sin(t);
      out.push_back(u);
    }
  } else if (k >= 3) {
    for (int i = 0; i < k; ++i)
      for (double s : {1.0, -1.0}) {
        RVec u = RVec::Zero(k);
        u(i) = s;
        out.push_back(u);
      }
  }
  return out;
}

// Top eigenspace of n·X (eigenvalues within the degeneracy gap of the maximum).
CMat top_eigenspace(const Eigensystem& es, double tol) {
  const int d = static_cast<int>(es.values.size());
  double spread = std::max(es.values(d - 1) - es.values(0), 1e-300);
  int m = 1;
  while (m < d && (es.values(d - 1) - es.values(d - 1 - m)) / spread < tol) ++m;
  return es.vectors.rightCols(m);
}

std::vector<RVec> expand_face(const OpList& ops, const RVec& n, const CMat& p) {
  const int k = static_cast<int>(ops.size());
  std::vector<RVec> pts;
  if (k < 2) return pts;
  RMat q = complement_basis(n);
  std::vector<CMat> y;
  for (const auto& x : ops) y.push_back(p.adjoint() * x.matrix() * p);
  for (const auto& u : sub_directions(k - 1)) {
    CMat z = CMat::Zero(p.cols(), p.cols());
    for (int i = 0; i < k; ++i) z += (q.row(i).dot(u)) * y[i];
    auto es = hermitian_eigensystem(HermitianOperator::symmetrized(z));
    CVec psi = p * es.vectors.col(p.cols() - 1);
    pts.push_back(expectations(ops, psi));
  }
  return pts;
}

}  // namespace

HermitianOperator combine(const OpList& ops, const RVec& c) {
  check_ops(ops);
  if (static_cast<int>(ops.size()) != c.size()) throw DimensionError("coefficient count mismatch");
  CMat m = CMat::Zero(ops.front().dim(), ops.front().dim());
  for (size_t i = 0; i < ops.size(); ++i) m += c(i) * ops[i].matrix();
  return HermitianOperator::symmetrized(m);
}

RVec expectations(const OpList& ops, const CVec& psi) {
  RVec r(ops.size());
  for (size_t i = 0; i < ops.size(); ++i) r(i) = expectation(ops[i], psi);
  return r;
}

SupportSample support(const OpList& ops, const RVec& n) {
  check_ops(ops);
  if (std::abs(n.norm() - 1.0) > 1e-12) throw DomainError("direction must have unit norm");
  auto es = hermitian_eigensystem(combine(ops, n));
  const int d = static_cast<int>(es.values.size());
  SupportSample s;
  s.direction = n;
  s.value = es.values(d - 1);
  s.witness = es.vectors.col(d - 1);
  s.point = expectations(ops, s.witness);
  double spread = es.values(d - 1) - es.values(0);
  s.rel_gap = d > 1 && spread > 0 ? (es.values(d - 1) - es.values(d - 2)) / spread : 1.0;
  s.degenerate = d > 1 && s.rel_gap < kDegenerateGap;
  return s;
}

std::vector<RVec> fibonacci_sphere(int n) {
  std::vector<RVec> out;
  const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - (2.0 * i + 1.0) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    RVec v(3);
    v << r * std::cos(ga * i), r * std::sin(ga * i), z;
    out.push_back(v / v.norm());
  }
  return out;
}

std::vector<RVec> circle_directions(int n) {
  std::vector<RVec> out;
  for (int i = 0; i < n; ++i) {
    double t = 2 * std::numbers::pi * i / n;
    RVec v(2);
    v << std::cos(t), std::sin(t);
    out.push_back(v);
  }
  return out;
}

std::vector<RVec> sphere_directions(int k, int n, unsigned long long seed) {
  if (k < 1) throw DimensionError("direction dimension must be positive");
  if (k == 1) return {RVec::Constant(1, 1.0), RVec::Constant(1, -1.0)};
  if (k == 2) return circle_directions(n);
  if (k == 3) return fibonacci_sphere(n);
  std::vector<RVec> out;
  for (int i = 0; i < k; ++i)
    for (double s : {1.0, -1.0}) {
      RVec u = RVec::Zero(k);
      u(i) = s;
      out.push_back(u);
    }
  Rng rng(seed);
  std::normal_distribution<double> g;
  while (static_cast<int>(out.size()) < n) {
    RVec v(k);
    for (int i = 0; i < k; ++i) v(i) = g(rng);
    if (v.norm() > 1e-9) out.push_back(v / v.norm());
  }
  return out;
}

bool positively_spanning(const std::vector<RVec>& dirs) {
  if (dirs.empty()) return false;
  const int k = static_cast<int>(dirs.front().size());
  auto h = convex_hull(dirs);
  if (h.affine_dim < k) return false;
  return h.min_facet_distance(RVec::Zero(k)) > 1e-12;
}

ConvexBodyApprox jnr_approximate(const OpList& ops, const std::vector<RVec>& directions,
                                 const JnrOptions& opt) {
  check_ops(ops);
  const int k = static_cast<int>(ops.size());
  for (const auto& d : directions)
    if (d.size() != k) throw DimensionError("direction length differs from operator count");
  std::vector<SupportSample> samples(directions.size());
  std::vector<std::vector<RVec>> extra(directions.size());
  parallel_for(static_cast<int>(directions.size()), opt.threads, [&](int i) {
    RVec n = directions[i] / directions[i].norm();
    samples[i] = support(ops, n);
    if (opt.expand_degenerate && samples[i].degenerate) {
      auto es = hermitian_eigensystem(combine(ops, n));
      extra[i] = expand_face(ops, n, top_eigenspace(es, kDegenerateGap));
    }
  });
  ConvexBodyApprox body;
  body.k = k;
  for (size_t i = 0; i < samples.size(); ++i) {
    body.inner_vertices.push_back(samples[i].point);
    body.outer_halfspaces.push_back({samples[i].direction, samples[i].value});
    if (samples[i].degenerate) ++body.degenerate_samples;
    for (auto& p : extra[i]) body.inner_vertices.push_back(p);
  }
  body.unbounded = static_cast<int>(directions.size()) < k + 1 || !positively_spanning(directions);
  return body;
}

Hull ConvexBodyApprox::inner_hull() const { return convex_hull(inner_vertices); }

HalfSpaceVertices ConvexBodyApprox::outer_vertices() const {
  if (unbounded) return {};
  auto h = inner_hull();
  RVec c = RVec::Zero(k);
  for (int v : h.vertex_ids) c += inner_vertices[v];
  c /= double(h.vertex_ids.size());
  return halfspace_vertices(outer_halfspaces, c, h.basis);
}

bool ConvexBodyApprox::inner_within_outer(double tol) const {
  for (const auto& x : inner_vertices)
    for (const auto& h : outer_halfspaces)
      if (h.normal.dot(x) > h.offset + tol) return false;
  return true;
}

bool spectrahedron_contains(const HermitianOperator& center, const OpList& gens, const RVec& y,
                            double tol) {
  if (gens.size() != static_cast<size_t>(y.size())) throw DimensionError("generator count mismatch");
  CMat m = center.matrix();
  for (size_t i = 0; i < gens.size(); ++i) {
    if (gens[i].dim() != center.dim()) throw DimensionError("generator dimension mismatch");
    m += y(i) * gens[i].matrix();
  }
  return lambda_min(HermitianOperator::symmetrized(m)) >= -tol;
}

NmResult nelder_mead(const std::function<double(const RVec&)>& f, const RVec& x0, double step,
                     double xtol, int max_evals) {
  const int n = static_cast<int>(x0.size());
  std::vector<RVec> x(n + 1, x0);
  std::vector<double> fx(n + 1);
  for (int i = 0; i < n; ++i) x[i + 1](i) += step;
  int evals = 0;
  for (int i = 0; i <= n; ++i) fx[i] = f(x[i]), ++evals;
  std::vector<int> ord(n + 1);
  while (evals < max_evals) {
    for (int i = 0; i <= n; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    double size = 0;
    for (int i = 1; i <= n; ++i) size = std::max(size, (x[ord[i]] - x[ord[0]]).norm());
    if (size < xtol) break;
    RVec c = RVec::Zero(n);
    for (int i = 0; i < n; ++i) c += x[ord[i]];
    c /= double(n);
    const int w = ord[n];
    RVec xr = c + (c - x[w]);
    double fr = f(xr);
    ++evals;
    if (fr < fx[ord[0]]) {
      RVec xe = c + 2.0 * (c - x[w]);
      double fe = f(xe);
      ++evals;
      if (fe < fr) x[w] = xe, fx[w] = fe;
      else x[w] = xr, fx[w] = fr;
    } else if (fr < fx[ord[n - 1]]) {
      x[w] = xr, fx[w] = fr;
    } else {
      RVec xc = fr < fx[w] ? RVec(c + 0.5 * (xr - c)) : RVec(c + 0.5 * (x[w] - c));
      double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fx[w])) {
        x[w] = xc, fx[w] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          x[ord[i]] = x[ord[0]] + 0.5 * (x[ord[i]] - x[ord[0]]);
          fx[ord[i]] = f(x[ord[i]]);
          ++evals;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (fx[i] < fx[best]) best = i;
  return {x[best], fx[best], evals};
}

namespace {

double rel_top_gap(const OpList& ops, const RVec& n) {
  Eigen::SelfAdjointEigenSolver<CMat> es(combine(ops, n).matrix(), Eigen::EigenvaluesOnly);
  const auto& v = es.eigenvalues();
  double spread = v(2) - v(0);
  return spread > 0 ? (v(2) - v(1)) / spread : 0.0;
}

std::optional<CVec> find_common_eigenvector(const OpList& ops, unsigned long long seed) {
  Rng rng(seed ^ 0x5bd1e995ULL);
  std::normal_distribution<double> g;
  double scale = 0;
  for (const auto& x : ops) scale = std::max(scale, x.matrix().cwiseAbs().maxCoeff());
  for (int trial = 0; trial < 2; ++trial) {
    RVec c(ops.size());
    for (int i = 0; i < c.size(); ++i) c(i) = g(rng);
    auto es = hermitian_eigensystem(combine(ops, c));
    for (int j = 0; j < es.vectors.cols(); ++j) {
      CVec v = es.vectors.col(j);
      bool common = true;
      for (const auto& x : ops) {
        CVec xv = x.matrix() * v;
        cplx mu = v.dot(xv);
        if ((xv - mu * v).norm() > 1e-9 * std::max(scale, 1.0)) common = false;
      }
      if (common) return v;
    }
  }
  return std::nullopt;
}

int real_rank(const std::vector<CMat>& ms, double tol) {
  const auto n = ms.front().size();
  RMat a(2 * n, ms.size());
  for (size_t j = 0; j < ms.size(); ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, j) = ms[j](i).real();
      a(n + i, j) = ms[j](i).imag();
    }
  Eigen::JacobiSVD<RMat> svd(a);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

}  // namespace

JNRClassification classify_qutrit_jnr(const HermitianOperator& x1, const HermitianOperator& x2,
                                      const HermitianOperator& x3, unsigned long long seed) {
  OpList ops{x1, x2, x3};
  for (const auto& x : ops)
    if (x.dim() != 3) throw DimensionError("classify_qutrit_jnr expects 3×3 operators");
  JNRClassification out;
  if (auto v = find_common_eigenvector(ops, seed))
    throw CommonEigenvectorError(
        "operators share a common eigenvector; the range splits as the convex hull of a point "
        "and the range of the compressions to its orthogonal complement",
        *v);
  if (real_rank({CMat::Identity(3, 3), x1.matrix(), x2.matrix(), x3.matrix()}, 1e-10) < 4) {
    out.degenerate_input = true;
    return out;
  }

  const int ns = 600;
  auto dirs = fibonacci_sphere(ns);
  std::vector<double> g(ns);
  for (int i = 0; i < ns; ++i) g[i] = rel_top_gap(ops, dirs[i]);

  const int nn = 10;
  std::vector<int> starts;
  for (int i = 0; i < ns; ++i) {
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < ns; ++j)
      if (j != i) d.emplace_back(-dirs[i].dot(dirs[j]), j);
    std::partial_sort(d.begin(), d.begin() + nn, d.end());
    bool local_min = true;
    for (int t = 0; t < nn; ++t)
      if (g[d[t].second] < g[i]) local_min = false;
    if (local_min) starts.push_back(i);
  }

  struct Found {
    RVec n, center;
    double gap;
  };
  std::vector<Found> found;
  for (int si : starts) {
    RVec n0 = dirs[si];
    RMat t = complement_basis(n0);
    auto param = [&](const RVec& ab) {
      RVec n = n0 + t * ab;
      return RVec(n / n.norm());
    };
    RVec best = RVec::Zero(2);
    double fbest = g[si] * g[si];
    double step = 0.05;
    for (int round = 0; round < 4 && fbest > 1e-18; ++round) {
      auto r = nelder_mead([&](const RVec& ab) { double q = rel_top_gap(ops, param(ab)); return q * q; },
                           best, step, 1e-13, 3000);
      if (r.f < fbest) fbest = r.f, best = r.x;
      step *= 0.1;
    }
    RVec n = param(best);
    double gap = rel_top_gap(ops, n);
    if (gap >= 1e-8) {
      out.nearest_rejected_gap = std::min(out.nearest_rejected_gap, gap);
      continue;
    }
    auto es = hermitian_eigensystem(combine(ops, n));
    CMat p = es.vectors.rightCols(2);
    RVec center(3);
    for (int i = 0; i < 3; ++i) center(i) = (p.adjoint() * ops[i].matrix() * p).trace().real() / 2.0;
    bool dup = false;
    for (const auto& f : found)
      if ((f.center - center).norm() < 1e-6) dup = true;
    if (!dup) found.push_back({n, center, gap});
  }

  for (const auto& f : found) {
    auto es = hermitian_eigensystem(combine(ops, f.n));
    CMat p = es.vectors.rightCols(2);
    RMat m(3, 3);  // row i: Bloch coefficients of the compression of X_i
    for (int i = 0; i < 3; ++i) {
      CMat y = p.adjoint() * ops[i].matrix() * p;
      m(i, 0) = y(0, 1).real();
      m(i, 1) = -y(0, 1).imag();
      m(i, 2) = (y(0, 0) - y(1, 1)).real() / 2.0;
    }
    RMat q = complement_basis(f.n);
    std::vector<RVec> pts;
    for (int a = 0; a < 64; ++a) {
      double th = 2 * std::numbers::pi * a / 64;
      RVec u = std::cos(th) * q.col(0) + std::sin(th) * q.col(1);
      RVec s = m.transpose() * u;
      if (s.norm() < 1e-14) {
        pts.push_back(f.center);
        continue;
      }
      pts.push_back(f.center + m * (s / s.norm()));
    }
    RVec mean = RVec::Zero(3);
    for (auto& x : pts) mean += x;
    mean /= double(pts.size());
    RMat cov = RMat::Zero(3, 3);
    for (auto& x : pts) cov += (x - mean) * (x - mean).transpose();
    Eigen::SelfAdjointEigenSolver<RMat> pca(cov);
    double l1 = std::max(pca.eigenvalues()(2), 0.0), l2 = std::max(pca.eigenvalues()(1), 0.0);
    JnrFace face;
    face.normal = f.n;
    face.gap = f.gap;
    if (l1 <= 1e-28) {
      face.face_dim = 0;
      face.shape = "point";
      out.faces.push_back(face);
      continue;
    }
    face.pca_ratio = std::sqrt(l2 / l1);
    out.min_shape_margin = std::min(out.min_shape_margin, std::abs(std::log10(std::max(face.pca_ratio, 1e-300) / 1e-6)));
    if (face.pca_ratio < 1e-6) {
      face.face_dim = 1;
      face.shape = "segment";
      ++out.s;
    } else {
      RMat axes = pca.eigenvectors().rightCols(2);
      RMat design(pts.size(), 6);
      double sc = std::sqrt(l1 / pts.size());
      for (size_t i = 0; i < pts.size(); ++i) {
        RVec z = axes.transpose() * (pts[i] - mean) / sc;
        design.row(i) << z(0) * z(0), z(0) * z(1), z(1) * z(1), z(0), z(1), 1.0;
      }
      Eigen::JacobiSVD<RMat> svd(design, Eigen::ComputeThinV);
      RVec c = svd.matrixV().col(5);
      face.discriminant = c(1) * c(1) - 4 * c(0) * c(2);
      face.face_dim = 2;
      if (face.discriminant < 0) {
        face.shape = "ellipse";
        ++out.e;
      } else {
        face.shape = "unfit";
      }
    }
    out.faces.push_back(face);
  }
  return out;
}

Distinguishability one_shot_distinguishable(const CMat& u, const CMat& v, double tol) {
  if (u.rows() != u.cols() || v.rows() != v.cols() || u.rows() != v.rows())
    throw DimensionError("unitaries must be square and of equal size");
  const int d = static_cast<int>(u.rows());
  CMat id = CMat::Identity(d, d);
  if ((u.adjoint() * u - id).norm() > 1e-9 || (v.adjoint() * v - id).norm() > 1e-9)
    throw DomainError("one_shot_distinguishable: input is not unitary");
  CMat m = u.adjoint() * v;
  Eigen::ComplexSchur<CMat> schur(m);
  CMat q = schur.matrixU();
  CVec z = schur.matrixT().diagonal();

  std::vector<double> ang(d);
  for (int i = 0; i < d; ++i) ang[i] = std::arg(z(i));
  std::vector<int> ord(d);
  for (int i = 0; i < d; ++i) ord[i] = i;
  std::sort(ord.begin(), ord.end(), [&](int a, int b) { return ang[a] < ang[b]; });
  double max_gap = -1;
  int after = 0;  // index in ord where the arc starts (just after the largest gap)
  for (int i = 0; i < d; ++i) {
    double a = ang[ord[i]];
    double b = i + 1 < d ? ang[ord[i + 1]] : ang[ord[0]] + 2 * std::numbers::pi;
    if (b - a > max_gap) {
      max_gap = b - a;
      after = (i + 1) % d;
    }
  }

  Distinguishability out;
  if (max_gap > std::numbers::pi + 1e-12) {
    double start = ang[ord[after]];
    double arc = 2 * std::numbers::pi - max_gap;
    double mid = start + arc / 2;
    out.separating = RVec(2);
    out.separating << std::cos(mid), std::sin(mid);
    out.distinguishable = false;
    return out;
  }
  RMat a(2, d);
  for (int i = 0; i < d; ++i) a(0, i) = z(i).real(), a(1, i) = z(i).imag();
  auto sol = simplex_nnls(a, RVec::Zero(2));
  RVec w = sol.x / sol.x.sum();
  CVec psi = CVec::Zero(d);
  for (int i = 0; i < d; ++i) psi += std::sqrt(w(i)) * q.col(i);
  psi /= psi.norm();
  out.witness = psi;
  out.overlap = std::abs(psi.dot(m * psi));
  out.distinguishable = out.overlap < tol;
  return out;
}

}  // namespace qgeom
