#include "qgeom/nnls.hpp"

#include <limits>

namespace qgeom {

NnlsResult nnls(const RMat& a, const RVec& b, int max_iter, double tol) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() != b.size()) throw DimensionError("nnls: shape mismatch");
  if (max_iter <= 0) max_iter = 3 * n + 30;
  RVec x = RVec::Zero(n);
  std::vector<char> passive(n, 0);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, b.cwiseAbs().maxCoeff());
  NnlsResult res;

  auto solve_passive = [&](RVec& z) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (passive[i]) idx.push_back(i);
    RMat ap(a.rows(), idx.size());
    for (size_t k = 0; k < idx.size(); ++k) ap.col(k) = a.col(idx[k]);
    RVec zp = ap.colPivHouseholderQr().solve(b);
    z = RVec::Zero(n);
    for (size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(k);
  };

  int it = 0;
  while (it++ < max_iter) {
    RVec w = a.transpose() * (b - a * x);
    int best = -1;
    double bw = tol * scale;
    for (int i = 0; i < n; ++i)
      if (!passive[i] && w(i) > bw) {
        bw = w(i);
        best = i;
      }
    if (best < 0) {
      res.converged = true;
      break;
    }
    passive[best] = 1;
    RVec z;
    solve_passive(z);
    int inner = 0;
    while (inner++ < max_iter) {
      double alpha = std::numeric_limits<double>::infinity();
      bool any = false;
      for (int i = 0; i < n; ++i)
        if (passive[i] && z(i) <= 0) {
          any = true;
          alpha = std::min(alpha, x(i) / (x(i) - z(i)));
        }
      if (!any) break;
      x += alpha * (z - x);
      for (int i = 0; i < n; ++i)
        if (passive[i] && x(i) <= tol) {
          passive[i] = 0;
          x(i) = 0;
        }
      solve_passive(z);
    }
    x = z;
  }
  res.x = x.cwiseMax(0.0);
  res.residual = (a * res.x - b).norm();
  return res;
}

NnlsResult simplex_nnls(const RMat& a, const RVec& b, double weight) {
  RMat aa(a.rows() + 1, a.cols());
  aa.topRows(a.rows()) = a;
  aa.row(a.rows()).setConstant(weight);
  RVec bb(b.size() + 1);
  bb.head(b.size()) = b;
  bb(b.size()) = weight;
  auto r = nnls(aa, bb);
  r.residual = (a * r.x - b).norm();
  return r;
}

}  // namespace qgeom
