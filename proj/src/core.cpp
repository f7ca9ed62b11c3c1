#include "qgeom/core.hpp"

#include <cmath>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

namespace qgeom {

namespace {

void require_square(const CMat& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw DimensionError(std::string(what) + ": operator must be square and non-empty");
}

double max_abs(const CMat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

struct Split {
  int left, mid, right;
};

Split split_dims(const DimensionSpec& dims, int which, int dim) {
  dims.check(dim);
  if (which < 0 || which >= dims.size()) throw DimensionError("subsystem index out of range");
  Split s{1, dims.local_dims[which], 1};
  for (int i = 0; i < which; ++i) s.left *= dims.local_dims[i];
  for (int i = which + 1; i < dims.size(); ++i) s.right *= dims.local_dims[i];
  return s;
}

}  // namespace

HermitianOperator::HermitianOperator(const CMat& a, double tol) {
  require_square(a, "HermitianOperator");
  double scale = max_abs(a);
  double asym = max_abs(a - a.adjoint());
  if (asym > tol * std::max(scale, 1e-300) && asym > 0)
    throw SymmetryError("operator is not Hermitian (asymmetry " + std::to_string(asym) + ")");
  m_ = (a + a.adjoint()) / 2.0;
}

HermitianOperator HermitianOperator::symmetrized(const CMat& a) {
  require_square(a, "HermitianOperator");
  HermitianOperator h;
  h.m_ = (a + a.adjoint()) / 2.0;
  return h;
}

HermitianOperator HermitianOperator::identity(int dim) {
  return symmetrized(CMat::Identity(dim, dim));
}

HermitianOperator HermitianOperator::zero(int dim) { return symmetrized(CMat::Zero(dim, dim)); }

double HermitianOperator::norm() const {
  auto es = hermitian_eigensystem(*this);
  return std::max(std::abs(es.values(0)), std::abs(es.values(es.values.size() - 1)));
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& o) const {
  if (dim() != o.dim()) throw DimensionError("operator dimensions differ");
  return symmetrized(m_ + o.m_);
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& o) const {
  if (dim() != o.dim()) throw DimensionError("operator dimensions differ");
  return symmetrized(m_ - o.m_);
}

HermitianOperator HermitianOperator::operator*(double s) const { return symmetrized(m_ * s); }

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  if (dim() != o.dim()) throw DimensionError("operator dimensions differ");
  m_ += o.m_;
  return *this;
}

DensityMatrix::DensityMatrix(const HermitianOperator& op, double trace_tol) : op_(op) {
  if (std::abs(op.trace() - 1.0) > trace_tol)
    throw DomainError("density matrix trace is " + std::to_string(op.trace()));
  auto es = hermitian_eigensystem(op);
  double top = std::max(std::abs(es.values(0)), std::abs(es.values(es.values.size() - 1)));
  if (es.values(0) < -kPsdTol * top)
    throw DomainError("density matrix has negative eigenvalue " + std::to_string(es.values(0)));
}

DensityMatrix DensityMatrix::pure(const CVec& psi) {
  CVec v = psi / psi.norm();
  return DensityMatrix(HermitianOperator::symmetrized(v * v.adjoint()), 1e-10);
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(HermitianOperator::symmetrized(CMat::Identity(dim, dim) / double(dim)));
}

int DimensionSpec::total() const {
  return std::accumulate(local_dims.begin(), local_dims.end(), 1, std::multiplies<int>());
}

void DimensionSpec::check(int dim) const {
  if (local_dims.empty()) throw DimensionError("empty dimension spec");
  for (int d : local_dims)
    if (d <= 0) throw DimensionError("local dimensions must be positive");
  if (total() != dim)
    throw DimensionError("dimension spec product " + std::to_string(total()) +
                         " does not match operator dimension " + std::to_string(dim));
}

KrausChannel::KrausChannel(std::vector<CMat> kraus, bool subnormalized, double tol)
    : k_(std::move(kraus)), sub_(subnormalized) {
  if (k_.empty()) throw DimensionError("channel needs at least one Kraus operator");
  const auto r = k_.front().rows(), c = k_.front().cols();
  CMat s = CMat::Zero(c, c);
  for (const auto& k : k_) {
    if (k.rows() != r || k.cols() != c) throw DimensionError("Kraus operators differ in shape");
    s += k.adjoint() * k;
  }
  CMat id = CMat::Identity(c, c);
  if (sub_) {
    auto es = hermitian_eigensystem(HermitianOperator::symmetrized(id - s));
    if (es.values(0) < -tol) throw DomainError("sub-normalized channel exceeds identity");
  } else if (max_abs(s - id) > tol) {
    throw DomainError("Kraus operators are not trace preserving");
  }
}

KrausChannel KrausChannel::identity(int dim) { return KrausChannel({CMat::Identity(dim, dim)}); }

Eigensystem hermitian_eigensystem(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a.matrix());
  if (es.info() != Eigen::Success) throw DomainError("eigensolver failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigensystem hermitian_eigensystem(const CMat& a) { return hermitian_eigensystem(HermitianOperator(a)); }

double lambda_max(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(a.dim() - 1);
}

double lambda_min(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

CMat tensor(const CMat& a, const CMat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator::symmetrized(tensor(a.matrix(), b.matrix()));
}

CVec tensor(const CVec& a, const CVec& b) { return Eigen::kroneckerProduct(a, b).eval(); }

CMat partial_trace(const CMat& m, const DimensionSpec& dims, int which) {
  require_square(m, "partial_trace");
  auto s = split_dims(dims, which, static_cast<int>(m.rows()));
  const int out = s.left * s.right;
  CMat r = CMat::Zero(out, out);
  for (int l = 0; l < s.left; ++l)
    for (int rr = 0; rr < s.right; ++rr)
      for (int l2 = 0; l2 < s.left; ++l2)
        for (int r2 = 0; r2 < s.right; ++r2) {
          cplx acc = 0;
          for (int k = 0; k < s.mid; ++k)
            acc += m((l * s.mid + k) * s.right + rr, (l2 * s.mid + k) * s.right + r2);
          r(l * s.right + rr, l2 * s.right + r2) = acc;
        }
  return r;
}

HermitianOperator partial_trace(const HermitianOperator& m, const DimensionSpec& dims, int which) {
  return HermitianOperator::symmetrized(partial_trace(m.matrix(), dims, which));
}

CMat partial_transpose(const CMat& m, const DimensionSpec& dims, int which) {
  require_square(m, "partial_transpose");
  auto s = split_dims(dims, which, static_cast<int>(m.rows()));
  CMat r(m.rows(), m.cols());
  auto idx = [&](int l, int k, int rr) { return (l * s.mid + k) * s.right + rr; };
  for (int l = 0; l < s.left; ++l)
    for (int k = 0; k < s.mid; ++k)
      for (int rr = 0; rr < s.right; ++rr)
        for (int l2 = 0; l2 < s.left; ++l2)
          for (int k2 = 0; k2 < s.mid; ++k2)
            for (int r2 = 0; r2 < s.right; ++r2)
              r(idx(l, k, rr), idx(l2, k2, r2)) = m(idx(l, k2, rr), idx(l2, k, r2));
  return r;
}

HermitianOperator partial_transpose(const HermitianOperator& m, const DimensionSpec& dims, int which) {
  return HermitianOperator::symmetrized(partial_transpose(m.matrix(), dims, which));
}

double expectation(const HermitianOperator& x, const DensityMatrix& rho) {
  if (x.dim() != rho.dim()) throw DimensionError("expectation: dimension mismatch");
  return (x.matrix().cwiseProduct(rho.matrix().transpose())).sum().real();
}

double expectation(const HermitianOperator& x, const CVec& psi) {
  if (x.dim() != psi.size()) throw DimensionError("expectation: dimension mismatch");
  return psi.dot(x.matrix() * psi).real() / psi.squaredNorm();
}

double hs_distance(const CMat& x, const CMat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw DimensionError("hs_distance: shape mismatch");
  return (x - y).norm();
}

double hs_distance(const HermitianOperator& x, const HermitianOperator& y) {
  return hs_distance(x.matrix(), y.matrix());
}

HermitianOperator psd_sqrt(const HermitianOperator& a) {
  auto es = hermitian_eigensystem(a);
  RVec s = es.values.cwiseMax(0.0).cwiseSqrt();
  return HermitianOperator::symmetrized(es.vectors * s.asDiagonal() * es.vectors.adjoint());
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("fidelity: dimension mismatch");
  CMat sr = psd_sqrt(rho.op()).matrix();
  auto inner = HermitianOperator::symmetrized(sr * sigma.matrix() * sr);
  double f = psd_sqrt(inner).trace();
  return f * f;
}

double bures_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  double root_f = std::sqrt(std::max(0.0, fidelity(rho, sigma)));
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - root_f)));
}

CMat apply_kraus(const std::vector<CMat>& kraus, const CMat& rho) {
  CMat out = CMat::Zero(kraus.front().rows(), kraus.front().rows());
  for (const auto& k : kraus) {
    if (k.cols() != rho.rows()) throw DimensionError("apply_channel: dimension mismatch");
    out += k * rho * k.adjoint();
  }
  return out;
}

DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho) {
  CMat out = apply_kraus(ch.kraus(), rho.matrix());
  if (ch.subnormalized()) out /= out.trace().real();
  return DensityMatrix(HermitianOperator::symmetrized(out), kPsdTol);
}

CVec max_entangled(int d) {
  CVec w = CVec::Zero(d * d);
  for (int i = 0; i < d; ++i) w(i * d + i) = 1.0 / std::sqrt(double(d));
  return w;
}

HermitianOperator choi_of_map(const LinearMap& map, int dim) {
  CMat e = CMat::Zero(dim, dim);
  CMat first = map(e);
  const int dout = static_cast<int>(first.rows());
  CMat phi = CMat::Zero(dim * dout, dim * dout);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      CMat eij = CMat::Zero(dim, dim);
      eij(i, j) = 1.0;
      phi.block(i * dout, j * dout, dout, dout) = map(eij) / double(dim);
    }
  return HermitianOperator::symmetrized(phi);
}

DensityMatrix choi_state(const KrausChannel& ch) {
  if (ch.dim_in() != ch.dim_out()) throw DimensionError("choi_state: channel must be square");
  const auto& k = ch.kraus();
  auto phi = choi_of_map([&](const CMat& r) { return apply_kraus(k, r); }, ch.dim_in());
  return DensityMatrix(phi, ch.subnormalized() ? 1.0 : kPsdTol);
}

CMat choi_apply(const HermitianOperator& choi, int dim_in, const CMat& rho) {
  if (rho.rows() != dim_in || choi.dim() % dim_in) throw DimensionError("choi_apply: dimension mismatch");
  const int dout = choi.dim() / dim_in;
  CMat big = tensor(CMat(rho.transpose()), CMat::Identity(dout, dout)) * choi.matrix();
  return double(dim_in) * partial_trace(big, DimensionSpec{dim_in, dout}, 0);
}

bool choi_is_cp(const HermitianOperator& choi, double tol) { return lambda_min(choi) >= -tol; }

SpinOperators spin_operators(int twice_j) {
  if (twice_j < 0) throw DomainError("spin j must be a nonnegative half-integer");
  const int n = twice_j + 1;
  const double j = twice_j / 2.0;
  CMat jp = CMat::Zero(n, n);  // raising operator J_+
  CMat jz = CMat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double m = j - k;
    jz(k, k) = m;
    if (k > 0) jp(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  CMat jx = (jp + jp.adjoint()) / 2.0;
  CMat jy = (jp - jp.adjoint()) / cplx(0, 2);
  return {HermitianOperator::symmetrized(jx), HermitianOperator::symmetrized(jy),
          HermitianOperator::symmetrized(jz)};
}

HermitianOperator pauli_x() {
  CMat m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_y() {
  CMat m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_z() {
  CMat m(2, 2);
  m << 1, 0, 0, -1;
  return HermitianOperator(m);
}

CMat random_ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

CMat random_unitary(int d, Rng& rng) {
  Eigen::HouseholderQR<CMat> qr(random_ginibre(d, d, rng));
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    cplx ph = r(i, i) / std::abs(r(i, i));
    q.col(i) *= ph;
  }
  return q;
}

CVec random_pure(int d, Rng& rng) {
  CVec v = random_ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

HermitianOperator random_hermitian(int d, Rng& rng) {
  CMat g = random_ginibre(d, d, rng);
  return HermitianOperator::symmetrized(g / std::sqrt(2.0 * d));
}

DensityMatrix random_density(int d, Rng& rng) {
  CMat g = random_ginibre(d, d, rng);
  CMat r = g * g.adjoint();
  r /= r.trace().real();
  return DensityMatrix(HermitianOperator::symmetrized(r), 1e-10);
}

KrausChannel random_channel(int d, int n_kraus, Rng& rng) {
  CMat u = random_unitary(d * n_kraus, rng);
  std::vector<CMat> ks;
  for (int i = 0; i < n_kraus; ++i) ks.push_back(u.block(i * d, 0, d, d));
  return KrausChannel(std::move(ks));
}

std::string format_half(int twice) {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  return std::to_string(twice) + "/2";
}

}  // namespace qgeom
