#include "qgeom/wigner.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "qgeom/nnls.hpp"

namespace qgeom {

namespace {

bool odd_prime(int n) {
  if (n < 3 || n % 2 == 0) return false;
  for (int k = 3; k * k <= n; k += 2)
    if (n % k == 0) return false;
  return true;
}

struct Entry {
  int i, j;
  cplx a;
};

struct Monomial {
  std::vector<int> perm;  // D e_n = c_n e_{perm[n]}
  std::vector<cplx> c;
};

struct PhaseSpace {
  std::vector<int> dims;
  int d = 1;
  std::vector<Entry> kernel;  // nonzeros of A_{0,0}
};

Monomial monomial(int x, int q, const std::vector<int>& dims) {
  const int d = wh_dim(dims);
  auto xd = wh_digits(x, dims), qd = wh_digits(q, dims);
  Monomial m{std::vector<int>(d), std::vector<cplx>(d)};
  for (int n = 0; n < d; ++n) {
    auto nd = wh_digits(n, dims);
    std::vector<int> out(dims.size());
    cplx phase = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const long long p = dims[k], half = (p + 1) / 2;
      long long e = (qd[k] * static_cast<long long>(nd[k]) + half * xd[k] % p * qd[k]) % p;
      phase *= std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(p));
      out[k] = static_cast<int>((nd[k] + xd[k]) % p);
    }
    m.perm[n] = wh_label(out, dims);
    m.c[n] = phase;
  }
  return m;
}

CMat dense(const Monomial& m) {
  const int d = static_cast<int>(m.perm.size());
  CMat out = CMat::Zero(d, d);
  for (int n = 0; n < d; ++n) out(m.perm[n], n) = m.c[n];
  return out;
}

std::shared_ptr<const PhaseSpace> build_space(const std::vector<int>& dims) {
  auto s = std::make_shared<PhaseSpace>();
  s->dims = dims;
  s->d = wh_dim(dims);
  CMat kernel = CMat::Ones(1, 1);
  for (int p : dims) {
    std::vector<int> one{p};
    CMat sum = CMat::Zero(p, p);
    for (int x = 0; x < p; ++x)
      for (int q = 0; q < p; ++q) sum += dense(monomial(x, q, one));
    kernel = tensor(kernel, CMat(sum / p));
  }
  for (int j = 0; j < s->d; ++j)
    for (int i = 0; i < s->d; ++i)
      if (std::abs(kernel(i, j)) > 1e-12) s->kernel.push_back({i, j, kernel(i, j)});
  return s;
}

// Composite systems such as a Choi state may repeat a prime; each factor is still an odd prime.
const PhaseSpace& space(const std::vector<int>& dims, bool composite = false) {
  if (composite) {
    for (int p : dims) check_wh_dims({p});
  } else {
    check_wh_dims(dims);
  }
  static std::mutex mu;
  static std::map<std::vector<int>, std::shared_ptr<const PhaseSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[dims];
  if (!slot) slot = build_space(dims);
  return *slot;
}

void check_table(const WignerTable& w) {
  const int d = wh_dim(w.dims);
  if (w.values.rows() != d || w.values.cols() != d)
    throw DimensionError("Wigner table shape does not match its dims");
}

// Sequential DFT over every axis of a mixed-radix array; sign −1 forward, +1 inverse (unnormalised).
CVec group_dft(CVec v, const std::vector<int>& radices, int sign) {
  const int n = static_cast<int>(v.size());
  int stride = n;
  for (int p : radices) {
    stride /= p;
    CVec buf(p);
    for (int base = 0; base < n; ++base) {
      if ((base / stride) % p != 0) continue;
      for (int k = 0; k < p; ++k) {
        cplx acc = 0;
        for (int j = 0; j < p; ++j)
          acc += v(base + j * stride) *
                 std::polar(1.0, sign * 2 * std::numbers::pi * static_cast<double>((j * k) % p) / p);
        buf(k) = acc;
      }
      for (int k = 0; k < p; ++k) v(base + k * stride) = buf(k);
    }
  }
  return v;
}

std::vector<int> doubled(const std::vector<int>& dims) {
  std::vector<int> r = dims;
  r.insert(r.end(), dims.begin(), dims.end());
  return r;
}

// Flat index of a − b on the doubled phase space.
std::vector<int> difference_table(const std::vector<int>& dims) {
  const int d = wh_dim(dims), n = d * d;
  std::vector<int> sub(static_cast<std::size_t>(n) * n);
  std::vector<int> neg(d);
  for (int a = 0; a < d; ++a) neg[a] = wh_neg(a, dims);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      int x = wh_add(a / d, neg[b / d], dims), q = wh_add(a % d, neg[b % d], dims);
      sub[static_cast<std::size_t>(a) * n + b] = x * d + q;
    }
  return sub;
}

}  // namespace

void check_wh_dims(const std::vector<int>& dims) {
  if (dims.empty()) throw DimensionError("Weyl-Heisenberg dims must be nonempty");
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (dims[k] == 2 || dims[k] % 2 == 0)
      throw DimensionError("even dimensions are not supported: the p = 2 Wigner construction is not defined here");
    if (!odd_prime(dims[k]))
      throw DimensionError("Weyl-Heisenberg dims must be odd primes, got " + std::to_string(dims[k]));
    for (std::size_t l = 0; l < k; ++l)
      if (dims[l] == dims[k])
        throw DimensionError("dimension must be square-free; prime powers are not supported");
  }
}

std::vector<int> factor_odd_squarefree(int d) {
  if (d < 3) throw DimensionError("Weyl-Heisenberg dimension must be an odd number ≥ 3");
  if (d % 2 == 0)
    throw DimensionError("even dimensions are not supported: the p = 2 Wigner construction is not defined here");
  std::vector<int> primes;
  int r = d;
  for (int p = 3; p * p <= r; p += 2) {
    if (r % p) continue;
    r /= p;
    if (r % p == 0) throw DimensionError("dimension must be square-free; prime powers are not supported");
    primes.push_back(p);
  }
  if (r > 1) primes.push_back(r);
  return primes;
}

int wh_dim(const std::vector<int>& dims) {
  int d = 1;
  for (int p : dims) d *= p;
  return d;
}

int wh_label(const std::vector<int>& digits, const std::vector<int>& dims) {
  if (digits.size() != dims.size()) throw DimensionError("phase-space label length does not match dims");
  int v = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) v = v * dims[k] + ((digits[k] % dims[k]) + dims[k]) % dims[k];
  return v;
}

std::vector<int> wh_digits(int label, const std::vector<int>& dims) {
  std::vector<int> out(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = label % dims[k];
    label /= dims[k];
  }
  return out;
}

PhaseSpacePoint wh_point(int x, int q, const std::vector<int>& dims) {
  return {wh_digits(x, dims), wh_digits(q, dims)};
}

int wh_add(int a, int b, const std::vector<int>& dims) {
  auto da = wh_digits(a, dims), db = wh_digits(b, dims);
  for (std::size_t k = 0; k < dims.size(); ++k) da[k] = (da[k] + db[k]) % dims[k];
  return wh_label(da, dims);
}

int wh_neg(int a, const std::vector<int>& dims) {
  auto da = wh_digits(a, dims);
  for (std::size_t k = 0; k < dims.size(); ++k) da[k] = (dims[k] - da[k]) % dims[k];
  return wh_label(da, dims);
}

CMat wh_displacement(int x, int q, const std::vector<int>& dims) {
  check_wh_dims(dims);
  const int d = wh_dim(dims);
  if (x < 0 || x >= d || q < 0 || q >= d) throw DimensionError("phase-space label out of range");
  return dense(monomial(x, q, dims));
}

CMat wh_displacement(const PhaseSpacePoint& pt, const std::vector<int>& dims) {
  return wh_displacement(wh_label(pt.x, dims), wh_label(pt.q, dims), dims);
}

HermitianOperator phase_point(int x, int q, const std::vector<int>& dims) {
  const auto& s = space(dims);
  if (x < 0 || x >= s.d || q < 0 || q >= s.d) throw DimensionError("phase-space label out of range");
  auto m = monomial(x, q, dims);
  CMat a = CMat::Zero(s.d, s.d);
  for (const auto& e : s.kernel) a(m.perm[e.i], m.perm[e.j]) += m.c[e.i] * e.a * std::conj(m.c[e.j]);
  return HermitianOperator::symmetrized(a);
}

RVec WignerTable::flat() const {
  const int d = dim();
  RVec v(d * d);
  for (int x = 0; x < d; ++x)
    for (int q = 0; q < d; ++q) v(x * d + q) = values(x, q);
  return v;
}

WignerTable WignerTable::from_flat(const std::vector<int>& dims, const RVec& v) {
  const int d = wh_dim(dims);
  if (v.size() != d * d) throw DimensionError("flat Wigner vector has the wrong length");
  WignerTable w{dims, RMat(d, d)};
  for (int x = 0; x < d; ++x)
    for (int q = 0; q < d; ++q) w.values(x, q) = v(x * d + q);
  return w;
}

namespace {

WignerTable wigner_table(const CMat& m, const std::vector<int>& dims, bool composite) {
  const auto& s = space(dims, composite);
  if (m.rows() != s.d || m.cols() != s.d) throw DimensionError("operator dimension does not match dims");
  WignerTable w{dims, RMat(s.d, s.d)};
  double imag = 0;
  for (int x = 0; x < s.d; ++x)
    for (int q = 0; q < s.d; ++q) {
      auto mono = monomial(x, q, dims);
      cplx t = 0;
      for (const auto& e : s.kernel)
        t += m(mono.perm[e.j], mono.perm[e.i]) * mono.c[e.i] * e.a * std::conj(mono.c[e.j]);
      t /= static_cast<double>(s.d);
      w.values(x, q) = t.real();
      imag = std::max(imag, std::abs(t.imag()));
    }
  if (imag > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw SymmetryError("Wigner function of a non-Hermitian operator");
  return w;
}

}  // namespace

WignerTable wigner_of_operator(const CMat& m, const std::vector<int>& dims) {
  return wigner_table(m, dims, false);
}

WignerTable wigner_of(const DensityMatrix& rho, const std::vector<int>& dims) {
  return wigner_of_operator(rho.matrix(), dims);
}

CMat operator_of(const WignerTable& w) {
  const auto& s = space(w.dims);
  check_table(w);
  CMat out = CMat::Zero(s.d, s.d);
  for (int x = 0; x < s.d; ++x)
    for (int q = 0; q < s.d; ++q) {
      if (w.values(x, q) == 0) continue;
      auto m = monomial(x, q, w.dims);
      for (const auto& e : s.kernel)
        out(m.perm[e.i], m.perm[e.j]) += w.values(x, q) * m.c[e.i] * e.a * std::conj(m.c[e.j]);
    }
  return out;
}

DensityMatrix state_of(const WignerTable& w, double tol) {
  CMat m = operator_of(w);
  if (std::abs(m.trace().real() - 1) > tol)
    throw DomainError("reconstructed operator has trace " + std::to_string(m.trace().real()));
  auto h = HermitianOperator::symmetrized(m);
  if (lambda_min(h) < -tol) throw DomainError("reconstructed operator is not positive semidefinite");
  return DensityMatrix(h, tol);
}

RVec wigner_x_marginal(const WignerTable& w) { return w.values.rowwise().sum(); }
RVec wigner_q_marginal(const WignerTable& w) { return w.values.colwise().sum().transpose(); }

RMat channel_transition(const KrausChannel& ch, const std::vector<int>& dims) {
  const int d = wh_dim(dims);
  check_wh_dims(dims);
  if (ch.dim_in() != d || ch.dim_out() != d) throw DimensionError("channel dimension does not match dims");
  auto joint = wigner_table(choi_state(ch).matrix(), doubled(dims), true);
  RMat t(d * d, d * d);
  std::vector<int> neg(d);
  for (int a = 0; a < d; ++a) neg[a] = wh_neg(a, dims);
  const double scale = static_cast<double>(d) * d;
  for (int x = 0; x < d; ++x)
    for (int q = 0; q < d; ++q)
      for (int xi = 0; xi < d; ++xi)
        for (int qi = 0; qi < d; ++qi)
          t(x * d + q, xi * d + qi) = scale * joint.values(xi * d + x, neg[qi] * d + q);
  return t;
}

WignerTable wigner_convolve(const WignerTable& k, const WignerTable& w) {
  if (k.dims != w.dims) throw DimensionError("Wigner tables live on different phase spaces");
  check_wh_dims(w.dims);
  check_table(k);
  check_table(w);
  const int d = w.dim(), n = d * d;
  auto sub = difference_table(w.dims);
  RVec kf = k.flat(), wf = w.flat(), out = RVec::Zero(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out(a) += kf(b) * wf(sub[static_cast<std::size_t>(a) * n + b]);
  return WignerTable::from_flat(w.dims, out);
}

std::optional<WignerTable> wh_convertible(const DensityMatrix& rho, const DensityMatrix& sigma,
                                          const std::vector<int>& dims) {
  auto wr = wigner_of(rho, dims), ws = wigner_of(sigma, dims);
  const int d = wr.dim(), n = d * d;
  const auto radices = doubled(dims);
  CVec fr = group_dft(wr.flat().cast<cplx>(), radices, -1);
  CVec fs = group_dft(ws.flat().cast<cplx>(), radices, -1);
  if (fs.cwiseAbs().minCoeff() > 1e-10) {
    CVec kh = fr.cwiseQuotient(fs);
    RVec k = group_dft(kh, radices, 1).real() / static_cast<double>(n);
    if (k.minCoeff() < -1e-9) return std::nullopt;
    k = k.cwiseMax(0.0);
    k /= k.sum();
    return WignerTable::from_flat(dims, k);
  }
  auto sub = difference_table(dims);
  RVec wsf = ws.flat(), b = wr.flat();
  RMat a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = wsf(sub[static_cast<std::size_t>(r) * n + c]);
  auto sol = simplex_nnls(a, b);
  RVec k = sol.x.cwiseMax(0.0);
  if (k.sum() <= 0) return std::nullopt;
  k /= k.sum();
  if ((a * k - b).norm() >= 1e-9) return std::nullopt;
  return WignerTable::from_flat(dims, k);
}

}  // namespace qgeom
