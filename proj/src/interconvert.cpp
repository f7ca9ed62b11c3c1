#include "qgeom/interconvert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>
#include <unsupported/Eigen/Polynomials>

#include "qgeom/nnls.hpp"
#include "qgeom/parallel.hpp"

namespace qgeom {

namespace {

template <class T>
std::vector<T> trimmed(std::vector<T> w, int& offset, const T& tol) {
  size_t a = 0, b = w.size();
  while (a < b && w[a] <= tol) ++a;
  while (b > a && w[b - 1] <= tol) --b;
  offset += static_cast<int>(a);
  return std::vector<T>(w.begin() + a, w.begin() + b);
}

}  // namespace

ProbVector ProbVector::from_weights(int offset, std::vector<double> w, double tol) {
  ProbVector p;
  p.offset = offset;
  p.weights = trimmed(std::move(w), p.offset, tol);
  p.validate();
  return p;
}

void ProbVector::validate(double tol) const {
  if (weights.empty()) throw DomainError("probability vector has empty support");
  double s = 0;
  for (double x : weights) {
    if (!std::isfinite(x) || x < 0) throw DomainError("probability weights must be finite and nonnegative");
    s += x;
  }
  if (weights.front() <= 0 || weights.back() <= 0) throw DomainError("probability vector is not trimmed");
  if (std::abs(s - 1) > tol) throw DomainError("probability weights do not sum to 1");
}

double ProbVector::at(int n) const {
  int i = n - offset;
  return i < 0 || i >= static_cast<int>(weights.size()) ? 0.0 : weights[i];
}

RationalProbVector RationalProbVector::from_weights(int offset, std::vector<Rational> w) {
  RationalProbVector p;
  p.offset = offset;
  p.weights = trimmed(std::move(w), p.offset, Rational(0));
  p.validate();
  return p;
}

void RationalProbVector::validate() const {
  if (weights.empty()) throw DomainError("probability vector has empty support");
  Rational s = 0;
  for (const auto& x : weights) {
    if (x < 0) throw DomainError("probability weights must be nonnegative");
    s += x;
  }
  if (weights.front() == 0 || weights.back() == 0) throw DomainError("probability vector is not trimmed");
  if (s != 1) throw DomainError("probability weights do not sum to 1");
}

ProbVector RationalProbVector::to_double() const {
  ProbVector p;
  p.offset = offset;
  for (const auto& x : weights) p.weights.push_back(static_cast<double>(x));
  return p;
}

std::vector<std::string> RationalProbVector::strings() const {
  std::vector<std::string> s;
  for (const auto& x : weights) s.push_back(x.str());
  return s;
}

namespace {

std::optional<Rational> best_rational(double x, long long max_den, double tol) {
  if (!std::isfinite(x) || x < 0) return std::nullopt;
  // Convergents h/k of the continued fraction of x.
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(r);
    if (a > 1e15) break;
    long long ai = static_cast<long long>(a);
    long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    if (std::abs(x - double(h1) / double(k1)) <= tol) return Rational(h1, k1);
    double frac = r - a;
    if (frac <= 0) break;
    r = 1 / frac;
  }
  if (k1 > 0 && std::abs(x - double(h1) / double(k1)) <= tol) return Rational(h1, k1);
  return std::nullopt;
}

}  // namespace

std::optional<RationalProbVector> rationalize(const ProbVector& p, long long max_den, double tol) {
  RationalProbVector r;
  r.offset = p.offset;
  for (double x : p.weights) {
    auto q = best_rational(x, max_den, tol);
    if (!q) return std::nullopt;
    r.weights.push_back(*q);
  }
  try {
    r.validate();
  } catch (const DomainError&) {
    return std::nullopt;
  }
  return r;
}

Rational parse_rational(const std::string& s) {
  auto bad = [&] { return DomainError("cannot parse rational '" + s + "'"); };
  if (s.empty()) throw bad();
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      Rational num(boost::multiprecision::cpp_int(s.substr(0, slash)));
      boost::multiprecision::cpp_int den(s.substr(slash + 1));
      if (den == 0) throw bad();
      return num / Rational(den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    // cpp_int reads a leading zero as an octal prefix.
    bool neg = !digits.empty() && digits[0] == '-';
    if (neg) digits.erase(0, 1);
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    if (neg) digits.insert(0, "-");
    boost::multiprecision::cpp_int scale = 1;
    for (size_t i = dot + 1; i < s.size(); ++i) scale *= 10;
    return Rational(boost::multiprecision::cpp_int(digits)) / Rational(scale);
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
}

void LadderState::validate(double tol) const {
  if (amplitudes.size() == 0) throw DomainError("ladder state has no amplitudes");
  if (!amplitudes.allFinite()) throw DomainError("ladder state amplitudes must be finite");
  if (std::abs(amplitudes.norm() - 1) > tol) throw DomainError("ladder state is not normalised");
}

ProbVector LadderState::probabilities() const {
  validate();
  std::vector<double> w(amplitudes.size());
  for (int i = 0; i < amplitudes.size(); ++i) w[i] = std::norm(amplitudes(i));
  return ProbVector::from_weights(offset, w, 1e-15);
}

CVec LadderState::window(int lo, int dim) const {
  CVec v = CVec::Zero(dim);
  for (int i = 0; i < amplitudes.size(); ++i) {
    int j = offset + i - lo;
    if (amplitudes(i) == cplx(0)) continue;
    if (j < 0 || j >= dim) throw DimensionError("ladder state does not fit the window");
    v(j) = amplitudes(i);
  }
  return v;
}

LadderState LadderState::from_probs(const ProbVector& p, const std::vector<double>& phases) {
  LadderState s;
  s.offset = p.offset;
  s.amplitudes.resize(p.weights.size());
  for (size_t i = 0; i < p.weights.size(); ++i)
    s.amplitudes(i) = std::polar(std::sqrt(p.weights[i]), i < phases.size() ? phases[i] : 0.0);
  s.amplitudes.normalize();
  return s;
}

ProbVector convolve(const ProbVector& a, const ProbVector& b) {
  std::vector<double> w(a.weights.size() + b.weights.size() - 1, 0.0);
  for (size_t i = 0; i < a.weights.size(); ++i)
    for (size_t j = 0; j < b.weights.size(); ++j) w[i + j] += a.weights[i] * b.weights[j];
  ProbVector r;
  r.offset = a.offset + b.offset;
  r.weights = w;
  return r;
}

RationalProbVector convolve(const RationalProbVector& a, const RationalProbVector& b) {
  std::vector<Rational> w(a.weights.size() + b.weights.size() - 1, Rational(0));
  for (size_t i = 0; i < a.weights.size(); ++i)
    for (size_t j = 0; j < b.weights.size(); ++j) w[i + j] += a.weights[i] * b.weights[j];
  RationalProbVector r;
  r.offset = a.offset + b.offset;
  r.weights = w;
  return r;
}

RMat circulant(const RVec& v) {
  const int n = static_cast<int>(v.size());
  if (n < 1) throw DimensionError("circulant of an empty vector");
  RMat c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = v(((j - i) % n + n) % n);
  return c;
}

CyclicResult cyclic_majorize(const RVec& p, const RVec& q, double cond_tol) {
  if (p.size() != q.size() || p.size() == 0) throw DimensionError("cyclic_majorize: length mismatch");
  if (std::abs(p.sum() - 1) > 1e-9 || std::abs(q.sum() - 1) > 1e-9)
    throw DomainError("cyclic_majorize: inputs must sum to 1");
  CyclicResult r;
  RMat cq = circulant(q);
  Eigen::JacobiSVD<RMat> svd(cq, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) < cond_tol * s(0)) {
    r.singular = true;
    return r;
  }
  RMat inv = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  RVec w = (circulant(p) * inv).row(0).transpose();
  if (w.minCoeff() < -1e-9) return r;
  for (int i = 0; i < w.size(); ++i)
    if (w(i) < 1e-12) w(i) = 0;
  r.w = w / w.sum();
  return r;
}

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

int next_prime(int n) {
  int k = std::max(n + 1, 2);
  while (!is_prime(k)) ++k;
  return k;
}

namespace {

// Solves C(q)ᵀ w = p exactly; returns nothing when C(q) is singular.
std::optional<std::vector<Rational>> exact_cyclic_solve(const std::vector<Rational>& p,
                                                        const std::vector<Rational>& q) {
  const int n = static_cast<int>(q.size());
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = q[((i - j) % n + n) % n];
    a[i][n] = p[i];
  }
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (a[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return std::nullopt;
    std::swap(a[c], a[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      Rational f = a[r][c] / a[c][c];
      for (int k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<Rational> w(n);
  for (int i = 0; i < n; ++i) w[i] = a[i][n] / a[i][i];
  return w;
}

int first_embedding(int n, const U1Options& opt) {
  if (opt.embedding_dim == 0) return next_prime(2 * n + 1);
  if (opt.embedding_dim <= 2 * n + 1) throw DomainError("embedding dimension must exceed 2n+1");
  return opt.embedding_dim;
}

std::string support_message(int dp, int dq) {
  return "support diameter of the target (" + std::to_string(dq) + ") exceeds that of the source (" +
         std::to_string(dp) + ")";
}

}  // namespace

CirculantTestReport u1_convertible(const ProbVector& p, const ProbVector& q, const U1Options& opt) {
  p.validate(1e-9);
  q.validate(1e-9);
  if (opt.mode != ArithmeticMode::floating) {
    auto rp = rationalize(p), rq = rationalize(q);
    if (rp && rq) return u1_convertible(*rp, *rq, opt);
    if (opt.mode == ArithmeticMode::exact) throw DomainError("exact mode requested for non-rational input");
  }
  CirculantTestReport rep;
  const int n = std::max(p.diam(), q.diam());
  int big_n = first_embedding(n, opt);
  rep.embedding_dim = big_n;
  if (q.diam() > p.diam()) {
    rep.message = support_message(p.diam(), q.diam());
    return rep;
  }
  for (;;) {
    RVec pe = RVec::Zero(big_n), qe = RVec::Zero(big_n);
    for (int i = 0; i <= p.diam(); ++i) pe(i) = p.weights[i];
    for (int i = 0; i <= q.diam(); ++i) qe(i) = q.weights[i];
    pe /= pe.sum();
    qe /= qe.sum();
    auto cr = cyclic_majorize(pe, qe);
    if (cr.singular) {
      if (rep.singular_retries >= opt.max_retries) {
        rep.singular_exhausted = true;
        rep.message = "circulant matrix singular for every tried embedding";
        return rep;
      }
      ++rep.singular_retries;
      big_n = next_prime(big_n);
      rep.embedding_dim = big_n;
      continue;
    }
    if (!cr.w) {
      rep.message = "shift weights have a negative entry";
      return rep;
    }
    std::vector<double> w(cr.w->data(), cr.w->data() + big_n);
    ProbVector wv = ProbVector::from_weights(p.offset - q.offset, w);
    ProbVector check = convolve(wv, q);
    double err = 0;
    for (int k = std::min(check.offset, p.offset); k <= std::max(check.last(), p.last()); ++k)
      err = std::max(err, std::abs(check.at(k) - p.at(k)));
    if (err > 1e-9) throw std::logic_error("u1_convertible: cyclic weights fail the convolution check");
    rep.convertible = true;
    rep.w = wv;
    rep.message = "convertible";
    return rep;
  }
}

CirculantTestReport u1_convertible(const RationalProbVector& p, const RationalProbVector& q, const U1Options& opt) {
  p.validate();
  q.validate();
  CirculantTestReport rep;
  rep.exact = true;
  const int n = std::max(p.diam(), q.diam());
  int big_n = first_embedding(n, opt);
  rep.embedding_dim = big_n;
  if (q.diam() > p.diam()) {
    rep.message = support_message(p.diam(), q.diam());
    return rep;
  }
  for (;;) {
    std::vector<Rational> pe(big_n, Rational(0)), qe(big_n, Rational(0));
    std::copy(p.weights.begin(), p.weights.end(), pe.begin());
    std::copy(q.weights.begin(), q.weights.end(), qe.begin());
    auto w = exact_cyclic_solve(pe, qe);
    if (!w) {
      if (rep.singular_retries >= opt.max_retries) {
        rep.singular_exhausted = true;
        rep.message = "circulant matrix singular for every tried embedding";
        return rep;
      }
      ++rep.singular_retries;
      big_n = next_prime(big_n);
      rep.embedding_dim = big_n;
      continue;
    }
    if (std::any_of(w->begin(), w->end(), [](const Rational& x) { return x < 0; })) {
      rep.message = "shift weights have a negative entry";
      return rep;
    }
    auto wv = RationalProbVector::from_weights(p.offset - q.offset, *w);
    auto check = convolve(wv, q);
    if (check.offset != p.offset || check.weights != p.weights)
      throw std::logic_error("u1_convertible: exact cyclic weights fail the convolution check");
    rep.convertible = true;
    rep.w_exact = wv;
    rep.w = wv.to_double();
    rep.message = "convertible";
    return rep;
  }
}

CirculantTestReport u1_convertible(const LadderState& psi, const LadderState& phi, const U1Options& opt) {
  return u1_convertible(psi.probabilities(), phi.probabilities(), opt);
}

U1Channel build_u1_kraus(const ProbVector& p, const ProbVector& q, const ProbVector& w) {
  p.validate(1e-9);
  q.validate(1e-9);
  w.validate(1e-9);
  ProbVector conv = convolve(w, q);
  for (int k = std::min(conv.offset, p.offset); k <= std::max(conv.last(), p.last()); ++k)
    if (std::abs(conv.at(k) - p.at(k)) > 1e-9) throw DomainError("build_u1_kraus: p is not w * q");
  U1Channel ch;
  ch.offset = std::min(p.offset, q.offset);
  const int dim = std::max(p.last(), q.last()) - ch.offset + 1;
  std::vector<CMat> ks;
  // K_k carries weight w_{−k}: level n → n + k.
  for (int m = w.offset; m <= w.last(); ++m) {
    if (w.at(m) <= 0) continue;
    const int k = -m;
    CMat kk = CMat::Zero(dim, dim);
    for (int n = p.offset; n <= p.last(); ++n) {
      double pn = p.at(n);
      if (pn <= 0) continue;
      double qn = q.at(n + k);
      if (qn <= 0) continue;
      kk(n + k - ch.offset, n - ch.offset) = std::sqrt(w.at(m) * qn / pn);
    }
    ks.push_back(kk);
    ch.shifts.push_back(k);
  }
  ch.channel = KrausChannel(ks, true, 1e-9);
  return ch;
}

namespace {

using Poly = std::vector<double>;  // increasing powers

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

struct RootUnit {
  Poly factor;  // real monic factor: (x − r) or (x² − 2 Re r x + |r|²)
  int multiplicity = 1;
};

std::vector<RootUnit> root_units(const Poly& coeffs) {
  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(c);
  std::vector<cplx> roots(solver.roots().data(), solver.roots().data() + solver.roots().size());
  double scale = 1;
  for (auto r : roots) scale = std::max(scale, std::abs(r));
  // A root of multiplicity k is perturbed by about ε^{1/k}; cluster transitively.
  const double cluster = 2e-3 * scale;
  std::vector<int> label(roots.size(), -1);
  int next_label = 0;
  for (size_t i = 0; i < roots.size(); ++i) {
    if (label[i] >= 0) continue;
    std::vector<size_t> stack{i};
    label[i] = next_label;
    while (!stack.empty()) {
      size_t a = stack.back();
      stack.pop_back();
      for (size_t j = 0; j < roots.size(); ++j)
        if (label[j] < 0 && std::abs(roots[j] - roots[a]) < cluster) {
          label[j] = next_label;
          stack.push_back(j);
        }
    }
    ++next_label;
  }
  std::vector<std::pair<cplx, int>> groups(next_label, {cplx(0), 0});
  for (size_t i = 0; i < roots.size(); ++i) {
    groups[label[i]].first += roots[i];
    groups[label[i]].second += 1;
  }
  for (auto& g : groups) g.first /= double(g.second);
  std::vector<RootUnit> units;
  std::vector<bool> taken(groups.size(), false);
  for (size_t i = 0; i < groups.size(); ++i) {
    if (taken[i]) continue;
    taken[i] = true;
    cplx r = groups[i].first;
    if (std::abs(r.imag()) < cluster) {
      units.push_back({{-r.real(), 1.0}, groups[i].second});
      continue;
    }
    // Pair with the conjugate cluster.
    size_t best = groups.size();
    double bd = 1e300;
    for (size_t j = 0; j < groups.size(); ++j)
      if (!taken[j] && std::abs(groups[j].first - std::conj(r)) < bd) {
        bd = std::abs(groups[j].first - std::conj(r));
        best = j;
      }
    if (best == groups.size() || bd > cluster || groups[best].second != groups[i].second)
      throw DomainError("accessible_states: complex roots do not pair into conjugates");
    taken[best] = true;
    units.push_back({{std::norm(r), -2 * r.real(), 1.0}, groups[i].second});
  }
  return units;
}

std::optional<std::pair<ProbVector, bool>> normalised_nonneg(const Poly& g, int offset, double tol) {
  double at1 = 0;
  for (double x : g) at1 += x;
  if (std::abs(at1) < 1e-300) return std::nullopt;
  std::vector<double> c(g.size());
  bool clipped = false;
  for (size_t i = 0; i < g.size(); ++i) {
    c[i] = g[i] / at1;
    if (c[i] < -tol) return std::nullopt;
    if (c[i] < 0) {
      c[i] = 0;
      clipped = true;
    }
  }
  double s = 0;
  for (double x : c) s += x;
  for (double& x : c) x /= s;
  return std::make_pair(ProbVector::from_weights(offset, c), clipped);
}

}  // namespace

std::vector<AccessiblePair> accessible_states(const ProbVector& p, double tol, int threads) {
  p.validate(1e-9);
  const int m = p.diam();
  if (m > 20) throw DomainError("accessible_states supports support diameters up to 20");
  if (m == 0) return {{ProbVector::delta(0), ProbVector::delta(p.offset), false}};
  auto units = root_units(p.weights);
  std::vector<int> radix;
  long long total = 1;
  for (const auto& u : units) {
    radix.push_back(u.multiplicity + 1);
    total *= u.multiplicity + 1;
  }
  std::vector<std::optional<AccessiblePair>> found(total);
  parallel_for(static_cast<int>(total), threads, [&](int idx) {
    Poly g{1.0}, h{1.0};
    int rest = idx;
    for (size_t u = 0; u < units.size(); ++u) {
      int take = rest % radix[u];
      rest /= radix[u];
      for (int t = 0; t < units[u].multiplicity; ++t) (t < take ? g : h) = poly_mul(t < take ? g : h, units[u].factor);
    }
    auto q = normalised_nonneg(g, 0, tol);
    auto w = normalised_nonneg(h, p.offset, tol);
    if (q && w) found[idx] = AccessiblePair{q->first, w->first, q->second || w->second};
  });
  std::vector<AccessiblePair> out;
  for (auto& f : found) {
    if (!f) continue;
    bool dup = std::any_of(out.begin(), out.end(), [&](const AccessiblePair& o) {
      if (o.q.weights.size() != f->q.weights.size()) return false;
      for (size_t i = 0; i < o.q.weights.size(); ++i)
        if (std::abs(o.q.weights[i] - f->q.weights[i]) > tol) return false;
      return true;
    });
    if (!dup) out.push_back(*f);
  }
  return out;
}

std::optional<AuxResult> aux_reachable(const ProbVector& p, const ProbVector& q, int d) {
  p.validate(1e-9);
  q.validate(1e-9);
  if (d < 0) throw DomainError("aux_reachable: d must be nonnegative");
  const int lo = std::min(p.offset - d, q.offset), hi = std::max(p.last() + d, q.last());
  const int rows = hi - lo + 1, cols = 2 * d + 1;
  RMat a = RMat::Zero(rows, cols);
  RVec b(rows);
  for (int r = 0; r < rows; ++r) {
    b(r) = q.at(lo + r);
    for (int m = -d; m <= d; ++m) a(r, m + d) = p.at(lo + r - m);
  }
  auto sol = simplex_nnls(a, b);
  RVec w = sol.x.cwiseMax(0.0);
  if (w.sum() <= 0) return std::nullopt;
  w /= w.sum();
  double res = (a * w - b).norm();
  if (res >= 1e-9) return std::nullopt;
  return AuxResult{w, res};
}

}  // namespace qgeom
