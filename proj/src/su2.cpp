#include "qgeom/su2.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <mutex>
#include <shared_mutex>

namespace qgeom {

namespace {

using boost::multiprecision::cpp_int;

cpp_int factorial(int n) {
  static std::shared_mutex mu;
  static std::vector<cpp_int> table{1};
  {
    std::shared_lock lock(mu);
    if (n < static_cast<int>(table.size())) return table[n];
  }
  std::unique_lock lock(mu);
  while (static_cast<int>(table.size()) <= n) table.push_back(table.back() * static_cast<int>(table.size()));
  return table[n];
}

struct CgValue {
  Rational squared;
  int sign = 0;
};

CgValue racah(int tj1, int tm1, int tj2, int tm2, int tj, int tm) {
  const int a = (tj1 + tj2 - tj) / 2, b = (tj1 - tj2 + tj) / 2, c = (-tj1 + tj2 + tj) / 2;
  const int s = (tj1 + tj2 + tj) / 2 + 1;
  const int jpm = (tj + tm) / 2, jmm = (tj - tm) / 2;
  const int j1m = (tj1 - tm1) / 2, j1p = (tj1 + tm1) / 2, j2m = (tj2 - tm2) / 2, j2p = (tj2 + tm2) / 2;
  const int d1 = (tj - tj2 + tm1) / 2, d2 = (tj - tj1 - tm2) / 2;
  Rational pre(cpp_int(tj + 1) * factorial(a) * factorial(b) * factorial(c), factorial(s));
  pre *= Rational(factorial(jpm) * factorial(jmm) * factorial(j1m) * factorial(j1p) * factorial(j2m) *
                  factorial(j2p));
  Rational sum = 0;
  const int kmin = std::max({0, -d1, -d2}), kmax = std::min({a, j1m, j2p});
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = factorial(k) * factorial(a - k) * factorial(j1m - k) * factorial(j2p - k) *
                  factorial(d1 + k) * factorial(d2 + k);
    sum += Rational(k % 2 ? -1 : 1, den);
  }
  return {pre * sum * sum, sum > 0 ? 1 : (sum < 0 ? -1 : 0)};
}

const CgValue& cg_lookup(int tj1, int tm1, int tj2, int tm2, int tj, int tm) {
  using Key = std::array<int, 6>;
  static std::shared_mutex mu;
  static std::map<Key, CgValue> memo;
  Key key{tj1, tm1, tj2, tm2, tj, tm};
  {
    std::shared_lock lock(mu);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  CgValue v = racah(tj1, tm1, tj2, tm2, tj, tm);
  std::unique_lock lock(mu);
  return memo.emplace(key, std::move(v)).first->second;
}

bool cg_allowed(int tj1, int tm1, int tj2, int tm2, int tj, int tm) {
  check_spin(tj1, tm1);
  check_spin(tj2, tm2);
  check_spin(tj, tm);
  if (tm1 + tm2 != tm) return false;
  if (tj < std::abs(tj1 - tj2) || tj > tj1 + tj2) return false;
  return (tj1 + tj2 + tj) % 2 == 0;
}

std::string pair_tag(int tj1, int tj2) { return "(" + format_half(tj1) + "," + format_half(tj2) + ")"; }

Eigen::Vector4d hamilton(const Eigen::Vector4d& p, const Eigen::Vector4d& q) {
  return {p(0) * q(0) - p(1) * q(1) - p(2) * q(2) - p(3) * q(3),
          p(0) * q(1) + p(1) * q(0) + p(2) * q(3) - p(3) * q(2),
          p(0) * q(2) - p(1) * q(3) + p(2) * q(0) + p(3) * q(1),
          p(0) * q(3) + p(1) * q(2) - p(2) * q(1) + p(3) * q(0)};
}

}  // namespace

void check_spin(int twice_j, int twice_m) {
  if (twice_j < 0) throw DomainError("spin j must be nonnegative");
  if (std::abs(twice_m) > twice_j) throw DomainError("|m| exceeds j");
  if ((twice_j - twice_m) % 2 != 0) throw DomainError("j and m must both be integers or both half-integers");
}

double SpinKet::norm() const {
  double s = 0;
  for (const auto& [k, a] : amps) s += std::norm(a);
  return std::sqrt(s);
}

void SpinKet::validate(double tol) const {
  for (const auto& [k, a] : amps) check_spin(k.twice_j, k.twice_m);
  if (std::abs(norm() - 1) > tol) throw DomainError("spin state is not normalised");
}

void SpinKet::add(int twice_j, int twice_m, cplx amp, const std::string& tag) {
  check_spin(twice_j, twice_m);
  amps[{twice_j, twice_m, tag}] += amp;
}

std::map<std::pair<int, std::string>, CVec> SpinKet::blocks() const {
  std::map<std::pair<int, std::string>, CVec> out;
  for (const auto& [k, a] : amps) {
    auto it = out.find({k.twice_j, k.tag});
    if (it == out.end()) it = out.emplace(std::make_pair(k.twice_j, k.tag), CVec::Zero(k.twice_j + 1)).first;
    it->second((k.twice_j - k.twice_m) / 2) += a;
  }
  return out;
}

SpinKet SpinKet::basis(int twice_j, int twice_m, const std::string& tag) {
  SpinKet s;
  s.add(twice_j, twice_m, 1.0, tag);
  return s;
}

Rational clebsch_gordan_squared(int tj1, int tm1, int tj2, int tm2, int tj, int tm) {
  if (!cg_allowed(tj1, tm1, tj2, tm2, tj, tm)) return 0;
  return cg_lookup(tj1, tm1, tj2, tm2, tj, tm).squared;
}

double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tj, int tm) {
  if (!cg_allowed(tj1, tm1, tj2, tm2, tj, tm)) return 0;
  const auto& v = cg_lookup(tj1, tm1, tj2, tm2, tj, tm);
  return v.sign * std::sqrt(static_cast<double>(v.squared));
}

SpinKet spin_combine(const SpinKet& a, const SpinKet& b) {
  SpinKet out;
  for (const auto& [ka, aa] : a.amps)
    for (const auto& [kb, ab] : b.amps) {
      if (!ka.tag.empty() || !kb.tag.empty()) throw DomainError("spin_combine expects untagged inputs");
      const int tm = ka.twice_m + kb.twice_m;
      for (int tj = std::abs(ka.twice_j - kb.twice_j); tj <= ka.twice_j + kb.twice_j; tj += 2) {
        if (std::abs(tm) > tj) continue;
        double c = clebsch_gordan(ka.twice_j, ka.twice_m, kb.twice_j, kb.twice_m, tj, tm);
        if (c != 0) out.add(tj, tm, c * aa * ab, pair_tag(ka.twice_j, kb.twice_j));
      }
    }
  std::erase_if(out.amps, [](const auto& e) { return std::abs(e.second) < 1e-15; });
  return out;
}

GroupElement group_from_quaternion(const Eigen::Vector4d& q) {
  Eigen::Vector4d u = q.normalized();
  const double w = std::clamp(u(0), -1.0, 1.0);
  const double theta = 2 * std::acos(w);
  Eigen::Vector3d axis = u.tail<3>();
  const double s = axis.norm();
  if (s < 1e-300) {
    if (w > 0) return {};
    return {Eigen::Vector3d(0, 0, -2 * std::numbers::pi)};
  }
  return {-theta * axis / s};
}

Eigen::Vector4d quaternion_of(const GroupElement& g) {
  const double theta = g.v.norm();
  if (theta == 0) return {1, 0, 0, 0};
  Eigen::Vector3d n = -g.v / theta;
  Eigen::Vector4d q;
  q << std::cos(theta / 2), std::sin(theta / 2) * n;
  return q;
}

GroupElement group_multiply(const GroupElement& a, const GroupElement& b) {
  return group_from_quaternion(hamilton(quaternion_of(a), quaternion_of(b)));
}

GroupElement group_inverse(const GroupElement& g) { return {-g.v}; }

GroupElement random_group_element(Rng& rng) {
  std::normal_distribution<double> n(0, 1);
  Eigen::Vector4d q;
  do {
    q << n(rng), n(rng), n(rng), n(rng);
  } while (q.norm() < 1e-8);
  return group_from_quaternion(q);
}

CMat spin_rotation(int twice_j, const GroupElement& g) {
  if (twice_j == 0) return CMat::Ones(1, 1);
  auto s = spin_operators(twice_j);
  CMat h = g.v(0) * s.jx.matrix() + g.v(1) * s.jy.matrix() + g.v(2) * s.jz.matrix();
  auto es = hermitian_eigensystem(h);
  CVec phases(es.values.size());
  for (int k = 0; k < es.values.size(); ++k) phases(k) = std::polar(1.0, es.values(k));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

cplx characteristic_function(const SpinKet& s, const GroupElement& g) {
  std::map<int, CMat> rot;
  cplx chi = 0;
  for (const auto& [key, v] : s.blocks()) {
    auto it = rot.find(key.first);
    if (it == rot.end()) it = rot.emplace(key.first, spin_rotation(key.first, g)).first;
    chi += v.dot(it->second * v);
  }
  return chi;
}

SpinKet merge_proportional(const SpinKet& s, double tol) {
  std::map<int, std::vector<CVec>> by_j;
  for (const auto& [key, v] : s.blocks()) by_j[key.first].push_back(v);
  SpinKet out;
  for (const auto& [tj, vs] : by_j) {
    const CVec* big = &vs.front();
    double weight = 0;
    for (const auto& v : vs) {
      weight += v.squaredNorm();
      if (v.norm() > big->norm()) big = &v;
    }
    if (weight <= tol * tol) continue;
    CVec u = big->normalized();
    Eigen::Index top;
    u.cwiseAbs().maxCoeff(&top);
    u *= std::abs(u(top)) / u(top);
    for (const auto& v : vs)
      if ((v - u * u.dot(v)).norm() > std::max(tol, 1e-10))
        throw DomainError("copies of spin " + format_half(tj) + " are not proportional");
    for (int k = 0; k <= tj; ++k)
      if (std::abs(u(k)) > 0) out.add(tj, tj - 2 * k, std::sqrt(weight) * u(k));
  }
  return out;
}

int jz_eigenvalue(const SpinKet& s, double tol) {
  std::optional<int> m;
  for (const auto& [k, a] : s.amps) {
    if (std::abs(a) <= tol) continue;
    if (m && *m != k.twice_m) throw DomainError("state is not an eigenvector of J_Z");
    m = k.twice_m;
  }
  if (!m) throw DomainError("empty spin state");
  return *m;
}

std::map<int, Rational> jz_combine_probabilities(const std::map<int, Rational>& q, int twice_m,
                                                 const std::map<int, Rational>& w, int twice_m2) {
  std::map<int, Rational> p;
  const int tm = twice_m + twice_m2;
  for (const auto& [tj1, q1] : q)
    for (const auto& [tj2, w2] : w)
      for (int tj = std::abs(tj1 - tj2); tj <= tj1 + tj2; tj += 2) {
        if (std::abs(tm) > tj) continue;
        Rational g = clebsch_gordan_squared(tj1, twice_m, tj2, twice_m2, tj, tm);
        if (g != 0) p[tj] += g * q1 * w2;
      }
  return p;
}

SpinKet jz_convert(const SpinKet& phi, const SpinKet& omega, double tol) {
  auto coherent = [&](const SpinKet& s) {
    return std::all_of(s.amps.begin(), s.amps.end(),
                       [&](const auto& e) { return std::abs(e.second) <= tol || e.first.twice_m == e.first.twice_j; });
  };
  if (!(coherent(phi) && coherent(omega))) {
    jz_eigenvalue(phi, tol);
    jz_eigenvalue(omega, tol);
  }
  return merge_proportional(spin_combine(merge_proportional(phi, tol), merge_proportional(omega, tol)), tol);
}

MarvianVerdict marvian_necessary_test(const SpinKet& psi, const SpinKet& phi, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("marvian_necessary_test needs at least one sample");
  Rng rng(seed);
  std::vector<GroupElement> g(samples);
  for (auto& e : g) e = random_group_element(rng);
  CMat m = CMat::Zero(samples, samples);
  std::vector<std::vector<int>> bad(samples);
  for (int i = 0; i < samples; ++i)
    for (int k = 0; k < samples; ++k) {
      if (i == k) {
        m(i, k) = characteristic_function(psi, {}) / characteristic_function(phi, {});
        continue;
      }
      GroupElement h = group_multiply(g[i], group_inverse(g[k]));
      cplx cphi = characteristic_function(phi, h);
      if (std::abs(cphi) < 1e-8) {
        bad[i].push_back(k);
        continue;
      }
      m(i, k) = characteristic_function(psi, h) / cphi;
    }
  // Greedily drop the samples involved in the most zeros of χ_φ.
  std::vector<bool> keep(samples, true);
  for (;;) {
    std::vector<int> count(samples, 0);
    for (int i = 0; i < samples; ++i)
      if (keep[i])
        for (int k : bad[i])
          if (keep[k]) ++count[i], ++count[k];
    int worst = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
    if (count[worst] == 0) break;
    keep[worst] = false;
  }
  std::vector<int> idx;
  for (int i = 0; i < samples; ++i)
    if (keep[i]) idx.push_back(i);
  const int n = static_cast<int>(idx.size());
  CMat sub(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) sub(a, b) = m(idx[a], idx[b]);
  auto es = hermitian_eigensystem(CMat((sub + sub.adjoint()) / 2.0));
  MarvianVerdict v;
  v.samples = samples;
  v.kept = n;
  v.lambda_min = es.values(0);
  v.lambda_max = es.values(n - 1);
  v.impossible = v.lambda_min < -1e-6 * std::max(v.lambda_max, 0.0);
  if (v.impossible) {
    v.certificate = CVec::Zero(samples);
    for (int a = 0; a < n; ++a) v.certificate(idx[a]) = es.vectors(a, 0);
  }
  return v;
}

CMat zeta_map(const CMat& rho, int twice_j) {
  if (twice_j <= 0) throw DomainError("zeta map needs j > 0");
  if (rho.rows() != twice_j + 1 || rho.cols() != twice_j + 1) throw DimensionError("zeta map: dimension mismatch");
  const double j = twice_j / 2.0;
  auto s = spin_operators(twice_j);
  CMat out = s.jx.matrix() * rho * s.jx.matrix() + s.jy.matrix() * rho * s.jy.matrix() +
             s.jz.matrix() * rho * s.jz.matrix();
  return out / (j * (j + 1));
}

CMat zeta_combination(const CMat& rho, double x0, double x1, int twice_j) {
  if (twice_j != 2) throw DomainError("the covariant channel simplex is implemented for j = 1 only");
  CMat z1 = zeta_map(rho, twice_j);
  CMat z2 = zeta_map(z1, twice_j);
  return x0 * rho + x1 * z1 + (1 - x0 - x1) * z2;
}

ZetaReport zeta_channel_simplex(double x0, double x1, int twice_j) {
  if (twice_j != 2) throw DomainError("the covariant channel simplex is implemented for j = 1 only");
  const int d = twice_j + 1;
  auto map = [&](const CMat& r) { return zeta_combination(r, x0, x1, twice_j); };
  ZetaReport rep;
  rep.choi_min_eig = lambda_min(choi_of_map(map, d));
  rep.is_cptp = rep.choi_min_eig >= -1e-9;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      CMat e = CMat::Zero(d, d);
      e(i, j) = 1;
      rep.trace_error = std::max(rep.trace_error, std::abs(map(e).trace() - cplx(i == j ? 1 : 0)));
    }
  return rep;
}

}  // namespace qgeom
