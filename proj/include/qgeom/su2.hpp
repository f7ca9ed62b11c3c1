#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "qgeom/core.hpp"
#include "qgeom/interconvert.hpp"

namespace qgeom {

// Quantum numbers are stored doubled: j = twice_j / 2, m = twice_m / 2.
struct SpinKey {
  int twice_j = 0;
  int twice_m = 0;
  std::string tag;  // degeneracy label, "" for plain states, "(j1,j2)" after combination

  auto operator<=>(const SpinKey&) const = default;
};

struct SpinKet {
  std::map<SpinKey, cplx> amps;

  // Throws DomainError for invalid quantum numbers or a norm off 1 by more than tol.
  void validate(double tol = 1e-12) const;
  double norm() const;
  void add(int twice_j, int twice_m, cplx amp, const std::string& tag = "");
  // All amplitudes of the (j, tag) block, ordered m = j, …, −j.
  std::map<std::pair<int, std::string>, CVec> blocks() const;
  static SpinKet basis(int twice_j, int twice_m, const std::string& tag = "");
};

void check_spin(int twice_j, int twice_m);

// Condon-Shortley convention, exact Racah sum; zero unless the triangle and m rules hold.
double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tj, int tm);
Rational clebsch_gordan_squared(int tj1, int tm1, int tj2, int tm2, int tj, int tm);

SpinKet spin_combine(const SpinKet& a, const SpinKet& b);

// U = exp(i v·J).
struct GroupElement {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

// Unit quaternion (w, x, y, z) ↦ exp(−iθ n·J) with w = cos(θ/2), (x, y, z) = sin(θ/2) n.
GroupElement group_from_quaternion(const Eigen::Vector4d& q);
Eigen::Vector4d quaternion_of(const GroupElement& g);
GroupElement group_multiply(const GroupElement& a, const GroupElement& b);
GroupElement group_inverse(const GroupElement& g);
GroupElement random_group_element(Rng& rng);  // Haar measure

CMat spin_rotation(int twice_j, const GroupElement& g);
cplx characteristic_function(const SpinKet& s, const GroupElement& g);

// Probabilities over twice_j for J_Z eigenstates at fixed M and M'.
std::map<int, Rational> jz_combine_probabilities(const std::map<int, Rational>& q, int twice_m,
                                                 const std::map<int, Rational>& w, int twice_m2);
// Collapses the tagged copies of each j into one plain block; throws DomainError unless they are proportional.
SpinKet merge_proportional(const SpinKet& s, double tol = 1e-12);
// Accepts two J_Z eigenstates, or two coherent states (m = j throughout).
SpinKet jz_convert(const SpinKet& phi, const SpinKet& omega, double tol = 1e-12);
// Twice the J_Z eigenvalue; throws DomainError when s is not a J_Z eigenstate.
int jz_eigenvalue(const SpinKet& s, double tol = 1e-12);

struct MarvianVerdict {
  bool impossible = false;
  CVec certificate;  // c with c† M c < 0, zero on dropped samples
  double lambda_min = 0;
  double lambda_max = 0;
  int samples = 0;
  int kept = 0;  // samples left after dropping zeros of χ_φ
};

MarvianVerdict marvian_necessary_test(const SpinKet& psi, const SpinKet& phi, int samples, std::uint64_t seed);

struct ZetaReport {
  bool is_cptp = false;
  double choi_min_eig = 0;
  double trace_error = 0;  // max |Tr G(E_ij) − δ_ij| over matrix units
};

// ζ(ρ) = Σ_σ J_σ ρ J_σ / (j(j+1)).
CMat zeta_map(const CMat& rho, int twice_j);
CMat zeta_combination(const CMat& rho, double x0, double x1, int twice_j = 2);
ZetaReport zeta_channel_simplex(double x0, double x1, int twice_j = 2);

}  // namespace qgeom
