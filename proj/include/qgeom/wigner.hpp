#pragma once

#include <optional>
#include <vector>

#include "qgeom/core.hpp"

namespace qgeom {

// Phase-space labels: x and q are mixed-radix integers in [0, d) over dims, first prime most significant.
struct PhaseSpacePoint {
  std::vector<int> x, q;
};

// Throws DimensionError unless dims are distinct odd primes.
void check_wh_dims(const std::vector<int>& dims);
std::vector<int> factor_odd_squarefree(int d);

int wh_dim(const std::vector<int>& dims);
int wh_label(const std::vector<int>& digits, const std::vector<int>& dims);
std::vector<int> wh_digits(int label, const std::vector<int>& dims);
PhaseSpacePoint wh_point(int x, int q, const std::vector<int>& dims);
int wh_add(int a, int b, const std::vector<int>& dims);
int wh_neg(int a, const std::vector<int>& dims);

CMat wh_displacement(int x, int q, const std::vector<int>& dims);
CMat wh_displacement(const PhaseSpacePoint& pt, const std::vector<int>& dims);
HermitianOperator phase_point(int x, int q, const std::vector<int>& dims);

struct WignerTable {
  std::vector<int> dims;
  RMat values;  // values(x, q)

  int dim() const { return static_cast<int>(values.rows()); }
  double total() const { return values.sum(); }
  RVec flat() const;  // index x·d + q
  static WignerTable from_flat(const std::vector<int>& dims, const RVec& v);
};

WignerTable wigner_of(const DensityMatrix& rho, const std::vector<int>& dims);
WignerTable wigner_of_operator(const CMat& m, const std::vector<int>& dims);
// Σ W(x,q) A_{x,q} without validation.
CMat operator_of(const WignerTable& w);
// Throws DomainError when the reconstruction is not a density matrix.
DensityMatrix state_of(const WignerTable& w, double tol = 1e-9);

// Marginals: Σ_q W(x,q) and Σ_x W(x,q).
RVec wigner_x_marginal(const WignerTable& w);
RVec wigner_q_marginal(const WignerTable& w);

// Row (x·d + q) is the output point, column (x'·d + q') the input point.
RMat channel_transition(const KrausChannel& ch, const std::vector<int>& dims);

// (k ⊛ w)(a) = Σ_b k(b) w(a − b) over the group (ℤ_{p_1} × … × ℤ_{p_n})².
WignerTable wigner_convolve(const WignerTable& k, const WignerTable& w);

// Nonnegative normalised kernel k with W_ρ = k ⊛ W_σ, if one exists.
std::optional<WignerTable> wh_convertible(const DensityMatrix& rho, const DensityMatrix& sigma,
                                          const std::vector<int>& dims);

}  // namespace qgeom
