#pragma once

#include <utility>
#include <vector>

#include "qgeom/core.hpp"
#include "qgeom/numrange.hpp"

namespace qgeom {

struct ProductAnsatz {
  std::vector<CVec> factors;
  CVec state() const;
};

struct SepBounds {
  double lower = 0;
  double upper = 0;  // +inf when no rigorous upper bound is available
  ProductAnsatz witness;
  int restarts = 0;
};

struct SeesawOptions {
  int restarts = 32;
  unsigned long long seed = 0;
  double tol = 1e-10;
  int max_sweeps = 20000;
  int threads = 1;
};

double product_expectation(const HermitianOperator& h, const ProductAnsatz& a);

// Operator on subsystem k obtained by contracting H with every other factor.
HermitianOperator reduced_operator(const HermitianOperator& h, const DimensionSpec& dims,
                                   const ProductAnsatz& a, int k);

SepBounds seesaw_product_max(const HermitianOperator& h, const DimensionSpec& dims,
                             const SeesawOptions& opt = {});

struct QubitQuditOptions {
  int directions = 400;
  unsigned long long seed = 0;
  // Drop H_0 from the range when it is a multiple of the identity.
  bool simplify_identity = true;
  int threads = 1;
};

// H_i = Tr_A[H(σ_i ⊗ 1)], σ_0 = 1.
OpList qubit_qudit_components(const HermitianOperator& h, const DimensionSpec& dims);
SepBounds qubit_qudit_sep_max(const HermitianOperator& h, const DimensionSpec& dims,
                              const QubitQuditOptions& opt = {});

struct SepRange {
  ConvexBodyApprox body;
  bool rigorous_outer = false;  // only the qubit-qudit path certifies its half-spaces
};

SepRange sep_numerical_range(const OpList& ops, const DimensionSpec& dims, const std::vector<RVec>& directions,
                             const SeesawOptions& seesaw = {}, const QubitQuditOptions& qq = {});

struct PptOptions {
  double tol = 1e-9;
  int max_iter = 100000;
  int dykstra_iter = 2000;
  double dykstra_tol = 1e-12;
};

struct PptResult {
  double value = 0;
  DensityMatrix state;
  bool converged = false;
  int iterations = 0;
};

// Euclidean projection onto {ρ ⪰ 0, Tr ρ = 1}.
CMat project_density(const CMat& x);
bool is_ppt(const CMat& rho, const DimensionSpec& dims, double tol = 1e-9);

PptResult ppt_max(const HermitianOperator& h, const DimensionSpec& dims, const PptOptions& opt = {});

ConvexBodyApprox ppt_numerical_range(const OpList& ops, const DimensionSpec& dims,
                                     const std::vector<RVec>& directions, const PptOptions& opt = {},
                                     int threads = 1);

// Orthonormal traceless Hermitian basis (Tr G_i G_j = δ_ij) of dimension d.
OpList traceless_basis(int d);
// G̃_i = −(mn)·(G_i ⊕ G_i^{T_A}).
OpList ppt_dual_generators(const DimensionSpec& dims);
// x lies in the polar of W(G̃) iff λ_max(Σ x_i G̃_i) ≤ 1.
bool in_ppt_polar(const OpList& gtilde, const RVec& x, double tol = 1e-9);

struct PptDualityReport {
  int samples = 0;
  int agreements = 0;
  int ppt_count = 0;
  bool mixed_inside = false;
  bool bell_excluded = false;
};

PptDualityReport ppt_duality_check(const DimensionSpec& dims, int samples, unsigned long long seed = 0);

struct Schmidt2Result {
  double value = 0;
  CVec psi, phi;  // orthogonal product vectors |α1β1⟩, |α2β2⟩
  double angle = 0;  // optimal state cos θ|ψ⟩ + e^{iφ} sin θ|φ⟩
  double chi = 0;
  double swap_overlap = 0;  // ⟨SWAP⟩ on |ψ⟩⊗|φ⟩, zero for orthogonal pairs
};

// λ_+ of the 2×2 compression of H onto span{ψ, φ}.
double lambda_plus(const HermitianOperator& h, const CVec& psi, const CVec& phi);
// χ evaluated on |ψ⟩⊗|φ⟩ with H±, H⊗H·SWAP applied on the doubled space.
double chi_functional(const HermitianOperator& h, const CVec& psi, const CVec& phi);

Schmidt2Result schmidt2_max(const HermitianOperator& h, const DimensionSpec& dims, const SeesawOptions& opt = {});

struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  void validate() const;
};

HermitianOperator clique_matrix(const Graph& g);

}  // namespace qgeom
