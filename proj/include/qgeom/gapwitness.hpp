#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "qgeom/core.hpp"

namespace qgeom {

using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct PauliTerm {
  std::vector<int> sites;
  std::string labels;  // one of I, X, Y, Z per site
  double coeff = 1.0;
};

struct SpinChainSpec {
  int sites = 0;
  std::vector<PauliTerm> terms;
  void validate() const;
};

inline constexpr int kMaxChainSites = 14;
inline constexpr int kMaxDenseSites = 12;

// Site 0 is the most significant tensor factor.
SparseOp build_chain_sparse(const SpinChainSpec& spec);
HermitianOperator build_chain(const SpinChainSpec& spec);

enum class Boundary { open, periodic };

struct ChainOptions {
  Boundary boundary = Boundary::periodic;
  bool taper = false;  // linear taper over the two outermost bonds (open chains only)
};

SpinChainSpec xy_spec(int n, double gamma, const ChainOptions& opt = {});
SpinChainSpec witness_v_spec(int n, const ChainOptions& opt = {});
HermitianOperator xy_hamiltonian(int n, double gamma, const ChainOptions& opt = {});
HermitianOperator gap_witness_v(int n, const ChainOptions& opt = {});

struct Eigenpairs {
  RVec values;
  CMat vectors;
};

// Lowest `count` eigenpairs by Lanczos with full reorthogonalisation and deflation.
Eigenpairs lanczos_lowest(const SparseOp& a, int count, unsigned long long seed = 0, double tol = 1e-11);

struct GroundSample {
  double lambda = 0;
  double e0 = 0;
  double e1 = 0;  // next eigenvalue (equal to e0 on degeneracy)
  double h = 0;   // ⟨H⟩_λ
  double v = 0;   // ⟨V⟩_λ
  bool degenerate = false;
  double overlap = 1;  // |⟨ψ_ref|ψ_λ⟩|² against the first grid point's ground state
};

struct GroundCurve {
  std::vector<GroundSample> samples;
  CVec reference;
  double v_residual = 0;  // ‖Vψ_ref − ⟨V⟩ψ_ref‖
  double scale = 1;       // norm bound of H and V
  std::function<GroundSample(double)> solve;
};

struct CurveOptions {
  int threads = 1;
  unsigned long long seed = 0;
  int dense_limit = 256;
};

GroundCurve ground_curve(const SparseOp& h, const SparseOp& v, const std::vector<double>& grid,
                         const CurveOptions& opt = {});
GroundCurve ground_curve(const HermitianOperator& h, const HermitianOperator& v,
                         const std::vector<double>& grid, const CurveOptions& opt = {});

struct GapReport {
  bool plateau = false;  // precondition: the curve starts on a V-eigenstate plateau
  std::string message;
  double epsilon = 0;
  double lambda_star = 0;
  bool degenerate_ground = false;
  std::optional<double> true_gap;
  bool consistent = true;
};

// When `known_gap` is given it is stored and checked against the bound.
GapReport gap_upper_bound(const GroundCurve& curve, int bisection_steps = 40,
                          std::optional<double> known_gap = std::nullopt);

double true_gap(const HermitianOperator& h);
double true_gap(const SparseOp& h, unsigned long long seed = 0);

bool cusp_decomposition_check(const HermitianOperator& x, const HermitianOperator& y, const CVec& psi,
                              int directions = 64);

}  // namespace qgeom
