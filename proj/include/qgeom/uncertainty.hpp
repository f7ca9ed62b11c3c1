#pragma once

#include <vector>

#include "qgeom/core.hpp"
#include "qgeom/numrange.hpp"

namespace qgeom {

double variance(const HermitianOperator& x, const DensityMatrix& rho);
double variance(const HermitianOperator& x, const CVec& psi);

struct VarianceBound {
  double value = 0;
  double x = 0, y = 0;
  CVec certificate;  // minimizing eigenvector
  DensityMatrix certificate_state() const { return DensityMatrix::pure(certificate); }
};

struct MinSumOptions {
  int grid = 41;
  int starts = 5;
  int max_iter = 20000;
  int threads = 1;
};

VarianceBound min_sum_variances(const HermitianOperator& x, const HermitianOperator& y,
                                const MinSumOptions& opt = {});

// A_(a,b) = X² − (a+b)X + ab·1
HermitianOperator sector_bound_operator(const HermitianOperator& x, double a, double b);

struct SectorPartition {
  std::vector<double> breakpoints;
  double delta() const;  // (max gap / 2)²
  void validate(const HermitianOperator& x) const;
};

// Eigenvalues as breakpoints, then midpoint refinement until δ < tol.
SectorPartition default_partition(const HermitianOperator& x, double tol = 1e-4);
SectorPartition refine(const SectorPartition& p);

struct SectorBound {
  double c = 0;
  double delta = 0;
  int sector_x = 0, sector_y = 0;
};

SectorBound sector_sum_bound(const HermitianOperator& x, const HermitianOperator& y,
                             const SectorPartition& px, const SectorPartition& py, int threads = 1);

struct UncertaintyCover {
  std::vector<ConvexBodyApprox> bodies;
  std::vector<std::pair<int, int>> sectors;
  std::vector<Hull> padded;
  double delta_x = 0, delta_y = 0;
  // Is (Δ²X, Δ²Y) inside the union of the outer bodies padded by [0,δx]×[0,δy]?
  bool contains(const RVec& point, double tol = 1e-9) const;
};

UncertaintyCover uncertainty_range_cover(const HermitianOperator& x, const HermitianOperator& y,
                                         const SectorPartition& px, const SectorPartition& py,
                                         const std::vector<RVec>& directions, int threads = 1);

bool paraboloid_certificate(const HermitianOperator& x, const HermitianOperator& y,
                            const VarianceBound& bound, const std::vector<RVec>& directions);

}  // namespace qgeom
