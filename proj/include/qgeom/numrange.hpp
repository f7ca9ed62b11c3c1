#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgeom/core.hpp"
#include "qgeom/hull.hpp"

namespace qgeom {

using OpList = std::vector<HermitianOperator>;

struct SupportSample {
  RVec direction;
  double value = 0;
  RVec point;
  CVec witness;
  bool degenerate = false;
  double rel_gap = 0;  // (λ_max − λ_next) / spread
};

inline constexpr double kDegenerateGap = 1e-10;

HermitianOperator combine(const OpList& ops, const RVec& coeffs);
RVec expectations(const OpList& ops, const CVec& psi);
SupportSample support(const OpList& ops, const RVec& n);

struct ConvexBodyApprox {
  int k = 0;
  std::vector<RVec> inner_vertices;
  std::vector<HalfSpace> outer_halfspaces;
  bool unbounded = false;
  int degenerate_samples = 0;

  Hull inner_hull() const;
  HalfSpaceVertices outer_vertices() const;
  bool inner_within_outer(double tol = 1e-9) const;
};

struct JnrOptions {
  bool expand_degenerate = true;
  int threads = 1;
};

ConvexBodyApprox jnr_approximate(const OpList& ops, const std::vector<RVec>& directions,
                                 const JnrOptions& opt = {});

// Deterministic direction sets: ±1 (k=1), circle (k=2), Fibonacci sphere (k=3),
// seeded Gaussian points plus ±axes (k>=4).
std::vector<RVec> fibonacci_sphere(int n);
std::vector<RVec> circle_directions(int n);
std::vector<RVec> sphere_directions(int k, int n, unsigned long long seed = 0);
bool positively_spanning(const std::vector<RVec>& directions);

bool spectrahedron_contains(const HermitianOperator& center, const OpList& gens, const RVec& y,
                            double tol = 1e-9);

struct JnrFace {
  RVec normal;
  int face_dim = 0;      // 1 segment, 2 ellipse
  std::string shape;     // "segment" or "ellipse"
  double gap = 0;        // relative top-two gap at the detected direction
  double pca_ratio = 0;  // second/first principal spread of the face boundary
  double discriminant = 0;
};

struct JNRClassification {
  int e = 0;
  int s = 0;
  std::vector<JnrFace> faces;
  bool degenerate_input = false;
  // Smallest relative gap among local minima that were not accepted as faces;
  // a value close to the 1e-8 acceptance threshold signals a near-degenerate triple.
  double nearest_rejected_gap = 1.0;
  double min_shape_margin = 1.0;
};

struct CommonEigenvectorError : DomainError {
  CVec vector;
  CommonEigenvectorError(const std::string& m, CVec v) : DomainError(m), vector(std::move(v)) {}
};

JNRClassification classify_qutrit_jnr(const HermitianOperator& x1, const HermitianOperator& x2,
                                      const HermitianOperator& x3, unsigned long long seed = 0);

struct Distinguishability {
  bool distinguishable = false;
  CVec witness;          // |ψ⟩ with ⟨ψ|U†V|ψ⟩ = 0 when distinguishable
  RVec separating;       // u with u·z > 0 for every eigenvalue z of U†V otherwise
  double overlap = 1.0;  // |⟨ψ|U†V|ψ⟩| for the witness
};

Distinguishability one_shot_distinguishable(const CMat& u, const CMat& v, double tol = 1e-9);

// Nelder–Mead on R^n; used by the classifier and the uncertainty module.
struct NmResult {
  RVec x;
  double f = 0;
  int evals = 0;
};
NmResult nelder_mead(const std::function<double(const RVec&)>& f, const RVec& x0, double step,
                     double xtol = 1e-12, int max_evals = 4000);

}  // namespace qgeom
