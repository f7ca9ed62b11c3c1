#pragma once

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qgeom/core.hpp"

namespace qgeom {

using Rational = boost::multiprecision::cpp_rational;

// Probability vector on ℤ; weights[i] is the probability of level offset + i.
struct ProbVector {
  int offset = 0;
  std::vector<double> weights;

  // Trims zero ends (entries ≤ tol) and validates.
  static ProbVector from_weights(int offset, std::vector<double> w, double tol = 0.0);
  static ProbVector delta(int n) { return {n, {1.0}}; }
  void validate(double tol = 1e-12) const;
  int diam() const { return static_cast<int>(weights.size()) - 1; }
  int last() const { return offset + diam(); }
  double at(int n) const;
};

struct RationalProbVector {
  int offset = 0;
  std::vector<Rational> weights;

  static RationalProbVector from_weights(int offset, std::vector<Rational> w);
  void validate() const;  // exact: nonnegative, trimmed, sums to 1
  int diam() const { return static_cast<int>(weights.size()) - 1; }
  ProbVector to_double() const;
  std::vector<std::string> strings() const;
};

// Continued-fraction rationalisation; fails unless every weight is reproduced within tol.
std::optional<RationalProbVector> rationalize(const ProbVector& p, long long max_den = 1000000,
                                              double tol = 1e-14);
Rational parse_rational(const std::string& s);

struct LadderState {
  int offset = 0;
  CVec amplitudes;

  void validate(double tol = 1e-12) const;
  ProbVector probabilities() const;
  // Amplitudes on the window [lo, lo + dim).
  CVec window(int lo, int dim) const;
  static LadderState from_probs(const ProbVector& p, const std::vector<double>& phases = {});
};

ProbVector convolve(const ProbVector& a, const ProbVector& b);
RationalProbVector convolve(const RationalProbVector& a, const RationalProbVector& b);

// First row v, each following row rotated one step to the right: C_ij = v_{(j−i) mod N}.
RMat circulant(const RVec& v);

struct CyclicResult {
  bool singular = false;
  std::optional<RVec> w;  // present when C(q°) is invertible and w ≥ −1e-9
};

CyclicResult cyclic_majorize(const RVec& p, const RVec& q, double cond_tol = 1e-10);

enum class ArithmeticMode { floating, exact, automatic };

struct U1Options {
  ArithmeticMode mode = ArithmeticMode::automatic;
  int embedding_dim = 0;  // 0: smallest prime > 2n+1
  int max_retries = 10;
};

struct CirculantTestReport {
  bool convertible = false;
  std::optional<ProbVector> w;
  std::optional<RationalProbVector> w_exact;
  int embedding_dim = 0;
  int singular_retries = 0;
  bool exact = false;
  bool singular_exhausted = false;
  std::string message;
};

CirculantTestReport u1_convertible(const ProbVector& p, const ProbVector& q, const U1Options& opt = {});
CirculantTestReport u1_convertible(const RationalProbVector& p, const RationalProbVector& q, const U1Options& opt = {});
CirculantTestReport u1_convertible(const LadderState& psi, const LadderState& phi, const U1Options& opt = {});

struct U1Channel {
  int offset = 0;           // level of the first basis vector of the window
  std::vector<int> shifts;  // k of each Kraus operator K_k
  KrausChannel channel;     // trace-decreasing off the support of p
};

U1Channel build_u1_kraus(const ProbVector& p, const ProbVector& q, const ProbVector& w);

bool is_prime(int n);
int next_prime(int n);  // smallest prime > n

struct AccessiblePair {
  ProbVector q;  // reachable target, p = w * q
  ProbVector w;
  bool clipped = false;  // some coefficient in (−tol, 0) was set to zero
};

std::vector<AccessiblePair> accessible_states(const ProbVector& p, double tol = 1e-9, int threads = 1);

struct AuxResult {
  RVec w;  // weights of Δ^m p for m = −d..d
  double residual = 0;
};

std::optional<AuxResult> aux_reachable(const ProbVector& p, const ProbVector& q, int d);

}  // namespace qgeom
