#pragma once

#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qgeom {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SymmetryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

inline constexpr double kHermTol = 1e-12;
inline constexpr double kPsdTol = 1e-9;

class HermitianOperator {
 public:
  HermitianOperator() = default;
  // Validates A = A† within tol·max|a_ij|, then stores (A + A†)/2.
  explicit HermitianOperator(const CMat& a, double tol = kHermTol);
  // For internal constructions that are Hermitian by design.
  static HermitianOperator symmetrized(const CMat& a);
  static HermitianOperator identity(int dim);
  static HermitianOperator zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }
  double norm() const;  // spectral norm bound via max |eigenvalue|

  HermitianOperator operator+(const HermitianOperator& o) const;
  HermitianOperator operator-(const HermitianOperator& o) const;
  HermitianOperator operator*(double s) const;
  HermitianOperator& operator+=(const HermitianOperator& o);

 private:
  CMat m_;
};

inline HermitianOperator operator*(double s, const HermitianOperator& h) { return h * s; }

class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(const HermitianOperator& op, double trace_tol = kHermTol);
  static DensityMatrix pure(const CVec& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return op_.dim(); }
  const HermitianOperator& op() const { return op_; }
  const CMat& matrix() const { return op_.matrix(); }

 private:
  HermitianOperator op_;
};

struct DimensionSpec {
  std::vector<int> local_dims;
  DimensionSpec() = default;
  DimensionSpec(std::initializer_list<int> d) : local_dims(d) {}
  explicit DimensionSpec(std::vector<int> d) : local_dims(std::move(d)) {}
  int total() const;
  int size() const { return static_cast<int>(local_dims.size()); }
  void check(int dim) const;
};

class KrausChannel {
 public:
  KrausChannel() = default;
  explicit KrausChannel(std::vector<CMat> kraus, bool subnormalized = false, double tol = kPsdTol);
  static KrausChannel identity(int dim);

  const std::vector<CMat>& kraus() const { return k_; }
  bool subnormalized() const { return sub_; }
  int dim_in() const { return static_cast<int>(k_.front().cols()); }
  int dim_out() const { return static_cast<int>(k_.front().rows()); }

 private:
  std::vector<CMat> k_;
  bool sub_ = false;
};

struct Eigensystem {
  RVec values;   // ascending
  CMat vectors;  // orthonormal columns
};

Eigensystem hermitian_eigensystem(const HermitianOperator& a);
Eigensystem hermitian_eigensystem(const CMat& a);
double lambda_max(const HermitianOperator& a);
double lambda_min(const HermitianOperator& a);

CMat tensor(const CMat& a, const CMat& b);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
CVec tensor(const CVec& a, const CVec& b);

CMat partial_trace(const CMat& m, const DimensionSpec& dims, int which);
HermitianOperator partial_trace(const HermitianOperator& m, const DimensionSpec& dims, int which);
CMat partial_transpose(const CMat& m, const DimensionSpec& dims, int which);
HermitianOperator partial_transpose(const HermitianOperator& m, const DimensionSpec& dims, int which);

double expectation(const HermitianOperator& x, const DensityMatrix& rho);
double expectation(const HermitianOperator& x, const CVec& psi);

double hs_distance(const CMat& x, const CMat& y);
double hs_distance(const HermitianOperator& x, const HermitianOperator& y);
double bures_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);  // (Tr|√ρ√σ|)²
HermitianOperator psd_sqrt(const HermitianOperator& a);

DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho);
CMat apply_kraus(const std::vector<CMat>& kraus, const CMat& rho);

using LinearMap = std::function<CMat(const CMat&)>;

// Normalized Choi matrix (id ⊗ map)(|ω⟩⟨ω|), |ω⟩ = Σ|ii⟩/√d.
HermitianOperator choi_of_map(const LinearMap& map, int dim);
DensityMatrix choi_state(const KrausChannel& ch);
// map(ρ) = d · Tr_A[(ρ^T ⊗ 1) Φ]
CMat choi_apply(const HermitianOperator& choi, int dim_in, const CMat& rho);
bool choi_is_cp(const HermitianOperator& choi, double tol = kPsdTol);

CVec max_entangled(int d);

struct SpinOperators {
  HermitianOperator jx, jy, jz;
};
// Basis order m = j, j-1, ..., -j.
SpinOperators spin_operators(int twice_j);

HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

CMat random_ginibre(int rows, int cols, Rng& rng);
CMat random_unitary(int d, Rng& rng);
CVec random_pure(int d, Rng& rng);
HermitianOperator random_hermitian(int d, Rng& rng);
DensityMatrix random_density(int d, Rng& rng);
KrausChannel random_channel(int d, int n_kraus, Rng& rng);

std::string format_half(int twice);

}  // namespace qgeom
