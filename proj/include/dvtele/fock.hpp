// Dense linear algebra over truncated Fock spaces.
//
// A composite system is a list of optical modes, each truncated to a finite
// number of Fock levels |0>..|d-1>. Basis states are laid out in row-major
// (mixed-radix) order: mode 0 is the most significant digit.

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dvtele {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Default cap on the total dimension of any composite space.
inline constexpr std::size_t kDefaultCapacity = 4096;

/// Raised when a composite space would exceed the configured dimension cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModeSpace {
 public:
  ModeSpace() = default;
  explicit ModeSpace(std::vector<int> dims);

  int num_modes() const { return static_cast<int>(dims_.size()); }
  int dim(int mode) const;
  const std::vector<int>& dims() const { return dims_; }
  std::size_t total_dim() const;

  /// Stride of `mode` in the flattened index.
  std::size_t stride(int mode) const;
  /// Fock level of `mode` in flattened basis index `index`.
  int digit(std::size_t index, int mode) const;

  ModeSpace concat(const ModeSpace& other) const;
  ModeSpace with_dim(int mode, int dim) const;
  /// Sub-space made of the listed modes, in the listed order.
  ModeSpace select(std::span<const int> modes) const;

  bool operator==(const ModeSpace&) const = default;

 private:
  std::vector<int> dims_;
};

class DensityOperator {
 public:
  DensityOperator(ModeSpace space, Matrix elements);
  DensityOperator(ModeSpace space, Matrix elements, double trace_mass);

  const ModeSpace& space() const { return space_; }
  const Matrix& matrix() const { return elements_; }
  /// Trace recorded before any renormalization.
  double trace_mass() const { return trace_mass_; }
  double trace() const { return elements_.trace().real(); }
  double purity() const;

  /// Copy scaled to unit trace; trace_mass is carried over.
  DensityOperator renormalized() const;

  /// max |rho - rho^dagger| over all entries.
  double hermiticity_error() const;
  /// Smallest eigenvalue of the Hermitian part (test/debug use only).
  double min_eigenvalue() const;

 private:
  ModeSpace space_;
  Matrix elements_;
  double trace_mass_;
};

class KetVector {
 public:
  KetVector(ModeSpace space, Vector amplitudes);

  const ModeSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }
  DensityOperator density() const;

  /// Single-mode Fock state |n> truncated to `dim` levels.
  static KetVector fock(int n, int dim);

 private:
  ModeSpace space_;
  Vector amplitudes_;
};

/// Linear map between (possibly different) mode spaces. Single-mode maps
/// may be rectangular, e.g. to drop a mode down to two levels.
class OperatorMatrix {
 public:
  OperatorMatrix(ModeSpace in_space, ModeSpace out_space, Matrix elements);
  /// Single-mode operator with dims taken from the matrix shape.
  static OperatorMatrix single_mode(Matrix elements);

  const ModeSpace& in_space() const { return in_space_; }
  const ModeSpace& out_space() const { return out_space_; }
  const Matrix& matrix() const { return elements_; }

 private:
  ModeSpace in_space_;
  ModeSpace out_space_;
  Matrix elements_;
};

DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b,
                               std::size_t capacity = kDefaultCapacity);
KetVector tensor_product(const KetVector& a, const KetVector& b,
                         std::size_t capacity = kDefaultCapacity);

/// Trace out every mode not listed in `keep`. Kept modes retain their
/// relative order.
DensityOperator partial_trace(const DensityOperator& rho, std::vector<int> keep);

/// sum_l K_l rho K_l^dagger with each K_l acting on `mode`. All Kraus operators
/// must share the same output dimension, which becomes the new dimension of
/// `mode`.
DensityOperator apply_kraus(const DensityOperator& rho, std::span<const OperatorMatrix> kraus,
                            int mode);
DensityOperator apply_operator(const DensityOperator& rho, const OperatorMatrix& op, int mode);

/// (I (x) K (x) I) M for a matrix whose rows are indexed by `rows`.
Matrix apply_on_rows(const Matrix& m, const ModeSpace& rows, int mode, const Matrix& k);

/// Outcome of projecting part of a state onto a bra.
struct Projection {
  double probability = 0.0;
  /// Renormalized state on the remaining modes; empty for a null outcome.
  std::optional<DensityOperator> conditional;

  bool null() const { return !conditional.has_value(); }
};

/// Probabilities below this are reported as null outcomes.
inline constexpr double kNullProbability = 1e-14;

/// Project `modes` of `rho` onto <bra|. `bra` is given as a ket over the
/// listed modes (in that order); it is conjugated internally.
Projection project(const DensityOperator& rho, const KetVector& bra, std::vector<int> modes);

/// Unnormalized <bra| rho |bra> on the remaining modes.
Matrix project_unnormalized(const DensityOperator& rho, const KetVector& bra,
                            std::vector<int> modes, ModeSpace* remaining = nullptr);

/// D(xi) = exp(xi a^dag - xi* a), exponentiated in a `pad`-level space and
/// cropped to `dim` levels.
OperatorMatrix displacement_operator(Complex xi, int dim, int pad);

/// Padding that keeps the cropped displacement accurate for |xi| <= radius.
int displacement_padding(int dim, double radius);

/// Cached eigen-decomposition of the truncated generator i(a^dag - a), so
/// that many displacements of the same (dim, pad) can be built quickly.
class DisplacementBasis {
 public:
  DisplacementBasis(int dim, int pad);

  /// Process-wide cached instance; safe to call from several threads.
  static std::shared_ptr<const DisplacementBasis> shared(int dim, int pad);

  int dim() const { return dim_; }
  int pad() const { return pad_; }
  /// Cropped dim x dim block of D(xi).
  Matrix operator()(Complex xi) const;

 private:
  int dim_;
  int pad_;
  Eigen::VectorXd eigenvalues_;
  Matrix cropped_vectors_;  // first dim rows of the eigenvector matrix
};

/// <psi| rho |psi>.
double fidelity_pure(const KetVector& psi, const DensityOperator& rho);

}  // namespace dvtele
