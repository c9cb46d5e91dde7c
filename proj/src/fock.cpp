#include "dvtele/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dvtele {

namespace {

void check_mode(const ModeSpace& space, int mode) {
  if (mode < 0 || mode >= space.num_modes()) {
    std::ostringstream msg;
    msg << "mode index " << mode << " out of range for " << space.num_modes() << "-mode space";
    throw std::invalid_argument(msg.str());
  }
}

void check_capacity(std::size_t total, std::size_t capacity) {
  if (total > capacity) {
    std::ostringstream msg;
    msg << "composite dimension " << total << " exceeds capacity " << capacity;
    throw CapacityError(msg.str());
  }
}

// Splits a flattened index into (index over `modes`, index over the rest),
// both in the original relative order of the modes.
struct IndexSplit {
  std::vector<std::size_t> selected;
  std::vector<std::size_t> rest;
  ModeSpace selected_space;
  ModeSpace rest_space;
};

IndexSplit split_indices(const ModeSpace& space, const std::vector<int>& modes) {
  std::vector<bool> is_selected(space.num_modes(), false);
  for (int m : modes) {
    check_mode(space, m);
    if (is_selected[m]) throw std::invalid_argument("duplicate mode index");
    is_selected[m] = true;
  }
  std::vector<int> rest_modes;
  for (int m = 0; m < space.num_modes(); ++m) {
    if (!is_selected[m]) rest_modes.push_back(m);
  }

  IndexSplit split;
  split.selected_space = space.select(modes);
  split.rest_space = space.select(rest_modes);
  const std::size_t total = space.total_dim();
  split.selected.resize(total);
  split.rest.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t s = 0;
    for (int m : modes) s = s * space.dim(m) + space.digit(i, m);
    std::size_t r = 0;
    for (int m : rest_modes) r = r * space.dim(m) + space.digit(i, m);
    split.selected[i] = s;
    split.rest[i] = r;
  }
  return split;
}

}  // namespace

// ---------------------------------------------------------------------------
// ModeSpace

ModeSpace::ModeSpace(std::vector<int> dims) : dims_(std::move(dims)) {
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("mode dimension must be >= 1");
  }
}

int ModeSpace::dim(int mode) const {
  check_mode(*this, mode);
  return dims_[mode];
}

std::size_t ModeSpace::total_dim() const {
  return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                         [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

std::size_t ModeSpace::stride(int mode) const {
  check_mode(*this, mode);
  std::size_t s = 1;
  for (int m = num_modes() - 1; m > mode; --m) s *= static_cast<std::size_t>(dims_[m]);
  return s;
}

int ModeSpace::digit(std::size_t index, int mode) const {
  return static_cast<int>((index / stride(mode)) % static_cast<std::size_t>(dims_[mode]));
}

ModeSpace ModeSpace::concat(const ModeSpace& other) const {
  std::vector<int> dims = dims_;
  dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
  return ModeSpace(std::move(dims));
}

ModeSpace ModeSpace::with_dim(int mode, int dim) const {
  check_mode(*this, mode);
  std::vector<int> dims = dims_;
  dims[mode] = dim;
  return ModeSpace(std::move(dims));
}

ModeSpace ModeSpace::select(std::span<const int> modes) const {
  std::vector<int> dims;
  dims.reserve(modes.size());
  for (int m : modes) dims.push_back(dim(m));
  return ModeSpace(std::move(dims));
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(ModeSpace space, Matrix elements)
    : space_(std::move(space)), elements_(std::move(elements)) {
  const auto n = static_cast<Eigen::Index>(space_.total_dim());
  if (elements_.rows() != n || elements_.cols() != n) {
    throw std::invalid_argument("density matrix shape does not match its mode space");
  }
  trace_mass_ = trace();
}

DensityOperator::DensityOperator(ModeSpace space, Matrix elements, double trace_mass)
    : DensityOperator(std::move(space), std::move(elements)) {
  trace_mass_ = trace_mass;
}

double DensityOperator::purity() const {
  // tr(rho^2) = sum_ij rho_ij rho_ji = sum |rho_ij|^2 for Hermitian rho.
  return (elements_.array() * elements_.transpose().array()).sum().real();
}

DensityOperator DensityOperator::renormalized() const {
  const double t = trace();
  if (!(t > 0.0)) throw std::domain_error("cannot renormalize a zero-trace operator");
  return DensityOperator(space_, elements_ / t, trace_mass_);
}

double DensityOperator::hermiticity_error() const {
  return (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
  const Matrix h = 0.5 * (elements_ + elements_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// KetVector / OperatorMatrix

KetVector::KetVector(ModeSpace space, Vector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != static_cast<Eigen::Index>(space_.total_dim())) {
    throw std::invalid_argument("ket length does not match its mode space");
  }
}

DensityOperator KetVector::density() const {
  return DensityOperator(space_, amplitudes_ * amplitudes_.adjoint());
}

KetVector KetVector::fock(int n, int dim) {
  if (n < 0 || n >= dim) throw std::invalid_argument("Fock level outside truncation");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return KetVector(ModeSpace({dim}), std::move(v));
}

OperatorMatrix::OperatorMatrix(ModeSpace in_space, ModeSpace out_space, Matrix elements)
    : in_space_(std::move(in_space)),
      out_space_(std::move(out_space)),
      elements_(std::move(elements)) {
  if (elements_.rows() != static_cast<Eigen::Index>(out_space_.total_dim()) ||
      elements_.cols() != static_cast<Eigen::Index>(in_space_.total_dim())) {
    throw std::invalid_argument("operator shape does not match its declared spaces");
  }
}

OperatorMatrix OperatorMatrix::single_mode(Matrix elements) {
  const int rows = static_cast<int>(elements.rows());
  const int cols = static_cast<int>(elements.cols());
  return OperatorMatrix(ModeSpace({cols}), ModeSpace({rows}), std::move(elements));
}

// ---------------------------------------------------------------------------
// Tensor structure

DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b,
                               std::size_t capacity) {
  ModeSpace space = a.space().concat(b.space());
  check_capacity(space.total_dim(), capacity);
  const Matrix& ma = a.matrix();
  const Matrix& mb = b.matrix();
  const Eigen::Index nb = mb.rows();
  Matrix out(ma.rows() * nb, ma.cols() * nb);
  for (Eigen::Index i = 0; i < ma.rows(); ++i) {
    for (Eigen::Index j = 0; j < ma.cols(); ++j) {
      out.block(i * nb, j * nb, nb, nb) = ma(i, j) * mb;
    }
  }
  return DensityOperator(std::move(space), std::move(out), a.trace_mass() * b.trace_mass());
}

KetVector tensor_product(const KetVector& a, const KetVector& b, std::size_t capacity) {
  ModeSpace space = a.space().concat(b.space());
  check_capacity(space.total_dim(), capacity);
  const Eigen::Index nb = b.amplitudes().size();
  Vector out(a.amplitudes().size() * nb);
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
    out.segment(i * nb, nb) = a.amplitudes()(i) * b.amplitudes();
  }
  return KetVector(std::move(space), std::move(out));
}

DensityOperator partial_trace(const DensityOperator& rho, std::vector<int> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace needs at least one kept mode");
  std::sort(keep.begin(), keep.end());
  const IndexSplit split = split_indices(rho.space(), keep);
  const auto n = static_cast<Eigen::Index>(split.selected_space.total_dim());
  Matrix out = Matrix::Zero(n, n);
  const Matrix& m = rho.matrix();
  const std::size_t total = rho.space().total_dim();
  for (std::size_t j = 0; j < total; ++j) {
    for (std::size_t i = 0; i < total; ++i) {
      if (split.rest[i] != split.rest[j]) continue;
      out(split.selected[i], split.selected[j]) += m(i, j);
    }
  }
  return DensityOperator(split.selected_space, std::move(out), rho.trace_mass());
}

Matrix apply_on_rows(const Matrix& m, const ModeSpace& rows, int mode, const Matrix& k) {
  check_mode(rows, mode);
  const Eigen::Index d_in = rows.dim(mode);
  if (k.cols() != d_in) throw std::invalid_argument("operator does not match mode dimension");
  if (m.rows() != static_cast<Eigen::Index>(rows.total_dim())) {
    throw std::invalid_argument("matrix rows do not match mode space");
  }
  const Eigen::Index d_out = k.rows();
  const auto inner = static_cast<Eigen::Index>(rows.stride(mode));
  const Eigen::Index slabs = m.size() / (inner * d_in);

  // Column-major storage makes each (inner x d) block contiguous, so the
  // whole product is a batch of small GEMMs: Y_j = X_j K^T.
  Matrix out(m.rows() / d_in * d_out, m.cols());
  const Matrix kt = k.transpose();
  for (Eigen::Index j = 0; j < slabs; ++j) {
    Eigen::Map<const Matrix> x(m.data() + j * inner * d_in, inner, d_in);
    Eigen::Map<Matrix> y(out.data() + j * inner * d_out, inner, d_out);
    y.noalias() = x * kt;
  }
  return out;
}

DensityOperator apply_kraus(const DensityOperator& rho, std::span<const OperatorMatrix> kraus,
                            int mode) {
  check_mode(rho.space(), mode);
  if (kraus.empty()) throw std::invalid_argument("empty Kraus list");
  const int d_in = rho.space().dim(mode);
  const Eigen::Index d_out = kraus.front().matrix().rows();
  for (const auto& k : kraus) {
    if (k.matrix().cols() != d_in || k.matrix().rows() != d_out) {
      throw std::invalid_argument("Kraus operator shape does not match the acted mode");
    }
  }
  ModeSpace out_space = rho.space().with_dim(mode, static_cast<int>(d_out));
  const auto n = static_cast<Eigen::Index>(out_space.total_dim());
  Matrix acc = Matrix::Zero(n, n);
  for (const auto& k : kraus) {
    Matrix left = apply_on_rows(rho.matrix(), rho.space(), mode, k.matrix());
    Matrix left_adj = left.adjoint();
    acc += apply_on_rows(left_adj, rho.space(), mode, k.matrix()).adjoint();
  }
  return DensityOperator(std::move(out_space), std::move(acc), rho.trace_mass());
}

DensityOperator apply_operator(const DensityOperator& rho, const OperatorMatrix& op, int mode) {
  return apply_kraus(rho, std::span<const OperatorMatrix>(&op, 1), mode);
}

// ---------------------------------------------------------------------------
// Measurement

Matrix project_unnormalized(const DensityOperator& rho, const KetVector& bra,
                            std::vector<int> modes, ModeSpace* remaining) {
  const IndexSplit split = split_indices(rho.space(), modes);
  if (!(split.selected_space == bra.space())) {
    throw std::invalid_argument("bra space does not match the projected modes");
  }
  if (bra.norm() > 1.0 + 1e-10) throw std::invalid_argument("bra norm exceeds one");

  const auto n = static_cast<Eigen::Index>(split.rest_space.total_dim());
  Matrix out = Matrix::Zero(n, n);
  const Vector& b = bra.amplitudes();
  const Matrix& m = rho.matrix();
  const std::size_t total = rho.space().total_dim();
  for (std::size_t j = 0; j < total; ++j) {
    const Complex bj = b(split.selected[j]);
    if (bj == Complex{}) continue;
    for (std::size_t i = 0; i < total; ++i) {
      const Complex bi = b(split.selected[i]);
      if (bi == Complex{}) continue;
      out(split.rest[i], split.rest[j]) += std::conj(bi) * m(i, j) * bj;
    }
  }
  if (remaining != nullptr) *remaining = split.rest_space;
  return out;
}

Projection project(const DensityOperator& rho, const KetVector& bra, std::vector<int> modes) {
  ModeSpace rest;
  Matrix out = project_unnormalized(rho, bra, std::move(modes), &rest);
  Projection result;
  result.probability = std::max(0.0, out.trace().real());
  if (result.probability < kNullProbability) return result;
  if (rest.num_modes() == 0) {
    // Everything was measured; the "remaining" system is a trivial 1-dim one.
    rest = ModeSpace({1});
  }
  result.conditional = DensityOperator(rest, out / result.probability, result.probability);
  return result;
}

// ---------------------------------------------------------------------------
// Displacement

DisplacementBasis::DisplacementBasis(int dim, int pad) : dim_(dim), pad_(pad) {
  if (dim < 1) throw std::invalid_argument("displacement dimension must be >= 1");
  if (pad < dim) throw std::invalid_argument("displacement padding must be >= dim");
  check_capacity(static_cast<std::size_t>(pad), kDefaultCapacity);
  // H = -i (a^dag - a) is Hermitian; exp(r (a^dag - a)) = exp(i r H).
  Matrix h = Matrix::Zero(pad, pad);
  for (int n = 1; n < pad; ++n) {
    const double s = std::sqrt(static_cast<double>(n));
    h(n, n - 1) = Complex(0.0, -s);  // -i * <n|a^dag|n-1>
    h(n - 1, n) = Complex(0.0, s);   // +i * <n-1|a|n>
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  eigenvalues_ = solver.eigenvalues();
  cropped_vectors_ = solver.eigenvectors().topRows(dim);
}

std::shared_ptr<const DisplacementBasis> DisplacementBasis::shared(int dim, int pad) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const DisplacementBasis>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{dim, pad}];
  if (!slot) slot = std::make_shared<const DisplacementBasis>(dim, pad);
  return slot;
}

Matrix DisplacementBasis::operator()(Complex xi) const {
  const double r = std::abs(xi);
  const double phi = std::arg(xi);
  Vector phases(eigenvalues_.size());
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
    phases(k) = std::polar(1.0, r * eigenvalues_(k));
  }
  Matrix d = cropped_vectors_ * phases.asDiagonal() * cropped_vectors_.adjoint();
  // D(r e^{i phi}) = e^{i phi n} D(r) e^{-i phi n}.
  if (phi != 0.0) {
    for (int m = 0; m < dim_; ++m) {
      for (int n = 0; n < dim_; ++n) {
        if (m != n) d(m, n) *= std::polar(1.0, phi * (m - n));
      }
    }
  }
  return d;
}

int displacement_padding(int dim, double radius) {
  const double reach = std::sqrt(static_cast<double>(dim)) + radius;
  return dim + static_cast<int>(std::ceil(reach * reach + 4.0 * reach)) + 4;
}

OperatorMatrix displacement_operator(Complex xi, int dim, int pad) {
  DisplacementBasis basis(dim, pad);
  return OperatorMatrix::single_mode(basis(xi));
}

// ---------------------------------------------------------------------------

double fidelity_pure(const KetVector& psi, const DensityOperator& rho) {
  if (!(psi.space() == rho.space())) {
    throw std::invalid_argument("fidelity_pure: state spaces differ");
  }
  const Vector& v = psi.amplitudes();
  return (v.adjoint() * rho.matrix() * v)(0, 0).real();
}

}  // namespace dvtele
