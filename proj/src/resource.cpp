#include "dvtele/resource.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dvtele {

double squeezing_from_db(double r_db) { return r_db * std::numbers::ln10 / 20.0; }
double squeezing_to_db(double r) { return 20.0 * r / std::numbers::ln10; }
double transmissivity_from_db(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }
double transmissivity_to_db(double t) { return -10.0 * std::log10(t); }

TmsvParams TmsvParams::from_r(double r, double t1, double t2, double mass) {
  TmsvParams p;
  p.r = r;
  p.lambda = std::tanh(r);
  p.t1 = t1;
  p.t2 = t2;
  p.dim = std::max(kMinResourceDim, choose_truncation_dim(p.lambda, mass));
  p.validate();
  return p;
}

TmsvParams TmsvParams::from_lambda(double lambda, double t1, double t2, double mass) {
  return from_r(std::atanh(lambda), t1, t2, mass);
}

TmsvParams TmsvParams::from_db(double r_db, double loss1_db, double loss2_db, double mass) {
  return from_r(squeezing_from_db(r_db), transmissivity_from_db(loss1_db),
                transmissivity_from_db(loss2_db), mass);
}

void TmsvParams::validate() const {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in [0, 1)");
  if (!(t1 > 0.0 && t1 <= 1.0) || !(t2 > 0.0 && t2 <= 1.0)) {
    throw std::invalid_argument("channel transmissivities must be in (0, 1]");
  }
  if (dim < 1) throw std::invalid_argument("truncation dimension must be >= 1");
}

KetVector tmsv_ket(double lambda, int dim) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in [0, 1)");
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(dim) * dim);
  const double norm = std::sqrt(1.0 - lambda * lambda);
  double power = 1.0;
  for (int n = 0; n < dim; ++n) {
    amps(static_cast<Eigen::Index>(n) * dim + n) = norm * power;
    power *= lambda;
  }
  return KetVector(ModeSpace({dim, dim}), std::move(amps));
}

int choose_truncation_dim(double lambda, double mass) {
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("truncation mass must be in (0, 1)");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in [0, 1)");
  const double l2 = lambda * lambda;
  int d = 1;
  double tail = l2;  // lambda^{2d}
  while (!(1.0 - tail > mass)) {
    ++d;
    tail *= l2;
  }
  return d;
}

std::vector<OperatorMatrix> loss_kraus(double t, int dim) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("transmissivity must be in [0, 1]");
  std::vector<OperatorMatrix> ops;
  if (t == 1.0) {
    ops.push_back(OperatorMatrix::single_mode(Matrix::Identity(dim, dim)));
    return ops;
  }
  // <n-l| G^(l) |n> = sqrt(C(n, l)) t^{(n-l)/2} (1-t)^{l/2}
  for (int l = 0; l < dim; ++l) {
    Matrix g = Matrix::Zero(dim, dim);
    for (int n = l; n < dim; ++n) {
      const double log_binom =
          std::lgamma(n + 1.0) - std::lgamma(l + 1.0) - std::lgamma(n - l + 1.0);
      const double amp = std::exp(0.5 * log_binom) * std::pow(t, 0.5 * (n - l)) *
                         std::pow(1.0 - t, 0.5 * l);
      g(n - l, n) = amp;
    }
    ops.push_back(OperatorMatrix::single_mode(std::move(g)));
  }
  return ops;
}

std::vector<OperatorMatrix> loss_channel(double t, int dim) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("loss channel needs t in (0, 1]");
  return loss_kraus(t, dim);
}

DensityOperator lossy_tmsv(const TmsvParams& params) {
  params.validate();
  const int d = params.dim;
  const KetVector ket = tmsv_ket(params.lambda, d);
  const double mass = ket.norm() * ket.norm();
  // Both modes carry the same photon number n, so the two loss channels act on
  // |nn><mm| term by term: photons k1, k2 lost give |n-k1, n-k2><m-k1, m-k2|.
  const auto amp_table = [d](double t) {
    const std::vector<OperatorMatrix> ops = loss_channel(t, d);
    Matrix a = Matrix::Zero(d, d);  // a(l, n) = <n-l| G^(l) |n>
    for (std::size_t l = 0; l < ops.size(); ++l) {
      for (int n = static_cast<int>(l); n < d; ++n) {
        a(static_cast<Eigen::Index>(l), n) = ops[l].matrix()(n - static_cast<int>(l), n);
      }
    }
    return a;
  };
  const Matrix a1 = amp_table(params.t1);
  const Matrix a2 = amp_table(params.t2);
  std::vector<Complex> c(d);
  for (int n = 0; n < d; ++n) c[n] = ket.amplitudes()(static_cast<Eigen::Index>(n) * d + n);

  const auto total = static_cast<Eigen::Index>(d) * d;
  Matrix rho = Matrix::Zero(total, total);
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      const Complex cnm = c[n] * std::conj(c[m]);
      const int top = std::min(n, m);
      for (int k1 = 0; k1 <= top; ++k1) {
        const Complex w1 = cnm * a1(k1, n) * a1(k1, m);
        if (w1 == Complex{}) continue;
        for (int k2 = 0; k2 <= top; ++k2) {
          const Eigen::Index row = static_cast<Eigen::Index>(n - k1) * d + (n - k2);
          const Eigen::Index col = static_cast<Eigen::Index>(m - k1) * d + (m - k2);
          rho(row, col) += w1 * a2(k2, n) * a2(k2, m);
        }
      }
    }
  }
  return DensityOperator(ModeSpace({d, d}), rho / rho.trace().real(), mass);
}

// ---------------------------------------------------------------------------

Complex GaussianCharFn::operator()(Complex xi1, Complex xi2) const {
  const double cross = 2.0 * (xi1 * xi2).real();  // x1 x2 + x1* x2*
  return std::exp(-0.5 * (a1_ * std::norm(xi1) + a2_ * std::norm(xi2) - c_ * cross));
}

GaussianCharFn tmsv_charfn(const TmsvParams& params) {
  const double l = params.lambda;
  const double a = (1.0 + l * l) / (1.0 - l * l);
  const double c = 2.0 * l / (1.0 - l * l);
  return GaussianCharFn(a, a, c);
}

GaussianCharFn lossy_tmsv_charfn(const TmsvParams& params) {
  const GaussianCharFn ideal = tmsv_charfn(params);
  return GaussianCharFn((1.0 - params.t1) + params.t1 * ideal.a1(),
                        (1.0 - params.t2) + params.t2 * ideal.a2(),
                        std::sqrt(params.t1 * params.t2) * ideal.c());
}

// ---------------------------------------------------------------------------

DensityCharFn::DensityCharFn(DensityOperator rho, double radius) : rho_(std::move(rho)) {
  const ModeSpace& space = rho_.space();
  if (space.num_modes() < 1 || space.num_modes() > 2) {
    throw std::invalid_argument("characteristic functions are supported for one or two modes");
  }
  for (int m = 0; m < space.num_modes(); ++m) {
    const int d = space.dim(m);
    bases_.push_back(DisplacementBasis::shared(d, displacement_padding(d, radius)));
  }
  const Matrix& mat = rho_.matrix();
  const int d2 = space.num_modes() == 2 ? space.dim(1) : 1;
  for (Eigen::Index col = 0; col < mat.cols(); ++col) {
    for (Eigen::Index row = 0; row < mat.rows(); ++row) {
      const Complex v = mat(row, col);
      if (v == Complex{}) continue;
      entries_.push_back({static_cast<int>(col / d2), static_cast<int>(col % d2),
                          static_cast<int>(row / d2), static_cast<int>(row % d2), v});
    }
  }
}

Matrix DensityCharFn::displacement(int mode, Complex xi) const { return (*bases_.at(mode))(xi); }

Complex DensityCharFn::trace_with(const Matrix& d1, const Matrix& d2) const {
  // tr{(D1 (x) D2) rho} = sum D1(a, a') D2(b, b') rho(a' b', a b)
  Complex acc{};
  for (const Entry& e : entries_) acc += d1(e.a, e.ap) * d2(e.b, e.bp) * e.value;
  return acc;
}

Complex DensityCharFn::trace_with(const Matrix& d) const {
  Complex acc{};
  for (const Entry& e : entries_) acc += d(e.a, e.ap) * e.value;
  return acc;
}

std::vector<DensityCharFn::PhaseTerm> DensityCharFn::phase_expansion(double r1, double r2) const {
  const int d1 = rho_.space().dim(0);
  const int d2 = num_modes() == 2 ? rho_.space().dim(1) : 1;
  const Matrix m1 = displacement(0, Complex(r1, 0.0));
  const Matrix m2 = num_modes() == 2 ? displacement(1, Complex(r2, 0.0)) : Matrix::Ones(1, 1);
  // <m|D(r e^{i phi})|n> = e^{i phi (m - n)} <m|D(r)|n>
  const int w1 = 2 * d1 - 1;
  const int w2 = 2 * d2 - 1;
  std::vector<Complex> acc(static_cast<std::size_t>(w1) * w2);
  for (const Entry& e : entries_) {
    const int k1 = e.a - e.ap + d1 - 1;
    const int k2 = e.b - e.bp + d2 - 1;
    acc[static_cast<std::size_t>(k1) * w2 + k2] += m1(e.a, e.ap) * m2(e.b, e.bp) * e.value;
  }
  std::vector<PhaseTerm> terms;
  for (int i = 0; i < w1; ++i) {
    for (int j = 0; j < w2; ++j) {
      const Complex v = acc[static_cast<std::size_t>(i) * w2 + j];
      if (v != Complex{}) terms.push_back({i - d1 + 1, j - d2 + 1, v});
    }
  }
  return terms;
}

Complex DensityCharFn::operator()(Complex xi) const {
  if (num_modes() != 1) throw std::invalid_argument("one-argument call on a two-mode state");
  return trace_with(displacement(0, xi));
}

Complex DensityCharFn::operator()(Complex xi1, Complex xi2) const {
  if (num_modes() == 1) return (*this)(xi1);
  return trace_with(displacement(0, xi1), displacement(1, xi2));
}

CharFn CharFn::from_gaussian(const GaussianCharFn& g) {
  return CharFn(2, [g](Complex a, Complex b) { return g(a, b); });
}

CharFn charfn_from_density(const DensityOperator& rho, double radius) {
  auto impl = std::make_shared<const DensityCharFn>(rho, radius);
  return CharFn(impl->num_modes(), [impl](Complex a, Complex b) { return (*impl)(a, b); });
}

Complex qubit_charfn_value(double theta, double phi, Complex xi) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const double r2 = std::norm(xi);
  const Complex cross = xi * std::polar(1.0, -phi) - std::conj(xi) * std::polar(1.0, phi);
  return std::exp(-0.5 * r2) * (c * c + s * s * (1.0 - r2) + c * s * cross);
}

CharFn qubit_charfn(double theta, double phi) {
  return CharFn(1, [theta, phi](Complex xi, Complex) { return qubit_charfn_value(theta, phi, xi); });
}

}  // namespace dvtele
