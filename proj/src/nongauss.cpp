#include "dvtele/nongauss.hpp"

#include <cmath>
#include <numbers>

#include "dvtele/quadrature.hpp"

namespace dvtele {

namespace {

HeraldedState herald(const DensityOperator& unnormalized) {
  HeraldedState out;
  out.probability = std::max(0.0, unnormalized.trace());
  if (out.probability >= kNullProbability) {
    out.state = DensityOperator(unnormalized.space(), unnormalized.matrix() / out.probability,
                                unnormalized.trace_mass());
  }
  return out;
}

HeraldedState apply_heralded(const DensityOperator& rho, const Matrix& op, int mode) {
  return herald(apply_operator(rho, OperatorMatrix::single_mode(op), mode));
}

HeraldedState chain(const HeraldedState& first, double p_scale) {
  HeraldedState out = first;
  out.probability *= p_scale;
  if (out.probability < kNullProbability) out.state.reset();
  return out;
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

}  // namespace

void QsParams::validate() const {
  if (!(ts > 0.0 && ts < 0.5)) throw std::invalid_argument("scissors T_s must be in (0, 1/2)");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("detector efficiency must be in [0, 1]");
  if (series_cutoff < 0) throw std::invalid_argument("series cutoff must be >= 0");
}

void PcParams::validate() const {
  if (!(tc > 0.0 && tc < 0.25)) throw std::invalid_argument("catalysis T_c must be in (0, 1/4)");
}

const DensityOperator& HeraldedState::value() const {
  if (!state) throw std::logic_error("null heralded outcome has no state");
  return *state;
}

Matrix truncation_operator(int dim) {
  Matrix m = Matrix::Zero(2, dim);
  const double s = 1.0 / std::numbers::sqrt2;
  for (int n = 0; n < std::min(2, dim); ++n) m(n, n) = s;
  return m;
}

Matrix scissors_operator(double ts, int dim) {
  Matrix m = Matrix::Zero(2, dim);
  m(0, 0) = std::sqrt(ts);
  if (dim > 1) m(1, 1) = std::sqrt(1.0 - ts);
  return m;
}

Matrix catalysis_operator(double tc, int dim) {
  // <n|R|n> = sqrt(Tc) ((Tc - 1) n / Tc + 1) Tc^{n/2}
  Matrix m = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    m(n, n) = std::sqrt(tc) * ((tc - 1.0) * n / tc + 1.0) * std::pow(tc, 0.5 * n);
  }
  return m;
}

Matrix scissors_count_operator(double ts, int n, int n_prime, int dim) {
  if (n < 1 || n_prime < 0) throw std::invalid_argument("scissors counts need n >= 1, n' >= 0");
  Matrix m = Matrix::Zero(2, dim);
  const int total = n + n_prime;
  const double sign = n_prime % 2 == 0 ? 1.0 : -1.0;
  const double split = std::pow(2.0, -0.5 * (total - 1));
  const double log_nn = log_factorial(n) + log_factorial(n_prime);
  if (total - 1 < dim) {
    m(0, total - 1) = sign * split * (n - n_prime) *
                      std::exp(0.5 * (log_factorial(total - 1) - log_nn)) * std::sqrt(ts);
  }
  if (total < dim) {
    m(1, total) = sign * split * std::exp(0.5 * (log_factorial(total) - log_nn)) *
                  std::sqrt(1.0 - ts);
  }
  return m;
}

HeraldedState truncate_qubit_subspace(const DensityOperator& rho, int mode) {
  return apply_heralded(rho, truncation_operator(rho.space().dim(mode)), mode);
}

HeraldedState qs_ideal(const DensityOperator& rho, double ts, int mode) {
  QsParams{ts}.validate();
  return apply_heralded(rho, scissors_operator(ts, rho.space().dim(mode)), mode);
}

HeraldedState pc_ideal(const DensityOperator& rho, double tc, int mode) {
  PcParams{tc}.validate();
  return apply_heralded(rho, catalysis_operator(tc, rho.space().dim(mode)), mode);
}

HeraldedState qs_inefficient(const DensityOperator& rho, const QsParams& params, int mode) {
  params.validate();
  const int dim = rho.space().dim(mode);
  const int cutoff = params.series_cutoff > 0 ? params.series_cutoff : dim + 2;
  if (cutoff < dim) throw std::invalid_argument("series cutoff below the state dimension");

  const double eta = params.eta;
  std::vector<OperatorMatrix> terms;
  for (int total = 1; total <= cutoff; ++total) {
    // Operators with both support levels above the truncation vanish.
    if (total - 1 >= dim) break;
    for (int n = 1; n <= total; ++n) {
      const int n_prime = total - n;
      const double weight = n * eta * std::pow(1.0 - eta, total - 1);
      if (weight == 0.0) continue;
      terms.push_back(OperatorMatrix::single_mode(
          std::sqrt(weight) * scissors_count_operator(params.ts, n, n_prime, dim)));
    }
  }
  if (terms.empty()) {
    HeraldedState none;
    return none;
  }
  return herald(apply_kraus(rho, terms, mode));
}

HeraldedState qs_ideal_both(const DensityOperator& rho, double ts1, double ts2) {
  const HeraldedState first = qs_ideal(rho, ts1, 0);
  if (first.null()) return first;
  return chain(qs_ideal(first.value(), ts2, 1), first.probability);
}

HeraldedState pc_ideal_both(const DensityOperator& rho, double tc1, double tc2) {
  const HeraldedState first = pc_ideal(rho, tc1, 0);
  if (first.null()) return first;
  return chain(pc_ideal(first.value(), tc2, 1), first.probability);
}

HeraldedState qs_inefficient_both(const DensityOperator& rho, const QsParams& p1,
                                  const QsParams& p2) {
  const HeraldedState first = qs_inefficient(rho, p1, 0);
  if (first.null()) return first;
  return chain(qs_inefficient(first.value(), p2, 1), first.probability);
}

// ---------------------------------------------------------------------------
// Photon-catalysis characteristic function by quadrature.
//
// chi_PC(x1, x2) = int d^2g1 d^2g2 / (pi^2 (1 - Tc)^2) chi'(g1, g2)
//                  * prod_k chi_1(k(x_k, g_k)) chi_1(k(g_k, x_k)),
// k(x, g) = (x - g sqrt(Tc)) / sqrt(1 - Tc), chi_1 the single-photon
// characteristic function.

double single_photon_charfn(Complex xi) {
  const double r2 = std::norm(xi);
  return (1.0 - r2) * std::exp(-0.5 * r2);
}

PcCharFn::PcCharFn(const TmsvParams& tmsv, const PcParams& pc)
    : PcCharFn(tmsv, pc, Options{}) {}

PcCharFn::PcCharFn(const TmsvParams& tmsv, const PcParams& pc, Options options)
    : resource_(lossy_tmsv_charfn(tmsv)), tc_(pc.tc), options_(options) {
  pc.validate();
  tmsv.validate();
}

Complex PcCharFn::integrate(Complex xi1, Complex xi2, int order) const {
  const std::vector<DiscNode> disc = disc_grid(options_.radius, order, order);
  const double sqrt_tc = std::sqrt(tc_);
  const double inv = 1.0 / std::sqrt(1.0 - tc_);
  const std::size_t n = disc.size();

  // chi'(g1, g2) = e1(g1) e2(g2) exp(c Re(g1 g2) ), so the kernel and the
  // diagonal Gaussian factors are tabulated per mode.
  std::vector<Complex> g(n);
  std::vector<double> f1(n);
  std::vector<double> f2(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::polar(disc[i].radius, disc[i].angle);
    const double r2 = disc[i].radius * disc[i].radius;
    const auto kernel = [&](Complex xi) {
      return single_photon_charfn((xi - g[i] * sqrt_tc) * inv) *
             single_photon_charfn((g[i] - xi * sqrt_tc) * inv);
    };
    f1[i] = disc[i].weight * std::exp(-0.5 * resource_.a1() * r2) * kernel(xi1);
    f2[i] = disc[i].weight * std::exp(-0.5 * resource_.a2() * r2) * kernel(xi2);
  }
  const double c = resource_.c();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (f1[i] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      inner += f2[j] * std::exp(c * (g[i] * g[j]).real());
    }
    acc += f1[i] * inner;
  }
  const double norm = std::numbers::pi * (1.0 - tc_);
  return Complex(acc / (norm * norm), 0.0);
}

Complex PcCharFn::operator()(Complex xi1, Complex xi2) const {
  Complex previous = integrate(xi1, xi2, options_.start_order);
  Complex current = previous;
  for (int order = 2 * options_.start_order; order <= options_.max_order; order *= 2) {
    previous = current;
    current = integrate(xi1, xi2, order);
    const double scale = std::max(std::abs(current), 1e-12);
    last_error_ = std::abs(current - previous) / scale;
    if (last_error_ <= options_.rel_tol) return current;
  }
  throw QuadratureError("photon-catalysis characteristic function did not converge",
                        previous.real(), current.real());
}

CharFn pc_charfn(const TmsvParams& tmsv, const PcParams& pc) {
  auto impl = std::make_shared<const PcCharFn>(tmsv, pc);
  return CharFn(2, [impl](Complex a, Complex b) { return (*impl)(a, b); });
}

}  // namespace dvtele
