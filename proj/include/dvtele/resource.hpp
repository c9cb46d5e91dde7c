// Two-mode squeezed vacuum resources, photon-loss channels and
// characteristic functions.

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dvtele/fock.hpp"

namespace dvtele {

/// Squeezing in dB, 10 log10(e^{2r}), to the squeezing parameter r.
double squeezing_from_db(double r_db);
double squeezing_to_db(double r);
/// Channel loss in dB, -10 log10(T), to the transmissivity T.
double transmissivity_from_db(double loss_db);
double transmissivity_to_db(double t);

/// Default retained probability mass of the truncated ideal TMSV.
inline constexpr double kDefaultTruncationMass = 0.95;
/// Smallest per-mode dimension used for a resource. One level would reduce
/// any weakly squeezed TMSV to the product vacuum.
inline constexpr int kMinResourceDim = 2;

struct TmsvParams {
  double r = 0.0;       ///< squeezing parameter
  double lambda = 0.0;  ///< tanh(r)
  double t1 = 1.0;      ///< transmissivity of the channel carrying mode 1
  double t2 = 1.0;      ///< transmissivity of the channel carrying mode 2
  int dim = 1;          ///< Fock truncation per mode

  // The factories pick dim = max(kMinResourceDim, choose_truncation_dim(...)).

  static TmsvParams from_r(double r, double t1, double t2,
                           double mass = kDefaultTruncationMass);
  static TmsvParams from_lambda(double lambda, double t1, double t2,
                                double mass = kDefaultTruncationMass);
  static TmsvParams from_db(double r_db, double loss1_db, double loss2_db,
                            double mass = kDefaultTruncationMass);

  void validate() const;
};

/// sqrt(1 - lambda^2) sum_{n<dim} lambda^n |nn>.
KetVector tmsv_ket(double lambda, int dim);

/// Smallest d such that the truncated TMSV keeps more than `mass`.
int choose_truncation_dim(double lambda, double mass = kDefaultTruncationMass);

/// Kraus operators G^(l), l = 0..dim-1, of a pure-loss channel with
/// transmissivity t in (0, 1].
std::vector<OperatorMatrix> loss_channel(double t, int dim);

/// Same family, but t = 0 is allowed (used for detector efficiency).
std::vector<OperatorMatrix> loss_kraus(double t, int dim);

/// Truncated TMSV sent through both loss channels and renormalized. The
/// discarded truncation tail is recorded in trace_mass().
DensityOperator lossy_tmsv(const TmsvParams& params);

/// Gaussian characteristic function of the form
///   exp(-1/2 [a1 |x1|^2 + a2 |x2|^2 - c (x1 x2 + x1* x2*)]).
class GaussianCharFn {
 public:
  GaussianCharFn(double a1, double a2, double c) : a1_(a1), a2_(a2), c_(c) {}

  Complex operator()(Complex xi1, Complex xi2) const;

  double a1() const { return a1_; }
  double a2() const { return a2_; }
  double c() const { return c_; }

 private:
  double a1_;
  double a2_;
  double c_;
};

GaussianCharFn tmsv_charfn(const TmsvParams& params);
GaussianCharFn lossy_tmsv_charfn(const TmsvParams& params);

/// chi(xi...) = tr{D(xi_1) (x) ... rho}, evaluated with padded displacements.
/// Only entries of rho that are exactly nonzero take part in the trace, so
/// phase-symmetric states are cheap.
class DensityCharFn {
 public:
  /// `radius` bounds |xi| for which the padding is sized.
  explicit DensityCharFn(DensityOperator rho, double radius = 8.0);

  int num_modes() const { return rho_.space().num_modes(); }
  const DensityOperator& state() const { return rho_; }

  Complex operator()(Complex xi) const;
  Complex operator()(Complex xi1, Complex xi2) const;

  /// Cropped displacement for `mode`.
  Matrix displacement(int mode, Complex xi) const;
  /// tr{(D1 (x) D2) rho} for explicit two-mode displacement blocks.
  Complex trace_with(const Matrix& d1, const Matrix& d2) const;
  /// tr{D rho} for a one-mode state.
  Complex trace_with(const Matrix& d) const;

  /// With xi_k = r_k e^{i phi_k}, chi = sum S(k1, k2) e^{i (k1 phi1 + k2 phi2)}.
  /// Returns the nonzero S for fixed radii (r2 ignored for one mode).
  struct PhaseTerm {
    int k1;
    int k2;
    Complex coeff;
  };
  std::vector<PhaseTerm> phase_expansion(double r1, double r2 = 0.0) const;

 private:
  struct Entry {
    int a, b, ap, bp;  // rho(ap bp, a b)
    Complex value;
  };

  DensityOperator rho_;
  std::vector<std::shared_ptr<const DisplacementBasis>> bases_;
  std::vector<Entry> entries_;
};

/// Type-erased characteristic function of one or two modes.
class CharFn {
 public:
  using Fn = std::function<Complex(Complex, Complex)>;

  CharFn(int num_modes, Fn fn) : num_modes_(num_modes), fn_(std::move(fn)) {}

  int num_modes() const { return num_modes_; }
  Complex operator()(Complex xi) const { return fn_(xi, Complex{}); }
  Complex operator()(Complex xi1, Complex xi2) const { return fn_(xi1, xi2); }

  static CharFn from_gaussian(const GaussianCharFn& g);

 private:
  int num_modes_;
  Fn fn_;
};

CharFn charfn_from_density(const DensityOperator& rho, double radius = 8.0);

/// Closed-form characteristic function of cos(t/2)|0> + e^{i phi} sin(t/2)|1>.
CharFn qubit_charfn(double theta, double phi);
Complex qubit_charfn_value(double theta, double phi, Complex xi);

}  // namespace dvtele
