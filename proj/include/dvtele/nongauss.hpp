// Non-Gaussian operations on resource modes: qubit-subspace truncation,
// quantum scissors (ideal and with inefficient detectors) and photon
// catalysis.

#pragma once

#include "dvtele/fock.hpp"
#include "dvtele/resource.hpp"

namespace dvtele {

struct QsParams {
  double ts = 0.25;       ///< scissors beam-splitter transmissivity, (0, 1/2)
  double eta = 1.0;       ///< detector efficiency, (0, 1]
  int series_cutoff = 0;  ///< max n + n'; 0 means input dimension + 2

  void validate() const;
};

struct PcParams {
  double tc = 0.1;  ///< catalysis beam-splitter transmissivity, (0, 1/4)

  void validate() const;
};

/// Result of a heralded (non-deterministic) operation.
struct HeraldedState {
  double probability = 0.0;
  std::optional<DensityOperator> state;  ///< renormalized; empty if null

  bool null() const { return !state.has_value(); }
  const DensityOperator& value() const;
};

/// Kraus-like single-mode maps, exposed for tests and oracles.
Matrix truncation_operator(int dim);
Matrix scissors_operator(double ts, int dim);
Matrix catalysis_operator(double tc, int dim);
/// M_{n,n'} for registered counts with n photons in the heralding detector
/// and n' in the other; output dimension 2.
Matrix scissors_count_operator(double ts, int n, int n_prime, int dim);

/// Apply (|0><0| + |1><1|)/sqrt(2) to `mode`, shrinking it to two levels.
HeraldedState truncate_qubit_subspace(const DensityOperator& rho, int mode);

HeraldedState qs_ideal(const DensityOperator& rho, double ts, int mode);

HeraldedState pc_ideal(const DensityOperator& rho, double tc, int mode);

/// Scissors with detectors of efficiency eta. Reduces to qs_ideal at eta = 1.
HeraldedState qs_inefficient(const DensityOperator& rho, const QsParams& params, int mode);

/// Same operation applied to both modes of a two-mode state. The returned
/// probability is the product of the two single-mode success probabilities.
HeraldedState qs_ideal_both(const DensityOperator& rho, double ts1, double ts2);
HeraldedState pc_ideal_both(const DensityOperator& rho, double tc1, double tc2);
HeraldedState qs_inefficient_both(const DensityOperator& rho, const QsParams& p1,
                                  const QsParams& p2);

/// Unnormalized characteristic function of a lossy TMSV after photon
/// catalysis on both modes, by 4-D quadrature of the Gaussian-kernel integral
/// representation. Cross-check oracle for the density-operator route.
class PcCharFn {
 public:
  struct Options {
    double radius = 6.0;
    int start_order = 12;  ///< radial/angular nodes per gamma at the first level
    int max_order = 48;
    double rel_tol = 1e-4;
  };

  PcCharFn(const TmsvParams& tmsv, const PcParams& pc);
  PcCharFn(const TmsvParams& tmsv, const PcParams& pc, Options options);

  /// Throws QuadratureError if successive refinements never agree.
  Complex operator()(Complex xi1, Complex xi2) const;

  /// Relative change between the last two refinement levels of the most
  /// recent evaluation.
  double last_error() const { return last_error_; }

 private:
  Complex integrate(Complex xi1, Complex xi2, int order) const;

  GaussianCharFn resource_;
  double tc_;
  Options options_;
  mutable double last_error_ = 0.0;
};

CharFn pc_charfn(const TmsvParams& tmsv, const PcParams& pc);

/// Characteristic function of the single-photon state, (1 - |x|^2) e^{-|x|^2/2}.
double single_photon_charfn(Complex xi);

}  // namespace dvtele
