// Hybrid Bell-state measurements between a single-photon qubit mode and one
// mode of a continuous-variable resource.
//
// Joint states handed to the analyzers are ordered [in, 1', rest...]: mode 0
// is the input qubit (two levels), mode 1 the coupled resource mode.

#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "dvtele/fock.hpp"

namespace dvtele {

enum class BellState { phi_plus, phi_minus, psi_plus, psi_minus };

inline constexpr std::array<BellState, 4> kBellStates = {
    BellState::phi_plus, BellState::phi_minus, BellState::psi_plus, BellState::psi_minus};

std::string_view to_string(BellState state);

/// 2x2 amplitude table B(i, a) of the Bell state over |i a>, i, a in {0, 1}.
Eigen::Matrix2d bell_amplitudes(BellState state);

/// Bell ket over an (in, 1') pair whose second mode has `resource_dim`
/// levels; levels above |1> carry zero amplitude.
KetVector bell_ket(BellState state, int resource_dim = 2);

/// Correction applied to the output mode after each outcome:
/// Phi+ -> sigma_I, Phi- -> sigma_Z, Psi+ -> sigma_X, Psi- -> sigma_ZX,
/// with sigma_ZX = |0><1| - |1><0|. Levels above |1> are left untouched.
Matrix correction_unitary(BellState state, int dim);

struct BellOutcome {
  BellState label;
  double probability = 0.0;
  std::optional<DensityOperator> conditional;  ///< state of the rest, renormalized

  bool null() const { return !conditional.has_value(); }
};

struct BellMeasurement {
  std::vector<BellOutcome> outcomes;

  double success_probability() const;
  const BellOutcome& at(BellState state) const;
};

/// Analyzer that heralds only Psi+ and Psi-: a 50:50 beam splitter and two
/// single-photon detectors, success on exactly one click.
BellMeasurement two_state_hbsm(const DensityOperator& joint);

/// Idealized analyzer resolving all four Bell states. Mode 1' must already be
/// two-level.
BellMeasurement four_state_projection(const DensityOperator& joint);

/// Loss channel with transmissivity eta modelling detector efficiency.
std::vector<OperatorMatrix> detector_loss_map(double eta, int dim);

/// Two-state analyzer with detectors of efficiency eta, modelled as loss on
/// modes `in` and 1' followed by ideal detection.
BellMeasurement two_state_hbsm_inefficient(const DensityOperator& joint, double eta);

// ---------------------------------------------------------------------------
// Beam-splitter array analyzer with entangled ancillas.

/// Default largest array order accepted by array_analyzer.
inline constexpr int kDefaultMaxArrayOrder = 3;

/// S^(N) = S^(1) (x) S^(N-1), S^(1) = [[1, 1], [-1, 1]] / sqrt 2.
Eigen::MatrixXd array_matrix(int order);

/// |Xi^(N)> = (x)_{j=1}^{N-1} (|0...0> + |1...1>)/sqrt 2 over 2^j modes, as a
/// ket over 2^N - 2 two-level modes.
KetVector array_ancilla(int order);

double permanent(const Eigen::MatrixXd& a);

/// Amplitude <m| prod_i (sum_j s_ij a_j^dag)^{n_i} / sqrt(n_i!) |0>.
double detection_amplitude(const Eigen::MatrixXd& s, const std::vector<int>& counts,
                           const std::vector<int>& occupation);

enum class OutcomeGroup { vacuum, doubly_occupied, phi_plus, phi_minus, psi_plus, psi_minus };

std::string_view to_string(OutcomeGroup group);

struct OutcomeTuple {
  std::vector<int> counts;
  int n_sum() const;
};

struct ArrayOutcome {
  OutcomeTuple tuple;
  /// Unnormalized projected vector over |00>, |01>, |10>, |11> of modes 1, 2.
  Eigen::Vector4d projected;
  OutcomeGroup group;
  /// Norm of the part of `projected` not explained by its group's state.
  double residual = 0.0;
};

class ArraySpec {
 public:
  explicit ArraySpec(int order, int max_order = kDefaultMaxArrayOrder);

  int order() const { return order_; }
  int num_modes() const { return 1 << order_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const KetVector& ancilla() const { return ancilla_; }
  /// Every outcome tuple with a nonzero projected vector.
  const std::vector<ArrayOutcome>& outcomes() const { return outcomes_; }

 private:
  void enumerate();

  int order_;
  Eigen::MatrixXd matrix_;
  KetVector ancilla_;
  std::vector<ArrayOutcome> outcomes_;
};

struct GroupProbabilities {
  double vacuum = 0.0;
  double doubly_occupied = 0.0;
  double phi_plus = 0.0;
  double phi_minus = 0.0;
  double psi_plus = 0.0;
  double psi_minus = 0.0;

  double bell_total() const { return phi_plus + phi_minus + psi_plus + psi_minus; }
  double total() const { return vacuum + doubly_occupied + bell_total(); }
};

struct ArrayReport {
  GroupProbabilities enumerated;
  GroupProbabilities closed_form;
  double p_bsm = 0.0;     ///< from the enumeration
  double p_bsm_formula = 0.0;  ///< 1 - P_id / 2^{N-1}
  double max_residual = 0.0;
  std::size_t num_outcomes = 0;
};

/// rho12 is a state of two two-level modes (qubit, truncated resource mode).
ArrayReport array_analyzer(const ArraySpec& spec, const DensityOperator& rho12);

/// Closed-form group probabilities for an order-N array.
GroupProbabilities array_closed_form(int order, const DensityOperator& rho12);

/// Two-state analyzer evaluated at the detector level: one-click outcomes of
/// the 50:50 splitter projected with the linear-optics amplitudes.
BellMeasurement two_state_detector_level(const DensityOperator& joint);

}  // namespace dvtele
