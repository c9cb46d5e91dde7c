// Teleportation pipelines: CV-BSM with displacement correction and H-BSM
// with Pauli-type corrections, Bloch-sphere averaging, single-parameter
// optimization and the classical measure-and-prepare limit.

#pragma once

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dvtele/fock.hpp"
#include "dvtele/hbsm.hpp"
#include "dvtele/nongauss.hpp"
#include "dvtele/quadrature.hpp"
#include "dvtele/resource.hpp"

namespace dvtele {

enum class ProtocolKind { cv_bsm, hbsm_two_state, hbsm_four_state };
enum class Distillation { none, qs, pc };
/// How F-bar is normalized for conditional protocols.
///   ratio:     E[sum_k P_k F_k] / E[P_BSM]
///   per_point: E[sum_k P_k F_k / P_BSM]
enum class NormConvention { ratio, per_point };
/// Characteristic function of the undistilled CV-BSM resource.
enum class CvRoute { gaussian, density };

std::string_view to_string(ProtocolKind kind);
std::string_view to_string(Distillation d);
std::string_view to_string(NormConvention n);
ProtocolKind parse_protocol(std::string_view s);
Distillation parse_distillation(std::string_view s);
NormConvention parse_norm_convention(std::string_view s);

/// Raised when a heralded step of the pipeline never succeeds.
class NullOutcomeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QubitSpec {
  double theta = 0.0;
  double phi = 0.0;

  void validate() const;
  /// Amplitudes (cos(theta/2), e^{i phi} sin(theta/2)).
  Eigen::Vector2cd amplitudes() const;
  /// The qubit embedded in the lowest two levels of a `dim`-level mode.
  KetVector ket(int dim = 2) const;
};

struct ProtocolConfig {
  ProtocolKind protocol = ProtocolKind::hbsm_two_state;
  Distillation distillation = Distillation::none;
  TmsvParams tmsv;
  double g = 1.0;     ///< displacement gain, CV-BSM only
  double ts = 0.25;   ///< scissors transmissivity
  double tc = 0.1;    ///< catalysis transmissivity
  double eta = 1.0;   ///< detector efficiency, two-state analyzer and scissors
  NormConvention norm = NormConvention::ratio;
  CvRoute cv_route = CvRoute::gaussian;

  void validate() const;
};

struct OutcomeResult {
  BellState label;
  double probability = 0.0;
  double fidelity = 0.0;  ///< NaN for a null outcome
  bool null = false;
};

struct ProtocolResult {
  std::vector<OutcomeResult> outcomes;
  double p_bsm = 0.0;
  double p_operation = 1.0;
  double p_total = 0.0;
  double f_bar = 0.0;  ///< averaged (or single-point) fidelity
  double trace_mass = 1.0;
  double quadrature_error = 0.0;  ///< |coarse - fine| of the last doubled check
};

/// Resource state after distillation and truncation, independent of the
/// input qubit. Modes are [1', 2'].
struct PreparedResource {
  DensityOperator state;
  double p_operation = 1.0;
  double trace_mass = 1.0;
};

PreparedResource prepare_resource(const ProtocolConfig& cfg);

/// H-BSM teleportation of one input qubit.
ProtocolResult hbsm_teleport(const QubitSpec& q, const ProtocolConfig& cfg);
ProtocolResult hbsm_teleport(const QubitSpec& q, const ProtocolConfig& cfg,
                             const PreparedResource& resource);

/// Same pipeline through the explicit tensor product |in><in| (x) rho and
/// the analyzer functions. Slower; kept as a cross-check.
ProtocolResult hbsm_teleport_generic(const QubitSpec& q, const ProtocolConfig& cfg,
                                     const PreparedResource& resource);

struct AverageOptions {
  int n_theta = 16;
  int n_phi = 16;
  double check_tol = 1e-8;  ///< doubled-node agreement; <= 0 disables the check
  int max_theta_nodes = 4096;  ///< refinement ceiling for slowly converging integrands
};

/// Bloch-averaged fidelity and success probability. Dispatches on the
/// protocol; CV-BSM uses average_fidelity_cvbsm.
ProtocolResult average_fidelity(const ProtocolConfig& cfg, const AverageOptions& opts = {});

// ---------------------------------------------------------------------------
// CV-BSM

struct CvGridOptions {
  double radius = 8.0;
  int nodes = 64;           ///< radial and angular nodes of the polar rule
  double check_tol = 1e-6;  ///< doubled-node agreement; <= 0 disables the check
};

/// F = (1/pi) int d^2 xi chi_in(xi) chi_in(-g xi) chi_res(-xi, -g xi*).
double cvbsm_fidelity(const QubitSpec& q, double g, const CharFn& chi_resource,
                      const CvGridOptions& opts = {});

/// Resource characteristic function sampled on a polar grid for a given
/// gain. Gaussian resources are evaluated in closed form; density resources
/// through real-axis displacement blocks and phase factors.
class CvResource {
 public:
  explicit CvResource(GaussianCharFn gaussian);
  explicit CvResource(const DensityOperator& rho, double radius = 8.0);

  /// chi_res(-xi, -g xi*) at each node.
  std::vector<Complex> sample(const std::vector<DiscNode>& grid, double g) const;

 private:
  std::optional<GaussianCharFn> gaussian_;
  std::shared_ptr<const DensityCharFn> density_;
};

/// Kernel I(g) with F(theta, phi) = sum rho_ij rho_kl I[j][i][l][k] for the
/// qubit density rho. Lets one grid pass serve the whole Bloch sphere.
struct CvKernel {
  std::array<Complex, 16> entries{};

  Complex at(int j, int i, int l, int k) const { return entries[((j * 2 + i) * 2 + l) * 2 + k]; }
  double fidelity(const QubitSpec& q) const;
};

CvKernel cvbsm_kernel(const CvResource& res, double g, const std::vector<DiscNode>& grid);

/// Bloch-averaged CV-BSM fidelity. p_total is the distillation probability
/// (one when undistilled).
ProtocolResult average_fidelity_cvbsm(const ProtocolConfig& cfg, const CvGridOptions& grid = {},
                                      const AverageOptions& opts = {});

/// Builds the CV resource (Gaussian or density route) for a configuration.
struct CvSetup {
  CvResource resource;
  double p_operation;
  double trace_mass;
};
CvSetup prepare_cv_resource(const ProtocolConfig& cfg);

// ---------------------------------------------------------------------------
// Optimization and limits

struct OptimizeOptions {
  int grid_points = 25;
  double tol = 1e-3;
};

struct OptimizeResult {
  double argmax = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Coarse grid scan followed by golden-section refinement around the best
/// grid point. Deterministic.
OptimizeResult optimize_parameter(const std::function<double(double)>& objective, double lo,
                                  double hi, const OptimizeOptions& opts = {});

inline constexpr double kGainMin = 0.0;
inline constexpr double kGainMax = 1.5;
inline constexpr double kTsMin = 0.001;
inline constexpr double kTsMax = 0.49;
inline constexpr double kTcMin = 0.01;
inline constexpr double kTcMax = 0.24;

/// Which free parameters to tune before reporting.
struct TuneRequest {
  bool gain = true;
  bool distillation = true;
};

struct TunedResult {
  ProtocolConfig config;  ///< with the optimized parameters filled in
  ProtocolResult result;
};

/// Optimizes g (CV-BSM) and T_s / T_c (when distilling) sequentially,
/// maximizing F-bar; then evaluates the tuned configuration with the full
/// doubled-node checks.
TunedResult optimize_config(const ProtocolConfig& cfg, const TuneRequest& what = {},
                            const OptimizeOptions& opts = {});

/// (3 + eta) / 6.
double classical_limit(double eta);

/// Bloch average of cos^2(theta/2) P_0 + sin^2(theta/2) P_1 with P_0, P_1
/// from the detector loss map.
double classical_limit_bruteforce(double eta);

}  // namespace dvtele
