#include "dvtele/hbsm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <numbers>
#include <sstream>

#include "dvtele/resource.hpp"

namespace dvtele {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

void check_joint(const DensityOperator& joint) {
  if (joint.space().num_modes() < 2) {
    throw std::invalid_argument("Bell analyzers need at least the (in, 1') mode pair");
  }
  if (joint.space().dim(0) != 2) throw std::invalid_argument("input qubit mode must be two-level");
}

BellOutcome measure(const DensityOperator& joint, BellState state) {
  Projection p = project(joint, bell_ket(state, joint.space().dim(1)), {0, 1});
  return BellOutcome{state, p.probability, std::move(p.conditional)};
}

Eigen::Vector4d bell_vector(BellState state) {
  const Eigen::Matrix2d b = bell_amplitudes(state);
  return Eigen::Vector4d(b(0, 0), b(0, 1), b(1, 0), b(1, 1));
}

// Every composition of at most `max_sum` photons over `modes` detectors.
void for_each_tuple(int modes, int max_sum, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> counts(modes, 0);
  std::function<void(int, int)> rec = [&](int mode, int remaining) {
    if (mode == modes) {
      fn(counts);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      counts[mode] = k;
      rec(mode + 1, remaining - k);
    }
    counts[mode] = 0;
  };
  rec(0, max_sum);
}

double sqrt_factorial_product(const std::vector<int>& v) {
  double log_sum = 0.0;
  for (int k : v) log_sum += std::lgamma(k + 1.0);
  return std::exp(0.5 * log_sum);
}

}  // namespace

std::string_view to_string(BellState state) {
  switch (state) {
    case BellState::phi_plus: return "phi+";
    case BellState::phi_minus: return "phi-";
    case BellState::psi_plus: return "psi+";
    case BellState::psi_minus: return "psi-";
  }
  return "?";
}

Eigen::Matrix2d bell_amplitudes(BellState state) {
  Eigen::Matrix2d b = Eigen::Matrix2d::Zero();
  switch (state) {
    case BellState::phi_plus: b << kInvSqrt2, 0, 0, kInvSqrt2; break;
    case BellState::phi_minus: b << kInvSqrt2, 0, 0, -kInvSqrt2; break;
    case BellState::psi_plus: b << 0, kInvSqrt2, kInvSqrt2, 0; break;
    case BellState::psi_minus: b << 0, kInvSqrt2, -kInvSqrt2, 0; break;
  }
  return b;
}

KetVector bell_ket(BellState state, int resource_dim) {
  const Eigen::Matrix2d b = bell_amplitudes(state);
  Vector v = Vector::Zero(2 * resource_dim);
  for (int i = 0; i < 2; ++i) {
    for (int a = 0; a < std::min(2, resource_dim); ++a) v(i * resource_dim + a) = b(i, a);
  }
  return KetVector(ModeSpace({2, resource_dim}), std::move(v));
}

Matrix correction_unitary(BellState state, int dim) {
  Matrix u = Matrix::Identity(dim, dim);
  if (dim < 2) {
    if (state == BellState::psi_plus || state == BellState::psi_minus) {
      throw std::invalid_argument("sigma_X style corrections need a two-level output mode");
    }
    return u;
  }
  switch (state) {
    case BellState::phi_plus: break;
    case BellState::phi_minus: u(1, 1) = -1.0; break;
    case BellState::psi_plus:
      u(0, 0) = 0.0; u(1, 1) = 0.0; u(0, 1) = 1.0; u(1, 0) = 1.0;
      break;
    case BellState::psi_minus:
      u(0, 0) = 0.0; u(1, 1) = 0.0; u(0, 1) = 1.0; u(1, 0) = -1.0;
      break;
  }
  return u;
}

double BellMeasurement::success_probability() const {
  double p = 0.0;
  for (const auto& o : outcomes) p += o.probability;
  return p;
}

const BellOutcome& BellMeasurement::at(BellState state) const {
  for (const auto& o : outcomes) {
    if (o.label == state) return o;
  }
  throw std::out_of_range("Bell outcome not resolved by this analyzer");
}

BellMeasurement two_state_hbsm(const DensityOperator& joint) {
  check_joint(joint);
  BellMeasurement m;
  m.outcomes.push_back(measure(joint, BellState::psi_plus));
  m.outcomes.push_back(measure(joint, BellState::psi_minus));
  return m;
}

BellMeasurement four_state_projection(const DensityOperator& joint) {
  check_joint(joint);
  if (joint.space().dim(1) != 2) {
    throw std::invalid_argument("four-state projection needs a two-level resource mode");
  }
  BellMeasurement m;
  for (BellState s : kBellStates) m.outcomes.push_back(measure(joint, s));
  return m;
}

std::vector<OperatorMatrix> detector_loss_map(double eta, int dim) {
  return loss_kraus(eta, dim);
}

BellMeasurement two_state_hbsm_inefficient(const DensityOperator& joint, double eta) {
  check_joint(joint);
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("detector efficiency must be in (0, 1]");
  if (eta == 1.0) return two_state_hbsm(joint);
  DensityOperator eq = apply_kraus(joint, detector_loss_map(eta, joint.space().dim(0)), 0);
  eq = apply_kraus(eq, detector_loss_map(eta, joint.space().dim(1)), 1);
  return two_state_hbsm(eq);
}

// ---------------------------------------------------------------------------
// Linear optics

Eigen::MatrixXd array_matrix(int order) {
  if (order < 1) throw std::invalid_argument("array order must be >= 1");
  Eigen::Matrix2d s1;
  s1 << kInvSqrt2, kInvSqrt2, -kInvSqrt2, kInvSqrt2;
  Eigen::MatrixXd s = s1;
  for (int k = 2; k <= order; ++k) {
    // Kronecker product S^(1) (x) S^(k-1).
    Eigen::MatrixXd next(2 * s.rows(), 2 * s.cols());
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) next.block(i * s.rows(), j * s.cols(), s.rows(), s.cols()) = s1(i, j) * s;
    }
    s = std::move(next);
  }
  return s;
}

KetVector array_ancilla(int order) {
  if (order < 2) throw std::invalid_argument("ancilla state needs array order >= 2");
  const int modes = (1 << order) - 2;
  Vector amps = Vector::Zero(Eigen::Index{1} << modes);
  // Each block j occupies 2^j consecutive modes, all empty or all occupied.
  const int blocks = order - 1;
  const double amp = std::pow(kInvSqrt2, blocks);
  for (int pattern = 0; pattern < (1 << blocks); ++pattern) {
    std::size_t index = 0;
    for (int j = 1; j <= blocks; ++j) {
      const int bit = (pattern >> (j - 1)) & 1;
      for (int k = 0; k < (1 << j); ++k) index = (index << 1) | static_cast<std::size_t>(bit);
    }
    amps(static_cast<Eigen::Index>(index)) = amp;
  }
  return KetVector(ModeSpace(std::vector<int>(modes, 2)), std::move(amps));
}

double permanent(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw std::invalid_argument("permanent needs a square matrix");
  if (n == 0) return 1.0;
  // Ryser's formula with Gray-code updates of the row sums.
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  std::uint64_t gray_prev = 0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const std::uint64_t changed = gray ^ gray_prev;
    const int col = std::countr_zero(changed);
    if (gray & changed) {
      row_sums += a.col(col);
    } else {
      row_sums -= a.col(col);
    }
    gray_prev = gray;
    const int size = std::popcount(gray);
    const double prod = row_sums.prod();
    total += (size % 2 == 0) ? prod : -prod;
  }
  return (n % 2 == 0) ? total : -total;
}

double detection_amplitude(const Eigen::MatrixXd& s, const std::vector<int>& counts,
                           const std::vector<int>& occupation) {
  int n_sum = 0;
  int m_sum = 0;
  for (int k : counts) n_sum += k;
  for (int k : occupation) m_sum += k;
  if (n_sum != m_sum) return 0.0;
  std::vector<int> rows;
  std::vector<int> cols;
  for (std::size_t i = 0; i < counts.size(); ++i) rows.insert(rows.end(), counts[i], static_cast<int>(i));
  for (std::size_t j = 0; j < occupation.size(); ++j) cols.insert(cols.end(), occupation[j], static_cast<int>(j));
  Eigen::MatrixXd sub(n_sum, n_sum);
  for (int i = 0; i < n_sum; ++i) {
    for (int j = 0; j < n_sum; ++j) sub(i, j) = s(rows[i], cols[j]);
  }
  return permanent(sub) / (sqrt_factorial_product(counts) * sqrt_factorial_product(occupation));
}

std::string_view to_string(OutcomeGroup group) {
  switch (group) {
    case OutcomeGroup::vacuum: return "00";
    case OutcomeGroup::doubly_occupied: return "11";
    case OutcomeGroup::phi_plus: return "phi+";
    case OutcomeGroup::phi_minus: return "phi-";
    case OutcomeGroup::psi_plus: return "psi+";
    case OutcomeGroup::psi_minus: return "psi-";
  }
  return "?";
}

int OutcomeTuple::n_sum() const {
  int s = 0;
  for (int k : counts) s += k;
  return s;
}

ArraySpec::ArraySpec(int order, int max_order)
    : order_(order),
      matrix_(array_matrix(std::max(order, 1))),
      ancilla_(array_ancilla(std::max(order, 2))) {
  if (order < 2) throw std::invalid_argument("array analyzer needs order N >= 2");
  if (order > max_order) {
    std::ostringstream msg;
    msg << "array order " << order << " exceeds the configured maximum " << max_order;
    throw std::invalid_argument(msg.str());
  }
  enumerate();
}

void ArraySpec::enumerate() {
  const int modes = num_modes();
  const int ancilla_modes = modes - 2;
  const Vector& xi = ancilla_.amplitudes();
  std::vector<std::pair<std::vector<int>, double>> patterns;
  for (Eigen::Index idx = 0; idx < xi.size(); ++idx) {
    if (xi(idx) == Complex{}) continue;
    std::vector<int> occ(ancilla_modes);
    for (int k = 0; k < ancilla_modes; ++k) occ[k] = static_cast<int>((idx >> (ancilla_modes - 1 - k)) & 1);
    patterns.emplace_back(std::move(occ), xi(idx).real());
  }

  for_each_tuple(modes, modes, [&](const std::vector<int>& counts) {
    const int n_sum = std::accumulate(counts.begin(), counts.end(), 0);
    Eigen::Vector4d zeta = Eigen::Vector4d::Zero();
    std::vector<int> occupation(modes, 0);
    for (int m1 = 0; m1 < 2; ++m1) {
      for (int m2 = 0; m2 < 2; ++m2) {
        for (const auto& [pattern, weight] : patterns) {
          const int p_sum = std::accumulate(pattern.begin(), pattern.end(), 0);
          if (m1 + m2 + p_sum != n_sum) continue;
          occupation[0] = m1;
          occupation[1] = m2;
          std::copy(pattern.begin(), pattern.end(), occupation.begin() + 2);
          zeta(2 * m1 + m2) += weight * detection_amplitude(matrix_, counts, occupation);
        }
      }
    }
    if (zeta.norm() < 1e-13) return;

    ArrayOutcome out{OutcomeTuple{counts}, zeta, OutcomeGroup::vacuum, 0.0};
    const auto classify = [&](Eigen::Vector4d target, OutcomeGroup group) {
      const double ov = target.dot(zeta);
      return std::make_pair(std::abs(ov), std::make_pair(group, (zeta - ov * target).norm()));
    };
    std::vector<std::pair<double, std::pair<OutcomeGroup, double>>> candidates;
    if (n_sum == 0) {
      candidates.push_back(classify(Eigen::Vector4d(1, 0, 0, 0), OutcomeGroup::vacuum));
    } else if (n_sum == modes) {
      candidates.push_back(classify(Eigen::Vector4d(0, 0, 0, 1), OutcomeGroup::doubly_occupied));
    } else if (n_sum % 2 == 0) {
      candidates.push_back(classify(bell_vector(BellState::phi_plus), OutcomeGroup::phi_plus));
      candidates.push_back(classify(bell_vector(BellState::phi_minus), OutcomeGroup::phi_minus));
    } else {
      candidates.push_back(classify(bell_vector(BellState::psi_plus), OutcomeGroup::psi_plus));
      candidates.push_back(classify(bell_vector(BellState::psi_minus), OutcomeGroup::psi_minus));
    }
    const auto best = *std::max_element(candidates.begin(), candidates.end(),
                                        [](const auto& a, const auto& b) { return a.first < b.first; });
    out.group = best.second.first;
    out.residual = best.second.second;
    outcomes_.push_back(std::move(out));
  });
}

GroupProbabilities array_closed_form(int order, const DensityOperator& rho12) {
  if (!(rho12.space() == ModeSpace({2, 2}))) throw std::invalid_argument("rho12 must be two qubits");
  const Matrix& r = rho12.matrix();
  const double scale = std::pow(2.0, order - 1);
  const auto expect = [&](BellState s) {
    const Eigen::Vector4d v = bell_vector(s);
    return (v.transpose().cast<Complex>() * r * v.cast<Complex>())(0, 0).real();
  };
  GroupProbabilities g;
  g.vacuum = r(0, 0).real() / scale;
  g.doubly_occupied = r(3, 3).real() / scale;
  g.phi_plus = (1.0 - 1.0 / scale) * expect(BellState::phi_plus);
  g.phi_minus = (1.0 - 1.0 / scale) * expect(BellState::phi_minus);
  g.psi_plus = expect(BellState::psi_plus);
  g.psi_minus = expect(BellState::psi_minus);
  return g;
}

ArrayReport array_analyzer(const ArraySpec& spec, const DensityOperator& rho12) {
  if (!(rho12.space() == ModeSpace({2, 2}))) throw std::invalid_argument("rho12 must be two qubits");
  ArrayReport report;
  const Matrix& r = rho12.matrix();
  for (const ArrayOutcome& o : spec.outcomes()) {
    const Eigen::Vector4cd z = o.projected.cast<Complex>();
    const double p = (z.adjoint() * r * z)(0, 0).real();
    switch (o.group) {
      case OutcomeGroup::vacuum: report.enumerated.vacuum += p; break;
      case OutcomeGroup::doubly_occupied: report.enumerated.doubly_occupied += p; break;
      case OutcomeGroup::phi_plus: report.enumerated.phi_plus += p; break;
      case OutcomeGroup::phi_minus: report.enumerated.phi_minus += p; break;
      case OutcomeGroup::psi_plus: report.enumerated.psi_plus += p; break;
      case OutcomeGroup::psi_minus: report.enumerated.psi_minus += p; break;
    }
    report.max_residual = std::max(report.max_residual, o.residual);
  }
  report.num_outcomes = spec.outcomes().size();
  report.closed_form = array_closed_form(spec.order(), rho12);
  report.p_bsm = report.enumerated.bell_total();
  const double p_id = r(0, 0).real() + r(3, 3).real();
  report.p_bsm_formula = 1.0 - p_id / std::pow(2.0, spec.order() - 1);
  return report;
}

BellMeasurement two_state_detector_level(const DensityOperator& joint) {
  check_joint(joint);
  const int d = joint.space().dim(1);
  const Eigen::MatrixXd s1 = array_matrix(1);
  BellMeasurement m;
  // A click in port 0 projects onto psi+, a click in port 1 onto psi-.
  const std::pair<std::vector<int>, BellState> ports[] = {{{1, 0}, BellState::psi_plus},
                                                          {{0, 1}, BellState::psi_minus}};
  for (const auto& [counts, label] : ports) {
    Vector zeta = Vector::Zero(2 * d);
    for (int m0 = 0; m0 < 2; ++m0) {
      for (int m1 = 0; m1 < d; ++m1) {
        zeta(m0 * d + m1) = detection_amplitude(s1, counts, {m0, m1});
      }
    }
    Projection p = project(joint, KetVector(ModeSpace({2, d}), zeta), {0, 1});
    m.outcomes.push_back(BellOutcome{label, p.probability, std::move(p.conditional)});
  }
  return m;
}

}  // namespace dvtele
