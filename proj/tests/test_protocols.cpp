#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dvtele/protocols.hpp"
#include "test_util.hpp"

using namespace dvtele;

namespace {

ProtocolConfig make(ProtocolKind kind, Distillation d, double r_db, double loss_db) {
  ProtocolConfig c;
  c.protocol = kind;
  c.distillation = d;
  c.tmsv = TmsvParams::from_db(r_db, loss_db, loss_db);
  return c;
}

double sin2(double theta) { return std::pow(std::sin(theta / 2), 2); }
double cos2(double theta) { return std::pow(std::cos(theta / 2), 2); }

// Bloch-averaged CV-BSM fidelity at unit gain: the output is the input
// convolved with a Gaussian of variance n = (1 - T) + T e^{-2r}.
double cvbsm_unit_gain(double r, double t) {
  const double k = 1.0 + (1.0 - t) + t * std::exp(-2.0 * r);
  return 1.0 / k - 2.0 / (3.0 * k * k) + 2.0 / (3.0 * k * k * k);
}

}  // namespace

TEST(Enums, RoundTrip) {
  for (ProtocolKind k : {ProtocolKind::cv_bsm, ProtocolKind::hbsm_two_state, ProtocolKind::hbsm_four_state}) {
    EXPECT_EQ(parse_protocol(to_string(k)), k);
  }
  for (Distillation d : {Distillation::none, Distillation::qs, Distillation::pc}) {
    EXPECT_EQ(parse_distillation(to_string(d)), d);
  }
  EXPECT_EQ(parse_norm_convention("per-point"), NormConvention::per_point);
  EXPECT_EQ(parse_norm_convention("ratio"), NormConvention::ratio);
  EXPECT_THROW(parse_protocol("teleporter"), std::invalid_argument);
}

TEST(QubitSpec, Validation) {
  EXPECT_THROW((QubitSpec{-0.1, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((QubitSpec{1.0, 2 * std::numbers::pi}.validate()), std::invalid_argument);
  EXPECT_NEAR((QubitSpec{1.3, 4.0}.amplitudes().norm()), 1.0, 1e-15);
}

TEST(ProtocolConfig, Validation) {
  ProtocolConfig c = make(ProtocolKind::hbsm_four_state, Distillation::none, 5, 3);
  c.eta = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = make(ProtocolKind::hbsm_two_state, Distillation::pc, 5, 3);
  c.eta = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = make(ProtocolKind::hbsm_two_state, Distillation::qs, 5, 3);
  c.eta = 0.5;
  EXPECT_NO_THROW(c.validate());
  c.ts = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(HbsmTeleport, TwoStateVacuumResource) {
  const ProtocolConfig c = make(ProtocolKind::hbsm_two_state, Distillation::none, 0, 3);
  for (double theta : {0.4, 1.5, 2.9}) {
    const ProtocolResult r = hbsm_teleport(QubitSpec{theta, 1.0}, c);
    ASSERT_EQ(r.outcomes.size(), 2u);
    for (const OutcomeResult& o : r.outcomes) {
      EXPECT_NEAR(o.probability, sin2(theta) / 2, 1e-14);
      EXPECT_NEAR(o.fidelity, sin2(theta), 1e-14);
    }
    EXPECT_NEAR(r.p_total, sin2(theta), 1e-14);
  }
  const ProtocolResult vac = hbsm_teleport(QubitSpec{0.0, 0.0}, c);
  for (const OutcomeResult& o : vac.outcomes) {
    EXPECT_TRUE(o.null);
    EXPECT_TRUE(std::isnan(o.fidelity));
  }
}

TEST(HbsmTeleport, FourStateNearBellResource) {
  ProtocolConfig c = make(ProtocolKind::hbsm_four_state, Distillation::none, 0, 0);
  c.tmsv = TmsvParams::from_lambda(0.999, 1.0, 1.0);
  c.tmsv.dim = 2;
  for (double theta : {0.3, 1.6, 2.7}) {
    const ProtocolResult r = hbsm_teleport(QubitSpec{theta, 2.0}, c);
    ASSERT_EQ(r.outcomes.size(), 4u);
    for (const OutcomeResult& o : r.outcomes) EXPECT_NEAR(o.fidelity, 1.0, 2e-3);
  }
}

TEST(HbsmTeleport, FourStateVacuumResource) {
  const ProtocolConfig c = make(ProtocolKind::hbsm_four_state, Distillation::none, 0, 0);
  for (double theta : {0.5, 1.2, 2.2}) {
    const ProtocolResult r = hbsm_teleport(QubitSpec{theta, 0.3}, c);
    double weighted = 0.0;
    for (const OutcomeResult& o : r.outcomes) weighted += o.probability * o.fidelity;
    EXPECT_NEAR(weighted, std::pow(cos2(theta), 2) + std::pow(sin2(theta), 2), 1e-14);
    EXPECT_NEAR(r.p_bsm, 1.0, 1e-14);
  }
}

TEST(HbsmTeleport, FastPathMatchesGenericPipeline) {
  struct Case {
    ProtocolKind kind;
    Distillation d;
    double eta;
  };
  for (const Case& k : {Case{ProtocolKind::hbsm_two_state, Distillation::none, 1.0},
                        Case{ProtocolKind::hbsm_two_state, Distillation::qs, 1.0},
                        Case{ProtocolKind::hbsm_two_state, Distillation::pc, 1.0},
                        Case{ProtocolKind::hbsm_two_state, Distillation::none, 0.6},
                        Case{ProtocolKind::hbsm_two_state, Distillation::qs, 0.3},
                        Case{ProtocolKind::hbsm_four_state, Distillation::none, 1.0},
                        Case{ProtocolKind::hbsm_four_state, Distillation::qs, 1.0},
                        Case{ProtocolKind::hbsm_four_state, Distillation::pc, 1.0}}) {
    ProtocolConfig c = make(k.kind, k.d, 6.0, 2.5);
    c.tmsv.t2 = transmissivity_from_db(4.0);
    c.eta = k.eta;
    c.ts = 0.2;
    c.tc = 0.15;
    const PreparedResource res = prepare_resource(c);
    for (QubitSpec q : {QubitSpec{0.7, 0.2}, QubitSpec{2.1, 4.4}}) {
      const ProtocolResult a = hbsm_teleport(q, c, res);
      const ProtocolResult b = hbsm_teleport_generic(q, c, res);
      ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
      for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        EXPECT_EQ(a.outcomes[i].label, b.outcomes[i].label);
        EXPECT_NEAR(a.outcomes[i].probability, b.outcomes[i].probability, 1e-12);
        EXPECT_NEAR(a.outcomes[i].fidelity, b.outcomes[i].fidelity, 1e-10);
      }
      EXPECT_NEAR(a.p_total, b.p_total, 1e-12);
      EXPECT_NEAR(a.f_bar, b.f_bar, 1e-10);
    }
  }
}

TEST(AverageFidelity, TwoStateVacuumLimits) {
  ProtocolConfig c = make(ProtocolKind::hbsm_two_state, Distillation::none, 0, 0);
  const ProtocolResult r = average_fidelity(c);
  EXPECT_NEAR(r.f_bar, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.p_total, 0.5, 1e-12);
  EXPECT_NEAR(r.p_bsm, 0.5, 1e-12);
  // Per-point: E[sin^2(theta/2)] = 1/2.
  c.norm = NormConvention::per_point;
  EXPECT_NEAR(average_fidelity(c).f_bar, 0.5, 1e-8);
}

TEST(AverageFidelity, FourStateVacuumIsClassical) {
  const ProtocolConfig c = make(ProtocolKind::hbsm_four_state, Distillation::none, 0, 7);
  EXPECT_NEAR(average_fidelity(c).f_bar, 2.0 / 3.0, 1e-12);
}

TEST(AverageFidelity, FourStateScissorsNearUnity) {
  const ProtocolConfig c = make(ProtocolKind::hbsm_four_state, Distillation::qs, 0.5, 0);
  const TunedResult t = optimize_config(c);
  EXPECT_GT(t.result.f_bar, 0.95);
  EXPECT_LT(t.result.p_total, 0.05);
}

TEST(AverageFidelity, WeakResourceApproachesVacuumLimits) {
  for (double lambda : {1e-2, 1e-3}) {
    ProtocolConfig c = make(ProtocolKind::hbsm_two_state, Distillation::none, 0, 3);
    c.tmsv = TmsvParams::from_lambda(lambda, 0.5, 0.5);
    const ProtocolResult r = average_fidelity(c);
    EXPECT_NEAR(r.f_bar, 2.0 / 3.0, 5 * lambda);
    EXPECT_NEAR(r.p_total, 0.5, 5 * lambda);
  }
}

TEST(AverageFidelity, TwoStateFallsWithLoss) {
  for (double r_db : {3.0, 8.0}) {
    double previous = 2.0;
    for (int i = 0; i < 10; ++i) {
      const double f = average_fidelity(make(ProtocolKind::hbsm_two_state, Distillation::none, r_db, 2.0 * i)).f_bar;
      EXPECT_LE(f, previous + 1e-12) << r_db << ' ' << 2.0 * i;
      previous = f;
    }
  }
}

TEST(AverageFidelity, ResultsStayInUnitInterval) {
  for (ProtocolKind k : {ProtocolKind::hbsm_two_state, ProtocolKind::hbsm_four_state}) {
    for (Distillation d : {Distillation::none, Distillation::qs, Distillation::pc}) {
      for (double loss : {0.0, 6.0, 18.0}) {
        for (NormConvention n : {NormConvention::ratio, NormConvention::per_point}) {
          ProtocolConfig c = make(k, d, 9.0, loss);
          c.norm = n;
          const ProtocolResult r = average_fidelity(c);
          EXPECT_GE(r.f_bar, 0.0);
          EXPECT_LE(r.f_bar, 1.0);
          EXPECT_GE(r.p_total, 0.0);
          EXPECT_LE(r.p_total, 1.0);
        }
      }
    }
  }
}

TEST(AverageFidelity, UnitEfficiencyScissorsPath) {
  ProtocolConfig ideal = make(ProtocolKind::hbsm_two_state, Distillation::qs, 6.0, 4.0);
  ProtocolConfig almost = ideal;
  almost.eta = 1.0 - 1e-13;
  const ProtocolResult a = average_fidelity(ideal);
  const ProtocolResult b = average_fidelity(almost);
  EXPECT_NEAR(a.f_bar, b.f_bar, 1e-10);
  EXPECT_NEAR(a.p_total, b.p_total, 1e-10);
  EXPECT_NEAR(a.p_bsm, b.p_bsm, 1e-10);
}

TEST(CvBsm, VacuumResourceZeroGain) {
  const CharFn vac = CharFn::from_gaussian(lossy_tmsv_charfn(TmsvParams::from_lambda(0.0, 1.0, 1.0)));
  for (double theta : {0.0, 0.8, 2.0}) {
    EXPECT_NEAR(cvbsm_fidelity(QubitSpec{theta, 0.5}, 0.0, vac), cos2(theta), 1e-10);
  }
  ProtocolConfig c = make(ProtocolKind::cv_bsm, Distillation::none, 0, 0);
  c.g = 0.0;
  const ProtocolResult r = average_fidelity(c);
  EXPECT_NEAR(r.f_bar, 0.5, 1e-10);
  EXPECT_NEAR(r.p_total, 1.0, 1e-15);
}

TEST(CvBsm, UnitGainMatchesAnalyticFormula) {
  for (double r_db : {0.0, 5.0, 15.0}) {
    for (double loss : {0.0, 0.5, 3.0}) {
      ProtocolConfig c = make(ProtocolKind::cv_bsm, Distillation::none, r_db, loss);
      c.g = 1.0;
      const double expected = cvbsm_unit_gain(squeezing_from_db(r_db), transmissivity_from_db(loss));
      EXPECT_NEAR(average_fidelity(c).f_bar, expected, 1e-8) << r_db << ' ' << loss;
    }
  }
}

TEST(CvBsm, StrongSqueezingLossless) {
  ProtocolConfig c = make(ProtocolKind::cv_bsm, Distillation::none, 15, 0);
  c.g = 1.0;
  EXPECT_GT(average_fidelity(c).f_bar, 0.9);
}

TEST(CvBsm, KernelMatchesDirectIntegral) {
  const ProtocolConfig c = make(ProtocolKind::cv_bsm, Distillation::none, 6, 1);
  const GaussianCharFn g = lossy_tmsv_charfn(c.tmsv);
  const CvKernel k = cvbsm_kernel(CvResource(g), 0.8, disc_grid(8.0, 64, 64));
  for (QubitSpec q : {QubitSpec{0.4, 1.0}, QubitSpec{2.5, 5.0}}) {
    EXPECT_NEAR(k.fidelity(q), cvbsm_fidelity(q, 0.8, CharFn::from_gaussian(g)), 1e-10);
  }
}

TEST(CvBsm, GaussianAndDensityRoutesAgree) {
  ProtocolConfig c = make(ProtocolKind::cv_bsm, Distillation::none, 4, 1);
  c.tmsv = TmsvParams::from_db(4, 1, 1, 0.999999);
  c.g = 0.8;
  const double a = average_fidelity(c).f_bar;
  c.cv_route = CvRoute::density;
  EXPECT_NEAR(average_fidelity(c).f_bar, a, 2e-4);
}

TEST(CvBsm, ScissorsProbabilityIsTotal) {
  ProtocolConfig c = make(ProtocolKind::cv_bsm, Distillation::qs, 4, 1);
  c.g = 0.7;
  c.ts = 0.3;
  const ProtocolResult r = average_fidelity(c);
  EXPECT_NEAR(r.p_total, prepare_resource(c).p_operation, 1e-14);
  EXPECT_LT(r.p_total, 1.0);
}

TEST(Optimizer, SyntheticParabola) {
  const OptimizeResult r = optimize_parameter([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0);
  EXPECT_NEAR(r.argmax, 0.3, 1e-3);
  EXPECT_NEAR(r.value, 0.0, 1e-6);
}

// With a vacuum resource the CV-BSM reduces to heterodyne measure-and-prepare:
// F(g) = 1/(3a) + (1+g)^2/(6a^2) + 2g^2/(3a^3), a = 1 + g^2.
double vacuum_cv_fidelity(double g) {
  const double a = 1 + g * g;
  return 1 / (3 * a) + (1 + g) * (1 + g) / (6 * a * a) + 2 * g * g / (3 * a * a * a);
}

TEST(CvBsm, VacuumResourceMeasureAndPrepare) {
  ProtocolConfig c = make(ProtocolKind::cv_bsm, Distillation::none, 0, 0);
  for (double g : {0.0, 0.25, 0.5, 1.0, 1.5}) {
    c.g = g;
    EXPECT_NEAR(average_fidelity(c).f_bar, vacuum_cv_fidelity(g), 1e-8) << g;
  }
}

TEST(Optimizer, VacuumCvFindsMeasureAndPrepareOptimum) {
  double best_g = 0.0;
  for (double g = 0.0; g <= 1.5; g += 1e-5) {
    if (vacuum_cv_fidelity(g) > vacuum_cv_fidelity(best_g)) best_g = g;
  }
  const TunedResult o = optimize_config(make(ProtocolKind::cv_bsm, Distillation::none, 0, 0));
  EXPECT_NEAR(o.config.g, best_g, 1e-3);
  EXPECT_NEAR(o.result.f_bar, vacuum_cv_fidelity(best_g), 1e-7);
  EXPECT_LT(o.result.f_bar, 2.0 / 3.0);
}

TEST(Optimizer, ScissorsMatchesExhaustiveScan) {
  ProtocolConfig c = make(ProtocolKind::hbsm_four_state, Distillation::qs, 0, 0);
  c.tmsv = TmsvParams::from_lambda(0.5, 1.0, 1.0);
  AverageOptions quick;
  quick.check_tol = 0.0;
  double best = -1.0;
  double best_ts = 0.0;
  for (double ts = kTsMin; ts <= kTsMax + 1e-12; ts += 1e-3) {
    ProtocolConfig t = c;
    t.ts = ts;
    const double f = average_fidelity(t, quick).f_bar;
    if (f > best) {
      best = f;
      best_ts = ts;
    }
  }
  const TunedResult tuned = optimize_config(c);
  EXPECT_NEAR(tuned.result.f_bar, best, 1e-6);
  EXPECT_NEAR(tuned.config.ts, best_ts, 2e-3);
}

TEST(ClassicalLimit, ClosedFormAndQuadrature) {
  EXPECT_NEAR(classical_limit(1.0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(classical_limit(0.0), 0.5, 1e-15);
  EXPECT_NEAR(classical_limit(0.5), 7.0 / 12.0, 1e-15);
  EXPECT_NEAR(classical_limit(0.9), 0.65, 1e-15);
  for (int i = 0; i <= 10; ++i) {
    EXPECT_NEAR(classical_limit_bruteforce(0.1 * i), classical_limit(0.1 * i), 1e-10);
  }
  EXPECT_THROW(classical_limit(1.1), std::invalid_argument);
}
