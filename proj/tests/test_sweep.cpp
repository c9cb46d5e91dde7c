#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dvtele/sweep.hpp"

using namespace dvtele;

namespace {

std::string to_csv(const std::vector<ResultRecord>& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

std::string to_json(const std::vector<ResultRecord>& t) {
  std::ostringstream out;
  write_json(out, t);
  return out.str();
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.protocol = ProtocolKind::hbsm_two_state;
  c.r_db = {2.0, 6.0};
  c.loss_db = {0.0, 3.0, 9.0};
  c.eta = {1.0};
  return c;
}

}  // namespace

TEST(Grid, ListsAndRanges) {
  EXPECT_EQ(parse_grid("1, 2.5,4"), (std::vector<double>{1.0, 2.5, 4.0}));
  EXPECT_EQ(parse_grid("7"), (std::vector<double>{7.0}));
  const auto r = parse_grid("0:0.1:1");
  ASSERT_EQ(r.size(), 11u);
  EXPECT_NEAR(r.back(), 1.0, 1e-12);
  EXPECT_EQ(parse_grid("1:1:15").size(), 15u);
  EXPECT_TRUE(parse_grid("").empty());
  EXPECT_THROW(parse_grid("0:0:1"), std::invalid_argument);
  EXPECT_THROW(parse_grid("3:1:1"), std::invalid_argument);
  EXPECT_THROW(parse_grid("1,x"), std::invalid_argument);
  EXPECT_THROW(parse_grid("1:2"), std::invalid_argument);
}

TEST(SweepConfig, ValidationHappensBeforeCompute) {
  SweepConfig c = small_sweep();
  c.r_db.clear();
  EXPECT_THROW(run_sweep(c), std::invalid_argument);
  c = small_sweep();
  c.loss_db = {-1.0};
  EXPECT_THROW(run_sweep(c), std::invalid_argument);
  c = small_sweep();
  c.eta = {0.0};
  EXPECT_THROW(run_sweep(c), std::invalid_argument);
  c = small_sweep();
  c.loss2_db = std::vector<double>{};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SweepConfig, KeyValueDocumentAndOverrides) {
  std::istringstream doc(
      "# two-state scan\n"
      "protocol = hbsm_two_state\n"
      "distillation = qs   # tuned scissors\n"
      "r_db = 1:1:3\n"
      "loss_db = 0, 5\n"
      "eta = 0.5,1\n"
      "optimize = true\n"
      "norm = both\n"
      "format = json\n"
      "threads = 2\n");
  SweepConfig c = load_sweep_config(doc);
  EXPECT_EQ(c.protocol, ProtocolKind::hbsm_two_state);
  EXPECT_EQ(c.distillation, Distillation::qs);
  EXPECT_EQ(c.r_db.size(), 3u);
  EXPECT_EQ(c.loss_db, (std::vector<double>{0.0, 5.0}));
  EXPECT_TRUE(c.optimize);
  EXPECT_EQ(c.norms.size(), 2u);
  EXPECT_EQ(c.format, OutputFormat::json);
  EXPECT_EQ(c.num_points(), 2u * 3u * 2u * 2u);
  apply_setting(c, "distillation", "none");
  apply_setting(c, "norm", "per-point");
  EXPECT_EQ(c.distillation, Distillation::none);
  EXPECT_EQ(c.norms, (std::vector<NormConvention>{NormConvention::per_point}));

  std::istringstream bad("protocol hbsm\n");
  EXPECT_THROW(load_sweep_config(bad), std::invalid_argument);
  std::istringstream unknown("colour = blue\n");
  EXPECT_THROW(load_sweep_config(unknown), std::invalid_argument);
}

TEST(RunPoint, AnalyticPoints) {
  SweepConfig c;
  c.protocol = ProtocolKind::hbsm_two_state;
  const ResultRecord two = run_point(c, GridPoint{0.0, 4.0, 4.0, 1.0, NormConvention::ratio});
  ASSERT_TRUE(two.ok()) << two.error;
  EXPECT_NEAR(two.f_bar, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(two.p_total_avg, 0.5, 1e-12);
  EXPECT_NEAR(two.classical_limit, 2.0 / 3.0, 1e-15);
  EXPECT_TRUE(std::isnan(two.g));

  c.protocol = ProtocolKind::hbsm_four_state;
  const ResultRecord four = run_point(c, GridPoint{0.0, 0.0, 0.0, 1.0, NormConvention::ratio});
  EXPECT_NEAR(four.f_bar, 2.0 / 3.0, 1e-12);

  c.protocol = ProtocolKind::cv_bsm;
  c.optimize = true;
  const ResultRecord cv = run_point(c, GridPoint{0.0, 0.0, 0.0, 1.0, NormConvention::ratio});
  // Vacuum resource: heterodyne measure-and-prepare, optimum of
  // 1/(3a) + (1+g)^2/(6a^2) + 2g^2/(3a^3) with a = 1 + g^2.
  EXPECT_NEAR(cv.g, 0.408809, 1e-3);
  EXPECT_NEAR(cv.f_bar, 0.598521699, 1e-6);
}

TEST(RunPoint, FailuresAreRecordedInRow) {
  SweepConfig c;
  c.protocol = ProtocolKind::hbsm_four_state;
  c.eta = {0.5, 1.0};
  const auto table = run_sweep(c);
  ASSERT_EQ(table.size(), 2u);
  EXPECT_FALSE(table[0].ok());
  EXPECT_TRUE(std::isnan(table[0].f_bar));
  EXPECT_TRUE(table[1].ok());
}

TEST(RunSweep, LexicographicOrderIndependentOfThreads) {
  SweepConfig c = small_sweep();
  c.loss2_db = std::vector<double>{0.0, 1.0};
  c.eta = {0.5, 1.0};
  const auto serial = run_sweep(c);
  ASSERT_EQ(serial.size(), 2u * 3u * 2u * 2u);
  EXPECT_EQ(serial[0].r_db, 2.0);
  EXPECT_EQ(serial[1].eta, 1.0);
  EXPECT_EQ(serial[2].loss2_db, 1.0);
  EXPECT_EQ(serial[4].loss1_db, 3.0);
  EXPECT_EQ(serial[12].r_db, 6.0);
  c.threads = 3;
  EXPECT_EQ(to_csv(run_sweep(c)), to_csv(serial));
}

TEST(RunSweep, SymmetricLossByDefault) {
  const auto t = run_sweep(small_sweep());
  for (const ResultRecord& r : t) EXPECT_EQ(r.loss1_db, r.loss2_db);
}

TEST(Emit, CsvRoundTrip) {
  auto table = run_sweep(small_sweep());
  table[1].error = "odd, \"quoted\"\nmessage";
  const std::string csv = to_csv(table);
  EXPECT_EQ(csv.substr(0, csv.find("\r\n")),
            "protocol,distillation,norm,r_db,loss1_db,loss2_db,eta,dim,g,ts,tc,f_bar,p_total_avg,"
            "p_bsm_avg,p_operation,classical_limit,trace_mass,quadrature_error,error");
  std::istringstream in(csv);
  const auto back = read_csv(in);
  ASSERT_EQ(back.size(), table.size());
  EXPECT_EQ(back[1].error, table[1].error);
  EXPECT_EQ(to_csv(back), csv);
}

TEST(Emit, JsonRoundTrip) {
  const auto table = run_sweep(small_sweep());
  const std::string json = to_json(table);
  EXPECT_NE(json.find("\"classical_limit\""), std::string::npos);
  EXPECT_NE(json.find("\"g\": null"), std::string::npos);
  std::istringstream in(json);
  const auto back = read_json(in);
  EXPECT_EQ(to_json(back), json);
  EXPECT_EQ(to_csv(back), to_csv(table));
}

TEST(Emit, TwelveSignificantDigits) {
  ResultRecord r;
  r.protocol = "hbsm_two_state";
  r.f_bar = 2.0 / 3.0;
  const std::string csv = to_csv({r});
  EXPECT_NE(csv.find(",0.666666666667,"), std::string::npos);
}

TEST(Emit, ByteIdenticalAcrossRuns) {
  SweepConfig c = small_sweep();
  c.protocol = ProtocolKind::hbsm_four_state;
  c.distillation = Distillation::qs;
  c.optimize = true;
  EXPECT_EQ(to_csv(run_sweep(c)), to_csv(run_sweep(c)));
  EXPECT_EQ(to_json(run_sweep(c)), to_json(run_sweep(c)));
}

TEST(Presets, GridsStayWithinSupportedRanges) {
  EXPECT_EQ(preset_names().size(), 5u);
  for (const std::string& name : preset_names()) {
    const auto sweeps = preset(name);
    ASSERT_FALSE(sweeps.empty()) << name;
    double max_loss = 0.0;
    double max_r = 0.0;
    for (const SweepConfig& s : sweeps) {
      EXPECT_NO_THROW(s.validate());
      for (double l : s.loss_db) max_loss = std::max(max_loss, l);
      for (double r : s.r_db) max_r = std::max(max_r, r);
    }
    EXPECT_LE(max_loss, 20.0);
    EXPECT_LE(max_r, 15.0);
  }
  const auto fig4 = preset("fig4");
  ASSERT_EQ(fig4.size(), 3u);
  EXPECT_EQ(fig4[1].distillation, Distillation::qs);
  EXPECT_DOUBLE_EQ(fig4[0].loss_db.back(), 20.0);
  const auto fig5 = preset("fig5");
  EXPECT_DOUBLE_EQ(fig5[1].eta.front(), 0.2);
  EXPECT_NE(std::find(fig5[1].eta.begin(), fig5[1].eta.end(), 0.9), fig5[1].eta.end());
  EXPECT_DOUBLE_EQ(preset("fig2a")[0].r_db.back(), 15.0);
  EXPECT_THROW(preset("fig3"), std::invalid_argument);
}
