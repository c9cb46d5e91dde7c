// Parameter sweeps over squeezing, channel loss and detector efficiency,
// with tabular CSV / JSON output and a set of named preset grids.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dvtele/protocols.hpp"

namespace dvtele {

enum class OutputFormat { csv, json };

std::string_view to_string(OutputFormat f);
OutputFormat parse_format(std::string_view s);

/// "a,b,c" or "start:step:stop" (inclusive). Whitespace is ignored.
std::vector<double> parse_grid(std::string_view text);

struct SweepConfig {
  ProtocolKind protocol = ProtocolKind::hbsm_two_state;
  Distillation distillation = Distillation::none;
  /// One table block per convention, in this order.
  std::vector<NormConvention> norms{NormConvention::ratio};
  CvRoute cv_route = CvRoute::gaussian;

  std::vector<double> r_db{5.0};
  std::vector<double> loss_db{0.0};
  /// Independent loss on mode 2'; symmetric (loss2 = loss1) when unset.
  std::optional<std::vector<double>> loss2_db;
  std::vector<double> eta{1.0};

  bool optimize = false;  ///< tune g / T_s / T_c per point
  double g = 1.0;
  double ts = 0.25;
  double tc = 0.1;
  double truncation_mass = kDefaultTruncationMass;

  std::string out;  ///< empty writes to stdout
  OutputFormat format = OutputFormat::csv;
  int threads = 1;  ///< 0 uses the hardware concurrency

  void validate() const;
  std::size_t num_points() const;
};

/// Applies one `key = value` setting (keys are the field names above).
void apply_setting(SweepConfig& cfg, std::string_view key, std::string_view value);

/// Reads a flat key-value document: one `key = value` per line, `#` starts
/// a comment.
SweepConfig load_sweep_config(std::istream& in, SweepConfig base = {});
SweepConfig load_sweep_config_file(const std::string& path, SweepConfig base = {});

struct ResultRecord {
  std::string protocol;
  std::string distillation;
  std::string norm;
  double r_db = 0.0;
  double loss1_db = 0.0;
  double loss2_db = 0.0;
  double eta = 1.0;
  int dim = 0;
  double g = 0.0;   ///< NaN where not applicable
  double ts = 0.0;
  double tc = 0.0;
  double f_bar = 0.0;
  double p_total_avg = 0.0;
  double p_bsm_avg = 0.0;
  double p_operation = 0.0;
  double classical_limit = 0.0;
  double trace_mass = 0.0;
  double quadrature_error = 0.0;
  std::string error;  ///< empty on success

  bool ok() const { return error.empty(); }
};

/// Column names in output order.
const std::vector<std::string>& result_columns();

struct GridPoint {
  double r_db = 0.0;
  double loss1_db = 0.0;
  double loss2_db = 0.0;
  double eta = 1.0;
  NormConvention norm = NormConvention::ratio;
};

/// Grid points in table order: norm, then r, loss1, loss2, eta
/// lexicographically.
std::vector<GridPoint> expand_grid(const SweepConfig& cfg);

/// Evaluates one point. Failures are caught and stored in `error`.
ResultRecord run_point(const SweepConfig& cfg, const GridPoint& point);

/// Evaluates every grid point on a worker pool. Row order does not depend
/// on the number of threads.
std::vector<ResultRecord> run_sweep(const SweepConfig& cfg);

void write_csv(std::ostream& out, const std::vector<ResultRecord>& table);
void write_json(std::ostream& out, const std::vector<ResultRecord>& table);
void emit(std::ostream& out, const std::vector<ResultRecord>& table, OutputFormat format);

std::vector<ResultRecord> read_csv(std::istream& in);
std::vector<ResultRecord> read_json(std::istream& in);

/// Named preset grids (fig2a, fig2b, fig4, fig5, fig6). A preset may consist
/// of several sweeps concatenated into one table.
std::vector<std::string> preset_names();
std::vector<SweepConfig> preset(std::string_view name);

}  // namespace dvtele
