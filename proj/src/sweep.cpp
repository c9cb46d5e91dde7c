#include "dvtele/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace dvtele {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_double(std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

int parse_int(std::string_view text) {
  const std::string s = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  return v;
}

bool parse_bool(std::string_view text) {
  const std::string s = lower(trim(text));
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

CvRoute parse_cv_route(std::string_view text) {
  const std::string s = lower(trim(text));
  if (s == "gaussian") return CvRoute::gaussian;
  if (s == "density") return CvRoute::density;
  throw std::invalid_argument("unknown CV route '" + s + "'");
}

std::vector<NormConvention> parse_norms(std::string_view text) {
  const std::string s = lower(trim(text));
  if (s == "both") return {NormConvention::ratio, NormConvention::per_point};
  std::vector<NormConvention> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_norm_convention(trim(item)));
  return out;
}

void check_grid(const std::vector<double>& grid, const char* name, bool db) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (double v : grid) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " grid has a non-finite value");
    if (db && v < 0.0) throw std::invalid_argument(std::string(name) + " values must be >= 0 dB");
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Value as it appears in the table, so CSV and JSON carry the same numbers.
double rounded(double v) {
  if (std::isnan(v)) return v;
  return std::strtod(format_double(v).c_str(), nullptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC 4180 record reader; returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  char c = 0;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else if (c == '\n') {
      break;
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return true;
}

double field_double(const std::string& s) { return s.empty() ? kNaN : parse_double(s); }

using Row = std::vector<std::string>;

Row record_to_row(const ResultRecord& r) {
  return {r.protocol,
          r.distillation,
          r.norm,
          format_double(r.r_db),
          format_double(r.loss1_db),
          format_double(r.loss2_db),
          format_double(r.eta),
          std::to_string(r.dim),
          format_double(r.g),
          format_double(r.ts),
          format_double(r.tc),
          format_double(r.f_bar),
          format_double(r.p_total_avg),
          format_double(r.p_bsm_avg),
          format_double(r.p_operation),
          format_double(r.classical_limit),
          format_double(r.trace_mass),
          format_double(r.quadrature_error),
          r.error};
}

ResultRecord row_to_record(const Row& f) {
  if (f.size() != result_columns().size()) {
    throw std::runtime_error("table row has " + std::to_string(f.size()) + " fields, expected " +
                             std::to_string(result_columns().size()));
  }
  ResultRecord r;
  r.protocol = f[0];
  r.distillation = f[1];
  r.norm = f[2];
  r.r_db = field_double(f[3]);
  r.loss1_db = field_double(f[4]);
  r.loss2_db = field_double(f[5]);
  r.eta = field_double(f[6]);
  r.dim = parse_int(f[7]);
  r.g = field_double(f[8]);
  r.ts = field_double(f[9]);
  r.tc = field_double(f[10]);
  r.f_bar = field_double(f[11]);
  r.p_total_avg = field_double(f[12]);
  r.p_bsm_avg = field_double(f[13]);
  r.p_operation = field_double(f[14]);
  r.classical_limit = field_double(f[15]);
  r.trace_mass = field_double(f[16]);
  r.quadrature_error = field_double(f[17]);
  r.error = f[18];
  return r;
}

}  // namespace

std::string_view to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

OutputFormat parse_format(std::string_view s) {
  const std::string t = lower(trim(s));
  if (t == "csv") return OutputFormat::csv;
  if (t == "json") return OutputFormat::json;
  throw std::invalid_argument("unknown output format '" + t + "'");
}

std::vector<double> parse_grid(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  }
  if (s.empty()) return {};
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_double(item));
    if (parts.size() != 3) throw std::invalid_argument("range grids are start:step:stop");
    const double start = parts[0];
    const double step = parts[1];
    const double stop = parts[2];
    if (!(step > 0.0)) throw std::invalid_argument("range step must be > 0");
    if (stop < start) throw std::invalid_argument("range stop is below start");
    const long n = std::lround(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  return out;
}

void SweepConfig::validate() const {
  if (norms.empty()) throw std::invalid_argument("no normalization convention selected");
  check_grid(r_db, "r_db", true);
  check_grid(loss_db, "loss_db", true);
  if (loss2_db) check_grid(*loss2_db, "loss2_db", true);
  check_grid(eta, "eta", false);
  for (double e : eta) {
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("eta values must be in (0, 1]");
  }
  if (!(truncation_mass > 0.0 && truncation_mass < 1.0)) {
    throw std::invalid_argument("truncation_mass must be in (0, 1)");
  }
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

std::size_t SweepConfig::num_points() const {
  return norms.size() * r_db.size() * loss_db.size() * (loss2_db ? loss2_db->size() : 1) *
         eta.size();
}

void apply_setting(SweepConfig& cfg, std::string_view key_in, std::string_view value_in) {
  const std::string key = lower(trim(key_in));
  const std::string value = trim(value_in);
  if (key == "protocol") {
    cfg.protocol = parse_protocol(value);
  } else if (key == "distillation" || key == "distill") {
    cfg.distillation = parse_distillation(value);
  } else if (key == "norm" || key == "norms" || key == "norm_convention") {
    cfg.norms = parse_norms(value);
  } else if (key == "cv_route") {
    cfg.cv_route = parse_cv_route(value);
  } else if (key == "r_db") {
    cfg.r_db = parse_grid(value);
  } else if (key == "loss_db") {
    cfg.loss_db = parse_grid(value);
  } else if (key == "loss2_db") {
    if (value.empty()) {
      cfg.loss2_db.reset();
    } else {
      cfg.loss2_db = parse_grid(value);
    }
  } else if (key == "eta") {
    cfg.eta = parse_grid(value);
  } else if (key == "optimize") {
    cfg.optimize = parse_bool(value);
  } else if (key == "g") {
    cfg.g = parse_double(value);
  } else if (key == "ts") {
    cfg.ts = parse_double(value);
  } else if (key == "tc") {
    cfg.tc = parse_double(value);
  } else if (key == "truncation_mass") {
    cfg.truncation_mass = parse_double(value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "format") {
    cfg.format = parse_format(value);
  } else if (key == "threads") {
    cfg.threads = parse_int(value);
  } else {
    throw std::invalid_argument("unknown setting '" + key + "'");
  }
}

SweepConfig load_sweep_config(std::istream& in, SweepConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(base, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

SweepConfig load_sweep_config_file(const std::string& path, SweepConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return load_sweep_config(in, std::move(base));
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "protocol", "distillation",    "norm",        "r_db",        "loss1_db",
      "loss2_db", "eta",             "dim",         "g",           "ts",
      "tc",       "f_bar",           "p_total_avg", "p_bsm_avg",   "p_operation",
      "classical_limit", "trace_mass", "quadrature_error", "error"};
  return cols;
}

std::vector<GridPoint> expand_grid(const SweepConfig& cfg) {
  std::vector<GridPoint> points;
  points.reserve(cfg.num_points());
  for (NormConvention norm : cfg.norms) {
    for (double r : cfg.r_db) {
      for (double l1 : cfg.loss_db) {
        const std::vector<double> second = cfg.loss2_db ? *cfg.loss2_db : std::vector<double>{l1};
        for (double l2 : second) {
          for (double e : cfg.eta) points.push_back(GridPoint{r, l1, l2, e, norm});
        }
      }
    }
  }
  return points;
}

ResultRecord run_point(const SweepConfig& cfg, const GridPoint& point) {
  ResultRecord rec;
  rec.protocol = std::string(to_string(cfg.protocol));
  rec.distillation = std::string(to_string(cfg.distillation));
  rec.norm = std::string(to_string(point.norm));
  rec.r_db = point.r_db;
  rec.loss1_db = point.loss1_db;
  rec.loss2_db = point.loss2_db;
  rec.eta = point.eta;
  rec.g = rec.ts = rec.tc = kNaN;
  rec.f_bar = rec.p_total_avg = rec.p_bsm_avg = rec.p_operation = kNaN;
  rec.trace_mass = rec.quadrature_error = kNaN;
  rec.classical_limit = classical_limit(point.eta);
  try {
    ProtocolConfig pc;
    pc.protocol = cfg.protocol;
    pc.distillation = cfg.distillation;
    pc.tmsv = TmsvParams::from_db(point.r_db, point.loss1_db, point.loss2_db, cfg.truncation_mass);
    pc.g = cfg.g;
    pc.ts = cfg.ts;
    pc.tc = cfg.tc;
    pc.eta = point.eta;
    pc.norm = point.norm;
    pc.cv_route = cfg.cv_route;
    rec.dim = pc.tmsv.dim;

    ProtocolResult res;
    if (cfg.optimize) {
      TunedResult tuned = optimize_config(pc);
      pc = tuned.config;
      res = std::move(tuned.result);
    } else {
      res = average_fidelity(pc);
    }
    if (pc.protocol == ProtocolKind::cv_bsm) rec.g = pc.g;
    if (pc.distillation == Distillation::qs) rec.ts = pc.ts;
    if (pc.distillation == Distillation::pc) rec.tc = pc.tc;
    rec.f_bar = res.f_bar;
    rec.p_total_avg = res.p_total;
    rec.p_bsm_avg = res.p_bsm;
    rec.p_operation = res.p_operation;
    rec.trace_mass = res.trace_mass;
    rec.quadrature_error = res.quadrature_error;
  } catch (const std::exception& e) {
    rec.error = e.what();
    if (rec.error.empty()) rec.error = "unknown failure";
  }
  return rec;
}

std::vector<ResultRecord> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<GridPoint> points = expand_grid(cfg);
  std::vector<ResultRecord> table(points.size());
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, points.size())));

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) table[i] = run_point(cfg, points[i]);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return table;
}

void write_csv(std::ostream& out, const std::vector<ResultRecord>& table) {
  const auto write_row = [&](const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_field(row[i]);
    }
    out << "\r\n";
  };
  write_row(result_columns());
  for (const ResultRecord& r : table) write_row(record_to_row(r));
}

void write_json(std::ostream& out, const std::vector<ResultRecord>& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  const auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isnan(v)) return nullptr;
    return rounded(v);
  };
  for (const ResultRecord& r : table) {
    nlohmann::ordered_json o;
    o["protocol"] = r.protocol;
    o["distillation"] = r.distillation;
    o["norm"] = r.norm;
    o["r_db"] = num(r.r_db);
    o["loss1_db"] = num(r.loss1_db);
    o["loss2_db"] = num(r.loss2_db);
    o["eta"] = num(r.eta);
    o["dim"] = r.dim;
    o["g"] = num(r.g);
    o["ts"] = num(r.ts);
    o["tc"] = num(r.tc);
    o["f_bar"] = num(r.f_bar);
    o["p_total_avg"] = num(r.p_total_avg);
    o["p_bsm_avg"] = num(r.p_bsm_avg);
    o["p_operation"] = num(r.p_operation);
    o["classical_limit"] = num(r.classical_limit);
    o["trace_mass"] = num(r.trace_mass);
    o["quadrature_error"] = num(r.quadrature_error);
    o["error"] = r.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error);
    rows.push_back(std::move(o));
  }
  out << rows.dump(2) << '\n';
}

void emit(std::ostream& out, const std::vector<ResultRecord>& table, OutputFormat format) {
  if (format == OutputFormat::csv) {
    write_csv(out, table);
  } else {
    write_json(out, table);
  }
}

std::vector<ResultRecord> read_csv(std::istream& in) {
  Row fields;
  if (!read_csv_record(in, fields) || fields != result_columns()) {
    throw std::runtime_error("CSV header does not match the result schema");
  }
  std::vector<ResultRecord> table;
  while (read_csv_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    table.push_back(row_to_record(fields));
  }
  return table;
}

std::vector<ResultRecord> read_json(std::istream& in) {
  const nlohmann::json doc = nlohmann::json::parse(in);
  if (!doc.is_array()) throw std::runtime_error("JSON table must be an array");
  const auto num = [](const nlohmann::json& v) { return v.is_null() ? kNaN : v.get<double>(); };
  std::vector<ResultRecord> table;
  for (const auto& o : doc) {
    ResultRecord r;
    r.protocol = o.at("protocol").get<std::string>();
    r.distillation = o.at("distillation").get<std::string>();
    r.norm = o.at("norm").get<std::string>();
    r.r_db = num(o.at("r_db"));
    r.loss1_db = num(o.at("loss1_db"));
    r.loss2_db = num(o.at("loss2_db"));
    r.eta = num(o.at("eta"));
    r.dim = o.at("dim").get<int>();
    r.g = num(o.at("g"));
    r.ts = num(o.at("ts"));
    r.tc = num(o.at("tc"));
    r.f_bar = num(o.at("f_bar"));
    r.p_total_avg = num(o.at("p_total_avg"));
    r.p_bsm_avg = num(o.at("p_bsm_avg"));
    r.p_operation = num(o.at("p_operation"));
    r.classical_limit = num(o.at("classical_limit"));
    r.trace_mass = num(o.at("trace_mass"));
    r.quadrature_error = num(o.at("quadrature_error"));
    r.error = o.at("error").is_null() ? std::string() : o.at("error").get<std::string>();
    table.push_back(std::move(r));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() { return {"fig2a", "fig2b", "fig4", "fig5", "fig6"}; }

std::vector<SweepConfig> preset(std::string_view name) {
  const std::vector<NormConvention> both{NormConvention::ratio, NormConvention::per_point};
  std::vector<SweepConfig> out;
  if (name == "fig2a") {
    // F-bar surfaces: two-state H-BSM against CV-BSM with tuned gain.
    SweepConfig h;
    h.protocol = ProtocolKind::hbsm_two_state;
    h.norms = both;
    h.r_db = parse_grid("1:1:15");
    h.loss_db = parse_grid("0:1:10");
    SweepConfig cv = h;
    cv.protocol = ProtocolKind::cv_bsm;
    cv.norms = {NormConvention::ratio};
    cv.optimize = true;
    out = {h, cv};
  } else if (name == "fig2b") {
    // Two-state success probability against loss.
    SweepConfig h;
    h.protocol = ProtocolKind::hbsm_two_state;
    h.norms = both;
    h.r_db = parse_grid("1,3,5,7,10,15");
    h.loss_db = parse_grid("0:1:20");
    out = {h};
  } else if (name == "fig4") {
    // Four-state H-BSM without distillation, with scissors and with catalysis.
    SweepConfig base;
    base.protocol = ProtocolKind::hbsm_four_state;
    base.r_db = parse_grid("0.5,1,3,5,7,10,15");
    base.loss_db = parse_grid("0:2.5:20");
    base.optimize = true;
    for (Distillation d : {Distillation::none, Distillation::qs, Distillation::pc}) {
      SweepConfig c = base;
      c.distillation = d;
      out.push_back(c);
    }
  } else if (name == "fig5") {
    // Two-state H-BSM with inefficient detectors, with and without scissors.
    SweepConfig base;
    base.protocol = ProtocolKind::hbsm_two_state;
    base.norms = both;
    base.r_db = parse_grid("1:1:10");
    base.loss_db = parse_grid("0:2:20");
    base.eta = parse_grid("0.2,0.4,0.6,0.8,0.9,1.0");
    base.optimize = true;
    for (Distillation d : {Distillation::none, Distillation::qs}) {
      SweepConfig c = base;
      c.distillation = d;
      out.push_back(c);
    }
  } else if (name == "fig6") {
    // CV-BSM with distilled resources; every resource on the density route
    // so the differences share one truncation.
    SweepConfig base;
    base.protocol = ProtocolKind::cv_bsm;
    base.cv_route = CvRoute::density;
    base.r_db = parse_grid("1,3,5,7,9");
    base.loss_db = parse_grid("0:2:20");
    base.optimize = true;
    for (Distillation d : {Distillation::none, Distillation::qs, Distillation::pc}) {
      SweepConfig c = base;
      c.distillation = d;
      out.push_back(c);
    }
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return out;
}

}  // namespace dvtele
