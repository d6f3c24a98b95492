#include "sphtap/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "sphtap/acceptance.hpp"
#include "sphtap/errors.hpp"
#include "sphtap/gse.hpp"
#include "sphtap/mcsim.hpp"
#include "sphtap/model.hpp"
#include "sphtap/spectrum.hpp"
#include "sphtap/varopt.hpp"

namespace sphtap::cli {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw InputError(field + ": " + why);
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) bad_field(field, "expected a number");
  return v.get<double>();
}

std::vector<double> as_list(const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) bad_field(field, "expected a number or a list of numbers");
  std::vector<double> out;
  for (const json& x : v) out.push_back(as_number(x, field));
  return out;
}

Eigen::VectorXd as_vector(const json& v, const std::string& field) {
  const std::vector<double> xs = as_list(v, field);
  if (xs.empty()) bad_field(field, "empty list");
  return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& field) {
  if (v.is_number()) return Eigen::MatrixXd::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) bad_field(field, "expected a list of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      bad_field(field, "row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = as_number(row[static_cast<std::size_t>(j)], field);
    }
  }
  return m;
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) bad_field(field, "expected a word");
  return v.get<std::string>();
}

long long as_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) bad_field(field, "expected an integer");
  return v.get<long long>();
}

void assign(RunConfig& cfg, const std::string& section, const std::string& key, const json& v) {
  const std::string field = section + "." + key;
  if (section == "model") {
    if (key == "Q") {
      cfg.q = as_matrix(v, field);
    } else if (key == "Qt") {
      cfg.qt = as_matrix(v, field);
    } else if (key == "beta") {
      cfg.beta = as_vector(v, field);
    } else if (key == "h") {
      cfg.h = as_vector(v, field);
    } else {
      bad_field(field, "unknown key");
    }
  } else if (section == "numeric") {
    if (key == "K") {
      cfg.bins = static_cast<int>(as_integer(v, field));
    } else if (key == "eps") {
      cfg.eps = as_number(v, field);
    } else if (key == "N") {
      cfg.size = static_cast<int>(as_integer(v, field));
    } else if (key == "samples") {
      cfg.samples = as_integer(v, field);
    } else if (key == "tol") {
      cfg.tol = as_number(v, field);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) bad_field(field, "expected a nonnegative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "restarts") {
      cfg.restarts = static_cast<int>(as_integer(v, field));
    } else if (key == "iters") {
      cfg.iters = static_cast<int>(as_integer(v, field));
    } else if (key == "method") {
      cfg.method = as_string(v, field);
    } else if (key == "source") {
      cfg.source = as_string(v, field);
    } else if (key == "tilt") {
      cfg.tilt = as_number(v, field);
    } else if (key == "betas") {
      cfg.betas = as_list(v, field);
    } else if (key == "threads") {
      cfg.threads = static_cast<unsigned>(as_integer(v, field));
    } else {
      bad_field(field, "unknown key");
    }
  } else if (section == "output") {
    if (key == "path") {
      cfg.out = as_string(v, field);
    } else if (key == "format") {
      cfg.format = as_string(v, field);
    } else {
      bad_field(field, "unknown key");
    }
  } else {
    bad_field(section, "unknown section");
  }
}

// ---------------------------------------------------------------- output

struct Cell {
  std::string text;
  bool quoted = false;  // JSON string rather than number/bool
};

Cell num(double x) {
  if (std::isnan(x)) return {"nan", true};
  if (std::isinf(x)) return {x > 0 ? "inf" : "-inf", true};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return {buf, false};
}

Cell integer(long long x) { return {std::to_string(x), false}; }
Cell flag(bool b) { return {b ? "true" : "false", false}; }
Cell text(std::string s) { return {std::move(s), true}; }
Cell empty() { return {"", true}; }

Cell joined(const double* data, Eigen::Index count) {
  std::string s;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (i) s += ';';
    s += num(data[i]).text;
  }
  return text(s);
}

Cell vec_cell(const Eigen::VectorXd& v) { return joined(v.data(), v.size()); }

Cell mat_cell(const Eigen::MatrixXd& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = m;
  return joined(r.data(), r.size());
}

using Row = std::vector<std::pair<std::string, Cell>>;

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_table(const std::vector<Row>& rows, const std::string& format, std::ostream& os) {
  if (format == "json") {
    os << "[";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      os << (r ? ",\n " : "\n ") << "{";
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        const auto& [key, cell] = rows[r][c];
        os << (c ? ", " : "") << json(key).dump() << ": "
           << (cell.quoted ? json(cell.text).dump() : cell.text);
      }
      os << "}";
    }
    os << "\n]\n";
    return;
  }
  if (rows.empty()) return;
  for (std::size_t c = 0; c < rows[0].size(); ++c) os << (c ? "," : "") << rows[0][c].first;
  os << "\n";
  for (const Row& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_escape(row[c].second.text);
    os << "\n";
  }
}

// ---------------------------------------------------------------- commands

int default_restarts(const RunConfig& cfg) {
  if (cfg.restarts) return *cfg.restarts;
  return cfg.command == "ground-state" ? 50 : 16;
}

// Resolved parameters echoed at the start of every row.
Row echo(const RunConfig& cfg) {
  auto opt_mat = [](const std::optional<Eigen::MatrixXd>& m) { return m ? mat_cell(*m) : empty(); };
  auto opt_vec = [](const std::optional<Eigen::VectorXd>& v) { return v ? vec_cell(*v) : empty(); };
  Eigen::Index n = 0;
  if (cfg.q) n = cfg.q->rows();
  else if (cfg.qt) n = cfg.qt->rows();
  else if (cfg.beta) n = cfg.beta->size();
  return {{"command", text(cfg.command)},
          {"n", integer(n)},
          {"Q", opt_mat(cfg.q)},
          {"beta", opt_vec(cfg.beta)},
          {"h", opt_vec(cfg.h)},
          {"Qt", opt_mat(cfg.qt)},
          {"K", integer(cfg.bins)},
          {"eps", num(cfg.eps)},
          {"N", integer(cfg.size)},
          {"samples", integer(cfg.samples)},
          {"tol", num(cfg.tol)},
          {"seed", text(std::to_string(cfg.seed))},
          {"restarts", integer(default_restarts(cfg))},
          {"iters", integer(cfg.iters)},
          {"method", text(cfg.method)},
          {"source", text(cfg.source)},
          {"tilt", num(cfg.tilt)}};
}

template <typename T>
const T& need(const std::optional<T>& v, const char* field) {
  if (!v) bad_field(field, "required for this command");
  return *v;
}

Eigen::VectorXd field_or_zero(const RunConfig& cfg, Eigen::Index n) {
  if (!cfg.h) return Eigen::VectorXd::Zero(n);
  if (cfg.h->size() != n) bad_field("model.h", "length must equal n = " + std::to_string(n));
  return *cfg.h;
}

ModelParams model_of(const RunConfig& cfg) {
  const Eigen::MatrixXd& q = need(cfg.q, "model.Q");
  const Eigen::VectorXd& beta = need(cfg.beta, "model.beta");
  if (beta.size() != q.rows()) bad_field("model.beta", "length must equal n = " + std::to_string(q.rows()));
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) bad_field("model.Q", "not symmetric");
  for (Eigen::Index k = 0; k < q.rows(); ++k) {
    if (std::abs(q(k, k) - 1.0) > 1e-12) bad_field("model.Q", "diagonal entries must be 1");
  }
  try {
    return ModelParams(SymMatrix(q), beta, field_or_zero(cfg, q.rows()));
  } catch (const InputError& e) {
    bad_field("model", e.what());
  }
}

SymMatrix overlap_of_config(const RunConfig& cfg, Eigen::Index n) {
  const Eigen::MatrixXd& qt = need(cfg.qt, "model.Qt");
  if (qt.rows() != n) bad_field("model.Qt", "dimension must equal n = " + std::to_string(n));
  if ((qt - qt.transpose()).cwiseAbs().maxCoeff() > 1e-12) bad_field("model.Qt", "not symmetric");
  return SymMatrix(qt);
}

SpectrumSource source_of(const RunConfig& cfg) {
  if (cfg.source == "deterministic") return SpectrumSource::deterministic;
  if (cfg.source == "goe") return SpectrumSource::goe;
  bad_field("numeric.source", "expected deterministic or goe");
}

void require_size(const RunConfig& cfg, int minimum) {
  if (cfg.size < minimum) {
    bad_field("numeric.N", "must be at least " + std::to_string(minimum));
  }
}

std::vector<Row> cmd_gse(const RunConfig& cfg) {
  const Eigen::VectorXd& beta = need(cfg.beta, "model.beta");
  const SymMatrix qt = overlap_of_config(cfg, beta.size());
  const GseInstance inst(beta, field_or_zero(cfg, beta.size()), qt);
  Row row = echo(cfg);
  row.push_back({"value", num(gse_closed(inst))});
  const bool positive = beta.minCoeff() > 0.0;
  row.push_back({"dual", positive ? num(gse_dual_numeric(inst, 1e-11, cfg.seed)) : empty()});
  row.push_back({"critical_objective",
                 positive ? num(gse_x_objective(inst, gse_critical_x(inst))) : empty()});
  row.push_back({"value_1d", beta.size() == 1 ? num(gse_1d(beta(0), inst.hmag(0), qt(0, 0))) : empty()});
  return {row};
}

VarOptions var_options(const RunConfig& cfg) {
  VarOptions o;
  o.seed = cfg.seed;
  o.restarts = default_restarts(cfg);
  o.tol = cfg.tol;
  o.threads = cfg.threads;
  return o;
}

std::vector<Row> cmd_tap_solve(const RunConfig& cfg) {
  const ModelParams p = model_of(cfg);
  const VarSolution s = maximize_lowdim(p, var_options(cfg));
  Row row = echo(cfg);
  row.push_back({"value", num(s.value)});
  row.push_back({"qtilde", mat_cell(s.qstar.dense())});
  row.push_back({"qtilde_norm", num(s.qstar.dense().cwiseAbs().maxCoeff())});
  row.push_back({"plefka_active", flag(s.flags.plefka)});
  row.push_back({"psd_active", flag(s.flags.psd)});
  row.push_back({"upper_active", flag(s.flags.upper)});
  row.push_back({"restarts_used", integer(s.restarts_used)});
  row.push_back({"spread", num(s.spread)});
  row.push_back({"annealed_fe", num(annealed_fe(p))});
  row.push_back({"ht_norm", num(ht_norm(p))});
  if (cfg.size > 0) {
    require_size(cfg, static_cast<int>(p.n()));
    const FiniteSystem sys = make_finite_system(cfg.size, cfg.seed, source_of(cfg));
    row.push_back({"finite_value", num(tap_sup_finiteN(p, sys, var_options(cfg)))});
  } else {
    row.push_back({"finite_value", empty()});
  }
  return {row};
}

std::vector<Row> cmd_fk(const RunConfig& cfg) {
  std::vector<double> grid = cfg.betas;
  if (grid.empty() && cfg.beta) grid.assign(cfg.beta->data(), cfg.beta->data() + cfg.beta->size());
  if (grid.empty()) bad_field("numeric.betas", "give the beta points (or model.beta)");
  if (cfg.bins < 2) bad_field("numeric.K", "must be at least 2");
  const BinnedSpectrum spec = make_binned(cfg.bins);
  std::vector<Row> rows;
  for (double b : grid) {
    if (!(b >= 0.0)) bad_field("numeric.betas", "entries must be >= 0");
    Row row = echo(cfg);
    row.push_back({"beta_point", num(b)});
    row.push_back({"fk", num(fk(spec, b))});
    row.push_back({"fk_prime", b > 0.0 ? num(fk_prime(spec, b)) : empty()});
    row.push_back({"half_beta_sq", num(0.5 * b * b)});
    rows.push_back(row);
  }
  return rows;
}

McOptions mc_options(const RunConfig& cfg) {
  if (!(cfg.eps > 0.0)) bad_field("numeric.eps", "must be positive");
  if (cfg.samples < kBatches) bad_field("numeric.samples", "must be at least 16");
  McOptions o;
  o.seed = cfg.seed;
  o.samples = cfg.samples;
  o.eps = cfg.eps;
  o.threads = cfg.threads;
  o.tilt = cfg.tilt;
  return o;
}

void push_estimate(Row& row, const FEEstimate& e) {
  row.push_back({"value", num(e.value)});
  row.push_back({"std_error", num(e.std_error)});
  row.push_back({"hits", integer(e.hits)});
  row.push_back({"n_samples", integer(e.n_samples)});
  row.push_back({"bias_scale", num(e.bias_scale)});
}

std::vector<Row> cmd_mc_volume(const RunConfig& cfg) {
  const Eigen::MatrixXd& q = need(cfg.q, "model.Q");
  require_size(cfg, 1);
  VolumeMethod method;
  if (cfg.method == "direct") method = VolumeMethod::direct;
  else if (cfg.method == "tilted") method = VolumeMethod::tilted;
  else bad_field("numeric.method", "expected direct or tilted");
  const SymMatrix qs(q);
  const FEEstimate e = estimate_volume(qs, cfg.size, method, mc_options(cfg));
  Row row = echo(cfg);
  push_estimate(row, e);
  row.push_back({"limit", num(0.5 * logdet(qs))});
  return {row};
}

std::vector<Row> cmd_mc_fe(const RunConfig& cfg) {
  const ModelParams p = model_of(cfg);
  require_size(cfg, 2);
  const DisorderSample d = sample_goe(cfg.size, cfg.seed);
  const Eigen::MatrixXd fields = p.hmag() * random_direction(cfg.size, cfg.seed, 2).transpose();
  const FEEstimate e = estimate_fe(d, p, fields, mc_options(cfg));
  Row row = echo(cfg);
  push_estimate(row, e);
  row.push_back({"annealed_fe", num(annealed_fe(p))});
  return {row};
}

std::vector<Row> cmd_ground_state(const RunConfig& cfg) {
  const Eigen::VectorXd& beta = need(cfg.beta, "model.beta");
  const Eigen::Index n = beta.size();
  const SymMatrix qt = overlap_of_config(cfg, n);
  const Eigen::VectorXd h = field_or_zero(cfg, n);
  require_size(cfg, static_cast<int>(n));
  // The ascent only reads β, h and the system; Q is a placeholder.
  const ModelParams p(SymMatrix::identity(n), beta, h);
  const FiniteSystem sys = make_finite_system(cfg.size, cfg.seed, source_of(cfg));
  AscentOptions o;
  o.iters = cfg.iters;
  o.restarts = default_restarts(cfg);
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  const AscentResult a = ground_state_ascent(sys, p, qt, o);
  Row row = echo(cfg);
  row.push_back({"value", num(a.value)});
  const bool dual_ok = h.maxCoeff() > 0.0 && beta.minCoeff() > 0.0;
  row.push_back({"dual", dual_ok ? num(finite_n_gs_dual(sys.thetas, sys.fields(h), beta, qt)) : empty()});
  row.push_back({"limit", num(gse_closed(GseInstance(beta, h, qt)))});
  row.push_back({"restarts_ok", integer(a.restarts_ok)});
  return {row};
}

std::vector<Row> cmd_scan(const RunConfig& cfg) {
  if (cfg.betas.empty()) bad_field("numeric.betas", "give the beta grid");
  double h = 0.0;
  if (cfg.h) {
    if (cfg.h->size() != 1) bad_field("model.h", "scan is n = 1: give one field value");
    h = (*cfg.h)(0);
  }
  std::vector<Row> rows;
  for (double b : cfg.betas) {
    if (!(b >= 0.0)) bad_field("numeric.betas", "entries must be >= 0");
    const ModelParams p(SymMatrix::identity(1), Eigen::VectorXd::Constant(1, b),
                        Eigen::VectorXd::Constant(1, h));
    const VarSolution s = maximize_lowdim(p, var_options(cfg));
    const ScalarSolution r = solve_n1(b, h);
    Row row = echo(cfg);
    row.push_back({"beta_point", num(b)});
    row.push_back({"value", num(s.value)});
    row.push_back({"qtilde", num(s.qstar(0, 0))});
    row.push_back({"n1_value", num(r.value)});
    row.push_back({"n1_qtilde", num(r.qt)});
    rows.push_back(row);
  }
  return rows;
}

std::vector<Row> cmd_selftest(const RunConfig& cfg, bool& failed) {
  acceptance::Level level;
  if (cfg.level == "quick") level = acceptance::Level::quick;
  else if (cfg.level == "full") level = acceptance::Level::full;
  else bad_field("level", "expected quick or full");
  std::vector<Row> rows;
  failed = false;
  for (const acceptance::Result& r : acceptance::run_all(level, cfg.threads)) {
    rows.push_back({{"command", text("selftest")},
                    {"level", text(cfg.level)},
                    {"criterion", text(r.id)},
                    {"pass", flag(r.pass)},
                    {"detail", text(r.detail)}});
    failed = failed || !r.pass;
  }
  return rows;
}

}  // namespace

void parse_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "numeric" && section != "output") {
        throw InputError("config line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value inside a section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // bare word
    assign(cfg, section, key, value);
  }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw InputError("--config: cannot open " + path);
  parse_config(in, cfg);
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
      bad_field("command", "unknown command '" + cfg.command + "'");
    }
    if (cfg.format != "csv" && cfg.format != "json") bad_field("output.format", "expected csv or json");
    if (cfg.threads == 0) bad_field("--threads", "must be at least 1");
    std::vector<Row> rows;
    bool failed = false;
    if (cfg.command == "gse") rows = cmd_gse(cfg);
    else if (cfg.command == "tap-solve") rows = cmd_tap_solve(cfg);
    else if (cfg.command == "fk") rows = cmd_fk(cfg);
    else if (cfg.command == "mc-volume") rows = cmd_mc_volume(cfg);
    else if (cfg.command == "mc-fe") rows = cmd_mc_fe(cfg);
    else if (cfg.command == "ground-state") rows = cmd_ground_state(cfg);
    else if (cfg.command == "scan") rows = cmd_scan(cfg);
    else rows = cmd_selftest(cfg, failed);
    write_table(rows, cfg.format, out);
    if (failed) {
      for (const Row& r : rows) {
        if (r[3].second.text == "false") err << "selftest: criterion " << r[2].second.text << " failed\n";
      }
      return 2;
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

int run_to_destination(const RunConfig& cfg, std::ostream& stdout_stream, std::ostream& err) {
  if (cfg.out.empty()) return run(cfg, stdout_stream, err);
  std::ostringstream buffer;
  const int code = run(cfg, buffer, err);
  std::ofstream file(cfg.out, std::ios::binary | std::ios::trunc);
  if (!file) {
    err << "error: --out: cannot open " << cfg.out << "\n";
    return 1;
  }
  file << buffer.str();
  return code;
}

}  // namespace sphtap::cli
