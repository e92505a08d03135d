#include "mixgel/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "mixgel/besov.hpp"
#include "mixgel/bounds.hpp"
#include "mixgel/core_norms.hpp"
#include "mixgel/packing.hpp"
#include "mixgel/recovery.hpp"
#include "mixgel/widths.hpp"

namespace mixgel {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void validate_keys(const json& obj, const std::set<std::string>& allowed,
                   const std::set<std::string>& required) {
  if (!obj.is_object())
    throw std::invalid_argument("config: parameter block must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key))
      throw std::invalid_argument("config: unknown field '" + key + "'");
  }
  for (const auto& key : required)
    if (!obj.contains(key))
      throw std::invalid_argument("config: missing field '" + key + "'");
}

double get_exponent(const json& obj, const std::string& key) {
  const auto& v = obj.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "inf")
      return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("config: exponent '" + key +
                                "' must be a number or \"inf\"");
  }
  return v.get<double>();
}

std::vector<int> int_grid(const json& params, const std::string& list_key,
                          const std::string& grid_key) {
  std::vector<int> out;
  if (params.contains(list_key)) {
    for (const auto& v : params.at(list_key)) out.push_back(v.get<int>());
  } else if (params.contains(grid_key)) {
    const auto& g = params.at(grid_key);
    validate_keys(g, {"from", "to", "count", "log"}, {"from", "to", "count"});
    const double from = g.at("from").get<double>();
    const double to = g.at("to").get<double>();
    const int count = g.at("count").get<int>();
    const bool log_spaced = g.value("log", false);
    if (count < 1 || from < 1 || to < from)
      throw std::invalid_argument("config: bad grid spec");
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      double v = log_spaced ? from * std::pow(to / from, f)
                            : from + f * (to - from);
      const int vi = static_cast<int>(std::lround(v));
      if (out.empty() || out.back() != vi) out.push_back(vi);
    }
  }
  if (out.empty())
    throw std::invalid_argument("config: need '" + list_key + "' or '" +
                                grid_key + "'");
  return out;
}

SolverConfig solver_from(const json& params) {
  SolverConfig solver;
  if (!params.contains("solver")) return solver;
  const auto& s = params.at("solver");
  validate_keys(s, {"feasibility_tol", "stop_tol", "max_iterations", "step"}, {});
  solver.feasibility_tol = s.value("feasibility_tol", solver.feasibility_tol);
  solver.stop_tol = s.value("stop_tol", solver.stop_tol);
  solver.max_iterations = s.value("max_iterations", solver.max_iterations);
  solver.step = s.value("step", solver.step);
  return solver;
}

// Atomic output writer: temp file in the target directory, renamed on
// success, removed on failure.
class OutputFile {
 public:
  explicit OutputFile(const std::string& path) : path_(path) {
    tmp_ = path + ".tmp";
    stream_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw std::runtime_error("cannot open output " + tmp_);
  }
  ~OutputFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }
  std::ostream& stream() { return stream_; }
  void commit() {
    stream_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

std::string header_line(const RunConfig& config) {
  std::ostringstream os;
  os << "# mixgel v" << kVersion << " subcommand=" << config.subcommand
     << " seed=" << config.seed << " config=" << config_hash(config);
  return os.str();
}

void maybe_write_plot(const RunConfig& config,
                      const std::vector<PlotSeriesPoint>& table,
                      const std::string& x_name, const std::string& y_name) {
  if (config.plot_path.empty()) return;
  OutputFile out(config.plot_path);
  out.stream() << header_line(config) << "\n"
               << emit_plot_data(table, x_name, y_name);
  out.commit();
}

json meta_block(const RunConfig& config) {
  return json{{"version", kVersion},
              {"subcommand", config.subcommand},
              {"seed", config.seed},
              {"config_hash", config_hash(config)}};
}

// Tabular emitter shared by the CSV and JSON output paths.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  void write(const RunConfig& config, std::ostream& os) const {
    if (config.format == "json") {
      json data = json::array();
      for (const auto& row : rows) {
        json obj;
        for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
        data.push_back(obj);
      }
      json out{{"meta", meta_block(config)}, {"data", data}};
      os << out.dump(2) << "\n";
      return;
    }
    os << header_line(config) << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      os << columns[i] << (i + 1 < columns.size() ? ',' : '\n');
    for (const auto& row : rows)
      for (std::size_t i = 0; i < row.size(); ++i)
        os << row[i] << (i + 1 < row.size() ? ',' : '\n');
  }
};

int run_norm(const RunConfig& config) {
  const auto& p = config.params;
  validate_keys(p, {"b", "d", "p", "q", "values", "s", "t"},
                {"b", "d", "p", "q"});
  const MixedShape shape(p.at("b").get<int>(), p.at("d").get<int>());
  const ExponentPair e(get_exponent(p, "p"), get_exponent(p, "q"));
  MixedArray x;
  if (p.contains("values")) {
    const auto& vals = p.at("values");
    if (static_cast<int>(vals.size()) != shape.n())
      throw std::invalid_argument("config: values must have b*d entries");
    Eigen::VectorXd flat(shape.n());
    for (int i = 0; i < shape.n(); ++i) flat(i) = vals.at(i).get<double>();
    x = unflatten(flat, shape);
  } else {
    x = random_structured_signal(shape, SparsityMode::plain, shape.n(),
                                 config.seed);
  }

  Table table;
  table.columns = {"op", "value"};
  table.add_row({"mixed_norm", format_double(mixed_norm(x, e))});
  table.add_row({"quasi_norm_constant", format_double(quasi_norm_constant(e))});
  table.add_row({"split_constant", format_double(split_constant(e))});
  if (p.contains("s")) {
    const int s = p.at("s").get<int>();
    table.add_row({"sigma_outer", format_double(sigma_outer(x, s, e))});
  }
  if (p.contains("t")) {
    const int t = p.at("t").get<int>();
    table.add_row({"sigma_inner", format_double(sigma_inner(x, t, e))});
  }

  OutputFile out(config.out_path);
  table.write(config, out.stream());
  out.commit();
  return kOk;
}

int run_bounds(const RunConfig& config) {
  const auto& p = config.params;
  validate_keys(p,
                {"b", "d", "p", "q", "constant", "variants", "m", "m_grid",
                 "c_pq", "c_p"},
                {"b", "d", "p", "q", "variants"});
  const int b = p.at("b").get<int>();
  const int d = p.at("d").get<int>();
  const MixedShape shape(b, d);
  const double pe = get_exponent(p, "p");
  const double qe = get_exponent(p, "q");
  const double constant = p.value("constant", 1.0);
  const double c_pq = p.value("c_pq", 1.0);
  const double c_p = p.value("c_p", 1.0);
  const std::vector<int> ms = int_grid(p, "m", "m_grid");

  Table table;
  table.columns = {"b", "d", "m", "p", "q", "variant", "constant", "regime",
                   "value"};
  std::vector<PlotSeriesPoint> plot;
  for (const auto& variant : p.at("variants")) {
    const std::string name = variant.get<std::string>();
    for (int m : ms) {
      std::string regime = "-";
      double value = 0.0;
      if (name == "outer") {
        value = bound_outer(BoundParams(shape, m, ExponentPair(pe, 2.0),
                                        ExponentPair(qe, 2.0), constant));
      } else if (name == "flat") {
        value = bound_flat(m, shape.n(), pe, qe, constant);
      } else if (name == "inner") {
        value = bound_inner(BoundParams(shape, m, ExponentPair(pe, qe),
                                        ExponentPair(pe, pe), constant));
      } else if (name == "mixed") {
        const auto [label, v] = bound_mixed(BoundParams(
            shape, m, ExponentPair(pe, qe), ExponentPair(2.0, 2.0), constant));
        regime = to_string(label);
        value = v;
      } else if (name == "lower_outer") {
        value = lower_bound_outer(m, b, d, pe, qe, c_pq, c_p);
      } else {
        throw std::invalid_argument("config: unknown bounds variant '" + name +
                                    "'");
      }
      table.add_row({std::to_string(b), std::to_string(d), std::to_string(m),
                     format_double(pe), format_double(qe), name,
                     format_double(constant), regime, format_double(value)});
      plot.push_back({name, static_cast<double>(m), value});
    }
  }

  OutputFile out(config.out_path);
  table.write(config, out.stream());
  out.commit();
  maybe_write_plot(config, plot, "m", "value");
  return kOk;
}

int run_packing(const RunConfig& config) {
  const auto& p = config.params;
  validate_keys(p,
                {"b", "d", "s", "t", "norm_p", "norm_q", "measure_r",
                 "measure_u"},
                {"b", "d", "s", "t"});
  const int b = p.at("b").get<int>();
  const int d = p.at("d").get<int>();
  const int s = p.at("s").get<int>();
  const int t = p.at("t").get<int>();
  const ExponentPair norm_in(p.contains("norm_p") ? get_exponent(p, "norm_p") : 1.0,
                             p.contains("norm_q") ? get_exponent(p, "norm_q") : 2.0);
  const ExponentPair measured_in(
      p.contains("measure_r") ? get_exponent(p, "measure_r") : 2.0,
      p.contains("measure_u") ? get_exponent(p, "measure_u") : 2.0);

  const PackingFamily fam =
      build_sparse_packing(b, d, s, t, norm_in, measured_in, config.seed);

  json manifest{{"meta", meta_block(config)},
                {"b", b},
                {"d", d},
                {"s", s},
                {"t", t},
                {"norm_in", {norm_in.p, norm_in.q}},
                {"measured_in", {measured_in.p, measured_in.q}},
                {"cardinality", fam.size()},
                {"cardinality_floor", fam.cardinality_floor},
                {"radius_cap", fam.radius_cap},
                {"max_radius_observed", fam.max_radius_observed},
                {"distance_floor", fam.distance_floor},
                {"min_distance_observed", fam.min_distance_observed},
                {"exhaustive_certificate", fam.exhaustive_certificate},
                {"seed", config.seed}};

  OutputFile out(config.out_path);
  out.stream() << manifest.dump(2) << "\n";
  out.commit();
  return kOk;
}

int run_width(const RunConfig& config) {
  const auto& p = config.params;
  validate_keys(p, {"b", "d", "s", "trials", "constant", "direct"},
                {"b", "d", "s", "trials"});
  const int b = p.at("b").get<int>();
  const int d = p.at("d").get<int>();
  const int trials = p.at("trials").get<int>();
  const double constant = p.value("constant", 1.0);
  const bool direct = p.value("direct", false);
  std::vector<int> ss;
  if (p.at("s").is_array())
    for (const auto& v : p.at("s")) ss.push_back(v.get<int>());
  else
    ss.push_back(p.at("s").get<int>());

  Table table;
  table.columns = {"b", "d", "s", "trials", "seed", "mean", "std_error",
                   "upper_formula"};
  std::vector<PlotSeriesPoint> plot;
  for (int s : ss) {
    const WidthEstimate est = direct ? width_D_direct(b, d, s, trials, config.seed)
                                     : width_D(b, d, s, trials, config.seed);
    table.add_row({std::to_string(b), std::to_string(d), std::to_string(s),
                   std::to_string(trials), std::to_string(config.seed),
                   format_double(est.mean), format_double(est.std_error),
                   format_double(width_upper_formula(b, d, s, constant))});
    plot.push_back({"mean", static_cast<double>(s), est.mean});
    plot.push_back({"stderr", static_cast<double>(s), est.std_error});
  }

  OutputFile out(config.out_path);
  table.write(config, out.stream());
  out.commit();
  maybe_write_plot(config, plot, "s", "width");
  return kOk;
}

int run_recover(const RunConfig& config) {
  const auto& p = config.params;
  validate_keys(p, {"b", "d", "m", "mode", "s_or_t", "decoder", "solver"},
                {"b", "d", "m", "mode", "s_or_t", "decoder"});
  PhaseConfig phase;
  phase.shape = MixedShape(p.at("b").get<int>(), p.at("d").get<int>());
  phase.mode = sparsity_mode_from_string(p.at("mode").get<std::string>());
  phase.decoder = decoder_from_string(p.at("decoder").get<std::string>());
  phase.solver = solver_from(p);
  const ExperimentRecord rec =
      run_trial(phase, p.at("s_or_t").get<int>(), p.at("m").get<int>(),
                config.seed);

  Table table;
  table.columns = {"b", "d", "mode", "s_or_t", "m", "decoder", "rel_error",
                   "iterations", "seed"};
  table.add_row({std::to_string(rec.shape.b), std::to_string(rec.shape.d),
                 to_string(rec.mode), std::to_string(rec.s_or_t),
                 std::to_string(rec.m), to_string(rec.decoder),
                 format_double(rec.rel_error), std::to_string(rec.iterations),
                 std::to_string(rec.seed)});

  OutputFile out(config.out_path);
  table.write(config, out.stream());
  out.commit();
  return kOk;
}

int run_phase(const RunConfig& config) {
  const auto& p = config.params;
  validate_keys(p,
                {"b", "d", "mode", "sparsity", "m", "m_grid", "trials",
                 "decoder", "success_threshold", "solver"},
                {"b", "d", "mode", "sparsity", "trials", "decoder"});
  PhaseConfig phase;
  phase.shape = MixedShape(p.at("b").get<int>(), p.at("d").get<int>());
  phase.mode = sparsity_mode_from_string(p.at("mode").get<std::string>());
  phase.decoder = decoder_from_string(p.at("decoder").get<std::string>());
  for (const auto& v : p.at("sparsity")) phase.sparsity_grid.push_back(v.get<int>());
  phase.m_grid = int_grid(p, "m", "m_grid");
  phase.trials = p.at("trials").get<int>();
  phase.success_threshold = p.value("success_threshold", 1e-4);
  phase.solver = solver_from(p);
  phase.seed = config.seed;
  phase.threads = config.threads;

  const std::vector<PhaseCell> cells = phase_transition(phase);

  Table table;
  table.columns = {"b", "d", "mode", "s_or_t", "m", "decoder", "trials",
                   "successes", "success_rate", "mean_rel_err", "seed"};
  std::vector<PlotSeriesPoint> plot;
  for (const auto& cell : cells) {
    table.add_row({std::to_string(phase.shape.b), std::to_string(phase.shape.d),
                   to_string(phase.mode), std::to_string(cell.s_or_t),
                   std::to_string(cell.m), to_string(phase.decoder),
                   std::to_string(cell.trials), std::to_string(cell.successes),
                   format_double(cell.success_rate),
                   format_double(cell.mean_rel_err),
                   std::to_string(config.seed)});
    plot.push_back({std::to_string(cell.s_or_t), static_cast<double>(cell.m),
                    cell.success_rate});
  }

  OutputFile out(config.out_path);
  table.write(config, out.stream());
  out.commit();
  maybe_write_plot(config, plot, "m", "success_rate");
  return kOk;
}

int run_besov_rate(const RunConfig& config) {
  const auto& p = config.params;
  validate_keys(p,
                {"d", "r", "p0", "q0", "p1", "q1", "variant", "block_variant",
                 "J_from", "J_to", "kappa", "beta"},
                {"d", "r", "q0", "q1", "variant", "J_from", "J_to"});
  BesovParams params;
  params.d = p.at("d").get<int>();
  params.r = p.at("r").get<double>();
  params.q0 = p.at("q0").get<double>();
  params.q1 = p.at("q1").get<double>();
  params.p0 = p.value("p0", 2.0);
  params.p1 = p.value("p1", 2.0);
  const auto variant =
      schedule_variant_from_string(p.at("variant").get<std::string>());
  const auto block_variant = block_variant_from_string(
      p.value("block_variant", std::string("impr")));
  const double kappa = p.value("kappa", std::nan(""));
  const double beta = p.value("beta", std::nan(""));

  std::vector<int> J_range;
  for (int J = p.at("J_from").get<int>(); J <= p.at("J_to").get<int>(); ++J)
    J_range.push_back(J);

  Table table;
  table.columns = {"J", "total_m", "aggregate", "variant", "slope_so_far"};
  std::vector<std::pair<double, double>> points;
  std::vector<PlotSeriesPoint> plot;
  for (int J : J_range) {
    const BudgetSchedule sched = budget_schedule(params, J, variant, kappa, beta);
    const double agg = aggregate_bound(sched, params, block_variant);
    points.push_back({std::log(static_cast<double>(sched.total)), std::log(agg)});
    plot.push_back({to_string(variant), points.back().first, points.back().second});
    std::string slope_so_far = "-";
    if (points.size() >= 3) slope_so_far = format_double(fit_line(points).slope);
    table.add_row({std::to_string(J), std::to_string(sched.total),
                   format_double(agg), to_string(variant), slope_so_far});
  }

  const RateFitResult fit =
      rate_fit(params, J_range, variant, block_variant, kappa, beta);
  json summary{{"meta", meta_block(config)},
               {"variant", to_string(variant)},
               {"block_variant", to_string(block_variant)},
               {"r", params.r},
               {"raw_slope", fit.raw.slope},
               {"raw_intercept", fit.raw.intercept},
               {"raw_residual", fit.raw.residual}};
  if (fit.loglog_corrected) {
    summary["corrected_slope"] = fit.loglog_corrected->slope;
    summary["corrected_residual"] = fit.loglog_corrected->residual;
  }

  OutputFile out(config.out_path);
  table.write(config, out.stream());
  out.commit();
  OutputFile summary_out(config.out_path + ".summary.json");
  summary_out.stream() << summary.dump(2) << "\n";
  summary_out.commit();
  maybe_write_plot(config, plot, "log_m", "log_bound");
  return kOk;
}

}  // namespace

int verify_output(const RunConfig& config) {
  std::ifstream in(config.out_path, std::ios::binary);
  if (!in) {
    std::cerr << "verify: cannot open " << config.out_path << "\n";
    return kRuntimeError;
  }
  const std::string expected = config_hash(config);
  std::string first_line;
  std::getline(in, first_line);
  std::string found;
  if (!first_line.empty() && first_line.front() == '#') {
    const auto pos = first_line.find("config=");
    if (pos != std::string::npos) found = first_line.substr(pos + 7);
  } else {
    // JSON outputs carry the hash in meta.config_hash
    in.clear();
    in.seekg(0);
    try {
      json doc = json::parse(in);
      found = doc.at("meta").at("config_hash").get<std::string>();
    } catch (const std::exception&) {
      std::cerr << "verify: no reproducibility header found\n";
      return kVerifyMismatch;
    }
  }
  while (!found.empty() && (found.back() == '\n' || found.back() == '\r' ||
                            found.back() == ' '))
    found.pop_back();
  if (found != expected) {
    std::cerr << "verify: hash mismatch (file " << found << ", config "
              << expected << ")\n";
    return kVerifyMismatch;
  }
  std::cout << "verify: ok (" << expected << ")\n";
  return kOk;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string config_hash(const RunConfig& config) {
  // params serialized with sorted keys, then the seed and subcommand
  std::uint64_t h = fnv1a(config.params.dump());
  h = fnv1a(config.subcommand, h);
  h = fnv1a(std::to_string(config.seed), h);
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

RunConfig load_config(const std::string& config_path, const std::string& out,
                      const std::string& format, long long seed_override,
                      int threads, const std::string& plot_path) {
  std::ifstream in(config_path);
  if (!in)
    throw std::invalid_argument("cannot open config file " + config_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed JSON config: ") +
                                e.what());
  }
  validate_keys(doc, {"subcommand", "seed", "params"}, {"subcommand", "params"});

  RunConfig config;
  config.subcommand = doc.at("subcommand").get<std::string>();
  config.params = doc.at("params");
  config.seed = doc.value("seed", 0ULL);
  if (seed_override >= 0)
    config.seed = static_cast<std::uint64_t>(seed_override);
  config.out_path = out;
  config.format = format;
  config.threads = threads;
  config.plot_path = plot_path;
  if (config.format != "csv" && config.format != "json")
    throw std::invalid_argument("format must be csv or json");
  if (config.out_path.empty())
    throw std::invalid_argument("output path required");
  return config;
}

std::string emit_plot_data(const std::vector<PlotSeriesPoint>& table,
                           const std::string& x_name,
                           const std::string& y_name) {
  if (table.empty()) throw std::invalid_argument("emit_plot_data: empty table");
  std::ostringstream os;
  os << "series," << x_name << "," << y_name << "\n";
  for (const auto& point : table)
    os << point.series << "," << format_double(point.x) << ","
       << format_double(point.y) << "\n";
  return os.str();
}

int dispatch(const RunConfig& config) {
  try {
    if (config.subcommand == "norm") return run_norm(config);
    if (config.subcommand == "bounds") return run_bounds(config);
    if (config.subcommand == "packing") return run_packing(config);
    if (config.subcommand == "width") return run_width(config);
    if (config.subcommand == "recover") return run_recover(config);
    if (config.subcommand == "phase") return run_phase(config);
    if (config.subcommand == "besov-rate") return run_besov_rate(config);
    std::cerr << "unknown subcommand: " << config.subcommand << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace mixgel
