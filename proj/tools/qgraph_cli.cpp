// Command-line front end: wires JSON run configurations to the library
// pipelines and writes CSV/JSON artifacts under a fixed-name scheme.
// Exit codes: 0 success, 2 config error, 3 internal consistency failure,
// 4 numerical-validation failure.

#include <qgraph/qgraph.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using Json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- config plumbing ----

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json cfg;
  try {
    in >> cfg;
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
  return cfg;
}

void check_keys(const Json& cfg, const std::set<std::string>& allowed) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (!allowed.contains(it.key())) throw ConfigError("unknown config key: " + it.key());
}

template <class T>
T get_or(const Json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config key has wrong type: " + key);
  }
}

template <class T>
T require(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("missing config key: " + key);
  try {
    return cfg.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config key has wrong type: " + key);
  }
}

const std::set<std::string> kGraphKeys = {"graph",       "length",    "length_low",
                                          "length_high", "conditions", "mu",
                                          "asymptotic",  "seed"};

std::set<std::string> with_graph_keys(std::set<std::string> extra) {
  extra.insert(kGraphKeys.begin(), kGraphKeys.end());
  return extra;
}

// Builder names: interval, octahedron, cube, complete:V, cycle:V; anything
// else is read as an edge-list file (which carries its own lengths).
qgraph::MetricGraph make_graph(const Json& cfg, std::uint64_t seed) {
  std::string name = require<std::string>(cfg, "graph");
  qgraph::MetricGraph g = [&]() -> qgraph::MetricGraph {
    if (name == "interval") return qgraph::build_interval(get_or<double>(cfg, "length", 1.0));
    if (name == "octahedron") return qgraph::build_octahedron();
    if (name == "cube") return qgraph::build_cube();
    if (name.rfind("complete:", 0) == 0) return qgraph::build_complete(std::stoi(name.substr(9)));
    if (name.rfind("cycle:", 0) == 0) return qgraph::build_cycle(std::stoi(name.substr(6)));
    std::ifstream in(name);
    if (!in) throw ConfigError("graph is neither a builder name nor a readable file: " + name);
    std::ostringstream text;
    text << in.rdbuf();
    return qgraph::parse_graph_file(text.str());
  }();
  if (!g.has_lengths()) {
    qgraph::LengthSampler sampler;
    sampler.seed = seed;
    sampler.low = get_or<double>(cfg, "length_low", 1.0);
    sampler.high = get_or<double>(cfg, "length_high", 2.0);
    g = qgraph::sample_lengths(g, sampler);
  }
  return g;
}

qgraph::VertexConditions make_conditions(const Json& cfg) {
  std::string kind = get_or<std::string>(cfg, "conditions", "preferred");
  bool asym = get_or<bool>(cfg, "asymptotic", false);
  if (kind == "preferred")
    return qgraph::VertexConditions::uniform(qgraph::VertexConditionSpec::preferred_orientation(asym));
  if (kind == "neumann")
    return qgraph::VertexConditions::uniform(qgraph::VertexConditionSpec::neumann_kirchhoff());
  if (kind == "distorted")
    return qgraph::VertexConditions::uniform(
        qgraph::VertexConditionSpec::distorted(require<double>(cfg, "mu"), asym));
  throw ConfigError("unknown conditions: " + kind + " (expected preferred|neumann|distorted)");
}

qgraph::ScatteringMode make_mode(const Json& cfg) {
  return get_or<bool>(cfg, "asymptotic", false) ? qgraph::ScatteringMode::Asymptotic
                                                : qgraph::ScatteringMode::Exact;
}

// ---- output plumbing ----

void write_file(const std::filesystem::path& dir, const std::string& name,
                const std::string& content) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + (dir / name).string());
  out << content;
}

void write_json(const std::filesystem::path& dir, const std::string& name, const Json& j) {
  write_file(dir, name, j.dump(2) + "\n");
}

struct RunContext {
  Json cfg;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  void write_manifest(const std::string& command) const {
    Json m;
    m["command"] = command;
    m["config"] = cfg;
    m["seed"] = seed;
    m["threads"] = threads;
    m["version"] = qgraph::kVersion;
    m["elapsed_s"] = elapsed_s();
    write_json(out_dir, "manifest.json", m);
  }
};

qgraph::Spectrum solve_from_config(const RunContext& ctx, const qgraph::MetricGraph& g,
                                   const qgraph::VertexConditions& conds) {
  qgraph::SolveOptions opts;
  opts.grid_factor = get_or<double>(ctx.cfg, "grid_factor", 20.0);
  opts.refine_tol = get_or<double>(ctx.cfg, "refine_tol", 1e-10);
  opts.threads = ctx.threads;
  opts.mode = make_mode(ctx.cfg);
  double k_min = get_or<double>(ctx.cfg, "k_min", 0.5);
  if (ctx.cfg.contains("levels")) {
    auto levels = require<std::int64_t>(ctx.cfg, "levels");
    if (levels < 2) throw ConfigError("levels must be >= 2");
    return qgraph::solve_first_n(g, conds, k_min, static_cast<std::size_t>(levels), opts);
  }
  double k_max = require<double>(ctx.cfg, "k_max");
  return qgraph::solve_spectrum(g, conds, k_min, k_max, opts);
}

Json weyl_json(const qgraph::Spectrum& s, const qgraph::MetricGraph& g) {
  Json j;
  j["count"] = s.ks.size();
  j["k_min"] = s.k_min;
  j["k_max"] = s.k_max;
  j["total_length"] = s.total_length;
  j["weyl_residual"] = s.weyl_residual;
  j["residual_bound"] = g.bond_count();
  j["grid_factor_used"] = s.grid_factor_used;
  return j;
}

const std::set<std::string> kSolveKeys = {"k_min", "k_max", "levels", "grid_factor", "refine_tol"};

std::set<std::string> with_solve_keys(std::set<std::string> extra) {
  extra.insert(kSolveKeys.begin(), kSolveKeys.end());
  return with_graph_keys(std::move(extra));
}

// ---- commands ----

int cmd_spectrum(RunContext& ctx) {
  check_keys(ctx.cfg, with_solve_keys({}));
  qgraph::MetricGraph g = make_graph(ctx.cfg, ctx.seed);
  qgraph::VertexConditions conds = make_conditions(ctx.cfg);
  qgraph::Spectrum s = solve_from_config(ctx, g, conds);
  write_file(ctx.out_dir, "spectrum.csv", qgraph::spectrum_to_csv(s));
  write_json(ctx.out_dir, "weyl.json", weyl_json(s, g));
  ctx.write_manifest("spectrum");
  return 0;
}

int cmd_nnspacing(RunContext& ctx) {
  check_keys(ctx.cfg, with_solve_keys({"bin_width", "s_max"}));
  qgraph::MetricGraph g = make_graph(ctx.cfg, ctx.seed);
  qgraph::VertexConditions conds = make_conditions(ctx.cfg);
  qgraph::Spectrum s = solve_from_config(ctx, g, conds);
  std::vector<double> xs = qgraph::unfold(s.ks, s.total_length);
  double bin_width = get_or<double>(ctx.cfg, "bin_width", 0.1);
  double s_max = get_or<double>(ctx.cfg, "s_max", 4.0);
  qgraph::SpacingHistogram h = qgraph::nn_histogram(xs, bin_width, s_max);
  std::vector<double> spacings(xs.size() - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) spacings[i] = xs[i + 1] - xs[i];
  Json ks;
  ks["sample_count"] = spacings.size();
  ks["ks_goe"] = qgraph::ks_distance(spacings, qgraph::wigner_goe_cdf);
  ks["ks_poisson"] = qgraph::ks_distance(spacings, qgraph::poisson_cdf);
  write_file(ctx.out_dir, "histogram.csv", qgraph::histogram_csv(h));
  write_json(ctx.out_dir, "ks.json", ks);
  ctx.write_manifest("nnspacing");
  return 0;
}

int cmd_formfactor(RunContext& ctx) {
  check_keys(ctx.cfg, with_solve_keys({"estimator", "tau_max", "k_samples", "window_size",
                                       "k_window_lo", "k_window_hi"}));
  std::string which = get_or<std::string>(ctx.cfg, "estimator", "both");
  if (which != "eigenvalue" && which != "eigenphase" && which != "both")
    throw ConfigError("unknown estimator: " + which);
  qgraph::MetricGraph g = make_graph(ctx.cfg, ctx.seed);
  qgraph::VertexConditions conds = make_conditions(ctx.cfg);
  qgraph::ScatteringMode mode = make_mode(ctx.cfg);
  int bonds = g.bond_count();
  double tau_max = get_or<double>(ctx.cfg, "tau_max", 3.0);
  if (!(tau_max > 0.0)) throw ConfigError("tau_max must be positive");
  int n_max = static_cast<int>(std::ceil(tau_max * bonds));

  if (which == "eigenvalue" || which == "both") {
    qgraph::Spectrum s = solve_from_config(ctx, g, conds);
    std::vector<double> xs = qgraph::unfold(s.ks, s.total_length);
    std::vector<double> taus;
    for (int n = 1; n <= n_max; ++n) taus.push_back(static_cast<double>(n) / bonds);
    auto window = static_cast<std::size_t>(get_or<std::int64_t>(ctx.cfg, "window_size", 1000));
    qgraph::FormFactorSeries series = qgraph::sff_from_eigenvalues(xs, taus, window);
    write_file(ctx.out_dir, "formfactor_eigenvalue.csv",
               qgraph::formfactor_csv(series, /*with_goe_reference=*/true));
  }
  if (which == "eigenphase" || which == "both") {
    auto k_samples = static_cast<std::size_t>(get_or<std::int64_t>(ctx.cfg, "k_samples", 20000));
    double lo = get_or<double>(ctx.cfg, "k_window_lo", 1000.0);
    double hi = get_or<double>(ctx.cfg, "k_window_hi",
                               lo + 10.0 * 2.0 * std::numbers::pi / g.min_length());
    qgraph::FormFactorSeries series;
    series.estimator = "eigenphase";
    for (int n = 1; n <= n_max; ++n) {
      qgraph::SffEstimate est =
          qgraph::sff_eigenphases(g, conds, n, k_samples, {lo, hi}, mode,
                                  ctx.seed + static_cast<std::uint64_t>(n), ctx.threads);
      series.taus.push_back(est.tau);
      series.values.push_back(est.value);
      series.error_bars.push_back(est.std_error);
    }
    write_file(ctx.out_dir, "formfactor_eigenphase.csv",
               qgraph::formfactor_csv(series, /*with_goe_reference=*/true));
  }
  ctx.write_manifest("formfactor");
  return 0;
}

int cmd_eulercount(RunContext& ctx) {
  check_keys(ctx.cfg, {"graph", "method"});
  qgraph::MetricGraph g = make_graph(ctx.cfg, /*seed=*/1);
  std::string graph_name = require<std::string>(ctx.cfg, "graph");
  std::string method = get_or<std::string>(ctx.cfg, "method", "all");

  struct Row {
    std::string method;
    qgraph::BigInt count;
    double elapsed_s;
  };
  std::vector<Row> rows;
  auto run = [&](const std::string& m) {
    auto t0 = std::chrono::steady_clock::now();
    qgraph::BigInt c;
    if (m == "transform")
      c = qgraph::euler_count_transform(g, ctx.threads);
    else if (m == "best")
      c = qgraph::euler_count_best(g, ctx.threads);
    else if (m == "backtrack")
      c = qgraph::euler_count_backtrack(g);
    else
      throw ConfigError("unknown method: " + m + " (expected transform|best|backtrack|all)");
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back({m, c, dt});
  };

  if (method == "all") {
    // Run every counter whose size guard admits this graph.
    if (g.bond_count() <= qgraph::kMaxMaskBits) run("transform");
    if (g.edge_count() <= 24) run("best");
    if (g.edge_count() <= 14) run("backtrack");
    if (rows.empty()) throw ConfigError("graph exceeds the size guards of every method");
  } else {
    run(method);
  }

  bool agree = true;
  for (const Row& r : rows)
    if (r.count != rows.front().count) agree = false;

  Json j;
  j["graph"] = graph_name;
  j["n"] = g.edge_count();
  j["agree"] = agree;
  j["results"] = Json::array();
  for (const Row& r : rows) {
    Json e;
    e["method"] = r.method;
    e["count"] = r.count.str();
    e["elapsed_s"] = r.elapsed_s;
    j["results"].push_back(e);
  }
  write_json(ctx.out_dir, "eulercount.json", j);
  ctx.write_manifest("eulercount");
  if (!agree) throw ConsistencyError("euler count methods disagree (see eulercount.json)");
  return 0;
}

int cmd_trsmeasure(RunContext& ctx) {
  check_keys(ctx.cfg, {"d_list", "k_min", "k_max", "points"});
  std::vector<int> d_list = get_or<std::vector<int>>(ctx.cfg, "d_list", {3, 4, 5, 6, 7, 8});
  double k_min = get_or<double>(ctx.cfg, "k_min", 1e-2);
  double k_max = get_or<double>(ctx.cfg, "k_max", 1e3);
  auto points = static_cast<int>(get_or<std::int64_t>(ctx.cfg, "points", 1000));
  if (!(k_min > 0.0) || !(k_max > k_min)) throw ConfigError("need 0 < k_min < k_max");
  if (points < 2) throw ConfigError("points must be >= 2");
  for (int d : d_list)
    if (d < 3) throw ConfigError("d_list entries must be >= 3");

  std::string csv = "d,k,M\n";
  char buf[96];
  double lmin = std::log(k_min);
  double lmax = std::log(k_max);
  for (int d : d_list) {
    for (int i = 0; i < points; ++i) {
      double k = std::exp(lmin + (lmax - lmin) * i / (points - 1));
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", d, k, qgraph::trs_measure_circulant(d, k));
      csv += buf;
    }
  }
  write_file(ctx.out_dir, "trsmeasure.csv", csv);
  ctx.write_manifest("trsmeasure");
  return 0;
}

int cmd_diagff(RunContext& ctx) {
  check_keys(ctx.cfg, {"V_list", "n_max"});
  std::vector<int> v_list = get_or<std::vector<int>>(ctx.cfg, "V_list", {5, 7, 9, 101});
  auto n_max = static_cast<int>(get_or<std::int64_t>(ctx.cfg, "n_max", 20));
  if (n_max < 2) throw ConfigError("n_max must be >= 2");
  for (int v : v_list)
    if (v < 3) throw ConfigError("V_list entries must be >= 3");

  std::string csv = "V,n,tau,k_diag\n";
  char buf[128];
  for (int v : v_list) {
    for (int n = 2; n <= n_max; ++n) {
      double tau = static_cast<double>(n) / (static_cast<double>(v) * (v - 1));
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", v, n, tau,
                    qgraph::k_diag_complete(v, n));
      csv += buf;
    }
  }
  write_file(ctx.out_dir, "kdiag.csv", csv);

  // Eulerian contributions to K(1/2). Counts are computed exactly where a
  // counter applies; K_9 (E=36) exceeds every size guard, so its published
  // count is a constant here.
  qgraph::BigInt oct = qgraph::euler_count_best(qgraph::build_octahedron(), ctx.threads);
  qgraph::BigInt k5 = qgraph::euler_count_best(qgraph::build_complete(5), ctx.threads);
  qgraph::BigInt k7 = qgraph::euler_count_best(qgraph::build_complete(7), ctx.threads);
  qgraph::BigInt k9("911520057021235200");
  std::string ff = "graph,E,d,count,contribution\n";
  auto row = [&](const std::string& name, int E, int d, const qgraph::BigInt& c) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%.17g\n", name.c_str(), E, d, c.str().c_str(),
                  qgraph::euler_ff_contribution(E, d, c));
    ff += buf;
  };
  row("octahedron", 12, 4, oct);
  row("complete:5", 10, 4, k5);
  row("complete:7", 21, 6, k7);
  row("complete:9", 36, 8, k9);
  write_file(ctx.out_dir, "eulerff.csv", ff);
  ctx.write_manifest("diagff");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral statistics of metric graphs with preferred-orientation couplings"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::int64_t seed_flag = -1;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed_flag, "seed override (wins over config)");
    sub->add_option("--threads", threads, "worker threads (0 = auto)");
  };

  CLI::App* sub_spectrum = app.add_subcommand("spectrum", "solve eigenvalues on a window");
  CLI::App* sub_nn = app.add_subcommand("nnspacing", "nearest-neighbour spacing statistics");
  CLI::App* sub_ff = app.add_subcommand("formfactor", "spectral form factor, both estimators");
  CLI::App* sub_euler = app.add_subcommand("eulercount", "Eulerian cycle counts");
  CLI::App* sub_trs = app.add_subcommand("trsmeasure", "time-reversal violation measure sweep");
  CLI::App* sub_diag = app.add_subcommand("diagff", "diagonal-approximation form factor tables");
  for (CLI::App* sub : {sub_spectrum, sub_nn, sub_ff, sub_euler, sub_trs, sub_diag})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunContext ctx;
    ctx.cfg = load_config(config_path);
    ctx.threads = threads;
    ctx.seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                              : get_or<std::uint64_t>(ctx.cfg, "seed", 1);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + out_dir);
    ctx.out_dir = out_dir;

    if (sub_spectrum->parsed()) return cmd_spectrum(ctx);
    if (sub_nn->parsed()) return cmd_nnspacing(ctx);
    if (sub_ff->parsed()) return cmd_formfactor(ctx);
    if (sub_euler->parsed()) return cmd_eulercount(ctx);
    if (sub_trs->parsed()) return cmd_trsmeasure(ctx);
    if (sub_diag->parsed()) return cmd_diagff(ctx);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qgraph::SolverError& e) {
    std::cerr << "numerical validation error: " << e.what() << "\n";
    return 4;
  } catch (const ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return 3;
  } catch (const std::logic_error& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
