#include "mixlab/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mixlab/checks.hpp"
#include "mixlab/cltlab.hpp"
#include "mixlab/config.hpp"
#include "mixlab/error.hpp"
#include "mixlab/fishmin.hpp"
#include "mixlab/infofn.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/suite.hpp"

namespace mixlab::cli {

namespace {

constexpr std::size_t kDefaultAtomize = 1 << 14;

/// Signals a failed check after its report has been written.
struct CheckFailed {};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + out);
  os << text;
}

void emit_json(const nlohmann::json& doc, const std::string& out) { emit(doc.dump(2) + "\n", out); }

/// Mixture from a mixer document. Stable documents may carry "atomize": m.
MixtureDensity mixture_from_doc(nlohmann::json doc, std::size_t default_m, std::uint64_t seed) {
  if (doc.is_object() && doc.value("type", "") == "stable") {
    std::size_t m = default_m;
    if (doc.contains("atomize")) {
      m = doc.at("atomize").get<std::size_t>();
      doc.erase("atomize");
    }
    return MixtureDensity(atomize(mixer_from_json(doc), m, seed));
  }
  return mixture_from_json(doc);
}

struct Globals {
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> tail_radius;
  std::optional<std::size_t> max_subdivisions;

  QuadSpec quad(QuadSpec base = {}) const {
    if (rel_tol) base.rel_tol = *rel_tol;
    if (abs_tol) base.abs_tol = *abs_tol;
    if (tail_radius) base.tail_radius_multiplier = *tail_radius;
    if (max_subdivisions) base.max_subdivisions = *max_subdivisions;
    try {
      base.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    return base;
  }
};

void apply_threads(const Globals& g) {
  unsigned threads = g.threads;
  if (threads == 0) {
    if (const char* env = std::getenv("MIXLAB_THREADS")) {
      try {
        threads = static_cast<unsigned>(std::stoul(env));
      } catch (const std::exception&) {
        throw ConfigError(std::string("MIXLAB_THREADS must be a positive integer, got '") + env + "'");
      }
    }
  }
  parallel::set_thread_count(threads == 0 ? 1 : threads);
}

// ---------------------------------------------------------------------------
// check

struct CheckConfig {
  nlohmann::json doc;
  std::uint64_t seed;
  QuadSpec quad;
  Rng rng;

  CheckConfig(nlohmann::json d, std::uint64_t s, const Globals& g) : doc(std::move(d)), seed(s), rng(s) {
    quad = doc.contains("quad") ? g.quad(quad_spec_from_json(doc.at("quad"))) : g.quad();
  }
  template <class T>
  T get(const char* key, T fallback) const {
    return doc.contains(key) ? doc.at(key).get<T>() : fallback;
  }
  MixtureDensity model(const char* key, int d = 1) {
    if (doc.contains(key)) return mixture_from_doc(doc.at(key), kDefaultAtomize, seed);
    return d == 1 ? random_scalar_model(rng) : random_matrix_model(rng, d);
  }
  std::vector<MixtureDensity> models(const char* key, std::size_t count, int d = 1) {
    std::vector<MixtureDensity> out;
    if (doc.contains(key)) {
      for (const auto& m : doc.at(key)) out.push_back(mixture_from_doc(m, kDefaultAtomize, seed));
      return out;
    }
    for (std::size_t i = 0; i < count; ++i) out.push_back(d == 1 ? random_scalar_model(rng) : random_matrix_model(rng, d));
    return out;
  }
};

CheckReport run_check(const std::string& name, const nlohmann::json& doc, std::uint64_t seed, const Globals& g) {
  auto keys = [&](std::initializer_list<const char*> allowed) { reject_unknown_keys(doc, allowed, "check " + name); };
  if (name == "entropy_concavity_t") {
    keys({"model1", "model2", "t_grid", "tolerance", "epi_tolerance", "quad"});
    CheckConfig c(doc, seed, g);
    const auto m1 = c.model("model1");
    const auto m2 = c.model("model2");
    return check_entropy_concavity_t(m1, m2, c.get<std::size_t>("t_grid", 41), c.quad, c.get("tolerance", 1e-6),
                                     c.get("epi_tolerance", 1e-8));
  }
  if (name == "blachman_stam" || name == "fisher_jensen") {
    keys({"model1", "model2", "grid", "dimension", "tolerance", "quad"});
    CheckConfig c(doc, seed, g);
    const int d = c.get("dimension", 1);
    const auto m1 = c.model("model1", d);
    const auto m2 = c.model("model2", d);
    const auto grid = c.get<std::size_t>("grid", 11);
    if (name == "blachman_stam") return check_blachman_stam(m1, m2, grid, c.quad, c.get("tolerance", 1e-8));
    return check_fisher_jensen(m1, m2, grid, c.quad, c.get("tolerance", 1e-8));
  }
  if (name == "simplex_concavity") {
    keys({"models", "n", "dimension", "alpha", "pairs", "tolerance", "quad"});
    CheckConfig c(doc, seed, g);
    const auto models = c.models("models", c.get<std::size_t>("n", 3), c.get("dimension", 1));
    return check_simplex_concavity(models, c.get("alpha", 1.0), c.get<std::size_t>("pairs", 50), seed, c.quad,
                                   c.get("tolerance", 1e-6));
  }
  if (name == "schur_concavity") {
    keys({"model", "n", "alpha", "pairs", "tolerance", "quad"});
    CheckConfig c(doc, seed, g);
    const std::vector<MixtureDensity> models(c.get<std::size_t>("n", 3), c.model("model"));
    return check_schur_concavity(models, c.get<std::size_t>("pairs", 50), seed, c.quad, c.get("alpha", 1.0),
                                 c.get("tolerance", 1e-6));
  }
  if (name == "fisher_sandwich") {
    keys({"models", "count", "dimension", "tolerance", "quad"});
    CheckConfig c(doc, seed, g);
    const auto models = c.models("models", c.get<std::size_t>("count", 50), c.get("dimension", 1));
    return check_fisher_sandwich(models, c.quad, c.get("tolerance", 1e-8));
  }
  if (name == "R_convexity") {
    keys({"samples", "dimension", "tolerance"});
    CheckConfig c(doc, seed, g);
    return check_R_convexity(c.get<std::size_t>("samples", 10'000), seed, c.get("dimension", 3),
                             c.get("tolerance", 1e-10));
  }
  if (name == "sqrtXYsqrtX_counterexample") {
    keys({"tolerance"});
    CheckConfig c(doc, seed, g);
    return verify_sqrtXYsqrtX_counterexample(c.get("tolerance", 1e-9));
  }
  throw ConfigError("unknown check '" + name + "'");
}

// ---------------------------------------------------------------------------
// density

std::string density_csv(const MixtureDensity& mix, const std::string& text) {
  std::istringstream is(text);
  std::ostringstream os;
  std::string line;
  const int d = mix.dimension();
  std::size_t row = 0;
  bool header_done = false;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    std::vector<double> x;
    bool numeric = true;
    for (const auto& c : cells) {
      double v = 0.0;
      const char* first = c.data();
      const char* last = c.data() + c.size();
      while (first < last && *first == ' ') ++first;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last) {
        numeric = false;
        break;
      }
      x.push_back(v);
    }
    if (!numeric) {
      if (header_done || row != 1) throw ConfigError("points row " + std::to_string(row) + ": not numeric");
      header_done = true;
      os << line << ",log_density,density";
      for (int k = 0; k < d; ++k) os << ",score_" << (k + 1);
      os << '\n';
      continue;
    }
    if (static_cast<int>(x.size()) != d) {
      throw ConfigError("points row " + std::to_string(row) + ": expected " + std::to_string(d) + " columns");
    }
    const Vector v = Eigen::Map<const Vector>(x.data(), d);
    const Vector s = mix.score(v);
    os << line << ',' << format_double(mix.log_density(v)) << ',' << format_double(mix.density(v));
    for (int k = 0; k < d; ++k) os << ',' << format_double(s(k));
    os << '\n';
  }
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Gaussian mixture information toolkit"};
  app.name(args.empty() ? "mixlab" : args.front());
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (default: MIXLAB_THREADS or 1)");
  app.add_option("--rel-tol", g.rel_tol, "Quadrature relative tolerance");
  app.add_option("--abs-tol", g.abs_tol, "Quadrature absolute tolerance");
  app.add_option("--tail-radius", g.tail_radius, "Integration radius in units of the largest scale");
  app.add_option("--max-subdivisions", g.max_subdivisions, "Quadrature panel budget");

  std::string model_path;
  std::size_t atomize_m = kDefaultAtomize;
  std::size_t mc_samples = 1'000'000;
  bool force_mc = false;
  double alpha = 2.0;

  auto info_options = [&](CLI::App* sub) {
    sub->add_option("--model", model_path, "Mixer/mixture JSON")->required();
    sub->add_option("--atomize", atomize_m, "Atoms for stable mixers");
    sub->add_option("--mc-samples", mc_samples, "Monte Carlo samples");
    sub->add_flag("--monte-carlo", force_mc, "Force the Monte Carlo estimator");
    sub->add_option("--seed", g.seed, "Seed");
    sub->add_option("--out", g.out, "Output path (default stdout)");
  };
  auto* entropy_cmd = app.add_subcommand("entropy", "Shannon entropy");
  info_options(entropy_cmd);
  auto* renyi_cmd = app.add_subcommand("renyi", "Renyi entropy");
  info_options(renyi_cmd);
  renyi_cmd->add_option("--alpha", alpha, "Order")->required();
  auto* fisher_cmd = app.add_subcommand("fisher", "Fisher information matrix");
  info_options(fisher_cmd);

  std::string points_path;
  auto* density_cmd = app.add_subcommand("density", "Batch density and score from CSV points");
  density_cmd->add_option("--model", model_path)->required();
  density_cmd->add_option("--atomize", atomize_m);
  density_cmd->add_option("--seed", g.seed);
  density_cmd->add_option("--points", points_path, "CSV, one point per row")->required();
  density_cmd->add_option("--out", g.out);

  std::string check_name;
  std::string config_path;
  auto* check_cmd = app.add_subcommand("check", "Run one inequality check");
  check_cmd->add_option("name", check_name, "Check name")->required();
  check_cmd->add_option("--config", config_path, "Check config JSON");
  check_cmd->add_option("--seed", g.seed);
  check_cmd->add_option("--out", g.out);

  auto* clt_cmd = app.add_subcommand("clt-rate", "Standardized Fisher deviation sweep");
  clt_cmd->add_option("--config", config_path)->required();
  clt_cmd->add_option("--out", g.out, "CSV output (default stdout)");

  TypeCheckSpec type_spec;
  std::string norm = "schatten";
  auto* type_cmd = app.add_subcommand("type-check", "Exhaustive Rademacher type check");
  type_cmd->add_option("--p", type_spec.p);
  type_cmd->add_option("--delta", type_spec.delta);
  type_cmd->add_option("--n", type_spec.n);
  type_cmd->add_option("--d", type_spec.d);
  type_cmd->add_option("--trials", type_spec.trials);
  type_cmd->add_option("--seed", type_spec.seed);
  type_cmd->add_option("--norm", norm)->check(CLI::IsMember({"schatten", "operator"}));
  type_cmd->add_option("--out", g.out);

  MinimizeSpec min_spec;
  std::string method = "grid";
  std::string trace_path;
  auto* min_cmd = app.add_subcommand("min-fisher", "Minimize Fisher information over the simplex");
  min_cmd->add_option("--model", model_path)->required();
  min_cmd->add_option("--n", min_spec.n);
  min_cmd->add_option("--method", method)->check(CLI::IsMember({"grid", "descent"}));
  min_cmd->add_option("--budget", min_spec.budget);
  min_cmd->add_option("--grid-steps", min_spec.grid_steps);
  min_cmd->add_option("--seed", min_spec.seed);
  min_cmd->add_option("--out", trace_path, "Trace CSV");

  double moment_delta = 0.5;
  auto* moments_cmd = app.add_subcommand("moments", "Moment condition report");
  moments_cmd->add_option("--model", model_path)->required();
  moments_cmd->add_option("--delta", moment_delta);
  moments_cmd->add_option("--out", g.out);

  std::string out_dir = "suite-output";
  auto* suite_cmd = app.add_subcommand("suite", "Run the acceptance battery");
  suite_cmd->add_option("--seed", g.seed);
  suite_cmd->add_option("--out-dir", out_dir);

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    apply_threads(g);
    if (*entropy_cmd || *renyi_cmd || *fisher_cmd) {
      const MixtureDensity mix = mixture_from_doc(load_json(model_path), atomize_m, g.seed);
      const QuadSpec quad = g.quad();
      const McSpec mc{mc_samples, g.seed};
      if (*entropy_cmd) {
        emit_json(to_json(force_mc ? entropy_monte_carlo(mix, mc) : entropy(mix, quad, mc)), g.out);
      } else if (*renyi_cmd) {
        const auto est = force_mc && alpha != 1.0 ? renyi_entropy_monte_carlo(mix, alpha, mc)
                                                  : renyi_entropy(mix, alpha, quad, mc);
        emit_json(to_json(est), g.out);
      } else {
        emit_json(to_json(force_mc ? fisher_matrix_monte_carlo(mix, mc) : fisher_matrix(mix, quad, mc)), g.out);
      }
    } else if (*density_cmd) {
      const MixtureDensity mix = mixture_from_doc(load_json(model_path), atomize_m, g.seed);
      emit(density_csv(mix, read_file(points_path)), g.out);
    } else if (*check_cmd) {
      const nlohmann::json doc = config_path.empty() ? nlohmann::json::object() : load_json(config_path);
      const CheckReport report = run_check(check_name, doc, g.seed, g);
      emit_json(to_json(report), g.out);
      if (!report.all_pass()) throw CheckFailed{};
    } else if (*clt_cmd) {
      CltConfig config = clt_config_from_json(load_json(config_path));
      config.quad = g.quad(config.quad);
      const auto rows = run_clt(config);
      emit(clt_rows_to_csv(rows), g.out);
    } else if (*type_cmd) {
      type_spec.norm = norm == "operator" ? TypeNorm::Operator : TypeNorm::Schatten;
      const auto report = check_rademacher_type(type_spec);
      emit_json(to_json(report), g.out);
      if (!report.pass) throw CheckFailed{};
    } else if (*min_cmd) {
      const MixtureDensity mix = mixture_from_doc(load_json(model_path), atomize_m, min_spec.seed);
      min_spec.method = method == "grid" ? MinimizeMethod::Grid : MinimizeMethod::ProjectedDescent;
      min_spec.quad = g.quad();
      const auto result = minimize_fisher(mix, min_spec);
      if (!trace_path.empty()) emit(trace_to_csv(result), trace_path);
      emit_json(to_json(result), "");
      for (const auto& c : result.checks) {
        if (!c.all_pass()) throw CheckFailed{};
      }
    } else if (*moments_cmd) {
      emit_json(to_json(moment_condition_report(mixer_from_json(load_json(model_path)), moment_delta)), g.out);
    } else if (*suite_cmd) {
      const SuiteResult result = run_suite(g.seed);
      write_suite(result, out_dir);
      std::cout << result.summary().dump(2) << "\n";
      if (!result.pass()) throw CheckFailed{};
    }
  } catch (const CheckFailed&) {
    return kExitCheckFailed;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace mixlab::cli
