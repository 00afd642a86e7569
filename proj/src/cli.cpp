#include "gmentropy/cli.hpp"

#include "gmentropy/bnn.hpp"
#include "gmentropy/bounds.hpp"
#include "gmentropy/entropy.hpp"
#include "gmentropy/errors.hpp"
#include "gmentropy/experiments.hpp"
#include "gmentropy/format.hpp"
#include "gmentropy/mixture_json.hpp"
#include "gmentropy/model_json.hpp"
#include "gmentropy/parallel.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace gmentropy::cli {

namespace {

using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int verbosity = 0;
};

// Writes to the named file, or to `out` when the name is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::size_t parse_count(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size() || v < 1) throw std::invalid_argument("");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + " '" + s + "'");
  }
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json bound_report_json(const BoundReport& r) {
  json j{{"variant", std::string(to_string(r.variant))},
         {"alpha_kind", r.alpha_kind == AlphaKind::Pairwise ? "pair" : "set"},
         {"s", r.s_used},
         {"lower", r.lower},
         {"lower_std_error", r.lower_std_error},
         {"upper", r.upper},
         {"alpha_pair", matrix_json(r.alpha.pairwise)}};
  if (r.alpha.set_based) j["alpha_set"] = matrix_json(*r.alpha.set_based);
  if (!r.c_estimates.empty()) {
    const Eigen::Index K = r.alpha.pairwise.rows();
    json c = json::array();
    for (Eigen::Index k = 0; k < K; ++k) {
      json row = json::array();
      for (Eigen::Index kp = 0; kp < K; ++kp) {
        if (k == kp) {
          row.push_back(nullptr);
          continue;
        }
        const auto& e = r.c(k, kp);
        row.push_back({{"value", e.value}, {"std_error", e.std_error}, {"exact", e.exact}});
      }
      c.push_back(row);
    }
    j["c"] = c;
  }
  return j;
}

int run_entropy_compare(const std::string& mixture_path, const std::string& methods, const std::string& out_path,
                        const Globals& g, std::ostream& out) {
  const GaussianMixture q = load_mixture(mixture_path);
  std::string csv = "method,value,std_error,n\n";
  for (const auto& token : split(methods, ',')) {
    const auto colon = token.find(':');
    const std::string name = token.substr(0, colon);
    const std::optional<std::string> arg =
        colon == std::string::npos ? std::nullopt : std::optional<std::string>(token.substr(colon + 1));
    EntropyEstimate e;
    std::optional<std::size_t> n;
    if (name == "ours") {
      e = entropy_ours(q);
    } else if (name == "huber0") {
      e = entropy_huber(q, HuberOrder::Zero);
    } else if (name == "huber2") {
      e = entropy_huber(q, HuberOrder::Two);
    } else if (name == "bonilla") {
      e = entropy_bonilla(q);
    } else if (name == "bonilla-weighted") {
      e = entropy_bonilla(q, BonillaWeighting::Weighted);
    } else if (name == "mc") {
      e = entropy_mc(q, arg ? parse_count(*arg, "sample count") : 1000, g.seed);
    } else if (name == "reduced-mc") {
      e = entropy_reduced_mc(q, arg ? parse_count(*arg, "sample count") : 100000, g.seed);
    } else if (name == "gh") {
      n = arg ? parse_count(*arg, "node count") : kDefaultHermiteNodes;
      e = entropy_exact_k2(q, *n);
    } else {
      throw UsageError("unknown entropy method '" + name + "'");
    }
    if (e.n_samples) n = e.n_samples;
    csv += token + ',' + format_double(e.value) + ',' + (e.std_error ? format_double(*e.std_error) : "") + ',' +
           (n ? std::to_string(*n) : "") + '\n';
  }
  emit(out_path, csv, out);
  return 0;
}

int run_bounds(const std::string& mixture_path, const std::string& s_arg, const std::string& alpha_arg,
               const std::string& variant_arg, std::size_t c_samples, bool derivatives, const std::string& out_path,
               const Globals& g, std::ostream& out) {
  const GaussianMixture q = load_mixture(mixture_path);
  std::optional<double> s;
  if (s_arg != "auto") {
    try {
      std::size_t pos = 0;
      s = std::stod(s_arg, &pos);
      if (pos != s_arg.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("sharpness s must be 'auto' or a number in the open interval (0,1), got " + s_arg);
    }
  }
  AlphaKind alpha;
  if (alpha_arg == "pair") {
    alpha = AlphaKind::Pairwise;
  } else if (alpha_arg == "set") {
    alpha = AlphaKind::SetBased;
  } else {
    throw UsageError("--alpha must be pair or set");
  }
  bool shared;
  if (variant_arg == "auto") {
    shared = q.has_shared_covariance() && q.dim() >= q.size() - 1;
  } else if (variant_arg == "shared" || variant_arg == "general") {
    shared = variant_arg == "shared";
  } else {
    throw UsageError("--variant must be auto, general or shared");
  }
  const BoundReport r =
      shared ? error_bounds_shared(q, s, alpha) : error_bounds_general(q, s, alpha, c_samples, g.seed);
  json j = bound_report_json(r);
  if (derivatives) {
    const DerivativeBoundReport d = derivative_bounds(q, r.s_used);
    json gam = json::array();
    for (const auto& m : d.gamma_bounds) gam.push_back(matrix_json(m));
    j["derivatives"] = {{"s", d.s_used},
                        {"mu", matrix_json(d.mu_bounds)},
                        {"gamma", gam},
                        {"pi", std::vector<double>(d.pi_bounds.data(), d.pi_bounds.data() + d.pi_bounds.size())}};
  }
  emit(out_path, j.dump(2) + "\n", out);
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& out_dir, bool full_scale, const Globals& g,
              bool seed_given, std::ostream& out, std::ostream& err) {
  SweepConfig cfg = full_scale ? SweepConfig::full_scale() : SweepConfig{};
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot open " + config_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("cannot parse " + config_path + ": " + e.what());
    }
    if (full_scale) {
      doc["dims"] = sweep_config_to_json(cfg)["dims"];
      doc["n_trials"] = cfg.n_trials;
    }
    cfg = sweep_config_from_json(doc);
  }
  if (seed_given) cfg.seed = g.seed;
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = run_relative_error_sweep(cfg);
  if (g.verbosity > 0) {
    err << "sweep finished in "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  }
  std::filesystem::create_directories(out_dir);
  emit((std::filesystem::path(out_dir) / "sweep.csv").string(), sweep_csv(records), out);
  emit((std::filesystem::path(out_dir) / "sweep.svg").string(), sweep_svg(records, cfg), out);
  return 0;
}

int run_prob_check(int K, int m, double c, double eps, double s, std::size_t trials, const std::string& out_path,
                   const Globals& g, std::ostream& out) {
  const ProbabilisticCheck r = run_probabilistic_check(K, m, c, eps, s, trials, g.seed);
  const json j{{"K", K},
               {"m", m},
               {"c", c},
               {"eps", eps},
               {"s", s},
               {"n_trials", r.n_trials},
               {"exceedances", r.exceedances},
               {"empirical_prob", r.empirical_prob},
               {"binomial_sigma", r.binomial_sigma},
               {"rhs", r.rhs},
               {"holds", r.empirical_prob <= r.rhs + 3.0 * r.binomial_sigma}};
  emit(out_path, j.dump(2) + "\n", out);
  return 0;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  double a, b, step;
  try {
    if (parts.size() != 3 || spec.back() == ':') throw std::invalid_argument("");
    a = std::stod(parts[0]);
    b = std::stod(parts[1]);
    step = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw UsageError("grid must look like a:b:step, got '" + spec + "'");
  }
  if (!(step > 0) || !(b >= a)) throw UsageError("grid needs step > 0 and b >= a");
  const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = a + static_cast<double>(i) * step;
  return xs;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian-mixture entropy approximation, error bounds and mixture-posterior BNNs", "gmentropy"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed (default 0)");
  app.add_option("--threads", g.threads, "Worker thread cap (default: all cores)");
  app.add_flag("-v,--verbose", g.verbosity, "More diagnostics on stderr");
  bool full_scale = false;
  app.add_flag("--full-scale", full_scale, "Large sweep (500 trials, m up to 500)");

  std::string mixture_path, out_path, methods = "ours";
  auto* ec = app.add_subcommand("entropy-compare", "Entropy of a mixture by several methods (CSV)");
  ec->add_option("--mixture", mixture_path, "Mixture JSON file")->required();
  ec->add_option("--methods", methods,
                 "Comma list of ours,huber0,huber2,bonilla,bonilla-weighted,mc:N,reduced-mc:N,gh:N");
  ec->add_option("--out", out_path, "Output file (default stdout)");

  std::string s_arg = "auto", alpha_arg = "pair", variant_arg = "auto";
  std::size_t c_samples = 100000;
  bool derivatives = false;
  auto* bd = app.add_subcommand("bounds", "Error bounds on the approximation (JSON)");
  bd->add_option("--mixture", mixture_path, "Mixture JSON file")->required();
  bd->add_option("--s", s_arg, "Sharpness in (0,1) or auto");
  bd->add_option("--alpha", alpha_arg, "pair or set");
  bd->add_option("--variant", variant_arg, "auto, general or shared");
  bd->add_option("--c-samples", c_samples, "Monte Carlo samples per c coefficient");
  bd->add_flag("--derivatives", derivatives, "Also report derivative bounds");
  bd->add_option("--out", out_path, "Output file (default stdout)");

  std::string config_path, out_dir = ".";
  auto* sw = app.add_subcommand("sweep", "Relative-error sweep over dimensions (sweep.csv, sweep.svg)");
  sw->add_option("--config", config_path, "Sweep config JSON");
  sw->add_option("--out", out_dir, "Output directory");

  int K = 2, m = 200;
  double c = 1.0, eps = 0.5, s = 0.5;
  std::size_t trials = 500;
  auto* pc = app.add_subcommand("prob-check", "Empirical check of the probabilistic bound (JSON)");
  pc->add_option("--K", K, "Number of components (2)");
  pc->add_option("--m", m, "Dimension");
  pc->add_option("--c", c, "Scale of the mean offsets");
  pc->add_option("--eps", eps, "Error threshold");
  pc->add_option("--s", s, "Sharpness in (0,1)");
  pc->add_option("--trials", trials, "Number of random mixtures");
  pc->add_option("--out", out_path, "Output file (default stdout)");

  TrainConfig tc;
  std::string data_path, trace_path, optimizer = "adam", hidden = "8,8";
  auto* tr = app.add_subcommand("train", "Train a mixture-posterior BNN (model JSON)");
  tr->add_option("--K", tc.K, "Mixture components");
  tr->add_option("--epochs", tc.epochs, "Full-batch steps");
  tr->add_option("--lr", tc.learning_rate, "Learning rate");
  tr->add_option("--sigma-w", tc.prior_std, "Prior std");
  tr->add_option("--sigma-y", tc.likelihood_std, "Observation noise std");
  tr->add_option("--optimizer", optimizer, "adam or sgd");
  tr->add_option("--hidden", hidden, "Hidden widths, comma separated");
  tr->add_option("--data", data_path, "Training CSV (default: 20 generated points)");
  tr->add_option("--trace", trace_path, "Write the objective trace as CSV");
  tr->add_option("--out", out_path, "Model JSON output")->required();

  std::string model_path, grid = "-6:6:0.05";
  std::size_t samples = 200;
  auto* pr = app.add_subcommand("predict", "Predictive mean and std on a grid (CSV)");
  pr->add_option("--model", model_path, "Model JSON")->required();
  pr->add_option("--grid", grid, "a:b:step");
  pr->add_option("--samples", samples, "Weight draws per component");
  pr->add_option("--out", out_path, "Output file (default stdout)");

  std::size_t n_points = 20;
  double noise = 0.1, x_min = -6.0, x_max = 6.0;
  auto* ds = app.add_subcommand("dataset", "Noisy x·sin(x) training data (CSV)");
  ds->add_option("--n", n_points, "Number of points");
  ds->add_option("--noise", noise, "Noise std");
  ds->add_option("--x-min", x_min, "Lower end of the input range");
  ds->add_option("--x-max", x_max, "Upper end of the input range");
  ds->add_option("--out", out_path, "Output file (default stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    set_max_threads(g.threads);
    const bool seed_given = app.count("--seed") > 0;
    if (ec->parsed()) return run_entropy_compare(mixture_path, methods, out_path, g, out);
    if (bd->parsed()) return run_bounds(mixture_path, s_arg, alpha_arg, variant_arg, c_samples, derivatives,
                                        out_path, g, out);
    if (sw->parsed()) return run_sweep(config_path, out_dir, full_scale, g, seed_given, out, err);
    if (pc->parsed()) return run_prob_check(K, m, c, eps, s, trials, out_path, g, out);
    if (tr->parsed()) {
      tc.seed = g.seed;
      tc.optimizer = parse_optimizer(optimizer);
      MLPSpec spec;
      spec.hidden.clear();
      for (const auto& h : split(hidden, ',')) spec.hidden.push_back(static_cast<int>(parse_count(h, "width")));
      const Dataset data =
          data_path.empty() ? generate_dataset(20, 0.1, {-6.0, 6.0}, g.seed) : read_dataset_csv(data_path);
      const auto t0 = std::chrono::steady_clock::now();
      const TrainResult res = train(spec, tc, data);
      if (g.verbosity > 0) {
        err << "trained " << tc.epochs << " steps in "
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s, final objective "
            << (res.elbo_trace.empty() ? std::nan("") : res.elbo_trace.back()) << '\n';
      }
      save_model({spec, res.posterior, tc.likelihood_std, tc.prior_std}, out_path);
      if (!trace_path.empty()) {
        std::string csv = "epoch,elbo\n";
        for (std::size_t i = 0; i < res.elbo_trace.size(); ++i)
          csv += std::to_string(i + 1) + ',' + format_double(res.elbo_trace[i]) + '\n';
        emit(trace_path, csv, out);
      }
      return 0;
    }
    if (pr->parsed()) {
      const TrainedModel model = load_model(model_path);
      const auto preds = predict(model.posterior, model.spec, parse_grid(grid), samples, g.seed, model.likelihood_std);
      std::string csv = "x,mean,std";
      for (Eigen::Index k = 0; k < model.posterior.components(); ++k) csv += ",comp_mean_" + std::to_string(k);
      csv += '\n';
      for (const auto& p : preds) {
        csv += format_double(p.x) + ',' + format_double(p.mean) + ',' + format_double(p.std);
        for (double v : p.component_means) csv += ',' + format_double(v);
        csv += '\n';
      }
      emit(out_path, csv, out);
      return 0;
    }
    if (ds->parsed()) {
      std::ostringstream csv;
      write_dataset_csv(generate_dataset(n_points, noise, {x_min, x_max}, g.seed), csv);
      emit(out_path, csv.str(), out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace gmentropy::cli
