// slm: batch driver over the library.
//
// Exit codes: 0 success, 1 configuration error (including CapExceeded),
// 2 numeric failure (NaN/Inf in any output) or a failed theory check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slm/error.hpp"
#include "slm/experiments.hpp"
#include "slm/instances.hpp"
#include "slm/io.hpp"
#include "slm/marginal.hpp"
#include "slm/parallel.hpp"
#include "slm/prior.hpp"
#include "slm/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slm;

namespace {

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Invocation {
  std::string command;
  fs::path config_path;
  fs::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cap;
  int jobs = default_jobs();
};

struct Context {
  const Invocation& inv;
  json config;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;

  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return inv.out / name;
  }
  std::size_t cap(std::size_t fallback) const {
    return inv.cap ? *inv.cap : config.value("cap", static_cast<std::uint64_t>(fallback));
  }
};

void finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericFailure(what + " is not finite");
}

void finite(const Eigen::VectorXd& v, const std::string& what) {
  if (!v.allFinite()) throw NumericFailure(what + " has a non-finite entry");
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

PriorConfig prior_from(const json& cfg) {
  PriorConfig p;
  if (cfg.contains("prior")) {
    const json& j = cfg.at("prior");
    p.lambda = j.value("lambda", p.lambda);
    p.D = j.value("D", p.D);
  }
  p.validate();
  return p;
}

ChainConfig chain_from(const json& cfg, const PriorConfig& prior, std::uint64_t seed) {
  ChainConfig c;
  if (cfg.contains("chain")) {
    const json& j = cfg.at("chain");
    c.steps = j.value("steps", c.steps);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.thin = j.value("thin", c.thin);
    c.q_steps = j.value("q_steps", c.q_steps);
  }
  c.prior = prior;
  c.seed = seed;
  c.validate();
  return c;
}

// Y from "y" (inline array), "y_file" (relative to the config) or "scenario" (generated).
Eigen::VectorXd load_data(Context& ctx, const ModelFamily& f) {
  const json& cfg = ctx.config;
  Eigen::VectorXd y;
  if (cfg.contains("y")) {
    y = vector_from_json(cfg.at("y"));
  } else if (cfg.contains("y_file")) {
    fs::path p = cfg.at("y_file").get<std::string>();
    if (p.is_relative()) p = ctx.inv.config_path.parent_path() / p;
    y = read_vector_file(p);
  } else if (cfg.contains("scenario")) {
    json sj = cfg.at("scenario");
    if (!sj.contains("family")) sj["family"] = cfg.at("family");
    const Scenario sc = Scenario::from_json(sj);
    Rng truth_rng = Rng::substream(ctx.seed, {0}), noise_rng = Rng::substream(ctx.seed, {1});
    const TruthRecord t = generate_truth(f, sc, truth_rng);
    y = generate_noise(sc.noise, t.theta, noise_rng);
    json truth{{"tau_star", to_json(t.tau_star)}, {"epsilon_star", t.epsilon_star}, {"theta", to_json(t.theta)},
               {"y", to_json(y)}};
    if (t.structure) truth["structure"] = structure_to_json(*t.structure);
    write_json_file(ctx.output("truth.json"), truth);
  } else {
    throw ConfigError("config needs one of y, y_file or scenario");
  }
  if (y.size() != f.observation_dim())
    throw ConfigError("data has length " + std::to_string(y.size()) + ", family expects " +
                      std::to_string(f.observation_dim()));
  finite(y, "data");
  return y;
}

json index_json(const std::map<ModelIndex, double>& m) {
  json arr = json::array();
  for (const auto& [tau, p] : m) {
    finite(p, "probability of tau = " + to_string(tau));
    arr.push_back({{"tau", to_json(tau)}, {"probability", p}});
  }
  return arr;
}

void sample_prior_cmd(Context& ctx) {
  const auto f = ModelFamily::from_json(ctx.config.at("family"));
  const PriorConfig prior = prior_from(ctx.config);
  const int draws = ctx.config.value("draws", 1000);
  if (draws < 1) throw ConfigError("draws must be >= 1");
  Rng rng = Rng::substream(ctx.seed, {0});
  std::map<ModelIndex, long> counts;
  auto out = open_out(ctx.output("draws.jsonl"));
  for (int i = 0; i < draws; ++i) {
    const PriorDraw d = sample_prior(f, prior, rng);
    finite(d.signal, "prior draw signal");
    ++counts[d.structure.tau];
    out << to_json(d).dump() << '\n';
  }
  std::map<ModelIndex, double> freq;
  for (const auto& [tau, c] : counts) freq[tau] = double(c) / draws;
  write_json_file(ctx.output("index_frequencies.json"), index_json(freq));
}

void posterior_exact_cmd(Context& ctx) {
  const auto f = ModelFamily::from_json(ctx.config.at("family"));
  const PriorConfig prior = prior_from(ctx.config);
  const Eigen::VectorXd y = load_data(ctx, f);
  const PosteriorTable table = exact_posterior_table(f, y, prior, ctx.cap(200'000), ctx.inv.jobs);
  for (const auto& e : table.entries) finite(e.log_weight, "log weight of " + structure_key(e.structure));
  finite(table.log_normalizer, "log normalizer");
  auto out = open_out(ctx.output("table.csv"));
  write_table_csv(out, table);
  write_json_file(ctx.output("index_posterior.json"), index_json(index_posterior(table)));
}

void posterior_mcmc_cmd(Context& ctx) {
  const auto f = ModelFamily::from_json(ctx.config.at("family"));
  const PriorConfig prior = prior_from(ctx.config);
  const Eigen::VectorXd y = load_data(ctx, f);
  const ChainConfig cc = chain_from(ctx.config, prior, ctx.seed);
  const int chains = ctx.config.value("chains", 1);
  if (chains < 1) throw ConfigError("chains must be >= 1");
  const auto results = run_chains(f, y, cc, chains, ctx.inv.jobs);
  auto out = open_out(ctx.output("draws.jsonl"));
  json diag = json::array();
  std::map<ModelIndex, long> visits;
  long total = 0;
  for (int c = 0; c < chains; ++c) {
    for (const auto& d : results[c].draws) {
      finite(d.log_marginal, "log marginal");
      finite(d.q, "Q draw");
      json j = draw_to_json(d);
      j["chain"] = c;
      out << j.dump() << '\n';
    }
    diag.push_back(results[c].diagnostics.to_json());
    for (const auto& [tau, v] : results[c].diagnostics.visits) {
      visits[tau] += v;
      total += v;
    }
  }
  std::map<ModelIndex, double> freq;
  for (const auto& [tau, v] : visits) freq[tau] = double(v) / double(total);
  write_json_file(ctx.output("diagnostics.json"), diag);
  write_json_file(ctx.output("index_frequencies.json"), index_json(freq));
}

void rate_study_cmd(Context& ctx) {
  const json& cfg = ctx.config;
  std::vector<Scenario> grid;
  for (json s : cfg.at("grid")) {
    if (ctx.inv.seed || !s.contains("seed")) s["seed"] = ctx.seed;
    grid.push_back(Scenario::from_json(s));
  }
  EstimatorConfig est;
  est.estimator = estimator_from_string(cfg.value("estimator", std::string("auto")));
  est.prior = prior_from(cfg);
  est.chain = chain_from(cfg, est.prior, ctx.seed);
  est.cap = ctx.cap(est.cap);
  est.table_q_draws = cfg.value("table_q_draws", est.table_q_draws);
  est.delta = cfg.value("delta", est.delta);
  const RateReport report = run_rate_study(grid, est, ctx.inv.jobs);
  for (const auto& pt : report.points) {
    finite(pt.median_prediction, "median loss of " + pt.id);
    for (const auto& r : pt.replicates) {
      finite(r.loss.prediction_sq_mean, "prediction loss of " + pt.id);
      finite(r.loss.complexity_exceed, "exceedance of " + pt.id);
    }
  }
  {
    auto out = open_out(ctx.output("replicates.csv"));
    write_replicates_csv(out, report);
  }
  {
    auto out = open_out(ctx.output("summary.csv"));
    write_summary_csv(out, report);
  }
  write_json_file(ctx.output("plot_data.json"), plot_data(report));
}

void theory_check_cmd(Context& ctx) {
  std::vector<ModelFamily> families;
  for (const auto& j : ctx.config.at("families")) families.push_back(ModelFamily::from_json(j));
  TheoryOptions opt;
  if (ctx.config.contains("options")) {
    const json& j = ctx.config.at("options");
    opt.beta = j.value("beta", opt.beta);
    opt.alpha_max = j.value("alpha_max", opt.alpha_max);
    opt.capacity_t_max = j.value("capacity_t_max", opt.capacity_t_max);
    opt.pythagorean_trials = j.value("pythagorean_trials", opt.pythagorean_trials);
    opt.pythagorean_tol = j.value("pythagorean_tol", opt.pythagorean_tol);
  }
  opt.seed = ctx.seed;
  const TheoryReport report = theory_checks(families, opt);
  write_json_file(ctx.output("theory_report.json"), report.to_json());
  for (const auto& c : report.checks)
    if (!c.passed) throw CheckFailed(c.name + " on " + c.family + ": " + c.detail);
}

void restricted_constants_cmd(Context& ctx) {
  const Eigen::MatrixXd x = design_from_json(ctx.config.at("design"));
  const int s_star = ctx.config.at("s_star").get<int>();
  const double delta = ctx.config.value("delta", 0.5);
  const RestrictedConstants rc = restricted_constants(x, s_star, delta, ctx.cap(1'000'000));
  finite(rc.kappa1, "kappa1");
  finite(rc.kappa2, "kappa2");
  write_json_file(ctx.output("restricted_constants.json"),
                  {{"kappa1", rc.kappa1}, {"kappa2", rc.kappa2}, {"support_size", rc.support_size},
                   {"s_star", s_star}, {"delta", delta}});
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int run(const Invocation& inv) {
  Context ctx{inv, {}, 0, {}};
  json manifest{{"tool", "slm"},
                {"version", SLM_VERSION},
                {"subcommand", inv.command},
                {"config", inv.config_path.string()},
                {"config_hash", nullptr},
                {"seed", nullptr}};
  int code = 0;
  std::string error;
  try {
    std::error_code ec;
    fs::create_directories(inv.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + inv.out.string() + ": " + ec.message());
    ctx.config = read_json_file(inv.config_path);
    if (!ctx.config.is_object()) throw ConfigError("config must be a JSON object");
    manifest["config_hash"] = config_hash(ctx.config);
    ctx.seed = inv.seed ? *inv.seed : ctx.config.value("seed", std::uint64_t{0});
    manifest["seed"] = ctx.seed;
    if (inv.command == "sample-prior") sample_prior_cmd(ctx);
    else if (inv.command == "posterior-exact") posterior_exact_cmd(ctx);
    else if (inv.command == "posterior-mcmc") posterior_mcmc_cmd(ctx);
    else if (inv.command == "rate-study") rate_study_cmd(ctx);
    else if (inv.command == "theory-check") theory_check_cmd(ctx);
    else if (inv.command == "restricted-constants") restricted_constants_cmd(ctx);
    else throw ConfigError("unknown subcommand " + inv.command);
  } catch (const CapExceeded& e) {
    code = 1;
    error = std::string("CapExceeded: ") + e.what();
  } catch (const ConfigError& e) {
    code = 1;
    error = std::string("ConfigError: ") + e.what();
  } catch (const DomainError& e) {
    code = 1;
    error = std::string("DomainError: ") + e.what();
  } catch (const CollinearStructure& e) {
    code = 1;
    error = std::string("CollinearStructure: ") + e.what();
  } catch (const NoValidModels& e) {
    code = 1;
    error = std::string("NoValidModels: ") + e.what();
  } catch (const json::exception& e) {
    code = 1;
    error = std::string("ConfigError: ") + e.what();
  } catch (const NumericFailure& e) {
    code = 2;
    error = std::string("NumericFailure: ") + e.what();
  } catch (const CheckFailed& e) {
    code = 2;
    error = std::string("CheckFailed: ") + e.what();
  } catch (const std::exception& e) {
    code = 2;
    error = std::string("Error: ") + e.what();
  }
  manifest["status"] = code == 0 ? "ok" : "error";
  manifest["exit_code"] = code;
  if (code != 0) manifest["error"] = one_line(error);
  manifest["outputs"] = ctx.outputs;
  if (fs::is_directory(inv.out)) {
    try {
      write_json_file(inv.out / "manifest.json", manifest);
    } catch (const std::exception& e) {
      if (code == 0) {
        code = 1;
        error = std::string("ConfigError: ") + e.what();
      }
    }
  }
  if (code != 0) std::cerr << one_line(error) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured linear model posteriors: sampling, exact tables, rate studies"};
  app.require_subcommand(1);
  Invocation inv;
  std::string config, out;
  std::uint64_t seed = 0;
  std::size_t cap = 0;
  int jobs = 0;
  const std::vector<std::pair<const char*, const char*>> commands{
      {"sample-prior", "Draw (tau, Z, Q) from the prior"},
      {"posterior-exact", "Enumerate the posterior over every identifiable structure"},
      {"posterior-mcmc", "Collapsed Metropolis-Hastings over structures"},
      {"rate-study", "Replicated loss study over a scenario grid"},
      {"theory-check", "Growth, capacity, larger-condition and Pythagorean checks"},
      {"restricted-constants", "Restricted eigenvalue and compatibility constants of a design"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Config JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory")->required();
    sub->add_option("--seed", seed, "Seed override");
    sub->add_option("--jobs", jobs, "Worker threads (default: available parallelism)")->check(CLI::PositiveNumber);
    sub->add_option("--cap", cap, "Enumeration cap override")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "UsageError: " << one_line(e.what()) << '\n';
    return 1;
  }
  inv.command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  inv.config_path = config;
  inv.out = out;
  if (sub->count("--seed")) inv.seed = seed;
  if (sub->count("--cap")) inv.cap = cap;
  if (sub->count("--jobs")) inv.jobs = jobs;
  return run(inv);
}
