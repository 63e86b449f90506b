#include "mixres/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mixres/barron.hpp"
#include "mixres/gradcheck.hpp"
#include "mixres/rademacher.hpp"

namespace mixres {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw std::invalid_argument(fmt::format("{}: '{}' is not an integer", key, v));
  return x;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v[0] == '-')
    throw std::invalid_argument(fmt::format("{}: '{}' is not a non-negative integer", key, v));
  return x;
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw std::invalid_argument(fmt::format("{}: '{}' is not a number", key, v));
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<Index> to_index_list(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  for (const auto& s : split(v)) out.push_back(static_cast<Index>(to_integer(key, s)));
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

const char* const train_keys[] = {"method", "problem",  "dim",   "width",     "blocks",    "activation",
                                  "iters",  "lr",       "lambda1", "lambda2", "lambda-b",  "n",
                                  "nbar",   "seed",     "log-every", "n-quad", "eval-seed", "init-gain",
                                  "beta1",  "beta2",    "adam-eps"};

}  // namespace

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw std::invalid_argument(fmt::format("{}:{}: expected key = value", path, number));
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_train_key(TrainConfig& c, const std::string& key, const std::string& v) {
  if (key == "method") c.method = parse_method(v);
  else if (key == "problem") c.problem = parse_problem(v);
  else if (key == "dim") c.dim = to_integer(key, v);
  else if (key == "width") c.width = to_integer(key, v);
  else if (key == "blocks") c.blocks = to_integer(key, v);
  else if (key == "activation") c.activation = parse_activation(v);
  else if (key == "iters") c.iterations = to_integer(key, v);
  else if (key == "lr") c.lr = to_real(key, v);
  else if (key == "lambda1") c.lambda1 = to_real(key, v);
  else if (key == "lambda2") c.lambda2 = to_real(key, v);
  else if (key == "lambda-b") c.lambda_b = to_real(key, v);
  else if (key == "n") c.n = to_integer(key, v);
  else if (key == "nbar") c.nbar = to_integer(key, v);
  else if (key == "seed") c.seed = to_seed(key, v);
  else if (key == "log-every") c.log_every = to_integer(key, v);
  else if (key == "n-quad") c.n_quad = to_integer(key, v);
  else if (key == "eval-seed") c.eval_seed = to_seed(key, v);
  else if (key == "init-gain") c.init_gain = to_real(key, v);
  else if (key == "beta1") c.adam.beta1 = to_real(key, v);
  else if (key == "beta2") c.adam.beta2 = to_real(key, v);
  else if (key == "adam-eps") c.adam.epsilon = to_real(key, v);
  else if (key == "fixed-dataset") c.fixed_dataset = to_bool(key, v);
  else if (key == "timing") c.timing = to_bool(key, v);
  else throw std::invalid_argument("unknown key '" + key + "'");
}

// --- plans -----------------------------------------------------------------

std::vector<TrainConfig> ExperimentPlan::expand() const {
  std::vector<TrainConfig> out;
  for (ProblemKind p : problems)
    for (Activation a : activations)
      for (Index d : dims)
        for (Index w : widths)
          for (Method m : methods) {
            TrainConfig c = base;
            c.problem = p;
            c.activation = a;
            c.dim = d;
            c.method = m;
            c.width = w;
            if (m != Method::mix && match_nop) {
              TrainConfig mix = c;
              mix.method = Method::mix;
              c.width = width_for_param_count(network_specs(mix).param_count(), d, c.blocks, 1);
            }
            out.push_back(c);
          }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].seed = derive_seed(seed, i);
  return out;
}

ExperimentPlan parse_plan(const std::map<std::string, std::string>& kv) {
  ExperimentPlan plan;
  plan.methods = {Method::mix, Method::drm, Method::dgm};
  plan.problems = {ProblemKind::dirichlet, ProblemKind::neumann};
  plan.activations = {activations::requ};
  plan.dims = {2};
  plan.widths = {10};
  for (const auto& [key, v] : kv) {
    if (key == "methods") {
      plan.methods.clear();
      for (const auto& s : split(v)) plan.methods.push_back(parse_method(s));
    } else if (key == "problems") {
      plan.problems.clear();
      for (const auto& s : split(v)) plan.problems.push_back(parse_problem(s));
    } else if (key == "activations") {
      plan.activations.clear();
      for (const auto& s : split(v)) plan.activations.push_back(parse_activation(s));
    } else if (key == "dims") {
      plan.dims = to_index_list(key, v);
    } else if (key == "widths") {
      plan.widths = to_index_list(key, v);
    } else if (key == "match_nop") {
      plan.match_nop = to_bool(key, v);
    } else if (key == "seed") {
      plan.seed = to_seed(key, v);
    } else {
      apply_train_key(plan.base, key, v);
    }
  }
  return plan;
}

// --- rows ------------------------------------------------------------------

std::string table_header() { return "method,act,dim,e0,e1,e2,time_s,nop"; }

std::string table_row(const TrainConfig& c, const RelativeErrors& e, double time_s) {
  return fmt::format("{},{},{},{},{},{},{},{}", to_string(c.method), to_string(c.activation), c.dim, e.e0, e.e1,
                     e.e2, time_s, network_specs(c).param_count());
}

namespace {

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

unsigned pool_size(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MIXRES_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

}  // namespace

std::vector<SweepRun> run_sweep(const ExperimentPlan& plan, const std::string& out_dir) {
  const std::vector<TrainConfig> configs = plan.expand();
  const fs::path out(out_dir);
  fs::create_directories(out / "runs");
  std::vector<SweepRun> runs(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      SweepRun& r = runs[i];
      r.config = configs[i];
      r.config.history_path = (out / "runs" / fmt::format("run_{:03d}_history.csv", i)).string();
      r.config.checkpoint_path = (out / "runs" / fmt::format("run_{:03d}_checkpoint.json", i)).string();
      try {
        const TrainResult t = train(r.config);
        r.errors = t.final_errors;
        r.time_s = t.seconds;
      } catch (const std::exception& e) {
        r.status = "failed: " + sanitize(e.what());
        r.errors = {std::nan(""), std::nan(""), std::nan("")};
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned threads = pool_size(configs.size());
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string table = table_header() + ",problem,width,blocks,status\n";
  std::string figure = "problem,method,act,dim,width,nop,log_e0,log_e1,log_e2\n";
  std::string manifest = "run,problem,method,act,dim,width,blocks,nop,seed\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SweepRun& r = runs[i];
    const TrainConfig& c = r.config;
    const Index nop = network_specs(c).param_count();
    table += fmt::format("{},{},{},{},{}\n", table_row(c, r.errors, r.time_s), to_string(c.problem), c.width,
                         c.blocks, r.status);
    if (r.status == "ok" && c.method != Method::dgm)
      figure += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(c.problem), to_string(c.method),
                            to_string(c.activation), c.dim, c.width, nop, std::log(r.errors.e0),
                            std::log(r.errors.e1), std::log(r.errors.e2));
    manifest += fmt::format("{},{},{},{},{},{},{},{},{}\n", i, to_string(c.problem), to_string(c.method),
                            to_string(c.activation), c.dim, c.width, c.blocks, nop, c.seed);
  }
  write_file(out / "table.csv", table);
  write_file(out / "figure.csv", figure);
  write_file(out / "manifest.csv", manifest);
  return runs;
}

// --- subcommands -------------------------------------------------------------

namespace {

struct TrainFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  bool fixed_dataset = false;
  bool timing = false;
  CLI::Option* fixed_opt = nullptr;
  CLI::Option* timing_opt = nullptr;
  std::string config_path;

  void attach(CLI::App* app) {
    for (const char* key : train_keys) options[key] = app->add_option(std::string("--") + key, values[key]);
    options["method"]->description("mix | drm | dgm");
    options["problem"]->description("dirichlet | neumann");
    options["activation"]->description("requ | recu");
    options["width"]->description("Mix: primal width (flux net gets 2x); DRM/DGM: network width");
    options["lambda-b"]->description("boundary weight for DRM/DGM (default 500 for DRM Dirichlet, else 1)");
    fixed_opt = app->add_flag("--fixed-dataset", fixed_dataset, "train on one frozen sample instead of fresh batches");
    timing_opt = app->add_flag("--timing", timing, "record wall-clock times (output is then not byte-stable)");
    app->add_option("--config", config_path, "flat key = value file; flags override it");
  }

  TrainConfig build() const {
    TrainConfig c;
    if (!config_path.empty())
      for (const auto& [k, v] : read_key_values(config_path)) apply_train_key(c, k, v);
    for (const auto& [k, opt] : options)
      if (opt->count() > 0) apply_train_key(c, k, values.at(k));
    if (fixed_opt->count() > 0) c.fixed_dataset = fixed_dataset;
    if (timing_opt->count() > 0) c.timing = timing;
    validate(c);
    return c;
  }
};

int cmd_train(const TrainFlags& flags, const std::string& out_dir) {
  TrainConfig c = flags.build();
  const fs::path out(out_dir);
  fs::create_directories(out);
  c.history_path = (out / "history.csv").string();
  c.checkpoint_path = (out / "checkpoint.json").string();
  try {
    const TrainResult r = train(c);
    const std::string text = table_header() + "\n" + table_row(c, r.final_errors, r.seconds) + "\n";
    write_file(out / "row.csv", text);
    std::cout << text;
    return exit_ok;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << " (diagnostic checkpoint in " << c.checkpoint_path << ")\n";
    return exit_check_failed;
  }
}

int cmd_evaluate(const std::string& path, const std::string& out) {
  const Checkpoint cp = load_checkpoint(path);
  const RelativeErrors e = evaluate_checkpoint(cp);
  emit(out, table_header() + "\n" + table_row(cp.config, e, 0.0) + "\n");
  return exit_ok;
}

struct GradcheckFlags {
  std::string arch = "resnet";
  Index dim = 2;
  Index width = 10;
  Index blocks = 2;
  Index outputs = 1;
  std::string activation = "requ";
  std::uint64_t seed = 0;
  Index points = 5;
  double init_gain = TrainConfig{}.init_gain;
  bool constant = false;
};

int cmd_gradcheck(const GradcheckFlags& f) {
  const Activation act = parse_activation(f.activation);
  NetworkSpec spec;
  if (f.arch == "resnet")
    spec = ResNetSpec{f.dim, f.width, f.blocks, f.outputs, act};
  else if (f.arch == "twolayer")
    spec = TwoLayerSpec{f.dim, f.width, f.outputs, 1.0, act};
  else
    throw std::invalid_argument("--arch must be resnet or twolayer");
  validate(spec);
  std::mt19937_64 rng(f.seed);
  ParamVector p = ParamVector::Zero(param_count(spec));
  if (f.constant) {
    // only the constant term of a two-layer net (or nothing, for a ResNet)
    if (std::holds_alternative<TwoLayerSpec>(spec)) p[0] = 1.5;
  } else if (const auto* r = std::get_if<ResNetSpec>(&spec)) {
    p = init_resnet(*r, rng, f.init_gain);
  } else {
    p = init_params(spec, rng);
  }
  const GradcheckReport rep = gradcheck(spec, p, f.points, f.seed);
  constexpr double jet_tol = 1e-4, param_tol = 1e-5;
  fmt::print("network: {}\n", describe(spec));
  fmt::print("points: {} (redrawn near kinks: {})\n", rep.points, rep.resampled);
  if (!rep.finite) {
    fmt::print("network output is not finite at the check points\nFAIL\n");
    return exit_check_failed;
  }
  fmt::print("max rel err value:     {:.3e}\n", rep.value);
  fmt::print("max rel err gradient:  {:.3e}\n", rep.gradient);
  fmt::print("max rel err laplacian: {:.3e}\n", rep.laplacian);
  fmt::print("max rel err params:    {:.3e}\n", rep.params);
  const bool ok = rep.max_jet() < jet_tol && rep.params < param_tol;
  fmt::print("{}\n", ok ? "PASS" : "FAIL");
  return ok ? exit_ok : exit_check_failed;
}

struct ApproxFlags {
  std::string m_list = "8,16,32,64";
  std::string problem = "dirichlet";
  Index dim = 2;
  std::uint64_t seed = 0;
  Index h1_points = 100000;
  std::string out;
};

int cmd_approx(const ApproxFlags& f) {
  const Ridge1D g = cosine_ridge(1.0, 1.0, 0.0);  // cos(πz), B = π³
  const double B = g.bound;
  const FourierSum u = fourier_form(parse_problem(f.problem), f.dim);
  const double Bu = barron_norm(u, 3.0);
  std::string csv = "m,sup_err_val,sup_err_deriv,bound_5B_over_m,coeff_sum,bound_8B,h1_err,h1_bound\n";
  bool ok = true;
  for (Index m : to_index_list("m", f.m_list)) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    const RidgeNet1D relu = relu_interpolant(g, m);
    const RidgeNet1D requ = relu_to_requ(relu);
    const SupErrors e = sup_errors(g, requ);
    const auto grid = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(m))));
    const AssembledNetwork net = assemble_requ_network(u, m, grid, derive_seed(f.seed, m));
    const double h1 = h1_error(u, net.spec, net.params, f.h1_points, derive_seed(f.seed + 1, m));
    const double h1b = h1_rate_bound(f.dim, Bu, m);
    ok = ok && e.w1inf() <= 5 * B / m && requ.coeff_sum() <= 8 * B && relu.coeff_sum() <= 4 * B &&
         std::abs(relu.c) <= B && box_violations(net.spec, net.params) == 0 && h1 <= h1b;
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", m, e.value, e.derivative, 5 * B / m, requ.coeff_sum(), 8 * B,
                       h1, h1b);
  }
  emit(f.out, csv);
  if (!ok) std::cerr << "approx: a certificate was violated\n";
  return ok ? exit_ok : exit_check_failed;
}

struct RademacherFlags {
  std::string mode = "linear";
  Index dim = 2;
  std::string n_list = "16,32,64,128,256,512,1024,2048,4096";
  Index n_eps = 200;
  Index restarts = 4;
  double barron = 1.0;
  Index width = 10;
  Index trials = 64;
  std::string method = "mix";
  std::string problem = "dirichlet";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_rademacher(const RademacherFlags& f) {
  const std::vector<Index> ns = to_index_list("n", f.n_list);
  for (Index n : ns)
    if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::string csv;
  bool ok = true;
  if (f.mode == "linear" || f.mode == "network") {
    csv = "n,estimate,std_err,upper_bound\n";
    const TwoLayerSpec spec{f.dim, f.width, 1, f.barron, activations::requ};
    for (Index n : ns) {
      std::mt19937_64 rng(derive_seed(f.seed, static_cast<std::uint64_t>(n)));
      const Eigen::MatrixXd x = sample_interior(n, f.dim, rng);
      const ComplexityEstimate e = f.mode == "linear" ? rc_linear_exact(x, f.n_eps, rng)
                                                      : rc_network_lower_bound(spec, x, f.n_eps, f.restarts, rng);
      const double bound = f.mode == "linear" ? rc_linear_bound(f.dim, n) : rc_network_bound(f.dim, f.barron, n);
      ok = ok && e.mean <= bound;
      csv += fmt::format("{},{},{},{}\n", n, e.mean, e.std_err, bound);
    }
  } else if (f.mode == "gap") {
    const Method method = parse_method(f.method);
    const Problem problem = make_problem(parse_problem(f.problem), f.dim);
    const ResNetSpec phi_spec{f.dim, 6, 2, 1, activations::requ}, psi_spec{f.dim, 12, 2, f.dim, activations::requ};
    std::mt19937_64 r1(derive_seed(f.seed, 0)), r2(derive_seed(f.seed, 1));
    const ParamVector p1 = init_params(phi_spec, r1), p2 = init_params(psi_spec, r2);
    const NetworkField phi(phi_spec, p1), psi(psi_spec, p2);
    LossWeights w;
    TrainConfig defaults;
    defaults.method = method;
    defaults.problem = problem.kind;
    w = effective_weights(defaults);
    const GapCurve curve = quadrature_gap(method, phi, &psi, problem, w, ns, f.trials, f.seed);
    csv = "n,gap_mean,gap_stderr\n";
    for (const auto& p : curve.points) csv += fmt::format("{},{},{}\n", p.n, p.gap_mean, p.gap_stderr);
  } else {
    throw std::invalid_argument("--mode must be linear, network or gap");
  }
  emit(f.out, csv);
  return ok ? exit_ok : exit_check_failed;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Mixed residual, deep Ritz and deep Galerkin solvers for elliptic model problems"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* train_cmd = app.add_subcommand("train", "train one configuration; writes history.csv, checkpoint.json, row.csv");
  TrainFlags train_flags;
  train_flags.attach(train_cmd);
  std::string train_out = ".";
  train_cmd->add_option("--out", train_out, "output directory");

  auto* eval_cmd = app.add_subcommand("evaluate", "relative errors of a checkpoint as one table row");
  std::string checkpoint_path, eval_out;
  eval_cmd->add_option("checkpoint", checkpoint_path, "checkpoint.json")->required();
  eval_cmd->add_option("--out", eval_out, "output file (default stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment plan; writes table.csv, figure.csv, manifest.csv");
  std::string plan_path, sweep_out = "sweep";
  sweep_cmd->add_option("--plan", plan_path, "key = value plan file")->required();
  sweep_cmd->add_option("--out", sweep_out, "output directory");

  auto* grad_cmd = app.add_subcommand("gradcheck", "compare analytic jets and gradients with finite differences");
  GradcheckFlags gf;
  grad_cmd->add_option("--arch", gf.arch, "resnet | twolayer");
  grad_cmd->add_option("--dim", gf.dim);
  grad_cmd->add_option("--width", gf.width);
  grad_cmd->add_option("--blocks", gf.blocks);
  grad_cmd->add_option("--outputs", gf.outputs);
  grad_cmd->add_option("--activation", gf.activation, "requ | recu | relu");
  grad_cmd->add_option("--seed", gf.seed);
  grad_cmd->add_option("--points", gf.points);
  grad_cmd->add_option("--init-gain", gf.init_gain);
  grad_cmd->add_flag("--constant", gf.constant, "use a constant network");

  auto* approx_cmd = app.add_subcommand("approx", "ridge certificates and assembled ReQU network errors");
  ApproxFlags af;
  approx_cmd->add_option("--m", af.m_list, "comma-separated mesh sizes / atom counts");
  approx_cmd->add_option("--problem", af.problem, "Fourier form used for the H1 columns");
  approx_cmd->add_option("--dim", af.dim);
  approx_cmd->add_option("--seed", af.seed);
  approx_cmd->add_option("--h1-points", af.h1_points);
  approx_cmd->add_option("--out", af.out, "output file (default stdout)");

  auto* rc_cmd = app.add_subcommand("rademacher", "empirical Rademacher complexities and quadrature gaps");
  RademacherFlags rf;
  rc_cmd->add_option("--mode", rf.mode, "linear | network | gap");
  rc_cmd->add_option("--dim", rf.dim);
  rc_cmd->add_option("--n", rf.n_list, "comma-separated sample sizes");
  rc_cmd->add_option("--n-eps", rf.n_eps);
  rc_cmd->add_option("--restarts", rf.restarts);
  rc_cmd->add_option("--barron", rf.barron);
  rc_cmd->add_option("--width", rf.width);
  rc_cmd->add_option("--trials", rf.trials);
  rc_cmd->add_option("--method", rf.method);
  rc_cmd->add_option("--problem", rf.problem);
  rc_cmd->add_option("--seed", rf.seed);
  rc_cmd->add_option("--out", rf.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*train_cmd) return cmd_train(train_flags, train_out);
    if (*eval_cmd) return cmd_evaluate(checkpoint_path, eval_out);
    if (*sweep_cmd) {
      run_sweep(parse_plan(read_key_values(plan_path)), sweep_out);
      return exit_ok;
    }
    if (*grad_cmd) return cmd_gradcheck(gf);
    if (*approx_cmd) return cmd_approx(af);
    if (*rc_cmd) return cmd_rademacher(rf);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const NetworkError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_check_failed;
  }
  return exit_usage;
}

}  // namespace mixres
