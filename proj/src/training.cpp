#include "mixres/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mixres/autodiff.hpp"

namespace mixres {

using json = nlohmann::json;

void adam_step(AdamState& state, ParamVector& params, const Eigen::VectorXd& grad, double lr,
               const AdamConfig& adam) {
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: gradient size mismatch");
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  ++state.step;
  state.m = adam.beta1 * state.m + (1.0 - adam.beta1) * grad;
  state.v = adam.beta2 * state.v + (1.0 - adam.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + adam.epsilon);
}

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (c.dim < 1) fail("dim must be >= 1");
  if (c.width < 1) fail("width must be >= 1");
  if (c.blocks < 0) fail("blocks must be >= 0");
  if (c.iterations < 1) fail("iterations must be >= 1");
  if (!(c.lr > 0.0)) fail("learning rate must be > 0");
  if (!(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0) || !(c.adam.beta2 >= 0.0 && c.adam.beta2 < 1.0))
    fail("Adam betas must lie in [0,1)");
  if (!(c.adam.epsilon > 0.0)) fail("Adam epsilon must be > 0");
  if (c.lambda1 < 0.0 || c.lambda2 < 0.0 || (c.lambda_b && *c.lambda_b < 0.0))
    fail("loss weights must be non-negative");
  if (c.n < 1 || c.nbar < 1) fail("batch sizes must be >= 1");
  if (c.nbar < min_boundary_size(c.n, c.dim))
    fail(fmt::format("nbar = {} is below ceil(n/d^2) = {}", c.nbar, min_boundary_size(c.n, c.dim)));
  if (c.log_every < 1) fail("log_every must be >= 1");
  if (c.n_quad < 1) fail("n_quad must be >= 1");
  if (c.activation.kind == ActivationKind::relu && c.method != Method::drm)
    fail("relu networks have no second derivatives; use requ or recu");
}

LossWeights effective_weights(const TrainConfig& c) {
  LossWeights w;
  w.lambda1 = c.lambda1;
  w.lambda2 = c.lambda2;
  w.lambda_b = c.lambda_b.value_or(
      c.method == Method::drm && c.problem == ProblemKind::dirichlet ? 500.0 : 1.0);
  return w;
}

Index NetworkPair::param_count() const {
  return mixres::param_count(phi) + (psi ? mixres::param_count(*psi) : 0);
}

NetworkPair network_specs(const TrainConfig& c) {
  NetworkPair p{ResNetSpec{c.dim, c.width, c.blocks, 1, c.activation}, std::nullopt};
  if (c.method == Method::mix) p.psi = ResNetSpec{c.dim, 2 * c.width, c.blocks, c.dim, c.activation};
  return p;
}

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t iter) { return derive_seed(seed, iter); }

std::uint64_t init_seed(std::uint64_t seed, std::uint64_t stream) {
  return derive_seed(derive_seed(~seed, 0x1417), stream);
}

namespace {

struct Fields {
  NetworkField phi;
  std::optional<NetworkField> psi;
  const Field* psi_ptr() const { return psi ? &*psi : nullptr; }
};

Fields make_fields(const NetworkPair& specs, const ParamVector& params) {
  Fields f{NetworkField(specs.phi, params, 0), std::nullopt};
  if (specs.psi) f.psi.emplace(*specs.psi, params, param_count(specs.phi));
  return f;
}

Eigen::MatrixXd quadrature_points(const TrainConfig& c) {
  std::mt19937_64 rng(c.eval_seed);
  return sample_interior(c.n_quad, c.dim, rng);
}

Checkpoint make_checkpoint(const TrainConfig& c, const NetworkPair& specs, const ParamVector& params,
                           Index iteration, std::uint64_t cursor, const LossBreakdown& loss) {
  Checkpoint cp;
  cp.config = c;
  cp.iteration = iteration;
  const Index np = param_count(specs.phi);
  cp.params_phi = params.head(np);
  if (specs.psi) cp.params_psi = params.tail(params.size() - np);
  cp.rng_cursor = cursor;
  cp.loss = loss;
  return cp;
}

}  // namespace

TrainResult train(const TrainConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    if (!config.timing) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  const Problem problem = make_problem(config.problem, config.dim);
  const LossWeights weights = effective_weights(config);
  const NetworkPair specs = network_specs(config);
  ParamVector params(specs.param_count());
  {
    std::mt19937_64 rng_phi(init_seed(config.seed, 0));
    params.head(param_count(specs.phi)) = init_resnet(specs.phi, rng_phi, config.init_gain);
    if (specs.psi) {
      std::mt19937_64 rng_psi(init_seed(config.seed, 1));
      params.tail(param_count(*specs.psi)) = init_resnet(*specs.psi, rng_psi, config.init_gain);
    }
  }
  const Fields fields = make_fields(specs, params);
  const Eigen::MatrixXd quad = quadrature_points(config);

  std::ofstream history;
  if (!config.history_path.empty()) {
    history.open(config.history_path, std::ios::binary | std::ios::trunc);
    if (!history) throw std::runtime_error("cannot open history file " + config.history_path);
    history << history_header() << '\n';
  }

  TrainResult result;
  result.trace.reserve(static_cast<std::size_t>(config.iterations));
  AdamState adam;
  std::uint64_t cursor = 0;
  const SampleBatch fixed =
      config.fixed_dataset ? sample_batch(config.n, config.nbar, config.dim, batch_seed(config.seed, 0))
                           : SampleBatch{};
  auto next_batch = [&]() -> SampleBatch {
    const std::uint64_t it = cursor++;
    if (config.fixed_dataset) return fixed;
    return sample_batch(config.n, config.nbar, config.dim, batch_seed(config.seed, it));
  };

  auto log_row = [&](Index iter, const LossBreakdown& loss) {
    HistoryRow row{iter, loss, relative_errors(fields.phi, fields.psi_ptr(), problem, quad), elapsed_ms()};
    if (history) history << history_line(row) << '\n';
    result.history.push_back(row);
  };

  auto abort_with = [&](Index iter, const std::string& why) {
    Checkpoint cp = make_checkpoint(config, specs, params, iter, cursor, {});
    cp.aborted = true;
    cp.error = why;
    if (!config.checkpoint_path.empty()) save_checkpoint(cp, config.checkpoint_path);
    throw TrainingError(fmt::format("training aborted at iteration {}: {}", iter, why), std::move(cp));
  };

  for (Index it = 0; it < config.iterations; ++it) {
    const SampleBatch batch = next_batch();
    LossBreakdown loss;
    LossAndGradient lg;
    try {
      lg = loss_gradient(params, [&](Tape& tape) {
        loss = method_loss(config.method, fields.phi, fields.psi_ptr(), problem, batch, weights, &tape);
        return loss.total;
      });
    } catch (const NonFiniteError& e) {
      abort_with(it, e.what());
    } catch (const NetworkError& e) {
      abort_with(it, e.what());
    }
    if (!lg.gradient.allFinite()) abort_with(it, "non-finite gradient");
    result.trace.push_back(loss);
    if (it % config.log_every == 0) log_row(it, loss);
    adam_step(adam, params, lg.gradient, config.lr, config.adam);
  }

  // final loss on one more fresh batch, without an update
  const SampleBatch last = next_batch();
  LossBreakdown final_loss;
  try {
    final_loss = method_loss(config.method, fields.phi, fields.psi_ptr(), problem, last, weights);
  } catch (const NonFiniteError& e) {
    abort_with(config.iterations, e.what());
  }
  log_row(config.iterations, final_loss);

  result.final_errors = result.history.back().errors;
  result.checkpoint = make_checkpoint(config, specs, params, config.iterations, cursor, final_loss);
  result.seconds = elapsed_ms() / 1000.0;
  if (!config.checkpoint_path.empty()) save_checkpoint(result.checkpoint, config.checkpoint_path);
  return result;
}

RelativeErrors evaluate_checkpoint(const Checkpoint& cp) {
  if (cp.exact_oracle) {
    const Problem problem = make_problem(cp.config.problem, cp.config.dim);
    const FunctionField u = solution_field(problem), grad_u = flux_field(problem);
    return relative_errors(u, cp.config.method == Method::mix ? &grad_u : nullptr, problem,
                           quadrature_points(cp.config));
  }
  const NetworkPair specs = network_specs(cp.config);
  if (cp.params_phi.size() != param_count(specs.phi))
    throw std::invalid_argument("checkpoint: params_phi length does not match the config");
  if (specs.psi.has_value() != cp.params_psi.has_value() ||
      (specs.psi && cp.params_psi->size() != param_count(*specs.psi)))
    throw std::invalid_argument("checkpoint: params_psi does not match the config");
  ParamVector params(specs.param_count());
  params.head(cp.params_phi.size()) = cp.params_phi;
  if (cp.params_psi) params.tail(cp.params_psi->size()) = *cp.params_psi;
  const Fields f = make_fields(specs, params);
  return relative_errors(f.phi, f.psi_ptr(), make_problem(cp.config.problem, cp.config.dim),
                         quadrature_points(cp.config));
}

// --- serialization ---------------------------------------------------------

std::string history_header() { return "iter,r_g,r_e,r_b,total,e0,e1,e2,wall_ms"; }

std::string history_line(const HistoryRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", r.iter, r.loss.r_g, r.loss.r_e, r.loss.r_b, r.loss.total,
                     r.errors.e0, r.errors.e1, r.errors.e2, r.wall_ms);
}

namespace {

json config_to_json(const TrainConfig& c) {
  json j;
  j["method"] = to_string(c.method);
  j["problem"] = to_string(c.problem);
  j["dim"] = c.dim;
  j["width"] = c.width;
  j["blocks"] = c.blocks;
  j["init_gain"] = c.init_gain;
  j["activation"] = to_string(c.activation);
  j["iterations"] = c.iterations;
  j["n"] = c.n;
  j["nbar"] = c.nbar;
  j["lr"] = c.lr;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["epsilon"] = c.adam.epsilon;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["lambda_b"] = c.lambda_b ? json(*c.lambda_b) : json(nullptr);
  j["seed"] = c.seed;
  j["log_every"] = c.log_every;
  j["n_quad"] = c.n_quad;
  j["eval_seed"] = c.eval_seed;
  j["fixed_dataset"] = c.fixed_dataset;
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.method = parse_method(j.at("method").get<std::string>());
  c.problem = parse_problem(j.at("problem").get<std::string>());
  c.dim = j.at("dim").get<Index>();
  c.width = j.at("width").get<Index>();
  c.blocks = j.at("blocks").get<Index>();
  c.init_gain = j.value("init_gain", c.init_gain);
  c.activation = parse_activation(j.at("activation").get<std::string>());
  c.iterations = j.at("iterations").get<Index>();
  c.n = j.at("n").get<Index>();
  c.nbar = j.at("nbar").get<Index>();
  c.lr = j.at("lr").get<double>();
  c.adam.beta1 = j.value("beta1", c.adam.beta1);
  c.adam.beta2 = j.value("beta2", c.adam.beta2);
  c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
  c.lambda1 = j.value("lambda1", c.lambda1);
  c.lambda2 = j.value("lambda2", c.lambda2);
  if (j.contains("lambda_b") && !j["lambda_b"].is_null()) c.lambda_b = j["lambda_b"].get<double>();
  c.seed = j.value("seed", c.seed);
  c.log_every = j.value("log_every", c.log_every);
  c.n_quad = j.value("n_quad", c.n_quad);
  c.eval_seed = j.value("eval_seed", c.eval_seed);
  c.fixed_dataset = j.value("fixed_dataset", c.fixed_dataset);
  return c;
}

json vector_to_json(const ParamVector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

ParamVector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const ParamVector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& cp) {
  json j;
  j["version"] = 1;
  j["config"] = config_to_json(cp.config);
  j["iteration"] = cp.iteration;
  j["params_phi"] = cp.exact_oracle ? json(nullptr) : vector_to_json(cp.params_phi);
  j["params_psi"] = cp.params_psi && !cp.exact_oracle ? vector_to_json(*cp.params_psi) : json(nullptr);
  if (cp.exact_oracle) j["oracle"] = "exact";
  j["rng_cursor"] = cp.rng_cursor;
  j["loss"] = {{"r_g", cp.loss.r_g}, {"r_e", cp.loss.r_e}, {"r_b", cp.loss.r_b}, {"total", cp.loss.total}};
  if (cp.aborted) {
    j["aborted"] = true;
    j["error"] = cp.error;
  }
  return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != 1) throw std::invalid_argument("unsupported checkpoint version");
    Checkpoint cp;
    cp.config = config_from_json(j.at("config"));
    validate(cp.config);
    cp.iteration = j.at("iteration").get<Index>();
    if (j.contains("oracle")) {
      if (j["oracle"] != "exact") throw std::invalid_argument("unknown checkpoint oracle");
      cp.exact_oracle = true;
      cp.rng_cursor = j.value("rng_cursor", std::uint64_t{0});
      return cp;
    }
    cp.params_phi = vector_from_json(j.at("params_phi"));
    if (!j.at("params_psi").is_null()) cp.params_psi = vector_from_json(j["params_psi"]);
    cp.rng_cursor = j.at("rng_cursor").get<std::uint64_t>();
    if (j.contains("loss")) {
      const json& l = j["loss"];
      cp.loss = {l.at("r_g").get<double>(), l.at("r_e").get<double>(), l.at("r_b").get<double>(),
                 l.at("total").get<double>()};
    }
    cp.aborted = j.value("aborted", false);
    cp.error = j.value("error", std::string());
    const NetworkPair specs = network_specs(cp.config);
    if (cp.params_phi.size() != param_count(specs.phi) || specs.psi.has_value() != cp.params_psi.has_value() ||
        (specs.psi && cp.params_psi->size() != param_count(*specs.psi)))
      throw std::invalid_argument("parameter lengths do not match the configured networks");
    return cp;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& cp, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << checkpoint_to_json(cp) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace mixres
