// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mixres/barron.hpp"
#include "mixres/cli.hpp"
#include "mixres/gradcheck.hpp"
#include "mixres/rademacher.hpp"
#include "mixres/training.hpp"

using namespace mixres;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- 1 -----------------------------------------------------------------------

Verdict parameter_counts() {
  Verdict v;
  auto mix = [](Index d, Index w) {
    TrainConfig c;
    c.dim = d;
    c.width = w;
    return network_specs(c).param_count();
  };
  const Index got[6] = {mix(2, 10), mix(5, 25), mix(10, 50), param_count(ResNetSpec{2, 23, 10, 1}),
                        param_count(ResNetSpec{5, 57, 10, 1}), param_count(ResNetSpec{10, 113, 10, 1})};
  const Index want[6] = {5410, 32650, 129050, 5589, 33402, 130063};
  for (int i = 0; i < 6; ++i) v.pass = v.pass && got[i] == want[i];
  v.pass = v.pass && width_for_param_count(5410, 2, 10, 1) == 23 && width_for_param_count(32650, 5, 10, 1) == 57 &&
           width_for_param_count(129050, 10, 10, 1) == 113;
  v.detail = fmt::format("NoP {} {} {} / {} {} {}", got[0], got[1], got[2], got[3], got[4], got[5]);
  return v;
}

// --- 2 -----------------------------------------------------------------------

Verdict differentiation_oracles() {
  Verdict v;
  double worst_jet = 0, worst_param = 0;
  Index cases = 0, overflowed = 0;
  const double gain = TrainConfig{}.init_gain;
  for (Activation act : {activations::requ, activations::recu})
    for (int arch = 0; arch < 3; ++arch)
      for (Index d : {2, 5, 10})
        for (int k = 0; k < 20; ++k) {
          // an init that overflows double has no derivatives to compare; draw again
          for (std::uint64_t attempt = 0;; ++attempt) {
            const std::uint64_t base = derive_seed(derive_seed(1000 * arch + 10 * d + act.power(), 77), k);
            const std::uint64_t seed = attempt == 0 ? base : derive_seed(base, attempt);
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<Index> width(2, 12), outs(1, 2);
            const Index w = width(rng), out = outs(rng) == 1 ? 1 : d;
            NetworkSpec spec;
            ParamVector p;
            if (arch == 0) {
              std::uniform_real_distribution<double> barron(0.5, 3.0);
              const TwoLayerSpec s{d, w, out, barron(rng), act};
              spec = s;
              p = init_params(s, rng);
            } else {
              const ResNetSpec s{d, w, arch == 1 ? 2 : 10, out, act};
              spec = s;
              p = init_resnet(s, rng, gain);
            }
            const GradcheckReport r = gradcheck(spec, p, 3, seed);
            if (!r.finite) {
              ++overflowed;
              continue;
            }
            worst_jet = std::max(worst_jet, r.max_jet());
            worst_param = std::max(worst_param, r.params);
            ++cases;
            break;
          }
        }
  v.pass = worst_jet < 1e-4 && worst_param < 1e-5;
  v.detail = fmt::format("{} configs, max rel err jets {:.2e} (< 1e-4), params {:.2e} (< 1e-5), {} overflowing inits redrawn",
                         cases, worst_jet, worst_param, overflowed);
  return v;
}

// --- 3 and 4 -------------------------------------------------------------------

TrainConfig table_config(Method m, ProblemKind k) {
  TrainConfig c;
  c.method = m;
  c.problem = k;
  c.dim = 2;
  c.activation = activations::requ;
  c.iterations = 20000;
  c.lr = 1e-4;
  c.n = 1000;
  c.nbar = 1000;
  c.lambda1 = 1.0;
  c.lambda2 = 1.0;
  c.log_every = 1000;
  c.width = 10;
  if (m != Method::mix) {
    TrainConfig mix = c;
    mix.method = Method::mix;
    c.width = width_for_param_count(network_specs(mix).param_count(), 2, c.blocks, 1);
  }
  return c;
}

struct TableRun {
  RelativeErrors e;
  double r_g_first = 0, r_g_last = 0;
  double seconds = 0;
  std::string status = "ok";
};

TableRun run_table(Method m, ProblemKind k) {
  TableRun out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const TrainResult r = train(table_config(m, k));
    out.e = r.final_errors;
    out.r_g_first = r.history.front().loss.r_g;
    out.r_g_last = r.history.back().loss.r_g;
  } catch (const std::exception& e) {
    out.status = e.what();
    out.e = {INFINITY, INFINITY, INFINITY};
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << fmt::format("  {} {}: e0 {:.4g} e1 {:.4g} e2 {:.4g} ({:.0f} s, {})\n", to_string(m), to_string(k),
                           out.e.e0, out.e.e1, out.e.e2, out.seconds, out.status);
  return out;
}

Verdict table_row(const TableRun& r) {
  Verdict v;
  v.pass = r.status == "ok" && r.e.e0 < 0.02 && r.e.e1 < 0.05 && r.e.e2 < 0.05;
  v.detail = fmt::format("Mix Dirichlet d=2 w=10 20k iters: e0 {:.4g} (< 0.02), e1 {:.4g} (< 0.05), e2 {:.4g} (< 0.05); "
                         "r_g {:.3g} -> {:.3g}; {:.0f} s",
                         r.e.e0, r.e.e1, r.e.e2, r.r_g_first, r.r_g_last, r.seconds);
  return v;
}

Verdict method_ordering(const TableRun& mix_dirichlet) {
  Verdict v;
  std::string detail;
  for (ProblemKind k : {ProblemKind::dirichlet, ProblemKind::neumann}) {
    const TableRun mix = k == ProblemKind::dirichlet ? mix_dirichlet : run_table(Method::mix, k);
    const TableRun drm = run_table(Method::drm, k), dgm = run_table(Method::dgm, k);
    const bool e2_order = mix.e.e2 < drm.e.e2;
    const bool drm_worst = drm.e.e0 > mix.e.e0 && drm.e.e0 > dgm.e.e0;
    v.pass = v.pass && e2_order && drm_worst;
    detail += fmt::format("{}{}: e2 mix {:.3g} vs drm {:.3g}; e0 mix {:.3g} drm {:.3g} dgm {:.3g}",
                          detail.empty() ? "" : " | ", to_string(k), mix.e.e2, drm.e.e2, mix.e.e0, drm.e.e0, dgm.e.e0);
  }
  v.detail = detail;
  return v;
}

// --- 5 -----------------------------------------------------------------------

Verdict certificates() {
  Verdict v;
  const Ridge1D g = cosine_ridge(1.0, 1.0, 0.0);
  const double B = g.bound;
  Index violations = 0;
  std::string errs;
  for (Index m : {8, 16, 32, 64}) {
    const RidgeNet1D relu = relu_interpolant(g, m), requ = relu_to_requ(relu);
    const double err = sup_errors(g, requ).w1inf();
    violations += err > 5 * B / m;
    violations += relu.coeff_sum() > 4 * B;
    violations += requ.coeff_sum() > 8 * B;
    violations += std::abs(relu.c) > B;
    errs += fmt::format("{}{:.3g}", errs.empty() ? "" : " ", err);
  }
  v.pass = violations == 0;
  v.detail = fmt::format("cos(pi z), B = pi^3, m = 8..64: W1inf errors {} vs 5B/m; {} violations", errs, violations);
  return v;
}

// --- 6 -----------------------------------------------------------------------

Verdict approximation_rate() {
  Verdict v;
  const FourierSum u = fourier_form(ProblemKind::dirichlet, 2);
  std::vector<double> ms, errs;
  Index violations = 0;
  constexpr int seeds = 8;
  for (Index m : {4, 16, 64, 256}) {
    const auto grid = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(m))));
    double sq = 0;
    for (int s = 0; s < seeds; ++s) {
      const AssembledNetwork net = assemble_requ_network(u, m, grid, derive_seed(s, m));
      violations += box_violations(net.spec, net.params);
      const double e = h1_error(u, net.spec, net.params, 100000, derive_seed(s + 100, m));
      sq += e * e;
    }
    ms.push_back(static_cast<double>(m));
    errs.push_back(std::sqrt(sq / seeds));
  }
  const double slope = fit_loglog_slope(ms, errs);
  v.pass = slope <= -0.4 && violations == 0;
  v.detail = fmt::format("H1 error (rms over {} draws) {:.3g} {:.3g} {:.3g} {:.3g} at m = 4..256, slope {:.3f} (<= -0.4), "
                         "{} box violations",
                         seeds, errs[0], errs[1], errs[2], errs[3], slope, violations);
  return v;
}

// --- 7 -----------------------------------------------------------------------

Verdict rademacher_bounds() {
  Verdict v;
  Index linear_viol = 0, net_viol = 0, grid = 0;
  double worst_ratio = 0;
  for (Index d : {1, 2, 5, 10})
    for (Index n : {10, 100, 1000}) {
      std::mt19937_64 rng(derive_seed(d, n));
      const Eigen::MatrixXd x = sample_interior(n, d, rng);
      const ComplexityEstimate e = rc_linear_exact(x, 1000, rng);
      linear_viol += e.mean > rc_linear_bound(d, n);
      worst_ratio = std::max(worst_ratio, e.mean / rc_linear_bound(d, n));
      ++grid;
    }
  double worst_agree = 0;
  for (Index n = 1; n <= 12; ++n) {
    std::mt19937_64 rng(derive_seed(7, n));
    const Eigen::MatrixXd x = sample_interior(n, 3, rng);
    const ComplexityEstimate e = rc_linear_exact(x, Index(1) << n, rng);
    // independent enumeration of every sign pattern
    double s = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
      Eigen::VectorXd eps(n);
      for (Index i = 0; i < n; ++i) eps[i] = (mask >> (n - 1 - i)) & 1u ? 1.0 : -1.0;
      s += (x * eps).norm() / static_cast<double>(n) + std::abs(eps.sum()) / static_cast<double>(n);
    }
    worst_agree = std::max(worst_agree, std::abs(e.mean - s / static_cast<double>(std::uint64_t(1) << n)));
  }
  double worst_net = 0;
  for (Index d : {2, 5})
    for (Index n : {16, 256, 2048})
      for (double B : {1.0, 4.0}) {
        std::mt19937_64 rng(derive_seed(d * 31 + n, static_cast<std::uint64_t>(B)));
        const Eigen::MatrixXd x = sample_interior(n, d, rng);
        const ComplexityEstimate e = rc_network_lower_bound(TwoLayerSpec{d, 10, 1, B}, x, 20, 3, rng);
        net_viol += e.mean > rc_network_bound(d, B, n);
        worst_net = std::max(worst_net, e.mean / rc_network_bound(d, B, n));
      }
  v.pass = linear_viol == 0 && net_viol == 0 && worst_agree <= 1e-12;
  v.detail = fmt::format("linear: {} violations on {} (d,n) pairs (max estimate/bound {:.3f}); exhaustive agreement "
                         "{:.1e} (<= 1e-12); network: {} violations (max ratio {:.4f})",
                         linear_viol, grid, worst_ratio, worst_agree, net_viol, worst_net);
  return v;
}

// --- 8 -----------------------------------------------------------------------

Verdict quadrature_gap_scaling() {
  Verdict v;
  const Problem p = dirichlet_problem(2);
  const ResNetSpec phi_spec{2, 6, 2, 1, activations::requ}, psi_spec{2, 12, 2, 2, activations::requ};
  std::mt19937_64 r1(5), r2(6);
  const ParamVector p1 = init_params(phi_spec, r1), p2 = init_params(psi_spec, r2);
  const NetworkField phi(phi_spec, p1), psi(psi_spec, p2);
  std::vector<Index> ns;
  for (int k = 5; k <= 12; ++k) ns.push_back(Index(1) << k);
  const GapCurve c = quadrature_gap(Method::mix, phi, &psi, p, {}, ns, 64, 2024);
  std::vector<double> x, y;
  for (const auto& pt : c.points) {
    x.push_back(static_cast<double>(pt.n));
    y.push_back(pt.gap_mean);
  }
  const double slope = fit_loglog_slope(x, y);
  v.pass = slope >= -0.65 && slope <= -0.35;
  v.detail = fmt::format("Mix d=2, n = 32..4096, 64 trials: gap {:.3g} -> {:.3g}, slope {:.3f} (in [-0.65, -0.35])",
                         y.front(), y.back(), slope);
  return v;
}

// --- 9 -----------------------------------------------------------------------

Verdict determinism(const std::string& cli) {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / "mixres_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "plan.cfg") << "methods = mix, drm\nproblems = neumann\nwidths = 4\nblocks = 2\niters = 20\n"
                                        "n = 50\nnbar = 25\nn-quad = 200\nseed = 3\n";
  }
  const std::string train_flags = "--method mix --width 4 --blocks 2 --iters 40 --n 50 --nbar 25 --n-quad 200 "
                                  "--log-every 10 --seed 9";
  struct Check {
    std::string name;
    std::function<std::string(const fs::path&)> command;
    std::vector<std::string> files;
  };
  const std::vector<Check> checks = {
      {"train", [&](const fs::path& o) { return fmt::format("train {} --out {}", train_flags, o.string()); },
       {"history.csv", "checkpoint.json", "row.csv", "stdout.txt"}},
      {"evaluate",
       [&](const fs::path& o) {
         return fmt::format("evaluate {} --out {}", (root / "train_0" / "checkpoint.json").string(),
                            (o / "row.csv").string());
       },
       {"row.csv"}},
      {"sweep",
       [&](const fs::path& o) { return fmt::format("sweep --plan {} --out {}", (root / "plan.cfg").string(), o.string()); },
       {"table.csv", "figure.csv", "manifest.csv"}},
      {"gradcheck", [](const fs::path&) { return std::string("gradcheck --arch resnet --dim 3 --seed 4"); },
       {"stdout.txt"}},
      {"approx",
       [](const fs::path& o) { return fmt::format("approx --m 8,16 --h1-points 5000 --out {}", (o / "a.csv").string()); },
       {"a.csv"}},
      {"rademacher",
       [](const fs::path& o) {
         return fmt::format("rademacher --mode network --n 16,64 --n-eps 10 --out {}", (o / "r.csv").string());
       },
       {"r.csv"}},
  };
  std::string detail;
  for (const auto& c : checks) {
    bool same = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / fmt::format("{}_{}", c.name, rep);
      fs::create_directories(out);
      const std::string cmd = fmt::format("{} {} > {} 2>/dev/null", cli, c.command(out), (out / "stdout.txt").string());
      if (std::system(cmd.c_str()) != 0) same = false;
    }
    for (const auto& f : c.files) {
      const std::string a = slurp(root / (c.name + "_0") / f), b = slurp(root / (c.name + "_1") / f);
      same = same && !a.empty() && a == b;
    }
    v.pass = v.pass && same;
    detail += fmt::format("{}{} {}", detail.empty() ? "" : ", ", c.name, same ? "identical" : "DIFFERENT");
  }
  v.detail = detail;
  return v;
}

void report(int id, const std::string& name, const Verdict& v, bool& all) {
  all = all && v.pass;
  std::cout << fmt::format("[{}] criterion {} ({}): {}", v.pass ? "PASS" : "FAIL", id, name, v.detail) << std::endl;
}

Verdict guarded(const std::function<Verdict()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to mixres executable>\n";
    return 2;
  }
  const std::string cli = argv[1];
  bool all = true;
  report(1, "parameter counts", guarded(parameter_counts), all);
  report(2, "differentiation oracles", guarded(differentiation_oracles), all);
  TableRun mix_dirichlet;
  report(3, "desk-scale table row", guarded([&] {
           mix_dirichlet = run_table(Method::mix, ProblemKind::dirichlet);
           return table_row(mix_dirichlet);
         }),
         all);
  report(4, "method ordering", guarded([&] { return method_ordering(mix_dirichlet); }), all);
  report(5, "interpolant certificates", guarded(certificates), all);
  report(6, "approximation rate", guarded(approximation_rate), all);
  report(7, "Rademacher bounds", guarded(rademacher_bounds), all);
  report(8, "quadrature gap scaling", guarded(quadrature_gap_scaling), all);
  report(9, "determinism", guarded([&] { return determinism(cli); }), all);
  return all ? 0 : 1;
}
