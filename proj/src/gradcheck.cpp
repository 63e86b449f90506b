#include "mixres/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mixres/autodiff.hpp"
#include "mixres/problem.hpp"

namespace mixres {

double GradcheckReport::max_jet() const { return std::max({value, gradient, laplacian}); }

namespace {

using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct FdJets {
  Eigen::VectorXd value;      // per output
  Eigen::MatrixXd gradient;   // outputs × d
  Eigen::VectorXd laplacian;  // per output
};

FdJets fd_jets(const NetworkSpec& spec, const ParamVector& p, const Eigen::VectorXd& x0, long double h) {
  const Index d = x0.size(), r = output_dim(spec);
  const LVec x = x0.cast<long double>();
  const LVec f0 = evaluate<long double>(spec, p, x);
  FdJets out{f0.cast<double>(), Eigen::MatrixXd(r, d), Eigen::VectorXd::Zero(r)};
  LVec lap = LVec::Zero(r);
  // rounding comes from hidden states of order the largest output, not from
  // each output alone, which may be a cancellation
  double mag = std::max(1.0, static_cast<double>(f0.cwiseAbs().maxCoeff()));
  for (Index k = 0; k < d; ++k) {
    LVec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const LVec fp = evaluate<long double>(spec, p, xp), fm = evaluate<long double>(spec, p, xm);
    out.gradient.col(k) = ((fp - fm) / (2 * h)).cast<double>();
    lap += (fp - 2 * f0 + fm) / (h * h);
    mag = std::max({mag, static_cast<double>(fp.cwiseAbs().maxCoeff()), static_cast<double>(fm.cwiseAbs().maxCoeff())});
  }
  out.laplacian = lap.cast<double>();
  // Entries inside the rounding band of the stencil carry no signal; an exactly
  // zero derivative (every unit inactive) would otherwise read as noise/noise = 1.
  const double eps = static_cast<double>(std::numeric_limits<long double>::epsilon());
  const double hd = static_cast<double>(h);
  const double grad_floor = 8.0 * eps * mag / hd;
  const double lap_floor = 64.0 * static_cast<double>(d) * eps * mag / (hd * hd);
  for (Index o = 0; o < r; ++o) {
    for (Index k = 0; k < d; ++k)
      if (std::abs(out.gradient(o, k)) <= grad_floor) out.gradient(o, k) = 0.0;
    if (std::abs(out.laplacian[o]) <= lap_floor) out.laplacian[o] = 0.0;
  }
  return out;
}

double rel(double err, double scale) { return scale > 0.0 ? err / scale : err; }

// inv_scale is held fixed across perturbations so the functional stays a
// single smooth function of the parameters
double functional(const JetBatch& j, double inv_scale, JetBatch* adj) {
  double s = 0.0;
  for (Index c = 0; c < j.data().cols(); ++c)
    for (Index r = 0; r < j.data().rows(); ++r) {
      const double w = std::cos(0.3 + 0.7 * static_cast<double>(c) + 0.2 * static_cast<double>(r));
      const double v = j.data()(r, c) * inv_scale;
      s += w * v * v;
      if (adj) adj->data()(r, c) += 2.0 * w * v * inv_scale;
    }
  return s;
}

}  // namespace

GradcheckReport gradcheck(const NetworkSpec& spec, const ParamVector& params, Index points, std::uint64_t seed) {
  validate(spec);
  const Index d = input_dim(spec), r = output_dim(spec);
  const bool lap = activation(spec).kind != ActivationKind::relu;
  const JetOrder order = lap ? JetOrder::laplacian : JetOrder::gradient;
  std::mt19937_64 rng(seed);
  GradcheckReport rep;

  Eigen::MatrixXd x(d, points);
  std::vector<FdJets> fds;
  for (Index i = 0; i < points; ++i) {
    // two step sizes disagree when a kink lies inside the stencil; redraw then
    for (int attempt = 0;; ++attempt) {
      const Eigen::VectorXd xi = sample_interior(1, d, rng).col(0);
      FdJets a = fd_jets(spec, params, xi, 1e-5L), b = fd_jets(spec, params, xi, 5e-6L);
      const double scale = std::max(1.0, a.laplacian.cwiseAbs().maxCoeff());
      const bool smooth = (a.gradient - b.gradient).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, a.gradient.cwiseAbs().maxCoeff()) &&
                          (!lap || (a.laplacian - b.laplacian).cwiseAbs().maxCoeff() <= 1e-6 * scale);
      if (smooth || attempt >= 100) {
        x.col(i) = xi;
        fds.push_back(std::move(a));
        break;
      }
      ++rep.resampled;
    }
  }
  const JetBatch jets = forward_jets(spec, params, x, order);
  if (!jets.data().allFinite()) {
    rep.finite = false;
    rep.value = rep.gradient = rep.laplacian = rep.params = std::numeric_limits<double>::infinity();
    rep.points = points;
    return rep;
  }

  Eigen::MatrixXd fv(r, points), an_v = jets.value();
  Eigen::MatrixXd fg(r, points * d), an_g(r, points * d);
  Eigen::MatrixXd fl(r, points), an_l(r, points);
  for (Index i = 0; i < points; ++i) {
    fv.col(i) = fds[i].value;
    for (Index k = 0; k < d; ++k) {
      fg.col(i * d + k) = fds[i].gradient.col(k);
      an_g.col(i * d + k) = jets.gradient(k).col(i);
    }
    fl.col(i) = fds[i].laplacian;
    an_l.col(i) = lap ? Eigen::VectorXd(jets.laplacian().col(i)) : Eigen::VectorXd(fds[i].laplacian);
  }
  rep.value = rel((an_v - fv).cwiseAbs().maxCoeff(), fv.cwiseAbs().maxCoeff());
  rep.gradient = rel((an_g - fg).cwiseAbs().maxCoeff(), fg.cwiseAbs().maxCoeff());
  rep.laplacian = lap ? rel((an_l - fl).cwiseAbs().maxCoeff(), fl.cwiseAbs().maxCoeff()) : 0.0;
  rep.points = points;

  const double inv_scale = 1.0 / std::max(1.0, jets.data().cwiseAbs().maxCoeff());
  const auto lg = loss_gradient(params, [&](Tape& t) {
    const Index h = t.record(spec, params, 0, x, order);
    return functional(t.jets(h), inv_scale, &t.adjoint(h));
  });
  Eigen::VectorXd fd(params.size());
  ParamVector q = params;
  for (Index i = 0; i < params.size(); ++i) {
    const double step = 1e-6 * std::max(1.0, std::abs(params[i]));
    q[i] = params[i] + step;
    const double fp = functional(forward_jets(spec, q, x, order), inv_scale, nullptr);
    q[i] = params[i] - step;
    const double fm = functional(forward_jets(spec, q, x, order), inv_scale, nullptr);
    q[i] = params[i];
    fd[i] = (fp - fm) / (2 * step);
  }
  rep.params = rel((lg.gradient - fd).cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff());
  return rep;
}

}  // namespace mixres
