#include "mixres/autodiff.hpp"

#include <cmath>
#include <string>

namespace mixres {

namespace {

using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXXd;
using ConstRowMap = Eigen::Map<const RowMajorMatrix<double>>;
using RowMap = Eigen::Map<RowMajorMatrix<double>>;

struct Intermediates {
  std::vector<Mat> states;  // resnet: input state of every block, then the final state
  std::vector<Mat> pre;     // resnet: pre-activations per block; two-layer: per output
};

// Column block `b` of a state matrix laid out like JetBatch.
inline auto blk(Mat& m, Index b, Index n) { return m.middleCols(b * n, n); }
inline auto blk(const Mat& m, Index b, Index n) { return m.middleCols(b * n, n); }

JetBatch resnet_forward(const ResNetSpec& s, const double* p, const Mat& x, JetOrder order,
                        Intermediates* rec) {
  const Index n = x.cols(), d = s.input_dim, w = s.width;
  const Index nb = JetBatch::block_count(d, order);
  const Index lap = 1 + d;
  const bool grad = order != JetOrder::value;
  const bool lapl = order == JetOrder::laplacian;
  const Activation act = s.activation;

  Index at = 0;
  ConstRowMap A(p, w, d);
  at += w * d;

  Mat T = Mat::Zero(w, n * nb);
  blk(T, 0, n).noalias() = A * x;
  if (grad)
    for (Index k = 0; k < d; ++k) blk(T, 1 + k, n).colwise() = A.col(k);

  Mat Z(w, n * nb);
  Arr q;
  for (Index j = 0; j < s.blocks; ++j) {
    ConstRowMap W(p + at, w, w);
    Eigen::Map<const Eigen::VectorXd> b(p + at + w * w, w);
    at += w * w + w;
    if (rec) rec->states.push_back(T);

    Z.noalias() = W * T;
    blk(Z, 0, n).colwise() += b;
    const auto zv = blk(Z, 0, n).array();
    blk(T, 0, n).array() += activate(act, 0, zv);
    if (grad) {
      const Arr s1 = activate(act, 1, zv);
      if (lapl) q = Arr::Zero(w, n);
      for (Index k = 0; k < d; ++k) {
        const auto zg = blk(Z, 1 + k, n).array();
        blk(T, 1 + k, n).array() += s1 * zg;
        if (lapl) q += zg.square();
      }
      if (lapl) blk(T, lap, n).array() += activate(act, 2, zv) * q + s1 * blk(Z, lap, n).array();
    }
    if (rec) rec->pre.push_back(Z);
  }
  if (rec) rec->states.push_back(T);

  ConstRowMap C(p + at, s.output_dim, w);
  JetBatch out(s.output_dim, n, d, order);
  out.data().noalias() = C * T;
  return out;
}

void resnet_backward(const ResNetSpec& s, const double* p, const Mat& x, JetOrder order,
                     const Intermediates& rec, const JetBatch& adj, double* g) {
  const Index n = x.cols(), d = s.input_dim, w = s.width;
  const Index nb = JetBatch::block_count(d, order);
  const Index lap = 1 + d;
  const bool grad = order != JetOrder::value;
  const bool lapl = order == JetOrder::laplacian;
  const Activation act = s.activation;
  const Index block_size = w * w + w;
  const Index c_off = w * d + s.blocks * block_size;

  ConstRowMap C(p + c_off, s.output_dim, w);
  RowMap Cbar(g + c_off, s.output_dim, w);
  Cbar.noalias() += adj.data() * rec.states.back().transpose();
  Mat Tbar = C.transpose() * adj.data();

  Mat Zbar(w, n * nb);
  Arr q;
  for (Index j = s.blocks - 1; j >= 0; --j) {
    const Index off = w * d + j * block_size;
    ConstRowMap W(p + off, w, w);
    RowMap Wbar(g + off, w, w);
    Eigen::Map<Eigen::VectorXd> bbar(g + off + w * w, w);
    const Mat& Z = rec.pre[static_cast<size_t>(j)];
    const Mat& T = rec.states[static_cast<size_t>(j)];

    const auto zv = blk(Z, 0, n).array();
    const Arr s1 = activate(act, 1, zv);
    blk(Zbar, 0, n).array() = blk(Tbar, 0, n).array() * s1;
    if (grad) {
      const Arr s2 = activate(act, 2, zv);
      for (Index k = 0; k < d; ++k) {
        const auto zg = blk(Z, 1 + k, n).array();
        const auto tg = blk(Tbar, 1 + k, n).array();
        blk(Zbar, 0, n).array() += tg * zg * s2;
        blk(Zbar, 1 + k, n).array() = tg * s1;
      }
      if (lapl) {
        const auto tl = blk(Tbar, lap, n).array();
        q = Arr::Zero(w, n);
        for (Index k = 0; k < d; ++k) q += blk(Z, 1 + k, n).array().square();
        blk(Zbar, 0, n).array() += tl * (activate(act, 3, zv) * q + s2 * blk(Z, lap, n).array());
        const Arr tl_s2 = 2.0 * tl * s2;
        for (Index k = 0; k < d; ++k) blk(Zbar, 1 + k, n).array() += tl_s2 * blk(Z, 1 + k, n).array();
        blk(Zbar, lap, n).array() = tl * s1;
      }
    }
    Wbar.noalias() += Zbar * T.transpose();
    bbar += blk(Zbar, 0, n).rowwise().sum();
    Tbar.noalias() += W.transpose() * Zbar;
  }

  RowMap Abar(g, w, d);
  Abar.noalias() += blk(Tbar, 0, n) * x.transpose();
  if (grad)
    for (Index k = 0; k < d; ++k) Abar.col(k) += blk(Tbar, 1 + k, n).rowwise().sum();
}

struct TwoLayerSlices {
  double c;
  Eigen::Map<const Eigen::VectorXd> a;
  ConstRowMap omega;
  Eigen::Map<const Eigen::VectorXd> b;

  TwoLayerSlices(const double* p, Index m, Index d)
      : c(p[0]), a(p + 1, m), omega(p + 1 + m, m, d), b(p + 1 + m + m * d, m) {}
};

JetBatch two_layer_forward(const TwoLayerSpec& s, const double* p, const Mat& x, JetOrder order,
                           Intermediates* rec) {
  const Index n = x.cols(), d = s.input_dim, m = s.width;
  const Index stride = 1 + m * (d + 2);
  const double inv_m = 1.0 / static_cast<double>(m);
  const Activation act = s.activation;
  JetBatch out(s.output_dim, n, d, order);
  for (Index j = 0; j < s.output_dim; ++j) {
    const TwoLayerSlices v(p + j * stride, m, d);
    Mat Z = v.omega * x;
    Z.colwise() += v.b;
    const auto za = Z.array();
    out.value().row(j) = (v.a.transpose() * activate(act, 0, za).matrix()).array() * inv_m + v.c;
    if (order != JetOrder::value) {
      const Mat s1 = activate(act, 1, za).matrix();
      for (Index k = 0; k < d; ++k)
        out.gradient(k).row(j) = (v.a.cwiseProduct(v.omega.col(k))).transpose() * s1 * inv_m;
    }
    if (order == JetOrder::laplacian) {
      const Eigen::VectorXd r2 = v.omega.rowwise().squaredNorm();
      out.laplacian().row(j) =
          (v.a.cwiseProduct(r2)).transpose() * activate(act, 2, za).matrix() * inv_m;
    }
    if (rec) rec->pre.push_back(std::move(Z));
  }
  return out;
}

void two_layer_backward(const TwoLayerSpec& s, const double* p, const Mat& x, JetOrder order,
                        const Intermediates& rec, const JetBatch& adj, double* g) {
  const Index d = s.input_dim, m = s.width;
  const Index stride = 1 + m * (d + 2);
  const double inv_m = 1.0 / static_cast<double>(m);
  const Activation act = s.activation;
  const bool grad = order != JetOrder::value;
  const bool lapl = order == JetOrder::laplacian;
  for (Index j = 0; j < s.output_dim; ++j) {
    const double* pj = p + j * stride;
    double* gj = g + j * stride;
    const TwoLayerSlices v(pj, m, d);
    Eigen::Map<Eigen::VectorXd> abar(gj + 1, m);
    RowMap omega_bar(gj + 1 + m, m, d);
    Eigen::Map<Eigen::VectorXd> bbar(gj + 1 + m + m * d, m);

    const auto za = rec.pre[static_cast<size_t>(j)].array();
    const Eigen::RowVectorXd vbar = adj.value().row(j);
    const Arr s1 = activate(act, 1, za);

    gj[0] += vbar.sum();
    Eigen::VectorXd da = activate(act, 0, za).matrix() * vbar.transpose();
    Arr zbar = s1.rowwise() * vbar.array();
    Mat omega_direct = Mat::Zero(m, d);

    if (grad) {
      const Arr s2 = activate(act, 2, za);
      for (Index k = 0; k < d; ++k) {
        const Eigen::RowVectorXd gbar = adj.gradient(k).row(j);
        const Eigen::VectorXd u1 = s1.matrix() * gbar.transpose();
        da += v.omega.col(k).cwiseProduct(u1);
        zbar += (s2.rowwise() * gbar.array()).colwise() * v.omega.col(k).array();
        omega_direct.col(k) += v.a.cwiseProduct(u1) * inv_m;
      }
      if (lapl) {
        const Eigen::RowVectorXd lbar = adj.laplacian().row(j);
        const Eigen::VectorXd r2 = v.omega.rowwise().squaredNorm();
        const Eigen::VectorXd u2 = s2.matrix() * lbar.transpose();
        da += r2.cwiseProduct(u2);
        zbar += (activate(act, 3, za).rowwise() * lbar.array()).colwise() * r2.array();
        for (Index k = 0; k < d; ++k)
          omega_direct.col(k) += 2.0 * inv_m * v.a.cwiseProduct(v.omega.col(k)).cwiseProduct(u2);
      }
    }
    zbar.colwise() *= v.a.array() * inv_m;
    abar += da * inv_m;
    omega_bar.noalias() += zbar.matrix() * x.transpose();
    omega_bar += omega_direct;
    bbar += zbar.matrix().rowwise().sum();
  }
}

void check_inputs(const NetworkSpec& spec, const Eigen::Ref<const ParamVector>& params,
                  const Mat& x) {
  if (params.size() != param_count(spec))
    throw NetworkError("parameter vector length " + std::to_string(params.size()) +
                       " does not match " + describe(spec));
  if (x.rows() != input_dim(spec))
    throw NetworkError("point dimension " + std::to_string(x.rows()) + " does not match " +
                       describe(spec));
}

JetBatch forward(const NetworkSpec& spec, const double* p, const Mat& x, JetOrder order,
                 Intermediates* rec) {
  return std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ResNetSpec>)
          return resnet_forward(s, p, x, order, rec);
        else
          return two_layer_forward(s, p, x, order, rec);
      },
      spec);
}

}  // namespace

JetBatch forward_jets(const NetworkSpec& spec, const Eigen::Ref<const ParamVector>& params,
                      const Eigen::MatrixXd& x, JetOrder order) {
  check_inputs(spec, params, x);
  return forward(spec, params.data(), x, order, nullptr);
}

Jetd eval_jet(const NetworkSpec& spec, const ParamVector& params, const Eigen::VectorXd& x) {
  if (output_dim(spec) != 1) throw NetworkError("eval_jet needs a scalar network");
  if (!params.allFinite()) throw NetworkError("non-finite network parameter");
  const Mat pt = x;
  check_inputs(spec, params, pt);
  return forward(spec, params.data(), pt, JetOrder::laplacian, nullptr).jet(0, 0);
}

VectorJetd eval_vector_jet(const NetworkSpec& spec, const ParamVector& params,
                           const Eigen::VectorXd& x) {
  if (output_dim(spec) != input_dim(spec))
    throw NetworkError("eval_vector_jet needs a network R^d -> R^d");
  if (!params.allFinite()) throw NetworkError("non-finite network parameter");
  const Mat pt = x;
  check_inputs(spec, params, pt);
  return forward(spec, params.data(), pt, JetOrder::gradient, nullptr).vector_jet(0);
}

struct Tape::Entry {
  NetworkSpec spec;
  Index offset;
  Mat x;
  JetOrder order;
  ParamVector params;
  Intermediates rec;
  JetBatch jets;
  JetBatch adjoint;
};

Tape::Tape(Index param_size) : param_size_(param_size) {}
Tape::~Tape() = default;
Tape::Tape(Tape&&) noexcept = default;
Tape& Tape::operator=(Tape&&) noexcept = default;

Index Tape::record(const NetworkSpec& spec, const ParamVector& params, Index offset,
                   const Eigen::MatrixXd& x, JetOrder order) {
  const Index count = param_count(spec);
  if (params.size() != param_size_ || offset < 0 || offset + count > param_size_)
    throw NetworkError("tape slice [" + std::to_string(offset) + ", " +
                       std::to_string(offset + count) + ") outside parameter vector of size " +
                       std::to_string(params.size()));
  auto e = std::make_unique<Entry>(Entry{spec, offset, x, order, params.segment(offset, count), {}, {}, {}});
  check_inputs(spec, e->params, x);
  e->jets = forward(spec, e->params.data(), e->x, order, &e->rec);
  e->adjoint = JetBatch(e->jets.outputs(), e->jets.points(), e->jets.dim(), order);
  entries_.push_back(std::move(e));
  return static_cast<Index>(entries_.size()) - 1;
}

const JetBatch& Tape::jets(Index h) const { return entries_.at(static_cast<size_t>(h))->jets; }
JetBatch& Tape::adjoint(Index h) { return entries_.at(static_cast<size_t>(h))->adjoint; }
const JetBatch& Tape::adjoint(Index h) const { return entries_.at(static_cast<size_t>(h))->adjoint; }

ParamVector Tape::backward() const {
  ParamVector grad = ParamVector::Zero(param_size_);
  for (const auto& e : entries_) {
    double* g = grad.data() + e->offset;
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ResNetSpec>)
            resnet_backward(s, e->params.data(), e->x, e->order, e->rec, e->adjoint, g);
          else
            two_layer_backward(s, e->params.data(), e->x, e->order, e->rec, e->adjoint, g);
        },
        e->spec);
  }
  return grad;
}

LossAndGradient loss_gradient(const ParamVector& params,
                              const std::function<double(Tape&)>& loss_eval) {
  Tape tape(params.size());
  LossAndGradient out;
  out.value = loss_eval(tape);
  if (!std::isfinite(out.value)) throw NetworkError("non-finite loss value");
  out.gradient = tape.backward();
  return out;
}

}  // namespace mixres
