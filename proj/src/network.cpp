#include "mixres/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixres {

namespace {

void fill_glorot(Eigen::Ref<ParamVector> out, Index fan_in, Index fan_out, std::mt19937_64& rng,
                 double gain = 1.0) {
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Index i = 0; i < out.size(); ++i) out[i] = dist(rng);
}

}  // namespace

Index param_count(const ResNetSpec& s) {
  return s.width * s.input_dim + s.blocks * (s.width * s.width + s.width) + s.output_dim * s.width;
}

Index param_count(const TwoLayerSpec& s) { return s.output_dim * (1 + s.width * (s.input_dim + 2)); }

Index param_count(const NetworkSpec& spec) {
  return std::visit([](const auto& s) { return param_count(s); }, spec);
}

Index input_dim(const NetworkSpec& spec) {
  return std::visit([](const auto& s) { return s.input_dim; }, spec);
}

Index output_dim(const NetworkSpec& spec) {
  return std::visit([](const auto& s) { return s.output_dim; }, spec);
}

Activation activation(const NetworkSpec& spec) {
  return std::visit([](const auto& s) { return s.activation; }, spec);
}

void validate(const NetworkSpec& spec) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if (s.input_dim < 1 || s.width < 1 || s.output_dim < 1)
          throw NetworkError("network sizes must be positive: " + describe(s));
        if constexpr (std::is_same_v<S, ResNetSpec>) {
          if (s.blocks < 1) throw NetworkError("resnet needs at least one block");
        } else {
          if (!(s.barron_bound >= 0.0) || !std::isfinite(s.barron_bound))
            throw NetworkError("two-layer barron_bound must be finite and non-negative");
        }
      },
      spec);
}

ParamVector init_resnet(const ResNetSpec& s, std::mt19937_64& rng, double block_gain) {
  validate(s);
  ParamVector p = ParamVector::Zero(param_count(s));
  const Index w = s.width;
  Index at = 0;
  fill_glorot(p.segment(at, w * s.input_dim), s.input_dim, w, rng);
  at += w * s.input_dim;
  for (Index j = 0; j < s.blocks; ++j) {
    fill_glorot(p.segment(at, w * w), w, w, rng, block_gain);
    at += w * w + w;  // biases stay zero
  }
  fill_glorot(p.segment(at, s.output_dim * w), w, s.output_dim, rng);
  return p;
}

ParamVector init_params(const NetworkSpec& spec, std::mt19937_64& rng) {
  validate(spec);
  if (const auto* r = std::get_if<ResNetSpec>(&spec)) return init_resnet(*r, rng);
  const auto& s = std::get<TwoLayerSpec>(spec);
  ParamVector p = ParamVector::Zero(param_count(s));
  const Index m = s.width, d = s.input_dim;
  const Index stride = 1 + m * (d + 2);
  for (Index j = 0; j < s.output_dim; ++j) {
    const Index o = j * stride;
    fill_glorot(p.segment(o + 1, m), m, 1, rng);
    fill_glorot(p.segment(o + 1 + m, m * d), d, m, rng);
  }
  return project_two_layer(p, s);
}

ParamVector project_two_layer(const ParamVector& params, const TwoLayerSpec& s) {
  if (params.size() != param_count(s))
    throw NetworkError("two-layer parameter vector has the wrong length");
  ParamVector p = params;
  const double B = s.barron_bound;
  const Index m = s.width, d = s.input_dim;
  const Index stride = 1 + m * (d + 2);
  for (Index j = 0; j < s.output_dim; ++j) {
    const Index o = j * stride;
    p[o] = std::clamp(p[o], -2.0 * B, 2.0 * B);
    for (Index i = 0; i < m; ++i) p[o + 1 + i] = std::clamp(p[o + 1 + i], -8.0 * B, 8.0 * B);
    for (Index i = 0; i < m; ++i) {
      auto omega = p.segment(o + 1 + m + i * d, d);
      const double norm = omega.norm();
      if (norm > 1.0) omega /= norm;
    }
    for (Index i = 0; i < m; ++i) {
      double& b = p[o + 1 + m + m * d + i];
      b = std::clamp(b, -1.0, 1.0);
    }
  }
  return p;
}

Index width_for_param_count(Index target, Index input_dim, Index blocks, Index output_dim) {
  Index w = 1;
  while (param_count(ResNetSpec{input_dim, w, blocks, output_dim, activations::requ}) < target) ++w;
  return w;
}

std::string describe(const NetworkSpec& spec) {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ResNetSpec>)
          os << "resnet(d=" << s.input_dim << ", width=" << s.width << ", blocks=" << s.blocks
             << ", out=" << s.output_dim << ", " << to_string(s.activation) << ")";
        else
          os << "two_layer(d=" << s.input_dim << ", m=" << s.width << ", out=" << s.output_dim
             << ", B=" << s.barron_bound << ", " << to_string(s.activation) << ")";
      },
      spec);
  return os.str();
}

}  // namespace mixres
