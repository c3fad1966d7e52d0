#pragma once

// Fully connected regression network with rectifier hidden layers and a
// linear output, trained by reverse-mode gradients and the adaptive-moment
// update.
//
// Activations are stored feature-major (a[j * batch + s]). Every sample's
// dot products are accumulated in the same order regardless of batch size,
// so batched and single-sample forward passes agree bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "boltshare/random.hpp"

namespace boltshare {

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights; // row-major, out x in
  std::vector<double> bias;    // out
};

enum class LossKind { weighted_mse, mse };

/// Offset added to the target in the weighted loss denominator.
inline constexpr double kLossWeightOffset = 1.0e-3;

inline double weighted_mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw std::invalid_argument("weighted_mse: length mismatch");
  if (pred.empty()) throw std::invalid_argument("weighted_mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - target[i];
    acc += r * r / (target[i] + kLossWeightOffset);
  }
  return acc / static_cast<double>(pred.size());
}

inline double mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw std::invalid_argument("mse: length mismatch");
  if (pred.empty()) throw std::invalid_argument("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - target[i]) * (pred[i] - target[i]);
  return acc / static_cast<double>(pred.size());
}

inline double loss(LossKind kind, std::span<const double> pred, std::span<const double> target) {
  return kind == LossKind::weighted_mse ? weighted_mse(pred, target) : mse(pred, target);
}

class Mlp {
 public:
  Mlp() = default;

  /// Weights and biases uniform in +-1/sqrt(fan_in).
  static Mlp initialized(const std::vector<std::size_t>& sizes, Rng& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    Mlp m;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      if (sizes[l] == 0 || sizes[l + 1] == 0) throw std::invalid_argument("Mlp: zero-width layer");
      DenseLayer layer{sizes[l], sizes[l + 1], {}, {}};
      const double limit = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
      layer.weights.resize(layer.in * layer.out);
      layer.bias.resize(layer.out);
      for (auto& w : layer.weights) w = uniform(rng, -limit, limit);
      for (auto& b : layer.bias) b = uniform(rng, -limit, limit);
      m.layers_.push_back(std::move(layer));
    }
    return m;
  }

  static Mlp from_layers(std::vector<DenseLayer> layers) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      if (L.weights.size() != L.in * L.out || L.bias.size() != L.out)
        throw std::invalid_argument("Mlp: layer parameter shape mismatch");
      if (l > 0 && layers[l - 1].out != L.in)
        throw std::invalid_argument("Mlp: consecutive layer sizes disagree");
      for (double v : L.weights)
        if (!std::isfinite(v)) throw std::invalid_argument("Mlp: non-finite weight");
      for (double v : L.bias)
        if (!std::isfinite(v)) throw std::invalid_argument("Mlp: non-finite bias");
    }
    if (layers.empty()) throw std::invalid_argument("Mlp: no layers");
    Mlp m;
    m.layers_ = std::move(layers);
    return m;
  }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  std::size_t input_size() const { return layers_.front().in; }
  std::size_t output_size() const { return layers_.back().out; }

  std::vector<std::size_t> layer_sizes() const {
    std::vector<std::size_t> s{layers_.front().in};
    for (const auto& l : layers_) s.push_back(l.out);
    return s;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
  }

  /// Forward pass on feature-major inputs; returns feature-major outputs.
  std::vector<double> forward(std::span<const double> inputs, std::size_t batch) const {
    std::vector<double> a(inputs.begin(), inputs.end()), z;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      affine(layers_[l], a, batch, z);
      if (l + 1 < layers_.size())
        for (auto& v : z) v = std::max(v, 0.0);
      a.swap(z);
    }
    return a;
  }

  /// Loss over a batch and its gradient with respect to every parameter,
  /// laid out like `layers()`.
  double loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                           std::size_t batch, LossKind kind,
                           std::vector<DenseLayer>& grad) const {
    if (output_size() != 1) throw std::logic_error("Mlp: gradient needs a scalar output");
    if (inputs.size() != batch * input_size() || targets.size() != batch)
      throw std::invalid_argument("Mlp: batch shape mismatch");

    // acts[0] = input, acts[l+1] = output of layer l (post-activation)
    std::vector<std::vector<double>> acts(layers_.size() + 1);
    acts[0].assign(inputs.begin(), inputs.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      affine(layers_[l], acts[l], batch, acts[l + 1]);
      if (l + 1 < layers_.size())
        for (auto& v : acts[l + 1]) v = std::max(v, 0.0);
    }
    const auto& pred = acts.back();
    const double value = loss(kind, pred, targets);

    std::vector<double> delta(batch);
    const double inv_n = 1.0 / static_cast<double>(batch);
    for (std::size_t s = 0; s < batch; ++s) {
      const double w = kind == LossKind::weighted_mse ? 1.0 / (targets[s] + kLossWeightOffset) : 1.0;
      delta[s] = 2.0 * (pred[s] - targets[s]) * w * inv_n;
    }

    grad.resize(layers_.size());
    std::vector<double> prev_delta;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto& L = layers_[l];
      auto& G = grad[l];
      G.in = L.in;
      G.out = L.out;
      G.weights.assign(L.weights.size(), 0.0);
      G.bias.assign(L.out, 0.0);
      const auto& a_prev = acts[l];
      for (std::size_t j = 0; j < L.out; ++j) {
        const double* d = &delta[j * batch];
        double gb = 0.0;
        for (std::size_t s = 0; s < batch; ++s) gb += d[s];
        G.bias[j] = gb;
        for (std::size_t i = 0; i < L.in; ++i) {
          const double* x = &a_prev[i * batch];
          double gw = 0.0;
          for (std::size_t s = 0; s < batch; ++s) gw += d[s] * x[s];
          G.weights[j * L.in + i] = gw;
        }
      }
      if (l == 0) break;
      prev_delta.assign(L.in * batch, 0.0);
      for (std::size_t j = 0; j < L.out; ++j) {
        const double* d = &delta[j * batch];
        for (std::size_t i = 0; i < L.in; ++i) {
          const double w = L.weights[j * L.in + i];
          double* pd = &prev_delta[i * batch];
          for (std::size_t s = 0; s < batch; ++s) pd[s] += w * d[s];
        }
      }
      // rectifier derivative: the stored activation is positive iff z > 0
      for (std::size_t k = 0; k < prev_delta.size(); ++k)
        if (!(a_prev[k] > 0.0)) prev_delta[k] = 0.0;
      delta.swap(prev_delta);
    }
    return value;
  }

 private:
  static void affine(const DenseLayer& L, const std::vector<double>& a, std::size_t batch,
                     std::vector<double>& z) {
    z.assign(L.out * batch, 0.0);
    for (std::size_t j = 0; j < L.out; ++j) {
      double* zj = &z[j * batch];
      std::fill(zj, zj + batch, L.bias[j]);
      const double* w = &L.weights[j * L.in];
      for (std::size_t i = 0; i < L.in; ++i) {
        const double wi = w[i];
        const double* ai = &a[i * batch];
        for (std::size_t s = 0; s < batch; ++s) zj[s] += wi * ai[s];
      }
    }
  }

  std::vector<DenseLayer> layers_;
};

struct AdamConfig {
  double learning_rate = 1.0e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1.0e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const Mlp& model, AdamConfig cfg) : cfg_(cfg) {
    for (const auto& l : model.layers()) {
      m_.push_back(zeros_like(l));
      v_.push_back(zeros_like(l));
    }
  }

  void step(Mlp& model, const std::vector<DenseLayer>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weights, grad[l].weights, m_[l].weights, v_[l].weights, c1, c2);
      update(layers[l].bias, grad[l].bias, m_[l].bias, v_[l].bias, c1, c2);
    }
  }

 private:
  static DenseLayer zeros_like(const DenseLayer& l) {
    return {l.in, l.out, std::vector<double>(l.weights.size(), 0.0),
            std::vector<double>(l.bias.size(), 0.0)};
  }

  void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
              std::vector<double>& v, double c1, double c2) const {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
      p[k] -= cfg_.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.epsilon);
    }
  }

  AdamConfig cfg_;
  std::vector<DenseLayer> m_;
  std::vector<DenseLayer> v_;
  long t_ = 0;
};

}  // namespace boltshare
