#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "sc2/rng.hpp"

namespace sc2 {

// Scalar-output dense network: input -> two rectified hidden layers -> head.
// The head is tanh for the actor (output strictly inside (-1, 1)) and linear
// for the critic. Gradients are analytic and accumulate into caller-owned
// buffers, which is all the two learning rules need.
class Mlp {
 public:
  Mlp() = default;

  Mlp(int input, int hidden, bool tanh_head) : in_(input), h_(hidden), tanh_(tanh_head) {
    params_.assign(param_count(), 0.0);
    z1_.assign(static_cast<size_t>(h_), 0.0);
    h1_.assign(static_cast<size_t>(h_), 0.0);
    z2_.assign(static_cast<size_t>(h_), 0.0);
    h2_.assign(static_cast<size_t>(h_), 0.0);
    d2_.assign(static_cast<size_t>(h_), 0.0);
    d1_.assign(static_cast<size_t>(h_), 0.0);
  }

  int input_size() const { return in_; }
  int hidden_size() const { return h_; }
  bool tanh_head() const { return tanh_; }

  size_t param_count() const {
    return static_cast<size_t>(h_) * in_ + h_ +  // W1, b1
           static_cast<size_t>(h_) * h_ + h_ +   // W2, b2
           static_cast<size_t>(h_) + 1;          // w3, b3
  }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Uniform +-1/sqrt(fan_in) per layer.
  void init(Rng& rng) {
    double* p = params_.data();
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_));
    for (int i = 0; i < h_ * in_ + h_; ++i) *p++ = rng.uniform(-s1, s1);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(h_));
    for (int i = 0; i < h_ * h_ + h_; ++i) *p++ = rng.uniform(-s2, s2);
    for (int i = 0; i < h_ + 1; ++i) *p++ = rng.uniform(-s2, s2);
  }

  double forward(const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != in_) throw std::invalid_argument("Mlp input size mismatch");
    const double* W1 = params_.data();
    const double* b1 = W1 + static_cast<size_t>(h_) * in_;
    const double* W2 = b1 + h_;
    const double* b2 = W2 + static_cast<size_t>(h_) * h_;
    const double* w3 = b2 + h_;
    const double* b3 = w3 + h_;

    for (int j = 0; j < h_; ++j) {
      const double* row = W1 + static_cast<size_t>(j) * in_;
      const double acc = b1[j] + dot(row, x.data(), in_);
      z1_[static_cast<size_t>(j)] = acc;
      h1_[static_cast<size_t>(j)] = acc > 0.0 ? acc : 0.0;
    }
    for (int j = 0; j < h_; ++j) {
      const double* row = W2 + static_cast<size_t>(j) * h_;
      const double acc = b2[j] + dot(row, h1_.data(), h_);
      z2_[static_cast<size_t>(j)] = acc;
      h2_[static_cast<size_t>(j)] = acc > 0.0 ? acc : 0.0;
    }
    const double z3 = *b3 + dot(w3, h2_.data(), h_);
    out_ = tanh_ ? std::tanh(z3) : z3;
    return out_;
  }

  // acc += scale * d(out)/d(params), using the activations of the most
  // recent forward() on the same input.
  void accumulate_grad_into(const std::vector<double>& x, double scale,
                            std::vector<double>& acc) {
    backprop();
    double* W1 = acc.data();
    double* b1 = W1 + static_cast<size_t>(h_) * in_;
    double* W2 = b1 + h_;
    double* b2 = W2 + static_cast<size_t>(h_) * h_;
    double* w3 = b2 + h_;
    double* b3 = w3 + h_;
    const double dz3 = dz3_ * scale;

    for (int j = 0; j < h_; ++j) {
      const double d1j = d1_[static_cast<size_t>(j)] * scale;
      if (d1j != 0.0) {
        double* row = W1 + static_cast<size_t>(j) * in_;
        for (int i = 0; i < in_; ++i) row[i] += d1j * x[static_cast<size_t>(i)];
      }
      b1[j] += d1j;
    }
    for (int j = 0; j < h_; ++j) {
      const double d2j = d2_[static_cast<size_t>(j)] * scale;
      if (d2j != 0.0) {
        double* row = W2 + static_cast<size_t>(j) * h_;
        for (int i = 0; i < h_; ++i) row[i] += d2j * h1_[static_cast<size_t>(i)];
      }
      b2[j] += d2j;
    }
    for (int i = 0; i < h_; ++i) w3[i] += dz3 * h2_[static_cast<size_t>(i)];
    *b3 += dz3;
  }

  // Full gradient d(out)/d(params) after a forward(); used by the
  // finite-difference checks.
  void grad_into(const std::vector<double>& x, std::vector<double>& g) {
    backprop();
    g.assign(param_count(), 0.0);
    double* W1 = g.data();
    double* b1 = W1 + static_cast<size_t>(h_) * in_;
    double* W2 = b1 + h_;
    double* b2 = W2 + static_cast<size_t>(h_) * h_;
    double* w3 = b2 + h_;
    double* b3 = w3 + h_;
    for (int j = 0; j < h_; ++j) {
      const double d1j = d1_[static_cast<size_t>(j)];
      double* row = W1 + static_cast<size_t>(j) * in_;
      for (int i = 0; i < in_; ++i) row[i] = d1j * x[static_cast<size_t>(i)];
      b1[j] = d1j;
    }
    for (int j = 0; j < h_; ++j) {
      const double d2j = d2_[static_cast<size_t>(j)];
      double* row = W2 + static_cast<size_t>(j) * h_;
      for (int i = 0; i < h_; ++i) row[i] = d2j * h1_[static_cast<size_t>(i)];
      b2[j] = d2j;
    }
    for (int i = 0; i < h_; ++i) w3[i] = dz3_ * h2_[static_cast<size_t>(i)];
    *b3 = dz3_;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"input", in_}, {"hidden", h_}, {"tanh_head", tanh_},
                          {"params", params_}};
  }

  static Mlp from_json(const nlohmann::json& j) {
    Mlp m(j.at("input").get<int>(), j.at("hidden").get<int>(), j.at("tanh_head").get<bool>());
    const auto p = j.at("params").get<std::vector<double>>();
    if (p.size() != m.param_count()) throw std::runtime_error("Mlp parameter count mismatch");
    m.params_ = p;
    return m;
  }

 private:
  // Four-lane dot product: a fixed summation order that the compiler can
  // pipeline without reassociating floating-point math.
  static double dot(const double* a, const double* b, int n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int i = 0;
    for (; i + 4 <= n; i += 4) {
      s0 += a[i] * b[i];
      s1 += a[i + 1] * b[i + 1];
      s2 += a[i + 2] * b[i + 2];
      s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
  }

  void backprop() {
    const double* W2 = params_.data() + static_cast<size_t>(h_) * in_ + h_;
    const double* w3 = W2 + static_cast<size_t>(h_) * h_ + h_;
    dz3_ = tanh_ ? 1.0 - out_ * out_ : 1.0;
    for (int j = 0; j < h_; ++j)
      d2_[static_cast<size_t>(j)] =
          z2_[static_cast<size_t>(j)] > 0.0 ? dz3_ * w3[j] : 0.0;
    for (int i = 0; i < h_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < h_; ++j)
        acc += W2[static_cast<size_t>(j) * h_ + i] * d2_[static_cast<size_t>(j)];
      d1_[static_cast<size_t>(i)] = z1_[static_cast<size_t>(i)] > 0.0 ? acc : 0.0;
    }
  }

  int in_ = 0;
  int h_ = 0;
  bool tanh_ = false;
  std::vector<double> params_;

  // forward/backward workspaces
  std::vector<double> z1_, h1_, z2_, h2_, d2_, d1_;
  double out_ = 0.0;
  double dz3_ = 0.0;
};

// Moment-normalized ascent steps (Adam). The learning rate bounds the
// per-parameter step, which keeps the pinned rates stable no matter how the
// reward scale moves.
class Adam {
 public:
  Adam() = default;
  Adam(double lr, size_t n) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  // params += lr * normalized(grad), treating `grad` as an ascent direction.
  void step(std::vector<double>& params, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      params[i] += lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"lr", lr_}, {"t", t_}, {"m", m_}, {"v", v_}};
  }

  static Adam from_json(const nlohmann::json& j) {
    Adam a;
    a.lr_ = j.at("lr").get<double>();
    a.t_ = j.at("t").get<long>();
    a.m_ = j.at("m").get<std::vector<double>>();
    a.v_ = j.at("v").get<std::vector<double>>();
    return a;
  }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace sc2
