#pragma once

// Dense multilayer perceptron with batched forward/backward passes, Adam and
// a central-difference gradient checker. Parameters of a network live in one
// flat vector (per layer: W row-major [out x in], then b) so optimizers and
// target-network updates are single kernel calls.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uavnet/rng.hpp"

namespace uavnet::nn {

enum class Activation { Linear, Relu, Tanh };

std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

/// Row-major batch: one sample per row.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  static Matrix row_vector(std::span<const double> v);

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::Linear;
  std::size_t offset = 0;  // start of W in the flat parameter vector

  std::size_t weight_count() const { return in * out; }
  std::size_t bias_offset() const { return offset + in * out; }
};

class Mlp {
 public:
  /// Activations recorded by forward(); tied to the parameter version.
  struct Cache {
    std::vector<Matrix> outputs;  // outputs[0] is the input batch
    std::uint64_t version = 0;
    const Mlp* owner = nullptr;
  };

  Mlp() = default;
  /// dims = [input, hidden..., output]; acts has dims.size() - 1 entries.
  Mlp(std::vector<std::size_t> dims, std::vector<Activation> acts);

  /// Hidden layers share `hidden_act`; the last layer uses `out_act`.
  static Mlp make(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
                  Activation hidden_act, Activation out_act);

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  void init_glorot(Rng& rng);

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  std::size_t param_count() const { return params_.size(); }
  const std::vector<LayerShape>& layers() const { return layers_; }
  std::vector<std::size_t> dims() const;

  std::span<const double> params() const { return params_; }
  /// Mutable access invalidates outstanding caches.
  std::span<double> mutable_params();
  std::span<const double> weights(std::size_t layer) const;
  std::span<const double> bias(std::size_t layer) const;
  std::span<double> mutable_weights(std::size_t layer);
  std::span<double> mutable_bias(std::size_t layer);

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
  std::vector<double> forward(std::span<const double> x) const;

  /// Gradients of sum(d_out . output) w.r.t. every parameter (written to
  /// `grad`, resized to param_count()) and returned w.r.t. the input batch.
  Matrix backward(const Cache& cache, const Matrix& d_out, std::vector<double>& grad) const;

  /// Smallest |pre-activation| over all ReLU units for the batch; +inf when
  /// the network has no ReLU layer.
  double min_relu_margin(const Matrix& x) const;

  bool same_shape(const Mlp& other) const;
  /// this = tau * src + (1 - tau) * this.
  void soft_update(const Mlp& src, double tau);
  void copy_params(const Mlp& src);

  std::uint64_t version() const { return version_; }

 private:
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
  std::uint64_t version_ = 0;
};

/// Bias-corrected Adam over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);

  double lr() const { return lr_; }
  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }
  double eps() const { return eps_; }
  std::uint64_t steps() const { return t_; }
  std::size_t size() const { return m1_.size(); }

  friend void to_json(nlohmann::json& j, const Adam& a);
  friend void from_json(const nlohmann::json& j, Adam& a);

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::uint64_t t_ = 0;
  std::vector<double> m1_;
  std::vector<double> m2_;
};

/// Mean over all entries of (y - t)^2; `d_y` receives its gradient.
double mse(const Matrix& y, const Matrix& t, Matrix* d_y = nullptr);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

/// Relative error |a - n| / max(|a|, |n|, 1e-6) between `analytic` and
/// central differences of `loss` over `params` (step h, restored afterwards).
GradCheckResult grad_check(std::span<double> params, std::span<const double> analytic,
                           const std::function<double()>& loss, double h = 1e-5);

/// Checks the parameter gradients of `net` under a scalar loss of its output
/// batch; loss_fn returns the loss and fills dL/dOut.
GradCheckResult grad_check(Mlp& net, const Matrix& x,
                           const std::function<double(const Matrix&, Matrix&)>& loss_fn,
                           double h = 1e-5);

/// Same, for the gradient with respect to the input batch.
GradCheckResult grad_check_input(const Mlp& net, Matrix x,
                                 const std::function<double(const Matrix&, Matrix&)>& loss_fn,
                                 double h = 1e-5);

void to_json(nlohmann::json& j, const Mlp& net);
void from_json(const nlohmann::json& j, Mlp& net);

}  // namespace uavnet::nn
