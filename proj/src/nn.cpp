#include "uavnet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "uavnet/error.hpp"
#include "uavnet/kernels.hpp"

namespace uavnet::nn {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "linear";
}

Activation activation_from_name(std::string_view name) {
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Matrix Matrix::row_vector(std::span<const double> v) {
  Matrix m(1, v.size());
  std::copy(v.begin(), v.end(), m.data.begin());
  return m;
}

Mlp::Mlp(std::vector<std::size_t> dims, std::vector<Activation> acts) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw ConfigError("network needs at least one layer and one activation per layer");
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] == 0 || dims[l + 1] == 0) throw ConfigError("layer widths must be positive");
    LayerShape s{dims[l], dims[l + 1], acts[l], offset};
    offset += s.in * s.out + s.out;
    layers_.push_back(s);
  }
  params_.assign(offset, 0.0);
}

Mlp Mlp::make(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
              Activation hidden_act, Activation out_act) {
  std::vector<std::size_t> dims{input};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output);
  std::vector<Activation> acts(hidden.size(), hidden_act);
  acts.push_back(out_act);
  return Mlp(std::move(dims), std::move(acts));
}

void Mlp::init_glorot(Rng& rng) {
  for (const auto& s : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    for (std::size_t i = 0; i < s.weight_count(); ++i) params_[s.offset + i] = rng.uniform(-limit, limit);
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(s.bias_offset()), s.out, 0.0);
  }
  ++version_;
}

std::vector<std::size_t> Mlp::dims() const {
  std::vector<std::size_t> d;
  if (layers_.empty()) return d;
  d.push_back(layers_.front().in);
  for (const auto& s : layers_) d.push_back(s.out);
  return d;
}

std::span<double> Mlp::mutable_params() {
  ++version_;
  return params_;
}

std::span<const double> Mlp::weights(std::size_t layer) const {
  const auto& s = layers_.at(layer);
  return {params_.data() + s.offset, s.weight_count()};
}

std::span<const double> Mlp::bias(std::size_t layer) const {
  const auto& s = layers_.at(layer);
  return {params_.data() + s.bias_offset(), s.out};
}

std::span<double> Mlp::mutable_weights(std::size_t layer) {
  const auto& s = layers_.at(layer);
  ++version_;
  return {params_.data() + s.offset, s.weight_count()};
}

std::span<double> Mlp::mutable_bias(std::size_t layer) {
  const auto& s = layers_.at(layer);
  ++version_;
  return {params_.data() + s.bias_offset(), s.out};
}

namespace {

void affine(const LayerShape& s, const double* params, const Matrix& x, Matrix& z) {
  z = Matrix(x.rows, s.out);
  kernels::active().gemm_nt(x.data.data(), params + s.offset, z.data.data(), x.rows, s.out, s.in);
  const double* b = params + s.bias_offset();
  for (std::size_t r = 0; r < z.rows; ++r) {
    double* row = z.data.data() + r * s.out;
    for (std::size_t c = 0; c < s.out; ++c) row[c] += b[c];
  }
}

void activate(Activation a, Matrix& z) {
  switch (a) {
    case Activation::Linear: break;
    case Activation::Relu:
      for (auto& v : z.data) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::Tanh:
      for (auto& v : z.data) v = std::tanh(v);
      break;
  }
}

}  // namespace

Matrix Mlp::forward(const Matrix& x, Cache* cache) const {
  if (layers_.empty()) throw ConfigError("forward on an empty network");
  if (x.cols != input_dim())
    throw DimensionError("input has " + std::to_string(x.cols) + " features, network expects " +
                         std::to_string(input_dim()));
  if (cache) {
    cache->outputs.clear();
    cache->outputs.push_back(x);
    cache->version = version_;
    cache->owner = this;
  }
  Matrix cur = x;
  Matrix z;
  for (const auto& s : layers_) {
    affine(s, params_.data(), cur, z);
    activate(s.act, z);
    cur = std::move(z);
    if (cache) cache->outputs.push_back(cur);
  }
  return cur;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  return forward(Matrix::row_vector(x)).data;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& d_out, std::vector<double>& grad) const {
  if (cache.owner != this || cache.version != version_ || cache.outputs.size() != layers_.size() + 1)
    throw std::logic_error("stale forward cache passed to backward");
  const std::size_t n = cache.outputs.front().rows;
  if (d_out.rows != n || d_out.cols != output_dim())
    throw DimensionError("upstream gradient shape does not match the network output");
  const auto& k = kernels::active();
  grad.assign(params_.size(), 0.0);
  Matrix delta = d_out;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& s = layers_[l];
    const Matrix& y = cache.outputs[l + 1];
    switch (s.act) {
      case Activation::Linear: break;
      case Activation::Relu:
        for (std::size_t i = 0; i < delta.data.size(); ++i)
          if (!(y.data[i] > 0.0)) delta.data[i] = 0.0;
        break;
      case Activation::Tanh:
        for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] *= 1.0 - y.data[i] * y.data[i];
        break;
    }
    const Matrix& x = cache.outputs[l];
    k.gemm_tn_acc(delta.data.data(), x.data.data(), grad.data() + s.offset, s.out, s.in, n);
    double* gb = grad.data() + s.bias_offset();
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = delta.data.data() + r * s.out;
      for (std::size_t c = 0; c < s.out; ++c) gb[c] += row[c];
    }
    Matrix dx(n, s.in);
    k.gemm_nn(delta.data.data(), params_.data() + s.offset, dx.data.data(), n, s.in, s.out);
    delta = std::move(dx);
  }
  return delta;
}

double Mlp::min_relu_margin(const Matrix& x) const {
  if (x.cols != input_dim()) throw DimensionError("input width does not match the network");
  double margin = std::numeric_limits<double>::infinity();
  Matrix cur = x;
  Matrix z;
  for (const auto& s : layers_) {
    affine(s, params_.data(), cur, z);
    if (s.act == Activation::Relu)
      for (double v : z.data) margin = std::min(margin, std::abs(v));
    activate(s.act, z);
    cur = std::move(z);
  }
  return margin;
}

bool Mlp::same_shape(const Mlp& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& b = other.layers_[l];
    if (a.in != b.in || a.out != b.out || a.act != b.act) return false;
  }
  return true;
}

void Mlp::soft_update(const Mlp& src, double tau) {
  if (!same_shape(src)) throw DimensionError("soft update between networks of different shapes");
  kernels::active().lerp(params_.data(), src.params_.data(), tau, params_.size());
  ++version_;
}

void Mlp::copy_params(const Mlp& src) {
  if (!same_shape(src)) throw DimensionError("parameter copy between networks of different shapes");
  params_ = src.params_;
  ++version_;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m1_(n, 0.0), m2_(n, 0.0) {
  if (!(lr > 0.0)) throw ConfigError("Adam learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m1_.size() || grad.size() != m1_.size())
    throw DimensionError("Adam state, parameters and gradient sizes differ");
  ++t_;
  const double td = static_cast<double>(t_);
  kernels::AdamCoeffs c{lr_, beta1_, beta2_, eps_, 1.0 - std::pow(beta1_, td),
                        1.0 - std::pow(beta2_, td)};
  kernels::active().adam(params.data(), grad.data(), m1_.data(), m2_.data(), params.size(), c);
}

void to_json(nlohmann::json& j, const Adam& a) {
  j = {{"lr", a.lr_}, {"beta1", a.beta1_}, {"beta2", a.beta2_}, {"eps", a.eps_},
       {"step", a.t_}, {"m1", a.m1_},      {"m2", a.m2_}};
}

void from_json(const nlohmann::json& j, Adam& a) {
  try {
    Adam out(j.at("m1").size(), j.at("lr").get<double>(), j.at("beta1").get<double>(),
             j.at("beta2").get<double>(), j.at("eps").get<double>());
    out.t_ = j.at("step").get<std::uint64_t>();
    out.m1_ = j.at("m1").get<std::vector<double>>();
    out.m2_ = j.at("m2").get<std::vector<double>>();
    if (out.m2_.size() != out.m1_.size()) throw DimensionError("Adam moment vectors differ in size");
    a = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed optimizer state: ") + e.what());
  }
}

double mse(const Matrix& y, const Matrix& t, Matrix* d_y) {
  if (y.rows != t.rows || y.cols != t.cols) throw DimensionError("mse operands differ in shape");
  const double n = static_cast<double>(y.data.size());
  double s = 0.0;
  if (d_y) *d_y = Matrix(y.rows, y.cols);
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    const double e = y.data[i] - t.data[i];
    s += e * e;
    if (d_y) d_y->data[i] = 2.0 * e / n;
  }
  return s / n;
}

namespace {

double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
}

}  // namespace

GradCheckResult grad_check(std::span<double> params, std::span<const double> analytic,
                           const std::function<double()>& loss, double h) {
  if (params.size() != analytic.size()) throw DimensionError("gradient and parameter sizes differ");
  GradCheckResult r;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss();
    params[i] = saved - h;
    const double down = loss();
    params[i] = saved;
    const double e = rel_error(analytic[i], (up - down) / (2.0 * h));
    if (e > r.max_rel_error) {
      r.max_rel_error = e;
      r.worst_index = i;
    }
  }
  return r;
}

GradCheckResult grad_check(Mlp& net, const Matrix& x,
                           const std::function<double(const Matrix&, Matrix&)>& loss_fn,
                           double h) {
  Mlp::Cache cache;
  Matrix d_out;
  loss_fn(net.forward(x, &cache), d_out);
  std::vector<double> grad;
  net.backward(cache, d_out, grad);
  auto params = net.mutable_params();
  Matrix scratch;
  return grad_check(params, grad, [&] { return loss_fn(net.forward(x), scratch); }, h);
}

GradCheckResult grad_check_input(const Mlp& net, Matrix x,
                                 const std::function<double(const Matrix&, Matrix&)>& loss_fn,
                                 double h) {
  Mlp::Cache cache;
  Matrix d_out;
  loss_fn(net.forward(x, &cache), d_out);
  std::vector<double> grad;
  const Matrix dx = net.backward(cache, d_out, grad);
  Matrix scratch;
  return grad_check(x.data, dx.data, [&] { return loss_fn(net.forward(x), scratch); }, h);
}

void to_json(nlohmann::json& j, const Mlp& net) {
  std::vector<std::string> acts;
  for (const auto& s : net.layers()) acts.emplace_back(activation_name(s.act));
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto w = net.weights(l);
    const auto b = net.bias(l);
    layers.push_back({{"weights", std::vector<double>(w.begin(), w.end())},
                      {"bias", std::vector<double>(b.begin(), b.end())}});
  }
  j = {{"dims", net.dims()}, {"activations", acts}, {"layers", layers}};
}

void from_json(const nlohmann::json& j, Mlp& net) {
  try {
    std::vector<Activation> acts;
    for (const auto& a : j.at("activations")) acts.push_back(activation_from_name(a.get<std::string>()));
    Mlp out(j.at("dims").get<std::vector<std::size_t>>(), std::move(acts));
    const auto& layers = j.at("layers");
    if (layers.size() != out.layers().size()) throw DimensionError("layer count does not match dims");
    for (std::size_t l = 0; l < out.layers().size(); ++l) {
      const auto w = layers[l].at("weights").get<std::vector<double>>();
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      auto dw = out.mutable_weights(l);
      auto db = out.mutable_bias(l);
      if (w.size() != dw.size() || b.size() != db.size())
        throw DimensionError("layer " + std::to_string(l) + " parameter count does not match dims");
      std::copy(w.begin(), w.end(), dw.begin());
      std::copy(b.begin(), b.end(), db.begin());
    }
    net = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed network: ") + e.what());
  }
}

}  // namespace uavnet::nn
