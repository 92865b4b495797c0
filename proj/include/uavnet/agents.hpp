#pragma once

// Outer agent: dueling double DQN over RB indices. Inner agent: DDPG over
// beam vectors. Both learn from uniform replay.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "uavnet/channel.hpp"
#include "uavnet/error.hpp"
#include "uavnet/nn.hpp"
#include "uavnet/rng.hpp"

namespace uavnet {

/// Fixed-capacity FIFO ring with uniform sampling without replacement.
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 4096));
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::uint64_t pushed() const { return pushed_; }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
    ++pushed_;
  }

  /// i = 0 is the oldest stored item.
  const T& at(std::size_t i) const { return items_.at((head_ + i) % items_.size()); }

  /// n distinct items (Floyd's algorithm).
  std::vector<const T*> sample(std::size_t n, Rng& rng) const {
    if (n > items_.size()) throw std::out_of_range("replay batch larger than the buffer");
    std::vector<const T*> out;
    out.reserve(n);
    std::unordered_set<std::size_t> chosen;
    const std::size_t size = items_.size();
    for (std::size_t j = size - n; j < size; ++j) {
      std::size_t t = rng.index(j + 1);
      if (!chosen.insert(t).second) {
        chosen.insert(j);
        t = j;
      }
      out.push_back(&items_[t]);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<T> items_;
  std::size_t head_ = 0;
  std::uint64_t pushed_ = 0;
};

using Features = std::shared_ptr<const std::vector<double>>;

/// Outer transition. States are shared because the outer state space is the
/// finite RBP pool.
struct DiscreteTransition {
  Features s;
  int a = 0;
  double r = 0.0;
  Features s_next;
  bool done = false;
};

struct ContinuousTransition {
  std::vector<double> s;
  std::vector<double> a;  // raw (pre-normalization) action
  double r = 0.0;
  std::vector<double> s_next;
  bool done = false;
};

/// Lowest index among the maxima.
int argmax(std::span<const double> v);

/// Q = V + A - mean(A) for head = [V, A_0, ..., A_{K-1}].
std::vector<double> dueling_q(std::span<const double> head);

/// With probability eps a uniform action, else argmax(q).
int eps_greedy(std::span<const double> q, double eps, Rng& rng);

/// Network whose last layer has K + 1 linear units aggregated by dueling_q.
class DuelingQNet {
 public:
  DuelingQNet() = default;
  explicit DuelingQNet(nn::Mlp net);
  static DuelingQNet make(std::size_t state_dim, const std::vector<std::size_t>& hidden,
                          std::size_t n_actions, Rng& rng);

  std::size_t state_dim() const { return net_.input_dim(); }
  std::size_t n_actions() const { return net_.output_dim() - 1; }

  nn::Matrix q(const nn::Matrix& states, nn::Mlp::Cache* cache = nullptr) const;
  std::vector<double> q(std::span<const double> state) const;
  /// Parameter gradient of sum(d_q . Q).
  void backward(const nn::Mlp::Cache& cache, const nn::Matrix& d_q, std::vector<double>& grad) const;

  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }

 private:
  nn::Mlp net_;
};

/// Batched Q-values for a set of states.
using QBatchFn = std::function<nn::Matrix(const nn::Matrix& states)>;
/// Q-values of given actions, one per state row.
using QPickFn = std::function<std::vector<double>(const nn::Matrix& states, std::span<const int> actions)>;

/// y = r + gamma * Q_target(s', argmax_a Q_online(s', a)), bootstrapping on
/// every transition unless terminal_cutoff is set.
std::vector<double> d3qn_targets(std::span<const double> rewards, const nn::Matrix& next_states,
                                 std::span<const std::uint8_t> done, const QBatchFn& online,
                                 const QPickFn& target, double gamma, bool terminal_cutoff = false);

struct D3qnConfig {
  std::vector<std::size_t> hidden{512, 256, 128};
  double lr = 0.001;
  double gamma = 0.99;
  int sync_every = 500;
  double eps0 = 0.9;
  double eps_decay = 0.93;
  bool terminal_cutoff = false;

  void validate() const;
};

class D3qnAgent {
 public:
  D3qnAgent(std::size_t state_dim, std::size_t n_actions, const D3qnConfig& cfg, Rng& rng);
  D3qnAgent(DuelingQNet online, const D3qnConfig& cfg);

  int act(std::span<const double> state, Rng& rng) const;
  int greedy(std::span<const double> state) const;

  /// One Adam step on the mean-square TD error of the taken actions; syncs
  /// the target every sync_every updates. Returns the pre-step loss.
  double update(std::span<const DiscreteTransition* const> batch);
  void sync_target();
  void decay_epsilon() { epsilon_ *= cfg_.eps_decay; }

  const D3qnConfig& config() const { return cfg_; }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double e) { epsilon_ = e; }
  std::uint64_t updates() const { return updates_; }
  std::uint64_t syncs() const { return syncs_; }
  const DuelingQNet& online() const { return online_; }
  DuelingQNet& online() { return online_; }
  const DuelingQNet& target() const { return target_; }

  friend void to_json(nlohmann::json& j, const D3qnAgent& a);
  /// Loads into an agent of matching dimensions (DimensionError otherwise).
  void load(const nlohmann::json& j);

 private:
  D3qnConfig cfg_;
  DuelingQNet online_;
  DuelingQNet target_;
  nn::Adam opt_;
  double epsilon_;
  std::uint64_t updates_ = 0;
  std::uint64_t syncs_ = 0;
};

/// Interleaved re/im reals to a unit beam (first basis vector below 1e-9).
inline ComplexVec actor_to_beam(std::span<const double> raw) { return beam_from_real(raw); }

/// raw + N(0, sigma2) per component.
std::vector<double> explore(std::span<const double> raw, double sigma2, Rng& rng);

/// theta_target <- tau theta + (1 - tau) theta_target.
inline void polyak(nn::Mlp& target, const nn::Mlp& online, double tau) { target.soft_update(online, tau); }

struct DdpgConfig {
  std::vector<std::size_t> actor_hidden{512, 128};
  std::vector<std::size_t> critic_hidden{512, 128};
  double actor_lr = 0.001;
  double critic_lr = 0.002;
  double gamma = 0.99;
  double tau = 0.00005;
  double sigma2 = 1.0;
  double sigma_decay = 0.91;
  bool terminal_cutoff = false;

  void validate() const;
};

class DdpgAgent {
 public:
  /// Actor 2M+1 -> 2M (tanh), critic 4M+1 -> 1 (linear).
  DdpgAgent(std::size_t antennas, const DdpgConfig& cfg, Rng& rng);
  DdpgAgent(nn::Mlp actor, nn::Mlp critic, const DdpgConfig& cfg);

  std::size_t state_dim() const { return actor_.input_dim(); }
  std::size_t action_dim() const { return actor_.output_dim(); }

  std::vector<double> act(std::span<const double> state) const;
  std::vector<double> act_explore(std::span<const double> state, Rng& rng) const;

  /// Mean-square Bellman error step; returns the pre-step loss.
  double critic_update(std::span<const ContinuousTransition* const> batch);
  /// Ascent step on mean Q(s, mu(s)) over the actor only; returns that mean
  /// before the step.
  double actor_update(std::span<const ContinuousTransition* const> batch);
  /// Actor parameter gradient of -mean Q(s, mu(s)); mean Q goes to `mean_q`.
  std::vector<double> actor_gradient(std::span<const ContinuousTransition* const> batch,
                                     double* mean_q = nullptr) const;
  void soft_update_targets();
  void decay_sigma() { sigma2_ *= cfg_.sigma_decay; }

  const DdpgConfig& config() const { return cfg_; }
  double sigma2() const { return sigma2_; }
  void set_sigma2(double s) { sigma2_ = s; }
  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic() const { return critic_; }
  const nn::Mlp& actor_target() const { return actor_target_; }
  const nn::Mlp& critic_target() const { return critic_target_; }
  nn::Mlp& actor() { return actor_; }
  nn::Mlp& critic() { return critic_; }

  /// Critic input rows [s, a].
  static nn::Matrix join(const nn::Matrix& s, const nn::Matrix& a);

  friend void to_json(nlohmann::json& j, const DdpgAgent& a);
  void load(const nlohmann::json& j);

 private:
  DdpgConfig cfg_;
  nn::Mlp actor_;
  nn::Mlp critic_;
  nn::Mlp actor_target_;
  nn::Mlp critic_target_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
  double sigma2_;
};

}  // namespace uavnet
