#include "uavnet/agents.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uavnet {

int argmax(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<int>(best);
}

std::vector<double> dueling_q(std::span<const double> head) {
  if (head.size() < 2) throw DimensionError("dueling head needs a value and at least one advantage");
  const auto adv = head.subspan(1);
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  std::vector<double> q(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) q[i] = head[0] + adv[i] - mean;
  return q;
}

int eps_greedy(std::span<const double> q, double eps, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (q.empty()) throw std::invalid_argument("eps_greedy over no actions");
  if (rng.uniform() < eps) return static_cast<int>(rng.index(q.size()));
  return argmax(q);
}

DuelingQNet::DuelingQNet(nn::Mlp net) : net_(std::move(net)) {
  if (net_.output_dim() < 2) throw DimensionError("dueling network needs K + 1 >= 2 outputs");
}

DuelingQNet DuelingQNet::make(std::size_t state_dim, const std::vector<std::size_t>& hidden,
                              std::size_t n_actions, Rng& rng) {
  auto net = nn::Mlp::make(state_dim, hidden, n_actions + 1, nn::Activation::Relu,
                           nn::Activation::Linear);
  net.init_glorot(rng);
  return DuelingQNet(std::move(net));
}

nn::Matrix DuelingQNet::q(const nn::Matrix& states, nn::Mlp::Cache* cache) const {
  const auto head = net_.forward(states, cache);
  nn::Matrix out(head.rows, head.cols - 1);
  for (std::size_t r = 0; r < head.rows; ++r) {
    const auto q = dueling_q(head.row(r));
    std::copy(q.begin(), q.end(), out.row(r).begin());
  }
  return out;
}

std::vector<double> DuelingQNet::q(std::span<const double> state) const {
  return q(nn::Matrix::row_vector(state)).data;
}

void DuelingQNet::backward(const nn::Mlp::Cache& cache, const nn::Matrix& d_q,
                           std::vector<double>& grad) const {
  const std::size_t k = n_actions();
  if (d_q.cols != k) throw DimensionError("Q gradient width does not match the action count");
  nn::Matrix d_head(d_q.rows, k + 1);
  for (std::size_t r = 0; r < d_q.rows; ++r) {
    const auto g = d_q.row(r);
    double sum = 0.0;
    for (double v : g) sum += v;
    const double mean = sum / static_cast<double>(k);
    d_head(r, 0) = sum;
    for (std::size_t i = 0; i < k; ++i) d_head(r, i + 1) = g[i] - mean;
  }
  net_.backward(cache, d_head, grad);
}

std::vector<double> d3qn_targets(std::span<const double> rewards, const nn::Matrix& next_states,
                                 std::span<const std::uint8_t> done, const QBatchFn& online,
                                 const QPickFn& target, double gamma, bool terminal_cutoff) {
  if (rewards.empty()) throw std::invalid_argument("empty D3QN batch");
  if (next_states.rows != rewards.size() || (!done.empty() && done.size() != rewards.size()))
    throw DimensionError("D3QN batch components differ in length");
  const auto q_online = online(next_states);
  std::vector<int> actions(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) actions[i] = argmax(q_online.row(i));
  const auto q_target = target(next_states, actions);
  std::vector<double> y(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const bool cut = terminal_cutoff && !done.empty() && done[i];
    y[i] = rewards[i] + (cut ? 0.0 : gamma * q_target[i]);
  }
  return y;
}

void D3qnConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("D3QN learning rate must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("discount factor must lie in [0, 1]");
  if (sync_every < 1) throw ConfigError("target sync period must be >= 1");
  if (!(eps0 >= 0.0 && eps0 <= 1.0)) throw ConfigError("initial epsilon must lie in [0, 1]");
  if (!(eps_decay > 0.0 && eps_decay <= 1.0)) throw ConfigError("epsilon decay must lie in (0, 1]");
}

D3qnAgent::D3qnAgent(std::size_t state_dim, std::size_t n_actions, const D3qnConfig& cfg, Rng& rng)
    : D3qnAgent(DuelingQNet::make(state_dim, cfg.hidden, n_actions, rng), cfg) {}

D3qnAgent::D3qnAgent(DuelingQNet online, const D3qnConfig& cfg)
    : cfg_(cfg), online_(std::move(online)), target_(online_),
      opt_(online_.net().param_count(), cfg.lr), epsilon_(cfg.eps0) {
  cfg_.validate();
}

int D3qnAgent::act(std::span<const double> state, Rng& rng) const {
  return eps_greedy(online_.q(state), epsilon_, rng);
}

int D3qnAgent::greedy(std::span<const double> state) const { return argmax(online_.q(state)); }

namespace {

template <class T>
nn::Matrix stack(std::span<const T* const> batch, std::size_t dim,
                 const std::function<const std::vector<double>&(const T&)>& get) {
  nn::Matrix m(batch.size(), dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& v = get(*batch[i]);
    if (v.size() != dim) throw DimensionError("transition width does not match the network input");
    std::copy(v.begin(), v.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace

double D3qnAgent::update(std::span<const DiscreteTransition* const> batch) {
  if (batch.empty()) throw std::invalid_argument("empty D3QN batch");
  const std::size_t dim = online_.state_dim();
  const std::size_t n = batch.size();
  const auto s = stack<DiscreteTransition>(batch, dim, [](const auto& t) -> const auto& { return *t.s; });
  const auto s2 =
      stack<DiscreteTransition>(batch, dim, [](const auto& t) -> const auto& { return *t.s_next; });
  std::vector<double> r(n);
  std::vector<std::uint8_t> done(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = batch[i]->r;
    done[i] = batch[i]->done ? 1 : 0;
  }
  const auto y = d3qn_targets(
      r, s2, done, [&](const nn::Matrix& m) { return online_.q(m); },
      [&](const nn::Matrix& m, std::span<const int> acts) {
        const auto q = target_.q(m);
        std::vector<double> out(acts.size());
        for (std::size_t i = 0; i < acts.size(); ++i) out[i] = q(i, static_cast<std::size_t>(acts[i]));
        return out;
      },
      cfg_.gamma, cfg_.terminal_cutoff);

  nn::Mlp::Cache cache;
  const auto q = online_.q(s, &cache);
  nn::Matrix d_q(n, q.cols);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<std::size_t>(batch[i]->a);
    if (a >= q.cols) throw std::out_of_range("transition action outside the action set");
    const double e = q(i, a) - y[i];
    loss += e * e;
    d_q(i, a) = 2.0 * e / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  std::vector<double> grad;
  online_.backward(cache, d_q, grad);
  opt_.step(online_.net().mutable_params(), grad);
  ++updates_;
  if (updates_ % static_cast<std::uint64_t>(cfg_.sync_every) == 0) sync_target();
  return loss;
}

void D3qnAgent::sync_target() {
  target_.net().copy_params(online_.net());
  ++syncs_;
}

void to_json(nlohmann::json& j, const D3qnAgent& a) {
  j = {{"online", a.online_.net()}, {"target", a.target_.net()}, {"optimizer", a.opt_},
       {"epsilon", a.epsilon_},     {"updates", a.updates_},     {"syncs", a.syncs_}};
}

void D3qnAgent::load(const nlohmann::json& j) {
  try {
    auto online = j.at("online").get<nn::Mlp>();
    auto target = j.at("target").get<nn::Mlp>();
    if (!online.same_shape(online_.net()) || !target.same_shape(online_.net()))
      throw DimensionError("D3QN checkpoint has a different architecture (state " +
                           std::to_string(online.input_dim()) + " x actions " +
                           std::to_string(online.output_dim() - 1) + ")");
    auto opt = j.at("optimizer").get<nn::Adam>();
    if (opt.size() != online.param_count()) throw DimensionError("D3QN optimizer state size mismatch");
    online_.net() = std::move(online);
    target_.net() = std::move(target);
    opt_ = std::move(opt);
    epsilon_ = j.at("epsilon").get<double>();
    updates_ = j.at("updates").get<std::uint64_t>();
    syncs_ = j.at("syncs").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed D3QN checkpoint: ") + e.what());
  }
}

std::vector<double> explore(std::span<const double> raw, double sigma2, Rng& rng) {
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("noise variance must be non-negative");
  std::vector<double> out(raw.begin(), raw.end());
  if (sigma2 == 0.0) return out;
  const double sd = std::sqrt(sigma2);
  for (auto& v : out) v += sd * rng.normal();
  return out;
}

void DdpgConfig::validate() const {
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("DDPG learning rates must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("discount factor must lie in [0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("soft update rate must lie in [0, 1]");
  if (!(sigma2 >= 0.0)) throw ConfigError("exploration variance must be non-negative");
  if (!(sigma_decay > 0.0 && sigma_decay <= 1.0)) throw ConfigError("noise decay must lie in (0, 1]");
}

DdpgAgent::DdpgAgent(std::size_t antennas, const DdpgConfig& cfg, Rng& rng)
    : DdpgAgent(nn::Mlp::make(2 * antennas + 1, cfg.actor_hidden, 2 * antennas, nn::Activation::Relu,
                              nn::Activation::Tanh),
                nn::Mlp::make(4 * antennas + 1, cfg.critic_hidden, 1, nn::Activation::Relu,
                              nn::Activation::Linear),
                cfg) {
  actor_.init_glorot(rng);
  critic_.init_glorot(rng);
  actor_target_.copy_params(actor_);
  critic_target_.copy_params(critic_);
}

DdpgAgent::DdpgAgent(nn::Mlp actor, nn::Mlp critic, const DdpgConfig& cfg)
    : cfg_(cfg), actor_(std::move(actor)), critic_(std::move(critic)), actor_target_(actor_),
      critic_target_(critic_), actor_opt_(actor_.param_count(), cfg.actor_lr),
      critic_opt_(critic_.param_count(), cfg.critic_lr), sigma2_(cfg.sigma2) {
  cfg_.validate();
  if (critic_.input_dim() != actor_.input_dim() + actor_.output_dim() || critic_.output_dim() != 1)
    throw DimensionError("critic input must be state plus action and its output a scalar");
}

std::vector<double> DdpgAgent::act(std::span<const double> state) const { return actor_.forward(state); }

std::vector<double> DdpgAgent::act_explore(std::span<const double> state, Rng& rng) const {
  return explore(act(state), sigma2_, rng);
}

nn::Matrix DdpgAgent::join(const nn::Matrix& s, const nn::Matrix& a) {
  if (s.rows != a.rows) throw DimensionError("state and action batches differ in length");
  nn::Matrix m(s.rows, s.cols + a.cols);
  for (std::size_t r = 0; r < s.rows; ++r) {
    auto row = m.row(r);
    std::copy(s.row(r).begin(), s.row(r).end(), row.begin());
    std::copy(a.row(r).begin(), a.row(r).end(), row.begin() + static_cast<std::ptrdiff_t>(s.cols));
  }
  return m;
}

double DdpgAgent::critic_update(std::span<const ContinuousTransition* const> batch) {
  if (batch.empty()) throw std::invalid_argument("empty DDPG batch");
  const std::size_t n = batch.size();
  const auto s = stack<ContinuousTransition>(batch, state_dim(), [](const auto& t) -> const auto& { return t.s; });
  const auto a = stack<ContinuousTransition>(batch, action_dim(), [](const auto& t) -> const auto& { return t.a; });
  const auto s2 =
      stack<ContinuousTransition>(batch, state_dim(), [](const auto& t) -> const auto& { return t.s_next; });
  const auto q_next = critic_target_.forward(join(s2, actor_target_.forward(s2)));
  nn::Matrix y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const bool cut = cfg_.terminal_cutoff && batch[i]->done;
    y(i, 0) = batch[i]->r + (cut ? 0.0 : cfg_.gamma * q_next(i, 0));
  }
  nn::Mlp::Cache cache;
  nn::Matrix d_q;
  const double loss = nn::mse(critic_.forward(join(s, a), &cache), y, &d_q);
  std::vector<double> grad;
  critic_.backward(cache, d_q, grad);
  critic_opt_.step(critic_.mutable_params(), grad);
  return loss;
}

std::vector<double> DdpgAgent::actor_gradient(std::span<const ContinuousTransition* const> batch,
                                              double* mean_q) const {
  if (batch.empty()) throw std::invalid_argument("empty DDPG batch");
  const std::size_t n = batch.size();
  const auto s = stack<ContinuousTransition>(batch, state_dim(), [](const auto& t) -> const auto& { return t.s; });
  nn::Mlp::Cache actor_cache;
  const auto a = actor_.forward(s, &actor_cache);
  nn::Mlp::Cache critic_cache;
  const auto q = critic_.forward(join(s, a), &critic_cache);
  if (mean_q) {
    double m = 0.0;
    for (double v : q.data) m += v;
    *mean_q = m / static_cast<double>(n);
  }

  nn::Matrix d_q(n, 1, -1.0 / static_cast<double>(n));
  std::vector<double> critic_grad;
  const auto d_in = critic_.backward(critic_cache, d_q, critic_grad);
  nn::Matrix d_a(n, action_dim());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < action_dim(); ++c) d_a(r, c) = d_in(r, state_dim() + c);
  std::vector<double> grad;
  actor_.backward(actor_cache, d_a, grad);
  return grad;
}

double DdpgAgent::actor_update(std::span<const ContinuousTransition* const> batch) {
  double mean_q = 0.0;
  const auto grad = actor_gradient(batch, &mean_q);
  actor_opt_.step(actor_.mutable_params(), grad);
  return mean_q;
}

void DdpgAgent::soft_update_targets() {
  polyak(actor_target_, actor_, cfg_.tau);
  polyak(critic_target_, critic_, cfg_.tau);
}

void to_json(nlohmann::json& j, const DdpgAgent& a) {
  j = {{"actor", a.actor_},
       {"critic", a.critic_},
       {"actor_target", a.actor_target_},
       {"critic_target", a.critic_target_},
       {"actor_optimizer", a.actor_opt_},
       {"critic_optimizer", a.critic_opt_},
       {"sigma2", a.sigma2_}};
}

void DdpgAgent::load(const nlohmann::json& j) {
  try {
    auto actor = j.at("actor").get<nn::Mlp>();
    auto critic = j.at("critic").get<nn::Mlp>();
    auto actor_t = j.at("actor_target").get<nn::Mlp>();
    auto critic_t = j.at("critic_target").get<nn::Mlp>();
    if (!actor.same_shape(actor_) || !actor_t.same_shape(actor_) || !critic.same_shape(critic_) ||
        !critic_t.same_shape(critic_))
      throw DimensionError("DDPG checkpoint has a different architecture (actor input " +
                           std::to_string(actor.input_dim()) + ", expected " +
                           std::to_string(actor_.input_dim()) + ")");
    auto ao = j.at("actor_optimizer").get<nn::Adam>();
    auto co = j.at("critic_optimizer").get<nn::Adam>();
    if (ao.size() != actor.param_count() || co.size() != critic.param_count())
      throw DimensionError("DDPG optimizer state size mismatch");
    actor_ = std::move(actor);
    critic_ = std::move(critic);
    actor_target_ = std::move(actor_t);
    critic_target_ = std::move(critic_t);
    actor_opt_ = std::move(ao);
    critic_opt_ = std::move(co);
    sigma2_ = j.at("sigma2").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed DDPG checkpoint: ") + e.what());
  }
}

}  // namespace uavnet
