#include "ofsim/rl.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "ofsim/policy.hpp"

namespace ofsim {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double log_norm(double x, double lo, double hi) {
  x = std::clamp(x, lo, hi);
  return (std::log(x) - std::log(lo)) / (std::log(hi) - std::log(lo));
}

double lin_norm(double x, double lo, double hi) {
  x = std::clamp(x, lo, hi);
  return (x - lo) / (hi - lo);
}

// Parameter block offsets, in doubles.
constexpr int kW1 = 0;
constexpr int kB1 = kW1 + QFunction::kHidden1 * QFunction::kInput;
constexpr int kW2 = kB1 + QFunction::kHidden1;
constexpr int kB2 = kW2 + QFunction::kHidden2 * QFunction::kHidden1;
constexpr int kW3 = kB2 + QFunction::kHidden2;
constexpr int kB3 = kW3 + QFunction::kOutput * QFunction::kHidden2;
constexpr int kParamCount = kB3 + QFunction::kOutput;

struct ForwardTrace {
  std::array<double, QFunction::kHidden1> z1{}, h1{};
  std::array<double, QFunction::kHidden2> z2{}, h2{};
  std::array<double, QFunction::kOutput> q{};
};

ForwardTrace run_forward(std::span<const double> p, const StateEncoding& s) {
  ForwardTrace t;
  for (int j = 0; j < QFunction::kHidden1; ++j) {
    double z = p[kB1 + j];
    const double* row = &p[kW1 + j * QFunction::kInput];
    for (int i = 0; i < QFunction::kInput; ++i) z += row[i] * s[i];
    t.z1[j] = z;
    t.h1[j] = z > 0.0 ? z : 0.0;
  }
  for (int k = 0; k < QFunction::kHidden2; ++k) {
    double z = p[kB2 + k];
    const double* row = &p[kW2 + k * QFunction::kHidden1];
    for (int j = 0; j < QFunction::kHidden1; ++j) z += row[j] * t.h1[j];
    t.z2[k] = z;
    t.h2[k] = z > 0.0 ? z : 0.0;
  }
  for (int o = 0; o < QFunction::kOutput; ++o) {
    double z = p[kB3 + o];
    const double* row = &p[kW3 + o * QFunction::kHidden2];
    for (int k = 0; k < QFunction::kHidden2; ++k) z += row[k] * t.h2[k];
    t.q[o] = z;
  }
  return t;
}

// Accumulates d/dparams of (q[action] - td_target)^2 into grad.
void accumulate_backward(std::span<const double> p, const StateEncoding& s, Layer action,
                         double td_target, std::span<double> grad) {
  const ForwardTrace t = run_forward(p, s);
  const int a = layer_index(action);
  const double dq = 2.0 * (t.q[a] - td_target);

  // Output layer: only the selected head carries gradient.
  std::array<double, QFunction::kHidden2> dh2{};
  grad[kB3 + a] += dq;
  {
    const double* w3row = &p[kW3 + a * QFunction::kHidden2];
    double* g3row = &grad[kW3 + a * QFunction::kHidden2];
    for (int k = 0; k < QFunction::kHidden2; ++k) {
      g3row[k] += dq * t.h2[k];
      dh2[k] = dq * w3row[k];
    }
  }

  std::array<double, QFunction::kHidden1> dh1{};
  for (int k = 0; k < QFunction::kHidden2; ++k) {
    const double dz2 = t.z2[k] > 0.0 ? dh2[k] : 0.0;
    if (dz2 == 0.0) continue;
    grad[kB2 + k] += dz2;
    const double* w2row = &p[kW2 + k * QFunction::kHidden1];
    double* g2row = &grad[kW2 + k * QFunction::kHidden1];
    for (int j = 0; j < QFunction::kHidden1; ++j) {
      g2row[j] += dz2 * t.h1[j];
      dh1[j] += dz2 * w2row[j];
    }
  }

  for (int j = 0; j < QFunction::kHidden1; ++j) {
    const double dz1 = t.z1[j] > 0.0 ? dh1[j] : 0.0;
    if (dz1 == 0.0) continue;
    grad[kB1 + j] += dz1;
    double* g1row = &grad[kW1 + j * QFunction::kInput];
    for (int i = 0; i < QFunction::kInput; ++i) g1row[i] += dz1 * s[i];
  }
}

// ── Little-endian binary IO ──

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("agent file: truncated");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw std::runtime_error("agent file: truncated");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

constexpr char kMagic[4] = {'O', 'F', 'Q', 'A'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

// ─── NormBounds / encoding ───────────────────────────────────────────────────

void NormBounds::validate() const {
  auto check = [](double lo, double hi, const char* what) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && hi > lo)) {
      throw std::invalid_argument(std::string("norm bounds: need 0 < min < max for ") + what);
    }
  };
  check(latency_min, latency_max, "latency");
  check(complexity_min, complexity_max, "complexity");
  check(data_size_min, data_size_max, "data size");
}

StateEncoding encode_state(const Task& task, const SystemState& state,
                           const NormBounds& norms) {
  return StateEncoding{
      log_norm(task.latency_req, norms.latency_min, norms.latency_max),
      log_norm(task.complexity, norms.complexity_min, norms.complexity_max),
      static_cast<double>(task.privacy),
      lin_norm(task.data_size, norms.data_size_min, norms.data_size_max),
      clamp01(state.queue_utilization[0]),
      clamp01(state.queue_utilization[1]),
      clamp01(state.queue_utilization[2]),
  };
}

// ─── QFunction ───────────────────────────────────────────────────────────────

QFunction::QFunction() : params_(kParamCount, 0.0) {}

std::size_t QFunction::param_count() { return kParamCount; }

QFunction QFunction::he_init(Rng& rng) {
  QFunction qf;
  auto fill = [&rng, &qf](int offset, int count, int fan_in) {
    const double stddev = std::sqrt(2.0 / fan_in);
    for (int i = 0; i < count; ++i) qf.params_[offset + i] = stddev * rng.gaussian();
  };
  fill(kW1, kHidden1 * kInput, kInput);
  fill(kW2, kHidden2 * kHidden1, kHidden1);
  fill(kW3, kOutput * kHidden2, kHidden2);
  return qf;
}

std::array<double, QFunction::kOutput> QFunction::forward(const StateEncoding& s) const {
  return run_forward(params_, s).q;
}

std::vector<double> QFunction::backward(const StateEncoding& s, Layer action,
                                        double td_target) const {
  std::vector<double> grad(kParamCount, 0.0);
  accumulate_backward(params_, s, action, td_target, grad);
  return grad;
}

void QFunction::apply_gradient(std::span<const double> grad, double learning_rate) {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("apply_gradient: size mismatch");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= learning_rate * grad[i];
}

bool QFunction::all_finite() const {
  for (double v : params_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// ─── Replay buffer ───────────────────────────────────────────────────────────

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity), slots_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
}

void ReplayBuffer::push(const Transition& t) {
  slots_[head_] = t;
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

const Transition& ReplayBuffer::at(std::size_t logical_index) const {
  if (logical_index >= size_) throw std::out_of_range("replay index");
  const std::size_t oldest = (head_ + capacity_ - size_) % capacity_;
  return slots_[(oldest + logical_index) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("sampling an empty replay buffer");
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    out.push_back(at(static_cast<std::size_t>(rng.uniform_int(static_cast<int>(size_)))));
  }
  return out;
}

// ─── Acting ──────────────────────────────────────────────────────────────────

Layer act(const QFunction& qf, const StateEncoding& s, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("act: epsilon must be in [0, 1]");
  }
  if (epsilon > 0.0 && rng.uniform01() < epsilon) {
    return static_cast<Layer>(rng.uniform_int(3));
  }
  return argmax_layer(qf.forward(s));
}

// ─── Config / schedule ───────────────────────────────────────────────────────

void AgentConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("agent.episodes must be >= 1");
  if (tasks_per_episode < 1) throw std::invalid_argument("agent.tasks_per_episode must be >= 1");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) {
    throw std::invalid_argument("agent.epsilon_start must be in [0, 1]");
  }
  if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start)) {
    throw std::invalid_argument("agent.epsilon_end must be in [0, epsilon_start]");
  }
  if (epsilon_decay_episodes < 0) {
    throw std::invalid_argument("agent.epsilon_decay_episodes must be >= 0");
  }
  // learning_rate 0 is allowed: it gives the no-update baseline used in tests.
  if (!(std::isfinite(learning_rate) && learning_rate >= 0.0)) {
    throw std::invalid_argument("agent.learning_rate must be >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("agent.batch_size must be >= 1");
  if (replay_capacity < batch_size) {
    throw std::invalid_argument("agent.replay_capacity must be >= batch_size");
  }
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw std::invalid_argument("agent.discount must be in [0, 1)");
  }
}

double AgentConfig::epsilon_at(int episode) const {
  const int decay = epsilon_decay_episodes > 0 ? epsilon_decay_episodes
                                               : std::max(1, episodes / 2);
  if (epsilon_start <= epsilon_end) return epsilon_end;
  const double frac = std::min(1.0, static_cast<double>(episode) / decay);
  const double floor_eps = std::max(epsilon_end, 1e-6);
  const double eps = epsilon_start * std::pow(floor_eps / epsilon_start, frac);
  return std::max(epsilon_end, eps);
}

// ─── Training ────────────────────────────────────────────────────────────────

Layer TrainedAgent::greedy_action(const StateEncoding& s) const {
  return argmax_layer(q.forward(s));
}

TrainResult train(TrainEnv& env, const AgentConfig& cfg) {
  cfg.validate();
  env.norms().validate();

  Rng rng(cfg.seed);
  QFunction qf = QFunction::he_init(rng);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.replay_capacity));
  std::vector<double> grad(QFunction::param_count(), 0.0);
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.episodes));

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double epsilon = cfg.epsilon_at(ep);
    double reward_sum = 0.0;
    for (int step = 0; step < cfg.tasks_per_episode; ++step) {
      const Task task = env.sample_task(rng);
      SystemState state;
      state.queue_utilization = env.sample_queue_state(rng);
      const StateEncoding s = encode_state(task, state, env.norms());
      const Layer action = act(qf, s, epsilon, rng);
      const double r = env.realized_reward(task, action);
      buffer.push(Transition{s, action, r, true});
      reward_sum += r;

      if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (const Transition& tr : batch) {
          // Terminal transitions do not bootstrap; the bundled environments
          // only produce terminal ones, so the target is the raw reward.
          const double target = tr.reward;
          accumulate_backward(qf.params(), tr.state, tr.action, target, grad);
        }
        const double scale = 1.0 / static_cast<double>(batch.size());
        for (double& g : grad) g *= scale;
        qf.apply_gradient(grad, cfg.learning_rate);
        if (!qf.all_finite()) {
          throw TrainingDivergence(
              "training diverged: non-finite parameter after episode " +
              std::to_string(ep) + " (signals learning-rate misconfiguration)");
        }
      }
    }
    curve.push_back(reward_sum / cfg.tasks_per_episode);
  }

  TrainResult result{
      TrainedAgent{std::move(qf), env.norms(), cfg.seed, static_cast<std::uint32_t>(cfg.episodes)},
      std::move(curve)};
  return result;
}

// ─── Agent serialization ─────────────────────────────────────────────────────

void TrainedAgent::save(std::ostream& out) const {
  out.write(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u32(out, 4);
  for (std::uint32_t d : {QFunction::kInput, QFunction::kHidden1, QFunction::kHidden2,
                          QFunction::kOutput}) {
    put_u32(out, d);
  }
  for (double b : {norm_bounds.latency_min, norm_bounds.latency_max,
                   norm_bounds.complexity_min, norm_bounds.complexity_max,
                   norm_bounds.data_size_min, norm_bounds.data_size_max}) {
    put_f64(out, b);
  }
  put_u64(out, seed);
  put_u32(out, episodes);
  put_u64(out, q.params().size());
  for (double p : q.params()) put_f64(out, p);
  if (!out) throw std::runtime_error("agent file: write failed");
}

void TrainedAgent::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("agent file: cannot open for writing: " + path);
  save(out);
}

TrainedAgent TrainedAgent::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("agent file: bad magic (not an agent file)");
  }
  if (const auto version = get_u32(in); version != kFormatVersion) {
    throw std::runtime_error("agent file: unsupported version " + std::to_string(version));
  }
  if (get_u32(in) != 4) throw std::runtime_error("agent file: unexpected layer count");
  const std::uint32_t expect[4] = {QFunction::kInput, QFunction::kHidden1,
                                   QFunction::kHidden2, QFunction::kOutput};
  for (std::uint32_t e : expect) {
    if (get_u32(in) != e) throw std::runtime_error("agent file: architecture mismatch");
  }
  TrainedAgent agent;
  agent.norm_bounds.latency_min = get_f64(in);
  agent.norm_bounds.latency_max = get_f64(in);
  agent.norm_bounds.complexity_min = get_f64(in);
  agent.norm_bounds.complexity_max = get_f64(in);
  agent.norm_bounds.data_size_min = get_f64(in);
  agent.norm_bounds.data_size_max = get_f64(in);
  agent.norm_bounds.validate();
  agent.seed = get_u64(in);
  agent.episodes = get_u32(in);
  const std::uint64_t count = get_u64(in);
  if (count != QFunction::param_count()) {
    throw std::runtime_error("agent file: parameter count mismatch");
  }
  auto params = agent.q.params_mut();
  for (std::uint64_t i = 0; i < count; ++i) {
    params[i] = get_f64(in);
    if (!std::isfinite(params[i])) {
      throw std::runtime_error("agent file: non-finite parameter");
    }
  }
  return agent;
}

TrainedAgent TrainedAgent::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("agent file: cannot open: " + path);
  return load(in);
}

}  // namespace ofsim
