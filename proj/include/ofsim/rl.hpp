#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofsim/core_model.hpp"
#include "ofsim/rng.hpp"

namespace ofsim {

struct SystemState;  // defined in policy.hpp

// ─── State encoding ──────────────────────────────────────────────────────────

// Generation ranges the encoder normalizes against; taken from the scenario
// configuration, never from observed data.
struct NormBounds {
  double latency_min = 1e-3, latency_max = 1.0;     // seconds
  double complexity_min = 1e4, complexity_max = 1e9;  // FLOPs
  double data_size_min = 1e-3, data_size_max = 0.1;   // megabytes

  void validate() const;
};

// 7 features, each in [0,1]: log-scaled latency requirement, log-scaled
// complexity, privacy flag, data size, and the three queue utilizations.
using StateEncoding = std::array<double, 7>;

StateEncoding encode_state(const Task& task, const SystemState& state,
                           const NormBounds& norms);

// ─── Q-function ──────────────────────────────────────────────────────────────

// Fully connected 7-32-32-3 network, rectifier hidden units, identity output.
// One output per layer; all math is explicit so gradients can be checked
// against finite differences.
class QFunction {
 public:
  static constexpr int kInput = 7;
  static constexpr int kHidden1 = 32;
  static constexpr int kHidden2 = 32;
  static constexpr int kOutput = 3;

  // All parameters zero.
  QFunction();

  // He-style init: weights gaussian with stddev sqrt(2 / fan_in), biases zero.
  static QFunction he_init(Rng& rng);

  std::array<double, kOutput> forward(const StateEncoding& s) const;

  // Gradient of (forward(s)[action] - td_target)^2 w.r.t. every parameter,
  // same layout as params().
  std::vector<double> backward(const StateEncoding& s, Layer action,
                               double td_target) const;

  // In-place SGD step: params -= lr * grad.
  void apply_gradient(std::span<const double> grad, double learning_rate);

  std::span<const double> params() const { return params_; }
  std::span<double> params_mut() { return params_; }
  static std::size_t param_count();

  bool all_finite() const;

 private:
  // Layout: W1 [h1][in] row-major, b1, W2 [h2][h1], b2, W3 [out][h2], b3.
  std::vector<double> params_;
};

// ─── Experience replay ───────────────────────────────────────────────────────

struct Transition {
  StateEncoding state{};
  Layer action = Layer::Edge;
  double reward = 0.0;
  bool terminal = true;  // the bundled environments are one-shot
};

// Fixed-capacity ring; eviction is strictly oldest-first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t logical_index) const;  // 0 = oldest

  // Uniform with replacement.
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
  std::vector<Transition> slots_;
};

// ─── Acting and training ─────────────────────────────────────────────────────

// Epsilon-greedy: uniform layer with probability epsilon, otherwise the
// greedy argmax with ties toward the data source. Greedy calls (epsilon = 0)
// never consume randomness.
Layer act(const QFunction& qf, const StateEncoding& s, double epsilon, Rng& rng);

struct AgentConfig {
  int episodes = 1000;
  int tasks_per_episode = 32;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  // Episodes over which epsilon decays geometrically from start to end;
  // 0 means half of `episodes`.
  int epsilon_decay_episodes = 0;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int replay_capacity = 10000;
  // One-shot decisions make every transition terminal, so the TD target is
  // the immediate reward; the discount only matters for non-terminal
  // transitions fed from a custom environment.
  double discount = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double epsilon_at(int episode) const;
};

// Decision environment the trainer samples from: tasks, observed queue state,
// and realized per-placement rewards.
class TrainEnv {
 public:
  virtual ~TrainEnv() = default;
  virtual Task sample_task(Rng& rng) = 0;
  virtual std::array<double, 3> sample_queue_state(Rng& rng) = 0;
  virtual double realized_reward(const Task& task, Layer layer) const = 0;
  virtual const NormBounds& norms() const = 0;
};

// Trained agent plus everything needed to reproduce its encoding.
struct TrainedAgent {
  QFunction q;
  NormBounds norm_bounds;
  std::uint64_t seed = 0;
  std::uint32_t episodes = 0;

  Layer greedy_action(const StateEncoding& s) const;

  void save(const std::string& path) const;
  void save(std::ostream& out) const;
  static TrainedAgent load(const std::string& path);
  static TrainedAgent load(std::istream& in);
};

struct TrainResult {
  TrainedAgent agent;
  std::vector<double> episode_mean_reward;  // one entry per episode
};

// Thrown when a gradient step produces a non-finite parameter.
struct TrainingDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs the full epsilon-greedy replay training loop. Deterministic given
// cfg.seed and the environment's own draw behavior.
TrainResult train(TrainEnv& env, const AgentConfig& cfg);

}  // namespace ofsim
