#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "thinopt/env_map.hpp"
#include "thinopt/nnet.hpp"

namespace thinopt {

// The environment space is discretized to 100 cells of 0.01 per axis; every
// coordinate an agent can occupy is cell * 0.01 in [0, 0.99].
inline constexpr int kGridCells = 100;
inline constexpr double kGridStep = 0.01;

struct GridPoint {
    int x{0}, y{0}; // cells, each in [0, kGridCells)
    bool operator==(const GridPoint&) const = default;
};

// Positions of all L layers of a design (frozen layers included).
struct EnvState {
    std::vector<GridPoint> cells;

    EnvPoint point(int layer) const;  // cell * 0.01
    Eigen::VectorXd flatten() const;  // (x0, y0, x1, y1, ...), network input
    bool operator==(const EnvState&) const = default;
};

// A discrete action moves one movable layer by one grid cell. `slot` is the
// 1-based index into the task's movable-layer list; exactly one of dx, dy
// is +1 or -1.
struct ActionSpec {
    int slot{1};
    int dx{0}, dy{0};
    bool operator==(const ActionSpec&) const = default;
};

// Four moves per movable layer, 4*M entries total. Slots 1 and 2 cycle
// (+x, +y, -x, -y); slot 3 cycles (-x, -y, +x, +y); slot 4 cycles
// (-x, -y, +y, +x); slots beyond 4 reuse the slot-1 cycle.
std::vector<ActionSpec> build_action_table(int movable_layers);

// Index of `a` in `table`; throws InputError if absent. Inverse of indexing.
int encode_action(std::span<const ActionSpec> table, const ActionSpec& a);

// Applies the move to the addressed layer, clamping to the grid; all other
// layers are unchanged. `movable_layers` maps slots to layer indices.
EnvState apply_action(const EnvState& state, const ActionSpec& action,
                      std::span<const int> movable_layers);

// ---------------------------------------------------------------------------
// Rewards

enum class RewardCase { Success, Improvement, Stall, NoImprovement };
std::string_view to_string(RewardCase c);

struct RewardConfig {
    int stall_threshold = 20;          // consecutive non-improving steps
    double stall_penalty = -1.0;
    double no_improve_penalty = -0.01;
    double success_reward = 1.0;
    double success_merit_threshold = 0.0;
    double observation_scale = 1.0;    // improvement reward ceiling
    double discount = 0.99;            // gamma
    int n_steps = 8;                   // update segment length

    void validate() const;
};

struct RewardOutcome {
    double reward{0.0};
    RewardCase which{RewardCase::NoImprovement};
    bool terminal{false};
};

// Exactly one case fires, checked in this order:
//   success      new_merit <= success_merit_threshold        -> +1, terminal
//   improvement  new_merit <  prev_best_merit                -> observation_scale / (1 + observation_err)
//   stall        steps_since_improvement >= stall_threshold  -> -1, terminal
//   no-improve   otherwise                                   -> -0.01
// `steps_since_improvement` counts the current step under the no-improvement
// assumption (pass prior count + 1); the first two cases ignore it.
RewardOutcome compute_reward(double prev_best_merit, double new_merit,
                             int steps_since_improvement, const RewardConfig& cfg,
                             double observation_err);

// ---------------------------------------------------------------------------
// State evaluation (nearest material + memoized thickness optimization)

struct StateEvaluation {
    std::vector<int> materials;       // per layer, via nearest_material
    std::vector<double> thicknesses;  // optimizer's best, per layer
    double merit{0.0};
    double observation_error{0.0};
};

struct TupleResult {
    std::vector<double> thicknesses;
    double merit{0.0};
    double observation_error{0.0};
};

// Pure function of the material tuple (typically a seeded GA run).
using TupleMeritFn = std::function<TupleResult(const std::vector<int>&)>;

// Shared memo cache with get-or-compute semantics: at most one caller
// computes any given tuple; concurrent callers for the same tuple block on
// the in-flight result. Errors thrown by the compute function are cached and
// rethrown on every lookup of that tuple. Safe for unrestricted concurrent
// use; `map` must outlive the evaluator.
//
// `pinned`, when non-empty, holds one entry per layer; a set entry forces
// that layer's material regardless of its map position (frozen layers would
// otherwise be at the mercy of grid snapping).
class StateEvaluator {
  public:
    StateEvaluator(const EnvironmentMap& map, TupleMeritFn compute,
                   std::vector<std::optional<int>> pinned = {});

    StateEvaluation evaluate(const EnvState& state);

    // Nearest-material resolution (with pins applied); no cache interaction.
    std::vector<int> resolve(const EnvState& state) const;

    // Pre-loads a tuple; later evaluations return `value` without computing.
    void seed(const std::vector<int>& tuple, TupleResult value);

    std::uint64_t cache_hits() const { return hits_.load(); }
    std::uint64_t cache_misses() const { return misses_.load(); }

    // Best (lowest-merit) tuple seen so far; merit is +inf before the first.
    struct Best {
        std::vector<int> materials;
        std::vector<double> thicknesses;
        double merit{std::numeric_limits<double>::infinity()};
    };
    Best best() const;

  private:
    static void validate_result(const std::vector<int>& tuple, const TupleResult& r);
    void update_best(const std::vector<int>& tuple, const TupleResult& r); // mu_ held

    const EnvironmentMap& map_;
    TupleMeritFn compute_;
    std::vector<std::optional<int>> pinned_;
    mutable std::mutex mu_;
    std::map<std::vector<int>, std::shared_future<TupleResult>> cache_;
    Best best_;
    std::atomic<std::uint64_t> hits_{0}, misses_{0};
};

// ---------------------------------------------------------------------------
// Actor-critic networks

// actor: [state_dim, 32, 16, |A|], rectified-linear hidden, softmax output
// critic: [state_dim, 32, 16, 16, 1], rectified-linear hidden, linear output
struct ActorCritic {
    Mlp actor;
    Mlp critic;

    // Forward passes with the training-loop invariants asserted: policy sums
    // to 1 within 1e-9 with no negative entries; value is finite.
    Eigen::VectorXd policy(const Eigen::VectorXd& state) const;
    double value(const Eigen::VectorXd& state) const;
};

ActorCritic make_actor_critic(int state_dim, int action_count, std::mt19937_64& rng);

// Shared global parameter store. Workers take consistent snapshots and apply
// per-segment gradients atomically; the version counter increments once per
// applied update.
class GlobalParams {
  public:
    GlobalParams(int state_dim, int action_count, double learning_rate, std::uint64_t seed);

    ActorCritic snapshot() const;
    void apply(const Mlp::Gradients& actor_grads, const Mlp::Gradients& critic_grads);
    std::uint64_t version() const { return version_.load(); }

    int state_dim() const { return state_dim_; }
    int action_count() const { return action_count_; }
    double learning_rate() const { return learning_rate_; }

    // Versioned JSON checkpoint of both networks. Adaptive-moment optimizer
    // accumulators restart on load. (Returned by pointer: the store embeds
    // synchronization primitives and cannot move.)
    void save_checkpoint(const std::filesystem::path& path) const;
    static std::unique_ptr<GlobalParams> load_checkpoint(const std::filesystem::path& path);

  private:
    GlobalParams() = default;

    mutable std::mutex mu_;
    ActorCritic nets_;
    Adam actor_opt_, critic_opt_;
    int state_dim_{0}, action_count_{0};
    double learning_rate_{0.0};
    std::atomic<std::uint64_t> version_{0};
};

// ---------------------------------------------------------------------------
// n-step advantage updates

struct Transition {
    Eigen::VectorXd state;
    int action{0};
    double reward{0.0};
    Eigen::VectorXd next_state;
    bool terminal{false};
};

struct SegmentLosses {
    double actor_loss{0.0};  // -sum log pi(a|s) A  -  beta * sum H(pi)
    double critic_loss{0.0}; // sum (R - V)^2
    double entropy{0.0};     // sum H(pi)
};

// Returns R_t accumulate backward from `bootstrap_value` (0 when the last
// transition is terminal, else the critic's value of its next state).
// Advantages A_t = R_t - V(s_t) are constants with respect to the actor.
// Gradients, when requested, are summed over the segment into the given
// accumulators.
SegmentLosses a3c_losses_and_gradients(const ActorCritic& params,
                                       std::span<const Transition> trajectory,
                                       double bootstrap_value, double discount,
                                       double entropy_beta, Mlp::Gradients* actor_grads,
                                       Mlp::Gradients* critic_grads);

// Computes segment gradients at `local` and applies them to `global`.
// Throws TrainingError (reporting the trajectory) on non-finite losses,
// leaving `global` untouched.
SegmentLosses n_step_update(GlobalParams& global, const ActorCritic& local,
                            std::span<const Transition> trajectory, double bootstrap_value,
                            double discount, double entropy_beta);

// ---------------------------------------------------------------------------
// Training driver

struct A3cTask {
    int layer_count{0};
    // One entry per layer; a set entry pins that layer's position (its
    // material is never changed by the agent).
    std::vector<std::optional<GridPoint>> frozen;
    StateEvaluator* evaluator{nullptr};

    std::vector<int> movable_layers() const;
    void validate() const;
};

struct A3cConfig {
    int workers = 4;
    int episodes = 100;            // total across workers
    int max_episode_steps = 200;
    double learning_rate = 1e-4;
    double entropy_beta = 0.01;
    RewardConfig reward;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class TerminalReason { Success, Stall, StepCap, Error };
std::string_view to_string(TerminalReason r);

struct EpisodeSummary {
    int episode{0};
    int worker_id{0};
    int steps{0};
    TerminalReason terminal_reason{TerminalReason::StepCap};
    double episode_return{0.0};
    double best_merit_so_far{0.0};   // global best after the episode
    std::uint64_t cache_hits{0};     // cumulative, at episode end
    std::uint64_t cache_misses{0};
    std::uint64_t updates{0};        // gradient segments this episode
    std::string error;               // set when terminal_reason == Error
};

struct A3cResult {
    std::vector<EpisodeSummary> episodes;  // ordered by episode index
    StateEvaluator::Best best;
    std::uint64_t version{0};              // global update count at exit
};

// Runs cfg.episodes episodes spread over cfg.workers threads against the
// shared `global` store. Worker w draws all of its randomness (initial
// states, action sampling) from an independent stream seeded cfg.seed + w.
// Evaluation errors terminate the affected episode with a logged failure;
// other workers continue. Single-worker runs are fully deterministic.
A3cResult run_a3c(const A3cTask& task, const A3cConfig& cfg, GlobalParams& global);

// CSV, header "episode,worker_id,steps,terminal_reason,best_merit_so_far,
// cache_hits,cache_misses".
void write_training_log(const std::filesystem::path& path,
                        std::span<const EpisodeSummary> episodes);

} // namespace thinopt
