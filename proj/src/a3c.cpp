#include "thinopt/a3c.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "thinopt/errors.hpp"

namespace thinopt {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

EnvPoint EnvState::point(int layer) const {
    if (layer < 0 || layer >= static_cast<int>(cells.size()))
        throw InputError("layer index out of range");
    return {cells[layer].x * kGridStep, cells[layer].y * kGridStep};
}

Eigen::VectorXd EnvState::flatten() const {
    Eigen::VectorXd x(2 * cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        x(2 * i) = cells[i].x * kGridStep;
        x(2 * i + 1) = cells[i].y * kGridStep;
    }
    return x;
}

std::vector<ActionSpec> build_action_table(int movable_layers) {
    if (movable_layers < 1) throw InputError("action table needs at least one movable layer");
    // Per-slot move cycles, as (dx, dy) cell deltas.
    static constexpr int kCycleA[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}}; // slots 1, 2, 5+
    static constexpr int kCycleB[4][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1}}; // slot 3
    static constexpr int kCycleC[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}}; // slot 4
    std::vector<ActionSpec> table;
    table.reserve(4 * static_cast<std::size_t>(movable_layers));
    for (int slot = 1; slot <= movable_layers; ++slot) {
        const auto& cycle = slot == 3 ? kCycleB : slot == 4 ? kCycleC : kCycleA;
        for (int k = 0; k < 4; ++k) table.push_back({slot, cycle[k][0], cycle[k][1]});
    }
    return table;
}

int encode_action(std::span<const ActionSpec> table, const ActionSpec& a) {
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table[i] == a) return static_cast<int>(i);
    throw InputError("action not present in the action table");
}

EnvState apply_action(const EnvState& state, const ActionSpec& action,
                      std::span<const int> movable_layers) {
    if (action.slot < 1 || action.slot > static_cast<int>(movable_layers.size()))
        throw InputError("action slot out of range");
    const int layer = movable_layers[action.slot - 1];
    if (layer < 0 || layer >= static_cast<int>(state.cells.size()))
        throw InputError("movable layer index out of range");
    EnvState next = state;
    GridPoint& cell = next.cells[layer];
    cell.x = std::clamp(cell.x + action.dx, 0, kGridCells - 1);
    cell.y = std::clamp(cell.y + action.dy, 0, kGridCells - 1);
    return next;
}

// ---------------------------------------------------------------------------
// Rewards

std::string_view to_string(RewardCase c) {
    switch (c) {
        case RewardCase::Success: return "success";
        case RewardCase::Improvement: return "improvement";
        case RewardCase::Stall: return "stall";
        default: return "no_improvement";
    }
}

void RewardConfig::validate() const {
    if (stall_threshold < 1) throw InputError("stall threshold must be positive");
    if (!(success_merit_threshold >= 0.0))
        throw InputError("success merit threshold must be non-negative");
    if (!(observation_scale > 0.0)) throw InputError("observation scale must be positive");
    if (!(discount > 0.0 && discount <= 1.0)) throw InputError("discount must lie in (0, 1]");
    if (n_steps < 1) throw InputError("n_steps must be positive");
}

RewardOutcome compute_reward(double prev_best_merit, double new_merit,
                             int steps_since_improvement, const RewardConfig& cfg,
                             double observation_err) {
    if (!(new_merit >= 0.0) || !(prev_best_merit >= 0.0))
        throw InputError("merits must be non-negative");
    if (new_merit <= cfg.success_merit_threshold)
        return {cfg.success_reward, RewardCase::Success, true};
    if (new_merit < prev_best_merit) {
        if (!(observation_err >= 0.0)) throw InputError("observation error must be non-negative");
        return {cfg.observation_scale / (1.0 + observation_err), RewardCase::Improvement, false};
    }
    if (steps_since_improvement >= cfg.stall_threshold)
        return {cfg.stall_penalty, RewardCase::Stall, true};
    return {cfg.no_improve_penalty, RewardCase::NoImprovement, false};
}

// ---------------------------------------------------------------------------
// State evaluation

StateEvaluator::StateEvaluator(const EnvironmentMap& map, TupleMeritFn compute,
                               std::vector<std::optional<int>> pinned)
    : map_(map), compute_(std::move(compute)), pinned_(std::move(pinned)) {
    if (!compute_) throw InputError("state evaluator needs a tuple merit function");
    for (const auto& pin : pinned_)
        if (pin && (*pin < 0 || *pin >= static_cast<int>(map_.size())))
            throw InputError("pinned material id outside the environment map");
}

std::vector<int> StateEvaluator::resolve(const EnvState& state) const {
    if (!pinned_.empty() && pinned_.size() != state.cells.size())
        throw InputError("pinned-layer list does not match the state's layer count");
    std::vector<int> tuple(state.cells.size());
    for (std::size_t i = 0; i < state.cells.size(); ++i)
        tuple[i] = !pinned_.empty() && pinned_[i]
                       ? *pinned_[i]
                       : map_.nearest_material(state.point(static_cast<int>(i)));
    return tuple;
}

void StateEvaluator::validate_result(const std::vector<int>& tuple, const TupleResult& r) {
    if (r.thicknesses.size() != tuple.size())
        throw TrainingError("tuple evaluation returned a thickness count mismatching the stack");
    if (!std::isfinite(r.merit) || r.merit < 0.0)
        throw TrainingError("tuple evaluation returned an invalid merit");
}

void StateEvaluator::update_best(const std::vector<int>& tuple, const TupleResult& r) {
    if (r.merit < best_.merit) {
        best_.materials = tuple;
        best_.thicknesses = r.thicknesses;
        best_.merit = r.merit;
    }
}

StateEvaluation StateEvaluator::evaluate(const EnvState& state) {
    const std::vector<int> tuple = resolve(state);
    std::shared_future<TupleResult> fut;
    std::promise<TupleResult> prom;
    bool creator = false;
    {
        std::lock_guard lock(mu_);
        if (auto it = cache_.find(tuple); it != cache_.end()) {
            fut = it->second;
            hits_.fetch_add(1);
        } else {
            fut = prom.get_future().share();
            cache_.emplace(tuple, fut);
            misses_.fetch_add(1);
            creator = true;
        }
    }
    if (creator) {
        try {
            TupleResult r = compute_(tuple);
            validate_result(tuple, r);
            {
                std::lock_guard lock(mu_);
                update_best(tuple, r);
            }
            prom.set_value(std::move(r));
        } catch (...) {
            prom.set_exception(std::current_exception());
        }
    }
    const TupleResult& r = fut.get(); // blocks on in-flight tuples; rethrows cached errors
    return {tuple, r.thicknesses, r.merit, r.observation_error};
}

void StateEvaluator::seed(const std::vector<int>& tuple, TupleResult value) {
    validate_result(tuple, value);
    std::promise<TupleResult> prom;
    std::shared_future<TupleResult> fut = prom.get_future().share();
    {
        std::lock_guard lock(mu_);
        if (!cache_.emplace(tuple, fut).second)
            throw InputError("tuple is already cached");
        update_best(tuple, value);
    }
    prom.set_value(std::move(value));
}

StateEvaluator::Best StateEvaluator::best() const {
    std::lock_guard lock(mu_);
    return best_;
}

// ---------------------------------------------------------------------------
// Actor-critic

Eigen::VectorXd ActorCritic::policy(const Eigen::VectorXd& state) const {
    Eigen::VectorXd pi = actor.forward(state);
    if (!pi.allFinite() || pi.minCoeff() < 0.0 || std::abs(pi.sum() - 1.0) > 1e-9)
        throw TrainingError("policy output is not a probability distribution");
    return pi;
}

double ActorCritic::value(const Eigen::VectorXd& state) const {
    const double v = critic.forward(state)(0);
    if (!std::isfinite(v)) throw TrainingError("critic value is non-finite");
    return v;
}

ActorCritic make_actor_critic(int state_dim, int action_count, std::mt19937_64& rng) {
    if (state_dim < 1 || action_count < 2)
        throw InputError("actor-critic needs state_dim >= 1 and at least two actions");
    ActorCritic nets;
    nets.actor = Mlp({state_dim, 32, 16, action_count}, Mlp::Output::Softmax, Mlp::Hidden::Relu);
    nets.critic = Mlp({state_dim, 32, 16, 16, 1}, Mlp::Output::Linear, Mlp::Hidden::Relu);
    nets.actor.init(rng);
    nets.critic.init(rng);
    return nets;
}

GlobalParams::GlobalParams(int state_dim, int action_count, double learning_rate,
                           std::uint64_t seed)
    : state_dim_(state_dim), action_count_(action_count), learning_rate_(learning_rate) {
    if (!(learning_rate > 0.0)) throw InputError("learning rate must be positive");
    std::mt19937_64 rng(seed);
    nets_ = make_actor_critic(state_dim, action_count, rng);
    actor_opt_ = Adam(nets_.actor, learning_rate);
    critic_opt_ = Adam(nets_.critic, learning_rate);
}

ActorCritic GlobalParams::snapshot() const {
    std::lock_guard lock(mu_);
    return nets_;
}

void GlobalParams::apply(const Mlp::Gradients& actor_grads, const Mlp::Gradients& critic_grads) {
    std::lock_guard lock(mu_);
    actor_opt_.step(nets_.actor, actor_grads);
    critic_opt_.step(nets_.critic, critic_grads);
    if (!nets_.actor.finite() || !nets_.critic.finite())
        throw TrainingError("gradient update produced non-finite parameters");
    version_.fetch_add(1);
}

namespace {

const char* kCheckpointFormat = "thinopt-a3c-checkpoint";

nlohmann::ordered_json net_to_json(const Mlp& net) {
    const Eigen::VectorXd flat = net.flatten();
    return {
        {"widths", net.widths()},
        {"output", net.output_kind() == Mlp::Output::Softmax  ? "softmax"
                   : net.output_kind() == Mlp::Output::Tanh   ? "tanh"
                                                              : "linear"},
        {"hidden", net.hidden_kind() == Mlp::Hidden::Tanh ? "tanh" : "relu"},
        {"params", std::vector<double>(flat.data(), flat.data() + flat.size())},
    };
}

Mlp net_from_json(const nlohmann::json& j) {
    const auto widths = j.at("widths").get<std::vector<int>>();
    const std::string output = j.at("output").get<std::string>();
    const std::string hidden = j.at("hidden").get<std::string>();
    Mlp net(widths,
            output == "softmax" ? Mlp::Output::Softmax
            : output == "tanh"  ? Mlp::Output::Tanh
                                : Mlp::Output::Linear,
            hidden == "tanh" ? Mlp::Hidden::Tanh : Mlp::Hidden::Relu);
    const auto params = j.at("params").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(params.size()) != net.parameter_count())
        throw InputError("checkpoint parameter count does not match the declared widths");
    net.unflatten(Eigen::Map<const Eigen::VectorXd>(params.data(), params.size()));
    return net;
}

} // namespace

void GlobalParams::save_checkpoint(const std::filesystem::path& path) const {
    nlohmann::ordered_json j;
    {
        std::lock_guard lock(mu_);
        j["format"] = kCheckpointFormat;
        j["version"] = version_.load();
        j["state_dim"] = state_dim_;
        j["action_count"] = action_count_;
        j["learning_rate"] = learning_rate_;
        j["actor"] = net_to_json(nets_.actor);
        j["critic"] = net_to_json(nets_.critic);
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw InputError("failed writing " + path.string());
}

std::unique_ptr<GlobalParams> GlobalParams::load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kCheckpointFormat)
            throw InputError("not an actor-critic checkpoint: " + path.string());
        std::unique_ptr<GlobalParams> g(new GlobalParams());
        g->state_dim_ = j.at("state_dim").get<int>();
        g->action_count_ = j.at("action_count").get<int>();
        g->learning_rate_ = j.at("learning_rate").get<double>();
        g->nets_.actor = net_from_json(j.at("actor"));
        g->nets_.critic = net_from_json(j.at("critic"));
        g->version_.store(j.at("version").get<std::uint64_t>());
        if (!(g->learning_rate_ > 0.0) || !g->nets_.actor.finite() || !g->nets_.critic.finite())
            throw InputError("checkpoint contains invalid parameters: " + path.string());
        g->actor_opt_ = Adam(g->nets_.actor, g->learning_rate_);
        g->critic_opt_ = Adam(g->nets_.critic, g->learning_rate_);
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// n-step updates

SegmentLosses a3c_losses_and_gradients(const ActorCritic& params,
                                       std::span<const Transition> trajectory,
                                       double bootstrap_value, double discount,
                                       double entropy_beta, Mlp::Gradients* actor_grads,
                                       Mlp::Gradients* critic_grads) {
    if (trajectory.empty()) throw InputError("trajectory must hold at least one transition");
    const int n = static_cast<int>(trajectory.size());

    // Returns, backward from the bootstrap.
    std::vector<double> returns(n);
    double r = bootstrap_value;
    for (int t = n - 1; t >= 0; --t) {
        r = trajectory[t].reward + discount * r;
        returns[t] = r;
    }

    SegmentLosses losses;
    for (int t = 0; t < n; ++t) {
        const Transition& tr = trajectory[t];

        Mlp::Cache critic_cache;
        const double v = params.critic.forward(tr.state, critic_cache)(0);
        const double advantage = returns[t] - v;

        Mlp::Cache actor_cache;
        const Eigen::VectorXd pi = params.actor.forward(tr.state, actor_cache);
        if (tr.action < 0 || tr.action >= pi.size())
            throw InputError("transition action index out of range");
        // 0 log 0 -> 0 for entropy terms.
        const Eigen::ArrayXd logpi = pi.array().max(1e-300).log();
        const double entropy = -(pi.array() * logpi).sum();

        losses.actor_loss += -logpi(tr.action) * advantage - entropy_beta * entropy;
        losses.critic_loss += advantage * advantage;
        losses.entropy += entropy;

        if (actor_grads) {
            // d/dz of -log pi(a) * A is A (pi - e_a); the entropy bonus adds
            // beta * pi (log pi + H).
            Eigen::VectorXd dz = advantage * pi;
            dz(tr.action) -= advantage;
            dz += (entropy_beta * pi.array() * (logpi + entropy)).matrix();
            actor_grads->add_scaled(params.actor.backward(actor_cache, dz), 1.0);
        }
        if (critic_grads) {
            const Eigen::VectorXd dv = Eigen::VectorXd::Constant(1, -2.0 * advantage);
            critic_grads->add_scaled(params.critic.backward(critic_cache, dv), 1.0);
        }
    }
    return losses;
}

SegmentLosses n_step_update(GlobalParams& global, const ActorCritic& local,
                            std::span<const Transition> trajectory, double bootstrap_value,
                            double discount, double entropy_beta) {
    Mlp::Gradients actor_grads = local.actor.zero_gradients();
    Mlp::Gradients critic_grads = local.critic.zero_gradients();
    const SegmentLosses losses = a3c_losses_and_gradients(
        local, trajectory, bootstrap_value, discount, entropy_beta, &actor_grads, &critic_grads);
    if (!std::isfinite(losses.actor_loss) || !std::isfinite(losses.critic_loss)) {
        std::ostringstream msg;
        msg << "non-finite segment losses (actor " << losses.actor_loss << ", critic "
            << losses.critic_loss << "); trajectory:";
        for (const Transition& tr : trajectory)
            msg << " (a=" << tr.action << " r=" << tr.reward << " terminal=" << tr.terminal
                << ")";
        msg << " bootstrap=" << bootstrap_value;
        throw TrainingError(msg.str());
    }
    global.apply(actor_grads, critic_grads);
    return losses;
}

// ---------------------------------------------------------------------------
// Training driver

std::vector<int> A3cTask::movable_layers() const {
    std::vector<int> movable;
    for (int i = 0; i < layer_count; ++i)
        if (i >= static_cast<int>(frozen.size()) || !frozen[i]) movable.push_back(i);
    return movable;
}

void A3cTask::validate() const {
    if (layer_count < 1) throw InputError("task needs at least one layer");
    if (!frozen.empty() && static_cast<int>(frozen.size()) != layer_count)
        throw InputError("frozen-layer list must match the layer count");
    for (const auto& cell : frozen)
        if (cell && (cell->x < 0 || cell->x >= kGridCells || cell->y < 0 || cell->y >= kGridCells))
            throw InputError("frozen layer position off the grid");
    if (movable_layers().empty())
        throw InputError("all layers are frozen; nothing for the agent to do");
    if (evaluator == nullptr) throw InputError("task needs a state evaluator");
}

void A3cConfig::validate() const {
    if (workers < 1) throw InputError("worker count must be positive");
    if (episodes < 0) throw InputError("episode budget must be non-negative");
    if (max_episode_steps < 1) throw InputError("episode step cap must be positive");
    if (!(learning_rate > 0.0)) throw InputError("learning rate must be positive");
    if (entropy_beta < 0.0) throw InputError("entropy weight must be non-negative");
    reward.validate();
}

std::string_view to_string(TerminalReason r) {
    switch (r) {
        case TerminalReason::Success: return "success";
        case TerminalReason::Stall: return "stall";
        case TerminalReason::StepCap: return "step_cap";
        default: return "error";
    }
}

namespace {

struct WorkerShared {
    const A3cTask* task;
    const A3cConfig* cfg;
    GlobalParams* global;
    std::vector<ActionSpec> table;
    std::vector<int> movable;
    std::atomic<int> next_episode{0};
    std::mutex episodes_mu;
    std::vector<EpisodeSummary> episodes;
    std::mutex error_mu;
    std::exception_ptr fatal;
};

EnvState initial_state(const A3cTask& task, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> cell(0, kGridCells - 1);
    EnvState s;
    s.cells.resize(task.layer_count);
    for (int i = 0; i < task.layer_count; ++i) {
        if (i < static_cast<int>(task.frozen.size()) && task.frozen[i]) {
            s.cells[i] = *task.frozen[i];
        } else {
            s.cells[i].x = cell(rng);
            s.cells[i].y = cell(rng);
        }
    }
    return s;
}

int sample_action(const Eigen::VectorXd& pi, std::mt19937_64& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (int a = 0; a < pi.size(); ++a) {
        acc += pi(a);
        if (u < acc) return a;
    }
    return static_cast<int>(pi.size()) - 1;
}

void run_episode(WorkerShared& sh, std::mt19937_64& rng, EpisodeSummary& out) {
    const A3cConfig& cfg = *sh.cfg;
    StateEvaluator& evaluator = *sh.task->evaluator;

    EnvState state = initial_state(*sh.task, rng);
    double episode_best = evaluator.evaluate(state).merit;
    int since_improve = 0;

    ActorCritic local = sh.global->snapshot();
    std::vector<Transition> segment;
    segment.reserve(cfg.reward.n_steps);

    out.terminal_reason = TerminalReason::StepCap;
    while (out.steps < cfg.max_episode_steps) {
        const Eigen::VectorXd x = state.flatten();
        const Eigen::VectorXd pi = local.policy(x);
        const int action = sample_action(pi, rng);

        const EnvState next = apply_action(state, sh.table[action], sh.movable);
        const StateEvaluation eval = evaluator.evaluate(next);
        const RewardOutcome outcome =
            compute_reward(episode_best, eval.merit, since_improve + 1, cfg.reward,
                           eval.observation_error);
        ++out.steps;
        out.episode_return += outcome.reward;
        if (outcome.which == RewardCase::Success || outcome.which == RewardCase::Improvement) {
            episode_best = std::min(episode_best, eval.merit);
            since_improve = 0;
        } else {
            ++since_improve;
        }

        segment.push_back({x, action, outcome.reward, next.flatten(), outcome.terminal});
        const bool capped = out.steps >= cfg.max_episode_steps;
        if (outcome.terminal || capped
            || static_cast<int>(segment.size()) >= cfg.reward.n_steps) {
            const double bootstrap = outcome.terminal ? 0.0 : local.value(next.flatten());
            n_step_update(*sh.global, local, segment, bootstrap, cfg.reward.discount,
                          cfg.entropy_beta);
            ++out.updates;
            segment.clear();
            if (!outcome.terminal && !capped) local = sh.global->snapshot();
        }

        state = next;
        if (outcome.terminal) {
            out.terminal_reason = outcome.which == RewardCase::Success ? TerminalReason::Success
                                                                       : TerminalReason::Stall;
            break;
        }
    }
}

void run_worker(int worker_id, WorkerShared& sh) {
    std::mt19937_64 rng(sh.cfg->seed + static_cast<std::uint64_t>(worker_id));
    while (true) {
        const int episode = sh.next_episode.fetch_add(1);
        if (episode >= sh.cfg->episodes) break;

        EpisodeSummary summary;
        summary.episode = episode;
        summary.worker_id = worker_id;
        try {
            run_episode(sh, rng, summary);
        } catch (const Error& e) {
            summary.terminal_reason = TerminalReason::Error;
            summary.error = e.what();
        }
        summary.best_merit_so_far = sh.task->evaluator->best().merit;
        summary.cache_hits = sh.task->evaluator->cache_hits();
        summary.cache_misses = sh.task->evaluator->cache_misses();

        std::lock_guard lock(sh.episodes_mu);
        sh.episodes.push_back(std::move(summary));
    }
}

} // namespace

A3cResult run_a3c(const A3cTask& task, const A3cConfig& cfg, GlobalParams& global) {
    task.validate();
    cfg.validate();

    WorkerShared sh;
    sh.task = &task;
    sh.cfg = &cfg;
    sh.global = &global;
    sh.movable = task.movable_layers();
    sh.table = build_action_table(static_cast<int>(sh.movable.size()));

    if (global.state_dim() != 2 * task.layer_count)
        throw InputError("global network state width does not match the layer count");
    if (global.action_count() != static_cast<int>(sh.table.size()))
        throw InputError("global network action width does not match the action table");

    if (cfg.workers == 1) {
        run_worker(0, sh);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(cfg.workers);
        for (int w = 0; w < cfg.workers; ++w) {
            threads.emplace_back([&sh, w] {
                try {
                    run_worker(w, sh);
                } catch (...) {
                    std::lock_guard lock(sh.error_mu);
                    if (!sh.fatal) sh.fatal = std::current_exception();
                }
            });
        }
        for (std::thread& t : threads) t.join();
        if (sh.fatal) std::rethrow_exception(sh.fatal);
    }

    std::sort(sh.episodes.begin(), sh.episodes.end(),
              [](const EpisodeSummary& a, const EpisodeSummary& b) {
                  return a.episode < b.episode;
              });
    return {std::move(sh.episodes), task.evaluator->best(), global.version()};
}

void write_training_log(const std::filesystem::path& path,
                        std::span<const EpisodeSummary> episodes) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "episode,worker_id,steps,terminal_reason,best_merit_so_far,cache_hits,cache_misses\n";
    for (const EpisodeSummary& e : episodes)
        out << e.episode << ',' << e.worker_id << ',' << e.steps << ','
            << to_string(e.terminal_reason) << ',' << fmt(e.best_merit_so_far) << ','
            << e.cache_hits << ',' << e.cache_misses << '\n';
    if (!out) throw InputError("failed writing " + path.string());
}

} // namespace thinopt
