#include "mobelcov/pcn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mobelcov/csv.hpp"
#include "mobelcov/errors.hpp"
#include "mobelcov/nn/optimizer.hpp"

namespace mobelcov::pcn {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

pareto::Point as_point(const RewardVector& r) { return {r[0], r[1]}; }

}  // namespace

RewardVector Trajectory::return_to_go(int t) const {
    RewardVector sum{0.0, 0.0};
    for (int i = t; i < length(); ++i) {
        sum[0] += transitions[static_cast<std::size_t>(i)].reward[0];
        sum[1] += transitions[static_cast<std::size_t>(i)].reward[1];
    }
    return sum;
}

ExperienceBuffer::ExperienceBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("experience buffer capacity must be positive");
}

void ExperienceBuffer::insert(std::vector<Trajectory> trajectories) {
    for (Trajectory& t : trajectories) {
        entries_.push_back(Entry{std::move(t), next_id_++, 0, 0.0});
    }
    refresh_metadata();
    if (entries_.size() <= capacity_) return;

    // An entry is stale when a newer entry has exactly the same return.
    std::map<RewardVector, std::uint64_t> newest;
    for (const Entry& e : entries_) {
        auto [it, fresh] = newest.emplace(e.trajectory.episode_return, e.insertion_id);
        if (!fresh) it->second = std::max(it->second, e.insertion_id);
    }
    const auto stale = [&](const Entry& e) { return newest.at(e.trajectory.episode_return) != e.insertion_id; };

    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Entry& x = entries_[a];
        const Entry& y = entries_[b];
        if (x.rank != y.rank) return x.rank < y.rank;
        if (stale(x) != stale(y)) return !stale(x);
        if (x.crowding != y.crowding) return x.crowding > y.crowding;
        return x.insertion_id > y.insertion_id;
    });
    order.resize(capacity_);
    std::sort(order.begin(), order.end());  // keep insertion order among survivors
    std::vector<Entry> kept;
    kept.reserve(capacity_);
    for (std::size_t i : order) kept.push_back(std::move(entries_[i]));
    entries_ = std::move(kept);
    refresh_metadata();
}

void ExperienceBuffer::refresh_metadata() {
    const pareto::PointSet points = returns();
    const std::vector<int> ranks = pareto::nondomination_ranks(points);
    const int max_rank = ranks.empty() ? -1 : *std::max_element(ranks.begin(), ranks.end());
    for (int r = 0; r <= max_rank; ++r) {
        std::vector<std::size_t> members;
        pareto::PointSet front;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (ranks[i] == r) {
                members.push_back(i);
                front.push_back(points[i]);
            }
        }
        const std::vector<double> crowd = pareto::crowding_distances(front);
        for (std::size_t m = 0; m < members.size(); ++m) {
            entries_[members[m]].rank = r;
            entries_[members[m]].crowding = crowd[m];
        }
    }
}

pareto::PointSet ExperienceBuffer::returns() const {
    pareto::PointSet out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(as_point(e.trajectory.episode_return));
    return out;
}

std::vector<const ExperienceBuffer::Entry*> ExperienceBuffer::front() const {
    std::vector<const Entry*> out;
    for (const Entry& e : entries_) {
        if (e.rank == 0) out.push_back(&e);
    }
    return out;
}

RewardVector ExperienceBuffer::return_std() const {
    RewardVector mean{0.0, 0.0}, var{0.0, 0.0};
    if (entries_.empty()) return var;
    const double n = static_cast<double>(entries_.size());
    for (const Entry& e : entries_) {
        for (int o = 0; o < 2; ++o) mean[o] += e.trajectory.episode_return[o] / n;
    }
    for (const Entry& e : entries_) {
        for (int o = 0; o < 2; ++o) {
            const double d = e.trajectory.episode_return[o] - mean[o];
            var[o] += d * d / n;
        }
    }
    return {std::sqrt(var[0]), std::sqrt(var[1])};
}

std::size_t ExperienceBuffer::transition_count() const {
    std::size_t total = 0;
    for (const Entry& e : entries_) total += e.trajectory.transitions.size();
    return total;
}

void update_buffer(ExperienceBuffer& buffer, std::vector<Trajectory> trajectories) {
    buffer.insert(std::move(trajectories));
}

DesiredTarget choose_desired(const ExperienceBuffer& buffer, double return_noise_scale, Rng& rng) {
    if (buffer.empty()) throw ValidationError("cannot choose a desired return from an empty buffer");
    const auto front = buffer.front();
    std::uniform_int_distribution<std::size_t> pick(0, front.size() - 1);
    const Trajectory& chosen = front[pick(rng)]->trajectory;
    const RewardVector spread = buffer.return_std();

    DesiredTarget target;
    target.desired_horizon = std::max(1, chosen.length());
    target.desired_return = chosen.episode_return;
    if (return_noise_scale > 0.0) {
        for (int o = 0; o < 2; ++o) target.desired_return[o] += return_noise_scale * spread[o] * standard_normal(rng);
        std::uniform_int_distribution<int> objective(0, 1);
        const int o = objective(rng);
        target.desired_return[o] += return_noise_scale * spread[o] * std::abs(standard_normal(rng));
    }
    return target;
}

Trajectory rollout(const MobelcovEnv& env, const ActionSource& choose, DesiredTarget target, Rng& rng,
                   std::vector<DailyRecord>* trace) {
    Trajectory traj;
    EnvState state = env.reset(rng, trace);
    while (!state.done) {
        Transition tr;
        tr.observation = env.observe(state);
        tr.desired_return = target.desired_return;
        tr.desired_horizon = target.desired_horizon;
        tr.action = choose(state, tr.observation, target, rng);
        StepResult res = env.step(state, tr.action, rng, trace);
        tr.reward = res.reward;
        traj.episode_return[0] += res.reward[0];
        traj.episode_return[1] += res.reward[1];
        target.desired_return[0] -= res.reward[0];
        target.desired_return[1] -= res.reward[1];
        target.desired_horizon = std::max(target.desired_horizon - 1.0, 1.0);
        traj.transitions.push_back(std::move(tr));
        state = std::move(res.state);
    }
    return traj;
}

Trajectory run_episode(const MobelcovEnv& env, const nn::PolicyNetwork& net, const DesiredTarget& target,
                       double noise_scale, Rng& rng, std::vector<DailyRecord>* trace) {
    if (noise_scale < 0.0) throw ValidationError("exploration noise must be non-negative");
    const ActionSource policy = [&](const EnvState&, const Vector& obs, const DesiredTarget& command, Rng& r) {
        const auto out = net.act(obs, command.desired_return, command.desired_horizon);
        Action a{out[0], out[1], out[2]};
        if (noise_scale > 0.0) {
            a.p_w = clamp01(a.p_w + noise_scale * standard_normal(r));
            a.p_s = clamp01(a.p_s + noise_scale * standard_normal(r));
            a.p_l = clamp01(a.p_l + noise_scale * standard_normal(r));
        }
        return a;
    };
    return rollout(env, policy, target, rng, trace);
}

Trajectory random_episode(const MobelcovEnv& env, Rng& rng) {
    const ActionSource uniform = [](const EnvState&, const Vector&, const DesiredTarget&, Rng& r) {
        const double w = uniform01(r);
        const double s = uniform01(r);
        const double l = uniform01(r);
        return Action{w, s, l};
    };
    return rollout(env, uniform, DesiredTarget{{0.0, 0.0}, static_cast<double>(env.horizon())}, rng);
}

void TrainConfig::validate(int horizon) const {
    if (total_steps < 1 || batch_size < 1 || model_updates < 0 || episodes_between_updates < 1 ||
        warmup_episodes < 1 || buffer_capacity < 1 || eval_repeats < 1) {
        throw ConfigError("training counts must be positive");
    }
    if (static_cast<long>(warmup_episodes) * horizon > total_steps) {
        throw ConfigError("step budget is smaller than the warm-up episodes");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (exploration_noise < 0.0 || desired_return_noise < 0.0 || input_return_noise < 0.0) {
        throw ConfigError("noise scales must be non-negative");
    }
}

namespace {

struct TransitionRef {
    std::size_t entry;
    int step;
};

std::vector<TransitionRef> index_transitions(const ExperienceBuffer& buffer) {
    std::vector<TransitionRef> refs;
    refs.reserve(buffer.transition_count());
    for (std::size_t e = 0; e < buffer.entries().size(); ++e) {
        for (int t = 0; t < buffer.entries()[e].trajectory.length(); ++t) refs.push_back({e, t});
    }
    return refs;
}

nn::TrainingBatch sample_batch(const ExperienceBuffer& buffer, const std::vector<TransitionRef>& refs, int size,
                               double input_noise, int obs_size, Rng& rng) {
    nn::TrainingBatch batch;
    batch.observations.resize(obs_size, size);
    batch.conditioning.resize(3, size);
    batch.targets.resize(3, size);
    const RewardVector spread = buffer.return_std();
    std::uniform_int_distribution<std::size_t> pick(0, refs.size() - 1);
    for (int b = 0; b < size; ++b) {
        const TransitionRef ref = refs[pick(rng)];
        const Trajectory& traj = buffer.entries()[ref.entry].trajectory;
        const Transition& tr = traj.transitions[static_cast<std::size_t>(ref.step)];
        RewardVector to_go = traj.return_to_go(ref.step);
        if (input_noise > 0.0) {
            for (int o = 0; o < 2; ++o) to_go[o] += input_noise * spread[o] * standard_normal(rng);
        }
        batch.observations.col(b) = tr.observation;
        batch.conditioning(0, b) = to_go[0];
        batch.conditioning(1, b) = to_go[1];
        batch.conditioning(2, b) = static_cast<double>(traj.length() - ref.step);
        batch.targets(0, b) = tr.action.p_w;
        batch.targets(1, b) = tr.action.p_s;
        batch.targets(2, b) = tr.action.p_l;
    }
    return batch;
}

}  // namespace

TrainResult train(const MobelcovEnv& env, const TrainConfig& cfg,
                  const std::function<void(const TrainLogRow&)>& on_log) {
    cfg.validate(env.horizon());
    nn::InputLayout layout;
    layout.groups = env.groups();
    layout.channels = MobelcovEnv::kObservationChannels;

    TrainResult result;
    result.network = nn::PolicyNetwork::create(cfg.architecture, derive_seed(cfg.seed, "pcn/network"), layout);
    nn::Adam optimizer(nn::AdamConfig{cfg.learning_rate});
    ExperienceBuffer buffer(cfg.buffer_capacity);

    long steps = 0;
    std::uint64_t episode_counter = 0;
    std::vector<Trajectory> warmup;
    for (int i = 0; i < cfg.warmup_episodes; ++i) {
        Rng rng = make_stream(cfg.seed, "pcn/warmup", static_cast<std::uint64_t>(i));
        warmup.push_back(random_episode(env, rng));
        steps += warmup.back().length();
    }
    update_buffer(buffer, std::move(warmup));

    {
        const pareto::PointSet pts = buffer.returns();
        const pareto::Bounds b = pareto::bounds_of({&pts});
        for (int o = 0; o < 2; ++o) {
            result.log_reference[o] = b.lo[o] - 0.01 * std::max(b.hi[o] - b.lo[o], 1e-12);
        }
    }
    const auto log_row = [&](double loss) {
        TrainLogRow row{steps, buffer.size(), pareto::hypervolume_2d(buffer.returns(), result.log_reference), loss};
        result.log.push_back(row);
        if (on_log) on_log(row);
    };
    log_row(0.0);

    Rng batch_rng = make_stream(cfg.seed, "pcn/batch");
    Rng command_rng = make_stream(cfg.seed, "pcn/command");
    while (steps < cfg.total_steps) {
        const std::vector<TransitionRef> refs = index_transitions(buffer);
        double loss = 0.0;
        auto params = result.network.parameters();
        for (int u = 0; u < cfg.model_updates; ++u) {
            const nn::TrainingBatch batch = sample_batch(buffer, refs, cfg.batch_size, cfg.input_return_noise,
                                                         layout.observation_size(), batch_rng);
            loss = result.network.loss_and_gradient(batch);
            optimizer.step(params);
        }

        std::vector<Trajectory> collected;
        for (int e = 0; e < cfg.episodes_between_updates && steps < cfg.total_steps; ++e) {
            const DesiredTarget target = choose_desired(buffer, cfg.desired_return_noise, command_rng);
            Rng rng = make_stream(cfg.seed, "pcn/episode", episode_counter++);
            collected.push_back(run_episode(env, result.network, target, cfg.exploration_noise, rng));
            steps += collected.back().length();
        }
        update_buffer(buffer, std::move(collected));
        log_row(loss);
    }
    result.steps = steps;

    // Coverage set: distinct non-dominated returns of the buffer, newest first on ties.
    std::vector<const ExperienceBuffer::Entry*> front = buffer.front();
    std::sort(front.begin(), front.end(), [](const auto* a, const auto* b) {
        const auto& ra = a->trajectory.episode_return;
        const auto& rb = b->trajectory.episode_return;
        if (ra != rb) return ra[0] > rb[0] || (ra[0] == rb[0] && ra[1] > rb[1]);
        return a->insertion_id > b->insertion_id;
    });
    CoverageSet coverage;
    for (const auto* entry : front) {
        const RewardVector& r = entry->trajectory.episode_return;
        if (!coverage.empty() && coverage.back().target.desired_return == r) continue;
        CoveragePoint point;
        point.policy_id = static_cast<int>(coverage.size());
        point.target = DesiredTarget{r, static_cast<double>(entry->trajectory.length())};
        coverage.push_back(point);
    }
    const RobustnessReport eval = evaluate_policies(result.network, coverage, env, cfg.eval_repeats,
                                                    derive_seed(cfg.seed, "pcn/final-eval"));
    for (std::size_t i = 0; i < coverage.size(); ++i) coverage[i].achieved_return = eval.rows[i].achieved;
    result.coverage = std::move(coverage);
    return result;
}

RobustnessReport evaluate_policies(const nn::PolicyNetwork& net, const CoverageSet& coverage,
                                   const MobelcovEnv& env, int n_eval, std::uint64_t seed) {
    if (n_eval < 1) throw ValidationError("n_eval must be at least 1");
    if (coverage.empty()) throw ValidationError("coverage set is empty");
    if (net.layout().observation_size() != env.observation_size()) {
        throw ConfigError("checkpoint input size does not match the environment");
    }
    RobustnessReport report;
    pareto::PointSet desired, achieved;
    for (const CoveragePoint& point : coverage) {
        RobustnessRow row;
        row.policy_id = point.policy_id;
        row.desired = point.target.desired_return;
        for (int r = 0; r < n_eval; ++r) {
            Rng rng = make_stream(seed, "pcn/evaluate",
                                  static_cast<std::uint64_t>(point.policy_id) * 1000003ULL + static_cast<std::uint64_t>(r));
            const Trajectory traj = run_episode(env, net, point.target, 0.0, rng);
            row.repeats.push_back(traj.episode_return);
            row.achieved[0] += traj.episode_return[0] / n_eval;
            row.achieved[1] += traj.episode_return[1] / n_eval;
        }
        desired.push_back(as_point(row.desired));
        achieved.push_back(as_point(row.achieved));
        report.rows.push_back(std::move(row));
    }
    report.bounds = pareto::bounds_of({&desired, &achieved});
    const auto eps = pareto::epsilon_indicators(pareto::normalize_points(desired, report.bounds),
                                                pareto::normalize_points(achieved, report.bounds));
    report.epsilon = eps.max;
    report.epsilon_mean = eps.mean;
    return report;
}

std::string coverage_csv(const CoverageSet& coverage, const MobelcovEnv& env) {
    CsvWriter csv({"policy_id", "desired_return_0", "desired_return_1", "desired_horizon", "achieved_return_0",
                   "achieved_return_1"});
    for (const CoveragePoint& p : coverage) {
        const RewardVector d = env.unscale(p.target.desired_return);
        const RewardVector a = env.unscale(p.achieved_return);
        csv.row({std::to_string(p.policy_id), format_double(d[0]), format_double(d[1]),
                 format_double(p.target.desired_horizon), format_double(a[0]), format_double(a[1])});
    }
    return csv.str();
}

CoverageSet read_coverage_csv(const std::filesystem::path& path, const MobelcovEnv& env) {
    const CsvTable table = read_csv(path);
    CoverageSet out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        CoveragePoint p;
        p.policy_id = static_cast<int>(table.number(r, "policy_id"));
        const RewardVector raw_desired{table.number(r, "desired_return_0"), table.number(r, "desired_return_1")};
        const auto div = env.config().scaling.raw_per_scaled();
        p.target.desired_return = {raw_desired[0] / div[0], raw_desired[1] / div[1]};
        p.target.desired_horizon = table.number(r, "desired_horizon");
        if (table.column("achieved_return_0") >= 0) {
            p.achieved_return = {table.number(r, "achieved_return_0") / div[0],
                                 table.number(r, "achieved_return_1") / div[1]};
        }
        out.push_back(p);
    }
    return out;
}

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
    CsvWriter csv({"steps", "buffer_size", "hypervolume", "loss"});
    for (const TrainLogRow& row : log) {
        csv.row({std::to_string(row.steps), std::to_string(row.buffer_size), format_double(row.hypervolume),
                 format_double(row.loss)});
    }
    return csv.str();
}

std::string robustness_csv(const RobustnessReport& report, const MobelcovEnv& env) {
    CsvWriter csv({"policy_id", "desired_return_0", "desired_return_1", "achieved_return_0", "achieved_return_1",
                   "repeats"});
    for (const RobustnessRow& row : report.rows) {
        const RewardVector d = env.unscale(row.desired);
        const RewardVector a = env.unscale(row.achieved);
        csv.row({std::to_string(row.policy_id), format_double(d[0]), format_double(d[1]), format_double(a[0]),
                 format_double(a[1]), std::to_string(row.repeats.size())});
    }
    return csv.str();
}

}  // namespace mobelcov::pcn
