#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "mobelcov/env.hpp"
#include "mobelcov/nn/policy_network.hpp"
#include "mobelcov/pareto.hpp"
#include "mobelcov/rng.hpp"

namespace mobelcov::pcn {

struct Transition {
    Vector observation;
    Action action;
    RewardVector reward{};         // scaled
    RewardVector desired_return{}; // command in force when the action was chosen
    double desired_horizon = 1.0;
};

struct Trajectory {
    std::vector<Transition> transitions;
    RewardVector episode_return{};  // componentwise sum of rewards

    int length() const { return static_cast<int>(transitions.size()); }
    /// Return accumulated from step t to the end of the episode.
    RewardVector return_to_go(int t) const;
};

struct DesiredTarget {
    RewardVector desired_return{};
    double desired_horizon = 1.0;
};

/// Bounded episode store ranked by non-domination of episode returns. Overflow
/// evicts by (rank desc, staleness, crowding distance asc, age): the worst front
/// first, older copies of a repeated return before distinct returns, then the
/// most crowded member, then the older of two otherwise equal entries.
class ExperienceBuffer {
public:
    struct Entry {
        Trajectory trajectory;
        std::uint64_t insertion_id = 0;
        int rank = 0;
        double crowding = 0.0;
    };

    explicit ExperienceBuffer(std::size_t capacity = 1000);

    void insert(std::vector<Trajectory> trajectories);

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }

    pareto::PointSet returns() const;
    /// Entries of the non-dominated front (rank 0).
    std::vector<const Entry*> front() const;
    /// Per-objective standard deviation of the stored episode returns.
    RewardVector return_std() const;
    std::size_t transition_count() const;

private:
    void refresh_metadata();

    std::size_t capacity_;
    std::uint64_t next_id_ = 0;
    std::vector<Entry> entries_;
};

/// Inserts `trajectories` into `buffer` and prunes to capacity.
void update_buffer(ExperienceBuffer& buffer, std::vector<Trajectory> trajectories);

/// Picks a uniformly random non-dominated episode and perturbs its return with
/// Gaussian noise scaled by `return_noise_scale` times the per-objective return
/// std; one random objective is additionally pushed upward by the same scale.
DesiredTarget choose_desired(const ExperienceBuffer& buffer, double return_noise_scale, Rng& rng);

using ActionSource = std::function<Action(const EnvState&, const Vector& observation,
                                          const DesiredTarget& command, Rng& rng)>;

/// Runs one episode from reset. After every step the command is updated:
/// desired_return -= reward, desired_horizon = max(desired_horizon - 1, 1).
Trajectory rollout(const MobelcovEnv& env, const ActionSource& choose, DesiredTarget target, Rng& rng,
                   std::vector<DailyRecord>* trace = nullptr);

/// Policy episode: clamp(policy + noise_scale * N(0,1)) per action component.
Trajectory run_episode(const MobelcovEnv& env, const nn::PolicyNetwork& net, const DesiredTarget& target,
                       double noise_scale, Rng& rng, std::vector<DailyRecord>* trace = nullptr);

/// Episode with uniform random actions in [0,1]^3.
Trajectory random_episode(const MobelcovEnv& env, Rng& rng);

struct TrainConfig {
    nn::Architecture architecture = nn::Architecture::dense_big;
    double learning_rate = 1e-3;
    long total_steps = 300000;
    int batch_size = 256;
    int model_updates = 50;
    int episodes_between_updates = 10;
    std::size_t buffer_capacity = 1000;
    int warmup_episodes = 200;
    double exploration_noise = 0.1;
    double desired_return_noise = 0.2;
    // Gaussian noise on the return-to-go inputs during gradient descent, as a
    // fraction of the per-objective return std.
    double input_return_noise = 0.05;
    int eval_repeats = 1;
    std::uint64_t seed = 0;

    void validate(int horizon) const;
};

struct CoveragePoint {
    int policy_id = 0;
    DesiredTarget target;          // scaled units
    RewardVector achieved_return{};  // scaled units, mean over evaluation repeats
};

using CoverageSet = std::vector<CoveragePoint>;

struct TrainLogRow {
    long steps = 0;
    std::size_t buffer_size = 0;
    double hypervolume = 0.0;  // buffer front, scaled units, against `log_reference`
    double loss = 0.0;
};

struct TrainResult {
    nn::PolicyNetwork network;
    CoverageSet coverage;
    std::vector<TrainLogRow> log;
    pareto::Point log_reference{};
    long steps = 0;
};

/// Warm-up with random episodes, then alternate model updates and policy
/// episodes until `total_steps` environment steps have been taken. The coverage
/// set holds the buffer's non-dominated returns and their evaluated outcomes.
TrainResult train(const MobelcovEnv& env, const TrainConfig& cfg,
                  const std::function<void(const TrainLogRow&)>& on_log = {});

struct RobustnessRow {
    int policy_id = 0;
    RewardVector desired{};   // scaled
    RewardVector achieved{};  // scaled, mean over repeats
    std::vector<RewardVector> repeats;
};

struct RobustnessReport {
    std::vector<RobustnessRow> rows;
    double epsilon = 0.0;       // I_eps, normalized units
    double epsilon_mean = 0.0;  // I_eps-mean, normalized units
    pareto::Bounds bounds;      // scaled units
};

/// Executes each coverage point's command without exploration noise `n_eval`
/// times and compares achieved against desired returns.
RobustnessReport evaluate_policies(const nn::PolicyNetwork& net, const CoverageSet& coverage,
                                   const MobelcovEnv& env, int n_eval, std::uint64_t seed);

/// Coverage CSV (raw units): policy_id, desired_return_0, desired_return_1,
/// desired_horizon, achieved_return_0, achieved_return_1.
std::string coverage_csv(const CoverageSet& coverage, const MobelcovEnv& env);
CoverageSet read_coverage_csv(const std::filesystem::path& path, const MobelcovEnv& env);
std::string train_log_csv(const std::vector<TrainLogRow>& log);
std::string robustness_csv(const RobustnessReport& report, const MobelcovEnv& env);

}  // namespace mobelcov::pcn
