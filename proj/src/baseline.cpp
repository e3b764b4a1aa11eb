#include "mobelcov/baseline.hpp"

#include "mobelcov/csv.hpp"
#include "mobelcov/errors.hpp"

namespace mobelcov::baseline {

pareto::PointSet SweepResult::all_points() const {
    pareto::PointSet out;
    for (const auto& p : policies) out.push_back({p.episode_return[0], p.episode_return[1]});
    return out;
}

pareto::PointSet SweepResult::front() const {
    pareto::PointSet out;
    for (const auto& p : policies) {
        if (p.nondominated) out.push_back({p.episode_return[0], p.episode_return[1]});
    }
    return out;
}

std::vector<double> level_grid(int n_levels) {
    if (n_levels < 2) throw ConfigError("the baseline needs at least 2 levels");
    std::vector<double> grid(static_cast<std::size_t>(n_levels));
    for (int i = 0; i < n_levels; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n_levels - 1);
    return grid;
}

SweepResult fixed_policy_sweep(const MobelcovEnv& env, int n_levels, int repeats, std::uint64_t seed) {
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    SweepResult result;
    const std::vector<double> grid = level_grid(n_levels);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        FixedPolicyResult policy;
        policy.level = grid[i];
        const Action action{grid[i], grid[i], grid[i]};
        for (int r = 0; r < repeats; ++r) {
            Rng rng = make_stream(seed, "baseline/level", i * 1000003ULL + static_cast<std::uint64_t>(r));
            EnvState state = env.reset(rng);
            while (!state.done) {
                StepResult step = env.step(state, action, rng);
                policy.episode_return[0] += step.reward[0] / repeats;
                policy.episode_return[1] += step.reward[1] / repeats;
                state = std::move(step.state);
            }
        }
        result.policies.push_back(policy);
    }
    // Identical returns collapse to the lowest level.
    const std::vector<std::size_t> keep = pareto::nondominated_indices(result.all_points());
    for (std::size_t i : keep) result.policies[i].nondominated = true;
    return result;
}

std::string sweep_csv(const SweepResult& sweep, const MobelcovEnv& env) {
    CsvWriter csv({"level", "return_0", "return_1", "nondominated"});
    for (const auto& p : sweep.policies) {
        const RewardVector raw = env.unscale(p.episode_return);
        csv.row({format_double(p.level), format_double(raw[0]), format_double(raw[1]), p.nondominated ? "1" : "0"});
    }
    return csv.str();
}

pareto::PointSet read_sweep_front(const std::string& path, const MobelcovEnv& env) {
    const CsvTable table = read_csv(path);
    const auto div = env.config().scaling.raw_per_scaled();
    pareto::PointSet out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.number(r, "nondominated") == 0.0) continue;
        out.push_back({table.number(r, "return_0") / div[0], table.number(r, "return_1") / div[1]});
    }
    return out;
}

}  // namespace mobelcov::baseline
