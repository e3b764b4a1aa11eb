#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mobelcov/env.hpp"
#include "mobelcov/pareto.hpp"

namespace mobelcov::baseline {

/// Constant policy Ĉ = C_home + level (C - C_home), i.e. action (level, level, level).
struct FixedPolicyResult {
    double level = 0.0;
    RewardVector episode_return{};  // scaled, mean over repeats
    bool nondominated = false;
};

struct SweepResult {
    std::vector<FixedPolicyResult> policies;  // level order
    pareto::PointSet front() const;           // returns of the non-dominated policies
    pareto::PointSet all_points() const;
};

/// Level grid i / (n_levels - 1), i = 0..n_levels-1.
std::vector<double> level_grid(int n_levels);

/// Runs every level for `repeats` episodes; repeat r of level i uses stream
/// ("baseline/level", i * 1000003 + r) derived from `seed`.
SweepResult fixed_policy_sweep(const MobelcovEnv& env, int n_levels = 100, int repeats = 1,
                               std::uint64_t seed = 0);

/// Baseline CSV (raw units): level, return_0, return_1, nondominated.
std::string sweep_csv(const SweepResult& sweep, const MobelcovEnv& env);
/// Reads the non-dominated returns (scaled units) from a baseline CSV.
pareto::PointSet read_sweep_front(const std::string& path, const MobelcovEnv& env);

}  // namespace mobelcov::baseline
