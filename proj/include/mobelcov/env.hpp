#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobelcov/epi_core.hpp"
#include "mobelcov/params_io.hpp"
#include "mobelcov/rng.hpp"

namespace mobelcov {

enum class ObjectivePair { arh_sb, ari_sb };

ObjectivePair parse_objectives(std::string_view name);
std::string_view to_string(ObjectivePair pair);

/// Divisors mapping raw rewards to the O(1) scale seen by the learner.
/// The social-burden reward is first divided by `sb_prescale`, then by `social_burden`.
struct RewardScaling {
    double attack_rate = 10000.0;
    double social_burden = 100.0;
    double sb_prescale = 1.0e12;
    // Divide each S_i S_j (and R_i R_j) product by N_j, giving contacts per day.
    bool per_capita_sb = false;

    std::array<double, 2> raw_per_scaled() const { return {attack_rate, social_burden * sb_prescale}; }
};

struct EnvConfig {
    SimulationMode mode = SimulationMode::deterministic;
    ObjectivePair objectives = ObjectivePair::arh_sb;
    Vector seed_infections;  // moved from S to E on the start date
    std::string start_date = "2020-03-01";
    std::string lockdown_date = "2020-03-14";
    std::string exit_date = "2020-05-04";
    std::string holiday_start = "2020-07-01";
    std::string holiday_end = "2020-08-31";  // inclusive
    std::string end_date = "2020-08-31";
    Action lockdown_action{0.2, 0.0, 0.1};
    RewardScaling scaling;

    void validate(int groups) const;
};

EnvConfig parse_env_config(const nlohmann::json& doc, int groups);
nlohmann::json to_json(const EnvConfig& cfg);

/// Seeds used when a config does not name any: 1000 exposed persons spread over
/// the working-age groups.
Vector default_seed_infections(int groups);

struct EnvState {
    CompartmentState model;
    Matrix effective_matrix;  // blended matrix in force at calendar_day
    Matrix installed_matrix;  // target matrix installed by the last action
    Action prev_action;
    int week_index = 0;       // 0 = first controllable week
    int calendar_day = 0;     // days since the start date
    bool holiday = false;
    bool done = false;
    Vector cumulative_hosp;   // admissions since the exit date
    Vector weekly_hosp;       // admissions during the last simulated week
    Vector weekly_deaths;     // deaths during the last simulated week
};

struct RawRewards {
    double attack_infections = 0.0;       // R_ARI
    double attack_hospitalizations = 0.0; // R_ARH
    double social_burden = 0.0;           // R_SB
};

using RewardVector = std::array<double, 2>;

struct StepResult {
    EnvState state;
    RewardVector reward{};  // scaled, objective pair selected by the config
    RawRewards raw;
    bool done = false;
};

/// One simulated day, for trajectory export.
struct DailyRecord {
    int calendar_day = 0;
    double hosp_admissions = 0.0;
    double icu_admissions = 0.0;
    double deaths = 0.0;
    Action applied;  // after the holiday override
};

class MobelcovEnv {
public:
    MobelcovEnv(ModelParameters params, EnvConfig cfg);

    const ModelParameters& parameters() const { return params_; }
    const EnvConfig& config() const { return cfg_; }
    int groups() const { return params_.ages.groups(); }

    int exit_day() const { return exit_day_; }
    int end_day() const { return end_day_; }
    /// Number of agent steps from the exit date to the end date.
    int horizon() const;
    bool is_holiday(int calendar_day) const;
    std::string date_of(int calendar_day) const;

    /// Seeds infections, simulates the free phase and the lockdown, and returns the
    /// state on the exit date. The deterministic result is computed once and reused.
    EnvState reset(Rng& rng, std::vector<DailyRecord>* trace = nullptr) const;

    /// Simulates one week under `action`. Throws ValidationError for actions outside
    /// [0,1]^3 or when the episode is already done.
    StepResult step(const EnvState& state, const Action& action, Rng& rng,
                    std::vector<DailyRecord>* trace = nullptr) const;

    /// Raw rewards of moving from `s` to `next` while `installed` was the target matrix.
    RawRewards compute_rewards(const EnvState& s, const Matrix& installed, const EnvState& next) const;

    RewardVector scale(const RawRewards& raw) const;
    /// Converts a scaled reward/return vector back to raw units.
    RewardVector unscale(const RewardVector& scaled) const;

    static constexpr int kObservationChannels = 13;
    int observation_size() const { return kObservationChannels * groups() + 4; }
    /// Compartment block grouped by age: entry k * 13 + c holds channel c of group k.
    Vector observe(const EnvState& state) const;

private:
    EnvState burn_in(Rng& rng, std::vector<DailyRecord>* trace) const;

    ModelParameters params_;
    EnvConfig cfg_;
    Matrix full_;
    int lockdown_day_ = 0;
    int exit_day_ = 0;
    int holiday_start_ = 0;
    int holiday_end_ = 0;
    int end_day_ = 0;
    std::optional<EnvState> deterministic_reset_;
};

}  // namespace mobelcov
