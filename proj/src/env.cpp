#include "mobelcov/env.hpp"

#include <algorithm>
#include <cmath>

#include "mobelcov/calendar.hpp"
#include "mobelcov/errors.hpp"

namespace mobelcov {

namespace {

constexpr int kDaysPerStep = 7;

Action action_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("an action must be an array [p_w, p_s, p_l]");
    return Action{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

ObjectivePair parse_objectives(std::string_view name) {
    if (name == "arh-sb" || name == "arh_sb") return ObjectivePair::arh_sb;
    if (name == "ari-sb" || name == "ari_sb") return ObjectivePair::ari_sb;
    throw ConfigError("unknown objective pair '" + std::string(name) + "' (expected arh-sb or ari-sb)");
}

std::string_view to_string(ObjectivePair pair) { return pair == ObjectivePair::arh_sb ? "arh-sb" : "ari-sb"; }

Vector default_seed_infections(int groups) {
    Vector seeds = Vector::Zero(groups);
    if (groups == 10) {
        seeds << 0, 40, 180, 220, 200, 180, 120, 40, 20, 0;
    } else {
        seeds.setConstant(std::floor(1000.0 / groups));
    }
    return seeds;
}

void EnvConfig::validate(int groups) const {
    if (seed_infections.size() != groups) throw ConfigError("seed_infections must have one entry per age group");
    if (!seed_infections.allFinite() || (seed_infections.array() < 0.0).any()) {
        throw ConfigError("seed_infections must be non-negative");
    }
    const int lockdown = days_between(start_date, lockdown_date);
    const int exit = days_between(start_date, exit_date);
    const int end = days_between(start_date, end_date);
    const int hs = days_between(start_date, holiday_start);
    const int he = days_between(start_date, holiday_end);
    if (!(0 < lockdown && lockdown < exit && exit < end)) {
        throw ConfigError("dates must satisfy start < lockdown < exit < end");
    }
    if (hs > he) throw ConfigError("holiday start must not follow holiday end");
    lockdown_action.validate();
    if (!(scaling.attack_rate > 0.0) || !(scaling.social_burden > 0.0) || !(scaling.sb_prescale > 0.0)) {
        throw ConfigError("reward scaling divisors must be positive");
    }
}

EnvConfig parse_env_config(const nlohmann::json& doc, int groups) {
    EnvConfig cfg;
    if (doc.contains("mode")) cfg.mode = parse_mode(doc.at("mode").get<std::string>());
    if (doc.contains("objectives")) cfg.objectives = parse_objectives(doc.at("objectives").get<std::string>());
    if (doc.contains("seed_infections")) {
        const auto seeds = doc.at("seed_infections").get<std::vector<double>>();
        cfg.seed_infections = Eigen::Map<const Vector>(seeds.data(), static_cast<Eigen::Index>(seeds.size()));
    } else {
        cfg.seed_infections = default_seed_infections(groups);
    }
    if (doc.contains("dates")) {
        const auto& d = doc.at("dates");
        cfg.start_date = d.value("start", cfg.start_date);
        cfg.lockdown_date = d.value("lockdown", cfg.lockdown_date);
        cfg.exit_date = d.value("exit", cfg.exit_date);
        cfg.holiday_start = d.value("holiday_start", cfg.holiday_start);
        cfg.holiday_end = d.value("holiday_end", cfg.holiday_end);
        cfg.end_date = d.value("end", cfg.end_date);
    }
    if (doc.contains("lockdown_action")) cfg.lockdown_action = action_from_json(doc.at("lockdown_action"));
    if (doc.contains("reward_scaling")) {
        const auto& s = doc.at("reward_scaling");
        cfg.scaling.attack_rate = s.value("attack_rate", cfg.scaling.attack_rate);
        cfg.scaling.social_burden = s.value("social_burden", cfg.scaling.social_burden);
        cfg.scaling.sb_prescale = s.value("sb_prescale", cfg.scaling.sb_prescale);
        cfg.scaling.per_capita_sb = s.value("per_capita_sb", cfg.scaling.per_capita_sb);
    }
    cfg.validate(groups);
    return cfg;
}

nlohmann::json to_json(const EnvConfig& cfg) {
    return {{"mode", to_string(cfg.mode)},
            {"objectives", to_string(cfg.objectives)},
            {"seed_infections", std::vector<double>(cfg.seed_infections.data(),
                                                    cfg.seed_infections.data() + cfg.seed_infections.size())},
            {"dates",
             {{"start", cfg.start_date},
              {"lockdown", cfg.lockdown_date},
              {"exit", cfg.exit_date},
              {"holiday_start", cfg.holiday_start},
              {"holiday_end", cfg.holiday_end},
              {"end", cfg.end_date}}},
            {"lockdown_action", {cfg.lockdown_action.p_w, cfg.lockdown_action.p_s, cfg.lockdown_action.p_l}},
            {"reward_scaling",
             {{"attack_rate", cfg.scaling.attack_rate},
              {"social_burden", cfg.scaling.social_burden},
              {"sb_prescale", cfg.scaling.sb_prescale},
              {"per_capita_sb", cfg.scaling.per_capita_sb}}}};
}

MobelcovEnv::MobelcovEnv(ModelParameters params, EnvConfig cfg) : params_(std::move(params)), cfg_(std::move(cfg)) {
    params_.validate();
    if (cfg_.seed_infections.size() == 0) cfg_.seed_infections = default_seed_infections(groups());
    cfg_.validate(groups());
    if (((cfg_.seed_infections - params_.ages.population).array() > 0.0).any()) {
        throw ConfigError("seed_infections exceed the population of an age group");
    }
    full_ = params_.contacts.full();
    lockdown_day_ = days_between(cfg_.start_date, cfg_.lockdown_date);
    exit_day_ = days_between(cfg_.start_date, cfg_.exit_date);
    holiday_start_ = days_between(cfg_.start_date, cfg_.holiday_start);
    holiday_end_ = days_between(cfg_.start_date, cfg_.holiday_end);
    end_day_ = days_between(cfg_.start_date, cfg_.end_date);
    if (cfg_.mode == SimulationMode::deterministic) {
        Rng unused(0);
        deterministic_reset_ = burn_in(unused, nullptr);
    }
}

int MobelcovEnv::horizon() const { return (end_day_ - exit_day_ + kDaysPerStep - 1) / kDaysPerStep; }

bool MobelcovEnv::is_holiday(int calendar_day) const {
    return calendar_day >= holiday_start_ && calendar_day <= holiday_end_;
}

std::string MobelcovEnv::date_of(int calendar_day) const { return add_days(cfg_.start_date, calendar_day); }

EnvState MobelcovEnv::burn_in(Rng& rng, std::vector<DailyRecord>* trace) const {
    const int k = groups();
    CompartmentState model = CompartmentState::fully_susceptible(params_.ages.population);
    Vector seeds = cfg_.seed_infections;
    if (cfg_.mode == SimulationMode::stochastic) seeds = seeds.array().round();
    model.S -= seeds;
    model.E += seeds;

    const Matrix lockdown = effective_contact_matrix(params_.contacts, cfg_.lockdown_action);
    Flows last_week = Flows::zeros(k);
    for (int day = 0; day < exit_day_; ++day) {
        const bool locked = day >= lockdown_day_;
        Flows today = Flows::zeros(k);
        const SimulationWindow window{static_cast<double>(locked ? lockdown_day_ : 0), static_cast<double>(day), 1};
        model = simulate_days(model, full_, locked ? lockdown : full_, window, cfg_.mode, params_.epi,
                              params_.contacts, rng, &today);
        if (day >= exit_day_ - kDaysPerStep) last_week += today;
        if (trace != nullptr) {
            trace->push_back(DailyRecord{day, today.hosp_admissions.sum(), today.icu_admissions.sum(),
                                        today.deaths.sum(), locked ? cfg_.lockdown_action : Action{1.0, 1.0, 1.0}});
        }
    }

    EnvState state;
    model.H_new.setZero();
    state.model = std::move(model);
    state.effective_matrix = blended_matrix(
        full_, lockdown, compliance_weight(exit_day_, lockdown_day_, params_.epi));
    state.installed_matrix = lockdown;
    state.prev_action = cfg_.lockdown_action;
    state.week_index = 0;
    state.calendar_day = exit_day_;
    state.holiday = is_holiday(exit_day_);
    state.done = exit_day_ >= end_day_;
    state.cumulative_hosp = Vector::Zero(k);
    state.weekly_hosp = last_week.hosp_admissions;
    state.weekly_deaths = last_week.deaths;
    return state;
}

EnvState MobelcovEnv::reset(Rng& rng, std::vector<DailyRecord>* trace) const {
    if (deterministic_reset_ && trace == nullptr) return *deterministic_reset_;
    return burn_in(rng, trace);
}

StepResult MobelcovEnv::step(const EnvState& state, const Action& action, Rng& rng,
                             std::vector<DailyRecord>* trace) const {
    if (state.done) throw ValidationError("step called on a finished episode");
    action.validate();

    const int k = groups();
    const int week_start = state.calendar_day;
    const int n_days = std::min(kDaysPerStep, end_day_ - week_start);

    CompartmentState model = state.model;
    model.H_new.setZero();
    Matrix installed_sum = Matrix::Zero(k, k);
    Matrix target;
    Action applied = action;
    Flows week = Flows::zeros(k);
    for (int d = 0; d < n_days; ++d) {
        const int day = week_start + d;
        applied = action;
        if (is_holiday(day)) applied.p_s = 0.0;
        target = effective_contact_matrix(params_.contacts, applied);
        installed_sum += target;
        Flows today = Flows::zeros(k);
        const SimulationWindow window{static_cast<double>(week_start), static_cast<double>(day), 1};
        model = simulate_days(model, state.effective_matrix, target, window, cfg_.mode, params_.epi,
                              params_.contacts, rng, &today);
        week += today;
        if (trace != nullptr) {
            trace->push_back(DailyRecord{day, today.hosp_admissions.sum(), today.icu_admissions.sum(),
                                        today.deaths.sum(), applied});
        }
    }

    StepResult out;
    EnvState& next = out.state;
    next.model = std::move(model);
    next.effective_matrix = blended_matrix(state.effective_matrix, target,
                                           compliance_weight(week_start + n_days, week_start, params_.epi));
    next.installed_matrix = installed_sum / static_cast<double>(n_days);
    next.prev_action = applied;
    next.week_index = state.week_index + 1;
    next.calendar_day = week_start + n_days;
    next.holiday = is_holiday(next.calendar_day);
    next.done = next.calendar_day >= end_day_;
    next.cumulative_hosp = state.cumulative_hosp + week.hosp_admissions;
    next.weekly_hosp = week.hosp_admissions;
    next.weekly_deaths = week.deaths;

    out.raw = compute_rewards(state, next.installed_matrix, next);
    out.reward = scale(out.raw);
    out.done = next.done;
    return out;
}

RawRewards MobelcovEnv::compute_rewards(const EnvState& s, const Matrix& installed, const EnvState& next) const {
    RawRewards r;
    r.attack_infections = -(s.model.S.sum() - next.model.S.sum());
    r.attack_hospitalizations = -next.model.H_new.sum();
    const Matrix diff = installed - full_;
    if (cfg_.scaling.per_capita_sb) {
        const Vector inv_n = params_.ages.population.cwiseInverse();
        r.social_burden = s.model.S.dot(diff * s.model.S.cwiseProduct(inv_n)) +
                          s.model.R.dot(diff * s.model.R.cwiseProduct(inv_n));
    } else {
        r.social_burden = s.model.S.dot(diff * s.model.S) + s.model.R.dot(diff * s.model.R);
    }
    // Rounding can leave tiny positive residues when installed == full.
    r.attack_infections = std::min(r.attack_infections, 0.0);
    r.social_burden = std::min(r.social_burden, 0.0);
    return r;
}

RewardVector MobelcovEnv::scale(const RawRewards& raw) const {
    const double attack = cfg_.objectives == ObjectivePair::arh_sb ? raw.attack_hospitalizations
                                                                    : raw.attack_infections;
    const auto div = cfg_.scaling.raw_per_scaled();
    return {attack / div[0], raw.social_burden / div[1]};
}

RewardVector MobelcovEnv::unscale(const RewardVector& scaled) const {
    const auto div = cfg_.scaling.raw_per_scaled();
    return {scaled[0] * div[0], scaled[1] * div[1]};
}

Vector MobelcovEnv::observe(const EnvState& state) const {
    const int k = groups();
    Vector obs(observation_size());
    const auto& m = state.model;
    for (int g = 0; g < k; ++g) {
        const double n = params_.ages.population[g];
        const double channels[kObservationChannels] = {
            m.S[g],      m.E[g],      m.I_presym[g], m.I_asym[g], m.I_mild[g],
            m.I_sev[g],  m.I_hosp[g], m.I_icu[g],    state.cumulative_hosp[g],
            m.D[g],      m.R[g],      state.weekly_hosp[g], state.weekly_deaths[g]};
        for (int c = 0; c < kObservationChannels; ++c) {
            obs[g * kObservationChannels + c] = std::clamp(channels[c] / n, 0.0, 1.0);
        }
    }
    const int base = kObservationChannels * k;
    obs[base] = state.prev_action.p_w;
    obs[base + 1] = state.prev_action.p_s;
    obs[base + 2] = state.prev_action.p_l;
    obs[base + 3] = state.holiday ? 1.0 : 0.0;
    return obs;
}

}  // namespace mobelcov
