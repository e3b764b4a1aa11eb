// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mobelcov/baseline.hpp"
#include "mobelcov/env.hpp"
#include "mobelcov/epi_core.hpp"
#include "mobelcov/nn/gradient_check.hpp"
#include "mobelcov/nn/policy_network.hpp"
#include "mobelcov/params_io.hpp"
#include "mobelcov/pareto.hpp"
#include "mobelcov/pcn.hpp"

using namespace mobelcov;

namespace {

// Pinned tolerances and budgets.
constexpr double kConservationRel = 1e-9;
constexpr int kConservationSubsteps = 10000;
constexpr double kConservationSeconds = 10.0;

constexpr double kMeanFieldRel = 0.05;
constexpr int kMeanFieldSeeds = 500;
constexpr int kMeanFieldDays = 28;
constexpr double kMeanFieldPopulation = 11e6;
constexpr double kMeanFieldSeconds = 300.0;

constexpr int kHvSets = 100;
constexpr int kHvSamples = 1000000;
constexpr double kHvRel = 0.01;
constexpr double kMetricSeconds = 60.0;

constexpr double kGradRel = 1e-4;
constexpr double kGradEps = 1e-5;
constexpr int kGradBatches = 10;
constexpr double kGradSeconds = 60.0;

constexpr long kPcnSteps = 50000;
constexpr int kPcnSeeds = 3;
constexpr double kPcnFloor = -0.01;
constexpr double kPcnMargin = 0.02;
constexpr int kPcnSeedsAboveMargin = 2;
constexpr double kPcnSecondsPerSeed = 1800.0;

constexpr double kRobustEpsMean = 0.05;

constexpr double kProtocolSeconds = 60.0;
constexpr long kReproSteps = 5000;

const char* kDataDir = MOBELCOV_TEST_DATA_DIR;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("CRITERION %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

ModelParameters load_params() { return load_model_parameters(std::string(kDataDir) + "/default_params.json"); }

EnvConfig env_config(const ModelParameters& p, SimulationMode mode) {
    EnvConfig cfg;
    cfg.mode = mode;
    cfg.seed_infections = default_seed_infections(p.ages.groups());
    return cfg;
}

CompartmentState random_state(const Vector& population, Rng& rng, bool integral) {
    const int k = static_cast<int>(population.size());
    CompartmentState s = CompartmentState::zeros(k);
    const Compartment others[] = {Compartment::E,     Compartment::IPresym, Compartment::IAsym,
                                  Compartment::IMild, Compartment::ISev,    Compartment::IHosp,
                                  Compartment::IIcu,  Compartment::D,       Compartment::R};
    for (int g = 0; g < k; ++g) {
        const double n = integral ? std::round(population[g]) : population[g];
        double rest = n;
        for (Compartment c : others) {
            double v = 0.3 * n * uniform01(rng) / 9.0;
            if (integral) v = std::floor(v);
            s[c][g] = v;
            rest -= v;
        }
        s.S[g] = rest;
    }
    return s;
}

void criterion_conservation(const ModelParameters& p) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2024);
    double worst_rel = 0.0;
    bool exact = true;
    // Fresh random state and action every 100 substeps.
    CompartmentState d, b;
    double nd = 0.0, nb = 0.0;
    Transmission rates;
    for (int i = 0; i < kConservationSubsteps; ++i) {
        if (i % 100 == 0) {
            d = random_state(p.ages.population, rng, false);
            b = random_state(p.ages.population, rng, true);
            nd = d.total();
            nb = b.total();
            const Action a{uniform01(rng), uniform01(rng), uniform01(rng)};
            rates = modulated_transmission(p.contacts, p.epi, effective_contact_matrix(p.contacts, a));
        }
        d = deterministic_substep(d, rates, p.epi);
        b = stochastic_substep(b, rates, p.epi, rng);
        worst_rel = std::max(worst_rel, std::abs(d.total() - nd) / nd);
        exact = exact && b.total() == nb && b.is_integral() && b.all_non_negative();
    }
    const double secs = seconds_since(t0);
    report(1, worst_rel <= kConservationRel && exact && secs < kConservationSeconds,
           fmt("deterministic max rel drift %.3g", worst_rel) + (exact ? ", stochastic exact" : ", stochastic drift") +
               fmt(", %.2fs", secs));
}

void criterion_mean_field(const ModelParameters& base) {
    const auto t0 = std::chrono::steady_clock::now();
    ModelParameters p = base;
    p.ages.population *= kMeanFieldPopulation / p.ages.total();
    const MobelcovEnv det_env(p, env_config(p, SimulationMode::deterministic));
    Rng unused(0);
    const EnvState start = det_env.reset(unused);
    CompartmentState init = start.model;
    // Integer start state with the same group totals.
    for (int c = 1; c < kCompartmentCount; ++c) init[static_cast<Compartment>(c)] = init[static_cast<Compartment>(c)].array().round();
    init.S = p.ages.population.array().round().matrix() - (init.group_totals() - init.S);

    const Action action{0.6, 0.5, 0.6};
    const Matrix target = effective_contact_matrix(p.contacts, action);
    const auto run = [&](SimulationMode mode, Rng& rng) {
        std::vector<double> s_daily;
        CompartmentState state = init;
        for (int day = 0; day < kMeanFieldDays; ++day) {
            const SimulationWindow w{0.0, static_cast<double>(day), 1};
            state = simulate_days(state, start.effective_matrix, target, w, mode, p.epi, p.contacts, rng);
            s_daily.push_back(state.S.sum());
        }
        return s_daily;
    };
    Rng rng0(0);
    const std::vector<double> det = run(SimulationMode::deterministic, rng0);
    std::vector<double> mean(det.size(), 0.0);
    for (int seed = 0; seed < kMeanFieldSeeds; ++seed) {
        Rng rng = make_stream(7, "acceptance/mean-field", static_cast<std::uint64_t>(seed));
        const std::vector<double> s = run(SimulationMode::stochastic, rng);
        for (std::size_t i = 0; i < s.size(); ++i) mean[i] += s[i] / kMeanFieldSeeds;
    }
    double worst = 0.0, worst_infected = 0.0;
    const double s0 = init.S.sum();
    for (std::size_t i = 0; i < det.size(); ++i) {
        worst = std::max(worst, std::abs(mean[i] - det[i]) / det[i]);
        worst_infected = std::max(worst_infected, std::abs((s0 - mean[i]) - (s0 - det[i])) / (s0 - det[i]));
    }
    const double secs = seconds_since(t0);
    report(2, worst <= kMeanFieldRel && secs < kMeanFieldSeconds,
           fmt("max rel deviation of aggregated S %.3g", worst) +
               fmt(" (of cumulative infections %.3g)", worst_infected) + fmt(", %.1fs", secs));
}

void criterion_metrics() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(99);
    double worst_hv = 0.0;
    bool eps_exact = true;
    for (int set = 0; set < kHvSets; ++set) {
        std::uniform_int_distribution<int> size(1, 20);
        pareto::PointSet pts;
        const int n = size(rng);
        for (int i = 0; i < n; ++i) pts.push_back({uniform01(rng), uniform01(rng)});
        const pareto::Point ref{0.0, 0.0};
        double top_x = 0.0, top_y = 0.0;
        for (const auto& q : pts) {
            top_x = std::max(top_x, q[0]);
            top_y = std::max(top_y, q[1]);
        }
        long hits = 0;
        for (int s = 0; s < kHvSamples; ++s) {
            const double x = uniform01(rng) * top_x;
            const double y = uniform01(rng) * top_y;
            for (const auto& q : pts) {
                if (q[0] >= x && q[1] >= y) {
                    ++hits;
                    break;
                }
            }
        }
        const double mc = static_cast<double>(hits) / kHvSamples * top_x * top_y;
        const double exact = pareto::hypervolume_2d(pts, ref);
        worst_hv = std::max(worst_hv, std::abs(mc - exact) / exact);

        pareto::PointSet cs;
        const int m = size(rng);
        for (int i = 0; i < m; ++i) cs.push_back({uniform01(rng), uniform01(rng)});
        const auto e = pareto::epsilon_indicators(pts, cs);
        double max_e = 0.0, sum_e = 0.0;
        for (const auto& f : pts) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : cs) best = std::min(best, std::max(f[0] - c[0], f[1] - c[1]));
            best = std::max(best, 0.0);
            max_e = std::max(max_e, best);
            sum_e += best;
        }
        eps_exact = eps_exact && e.max == max_e && std::abs(e.mean - sum_e / pts.size()) <= 1e-15;
    }
    const pareto::PointSet front{{1, 4}, {2, 2}, {4, 1}};
    const pareto::PointSet cs{{0.5, 3}, {0.75, 2.3}, {2.3, 1}, {3.3, 0.7}};
    const auto example = pareto::epsilon_indicators(front, cs);
    const double hv = pareto::hypervolume_2d(front, {-0.5, 0.0});
    const bool fixture = std::abs(example.max - 1.0) < 1e-12 && std::abs(example.mean - 0.9) < 1e-12 &&
                         std::abs(hv - 10.0) < 1e-12;
    const double secs = seconds_since(t0);
    report(3, worst_hv <= kHvRel && eps_exact && fixture && secs < kMetricSeconds,
           fmt("hypervolume vs Monte-Carlo max rel err %.3g", worst_hv) + (eps_exact ? ", epsilon exact" : ", epsilon MISMATCH") +
               fmt(", fixture I_eps %.6g", example.max) + fmt(" I_eps_mean %.6g", example.mean) + fmt(" HV %.6g", hv) +
               fmt(", %.1fs", secs));
}

void criterion_gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t checked = 0, skipped = 0;
    for (nn::Architecture arch : {nn::Architecture::dense_big, nn::Architecture::conv1d_big}) {
        for (int b = 0; b < kGradBatches; ++b) {
            nn::PolicyNetwork net = nn::PolicyNetwork::create(arch, 100 + b);
            Rng rng = make_stream(5, "acceptance/grad", static_cast<std::uint64_t>(b));
            nn::TrainingBatch batch;
            const int n = 16;
            batch.observations.resize(134, n);
            batch.conditioning.resize(3, n);
            batch.targets.resize(3, n);
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < 134; ++i) batch.observations(i, j) = uniform01(rng);
                batch.conditioning(0, j) = -40.0 * uniform01(rng);
                batch.conditioning(1, j) = -40.0 * uniform01(rng);
                batch.conditioning(2, j) = 1.0 + std::floor(17.0 * uniform01(rng));
                for (int i = 0; i < 3; ++i) batch.targets(i, j) = uniform01(rng);
            }
            const nn::GradientCheckResult r = nn::gradient_check(net, batch, kGradEps, 1000 + b);
            worst = std::max(worst, r.max_relative_error);
            checked += r.checked;
            skipped += r.skipped_kinks;
        }
    }
    const double secs = seconds_since(t0);
    report(4, worst < kGradRel && secs < kGradSeconds && checked >= 200 * 2 * kGradBatches,
           fmt("max relative error %.3g over both architectures", worst) +
               fmt(", %.0f weights checked", static_cast<double>(checked)) +
               fmt(", %.0f kink crossings skipped", static_cast<double>(skipped)) + fmt(", %.1fs", secs));
}

void criteria_pcn(const ModelParameters& p) {
    const MobelcovEnv env(p, env_config(p, SimulationMode::deterministic));
    const baseline::SweepResult sweep = baseline::fixed_policy_sweep(env);
    const pareto::PointSet fixed = sweep.front();

    std::vector<pareto::PointSet> fronts;
    std::vector<double> eps_means, secs;
    for (int s = 0; s < kPcnSeeds; ++s) {
        const auto t0 = std::chrono::steady_clock::now();
        pcn::TrainConfig cfg;
        cfg.total_steps = kPcnSteps;
        cfg.seed = static_cast<std::uint64_t>(s);
        const pcn::TrainResult result = pcn::train(env, cfg);
        pareto::PointSet achieved;
        for (const auto& c : result.coverage) achieved.push_back({c.achieved_return[0], c.achieved_return[1]});
        fronts.push_back(pareto::nondominated_filter(achieved));
        eps_means.push_back(pcn::evaluate_policies(result.network, result.coverage, env, 1, 1).epsilon_mean);
        secs.push_back(seconds_since(t0));
    }

    std::vector<const pareto::PointSet*> all{&fixed};
    for (const auto& f : fronts) all.push_back(&f);
    const pareto::Bounds bounds = pareto::bounds_of(all);
    const double hv_fixed = pareto::hypervolume_2d(pareto::normalize_points(fixed, bounds), {0, 0});
    int above = 0;
    bool floor_ok = true, time_ok = true;
    std::string detail = fmt("baseline HV %.4f; PCN HV", hv_fixed);
    for (int s = 0; s < kPcnSeeds; ++s) {
        const double hv = pareto::hypervolume_2d(pareto::normalize_points(fronts[s], bounds), {0, 0});
        floor_ok = floor_ok && hv >= hv_fixed + kPcnFloor;
        if (hv >= hv_fixed + kPcnMargin) ++above;
        time_ok = time_ok && secs[s] < kPcnSecondsPerSeed;
        detail += fmt(" %.4f", hv);
        detail += fmt(" (%.0fs)", secs[s]);
    }
    detail += "; seeds at least +0.02: " + std::to_string(above) + "/" + std::to_string(kPcnSeeds);
    report(5, floor_ok && above >= kPcnSeedsAboveMargin && time_ok, detail);

    double worst = 0.0;
    std::string eps_detail = "desired-vs-achieved I_eps_mean per seed:";
    for (double e : eps_means) {
        worst = std::max(worst, e);
        eps_detail += fmt(" %.4f", e);
    }
    report(6, worst <= kRobustEpsMean, eps_detail);
}

void criterion_protocol(const ModelParameters& p) {
    const auto t0 = std::chrono::steady_clock::now();
    const EnvConfig cfg = env_config(p, SimulationMode::deterministic);
    const MobelcovEnv env(p, cfg);
    Rng rng(0);
    std::vector<DailyRecord> burn;
    EnvState s = env.reset(rng, &burn);
    bool lockdown_ok = cfg.lockdown_action == Action{0.2, 0.0, 0.1} && burn.size() == 64;
    for (const DailyRecord& d : burn) {
        lockdown_ok = lockdown_ok && d.applied == (d.calendar_day < 13 ? Action{1, 1, 1} : Action{0.2, 0.0, 0.1});
    }
    int steps = 0;
    bool holiday_ok = true;
    while (!s.done) {
        bool full_holiday = true;
        for (int d = 0; d < 7; ++d) full_holiday = full_holiday && env.is_holiday(s.calendar_day + d);
        const StepResult open = env.step(s, Action{0.4, 1.0, 0.7}, rng);
        if (full_holiday) {
            const StepResult shut = env.step(s, Action{0.4, 0.0, 0.7}, rng);
            holiday_ok = holiday_ok && open.reward == shut.reward && open.state.model.S == shut.state.model.S &&
                         open.state.model.E == shut.state.model.E && open.state.model.R == shut.state.model.R;
        }
        s = open.state;
        ++steps;
    }
    const std::vector<double> grid = baseline::level_grid(100);
    const bool grid_ok = grid.size() == 100 && grid.front() == 0.0 && grid.back() == 1.0;
    const double secs = seconds_since(t0);
    report(7, lockdown_ok && holiday_ok && steps == 17 && grid_ok && secs < kProtocolSeconds,
           std::string("lockdown burn-in ") + (lockdown_ok ? "ok" : "WRONG") + ", holiday equivalence " +
               (holiday_ok ? "ok" : "BROKEN") + ", episode steps " + std::to_string(steps) + ", baseline grid " +
               std::to_string(grid.size()) + fmt(", %.1fs", secs));
}

void criterion_reproducibility(const ModelParameters& p) {
    const MobelcovEnv det(p, env_config(p, SimulationMode::deterministic));
    pcn::TrainConfig cfg;
    cfg.total_steps = kReproSteps;
    cfg.seed = 31;
    const std::string a = pcn::coverage_csv(pcn::train(det, cfg).coverage, det);
    const std::string b = pcn::coverage_csv(pcn::train(det, cfg).coverage, det);

    const MobelcovEnv sto(p, env_config(p, SimulationMode::stochastic));
    const auto trajectory = [&] {
        Rng rng = make_stream(17, "acceptance/replay");
        std::vector<DailyRecord> trace;
        EnvState s = sto.reset(rng, &trace);
        std::vector<double> out;
        while (!s.done) {
            const StepResult r = sto.step(s, Action{0.5, 0.3, 0.7}, rng, &trace);
            out.push_back(r.reward[0]);
            out.push_back(r.reward[1]);
            s = r.state;
        }
        for (const DailyRecord& d : trace) {
            out.push_back(d.hosp_admissions);
            out.push_back(d.deaths);
        }
        return out;
    };
    const bool same_csv = a == b && !a.empty();
    const bool same_traj = trajectory() == trajectory();
    report(8, same_csv && same_traj,
           std::string("coverage CSV ") + (same_csv ? "byte-identical" : "DIFFERS") + ", stochastic trajectory " +
               (same_traj ? "identical" : "DIFFERS"));
}

}  // namespace

int main() {
    const ModelParameters params = load_params();
    criterion_conservation(params);
    criterion_mean_field(params);
    criterion_metrics();
    criterion_gradients();
    criteria_pcn(params);
    criterion_protocol(params);
    criterion_reproducibility(params);
    std::printf("%d criterion failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
