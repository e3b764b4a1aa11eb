#include "mobelcov/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "mobelcov/baseline.hpp"
#include "mobelcov/csv.hpp"
#include "mobelcov/env.hpp"
#include "mobelcov/errors.hpp"
#include "mobelcov/nn/checkpoint.hpp"
#include "mobelcov/params_io.hpp"
#include "mobelcov/pareto.hpp"
#include "mobelcov/pcn.hpp"

#ifndef MOBELCOV_VERSION
#define MOBELCOV_VERSION "unknown"
#endif
#ifndef MOBELCOV_DATA_DIR
#define MOBELCOV_DATA_DIR "data"
#endif

namespace mobelcov::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::string params;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string mode;
    std::string objectives;
    long steps = 0;
    std::string out = "out";
    int repeats = 0;
    // subcommand-specific
    int levels = 100;
    std::string checkpoint;
    std::string coverage;
    int policy_id = -1;
    std::optional<double> level;
    std::vector<std::string> sets;
    std::string fixture;
    std::string log_level = "warn";
};

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

struct Setup {
    json config;  // config file contents (empty object when none given)
    fs::path params_path;
    ModelParameters params;
    EnvConfig env_cfg;
};

Setup load_setup(const Options& opt) {
    Setup s;
    s.config = json::object();
    fs::path base = ".";
    if (!opt.config.empty()) {
        s.config = read_json(opt.config);
        base = fs::path(opt.config).parent_path();
    }
    if (!opt.params.empty()) {
        s.params_path = opt.params;
    } else if (s.config.contains("params")) {
        s.params_path = base / s.config.at("params").get<std::string>();
    } else {
        s.params_path = fs::path(MOBELCOV_DATA_DIR) / "default_params.json";
    }
    s.params = load_model_parameters(s.params_path);
    json env_doc = s.config.contains("env") ? s.config.at("env") : json::object();
    if (!opt.mode.empty()) env_doc["mode"] = opt.mode;
    if (!opt.objectives.empty()) env_doc["objectives"] = opt.objectives;
    s.env_cfg = parse_env_config(env_doc, s.params.ages.groups());
    return s;
}

pcn::TrainConfig train_config(const json& config, const Options& opt) {
    pcn::TrainConfig cfg;
    if (config.contains("train")) {
        const json& t = config.at("train");
        if (t.contains("architecture")) cfg.architecture = nn::parse_architecture(t.at("architecture").get<std::string>());
        cfg.learning_rate = t.value("learning_rate", cfg.learning_rate);
        cfg.total_steps = t.value("total_steps", cfg.total_steps);
        cfg.batch_size = t.value("batch_size", cfg.batch_size);
        cfg.model_updates = t.value("model_updates", cfg.model_updates);
        cfg.episodes_between_updates = t.value("episodes_between_updates", cfg.episodes_between_updates);
        cfg.buffer_capacity = t.value("buffer_capacity", cfg.buffer_capacity);
        cfg.warmup_episodes = t.value("warmup_episodes", cfg.warmup_episodes);
        cfg.exploration_noise = t.value("exploration_noise", cfg.exploration_noise);
        cfg.desired_return_noise = t.value("desired_return_noise", cfg.desired_return_noise);
        cfg.input_return_noise = t.value("input_return_noise", cfg.input_return_noise);
        cfg.eval_repeats = t.value("eval_repeats", cfg.eval_repeats);
    }
    if (opt.steps > 0) cfg.total_steps = opt.steps;
    if (opt.repeats > 0) cfg.eval_repeats = opt.repeats;
    return cfg;
}

json to_json(const pcn::TrainConfig& cfg) {
    return {{"architecture", std::string(nn::to_string(cfg.architecture))},
            {"learning_rate", cfg.learning_rate},
            {"total_steps", cfg.total_steps},
            {"batch_size", cfg.batch_size},
            {"model_updates", cfg.model_updates},
            {"episodes_between_updates", cfg.episodes_between_updates},
            {"buffer_capacity", cfg.buffer_capacity},
            {"warmup_episodes", cfg.warmup_episodes},
            {"exploration_noise", cfg.exploration_noise},
            {"desired_return_noise", cfg.desired_return_noise},
            {"input_return_noise", cfg.input_return_noise},
            {"eval_repeats", cfg.eval_repeats},
            {"seed", cfg.seed}};
}

void write_metadata(const fs::path& dir, const std::string& command, const std::vector<std::string>& args,
                    json snapshot) {
    fs::create_directories(dir);
    json meta = {{"command", command}, {"arguments", args}, {"version", MOBELCOV_VERSION},
                 {"csv_schema_version", std::string(kCsvSchemaVersion)}, {"config", std::move(snapshot)}};
    write_file_atomic(dir / "metadata.json", meta.dump(2) + "\n");
}

json env_snapshot(const Setup& s) {
    return {{"params_path", s.params_path.string()}, {"params", to_json(s.params)}, {"env", to_json(s.env_cfg)}};
}

std::vector<std::uint64_t> seed_list(const Setup& s, const Options& opt) {
    if (opt.seed_given || !s.config.contains("seeds")) return {opt.seed};
    const auto seeds = s.config.at("seeds").get<std::vector<std::uint64_t>>();
    if (seeds.empty()) throw ConfigError("config seed list is empty");
    return seeds;
}

int cmd_train(const Options& opt, const std::vector<std::string>& args) {
    const Setup s = load_setup(opt);
    const MobelcovEnv env(s.params, s.env_cfg);
    const std::vector<std::uint64_t> seeds = seed_list(s, opt);
    for (std::uint64_t seed : seeds) {
        pcn::TrainConfig cfg = train_config(s.config, opt);
        cfg.seed = seed;
        cfg.validate(env.horizon());
        const fs::path dir = seeds.size() == 1 ? fs::path(opt.out) : fs::path(opt.out) / ("seed_" + std::to_string(seed));
        fs::create_directories(dir);
        json snapshot = env_snapshot(s);
        snapshot["train"] = to_json(cfg);
        snapshot["seed"] = seed;
        write_metadata(dir, "train", args, snapshot);
        const pcn::TrainResult result = pcn::train(env, cfg, [](const pcn::TrainLogRow& row) {
            spdlog::info("steps {} buffer {} hypervolume {:.6g} loss {:.6g}", row.steps, row.buffer_size,
                         row.hypervolume, row.loss);
        });
        nn::save_checkpoint(dir / "checkpoint.bin", result.network);
        write_file_atomic(dir / "coverage.csv", pcn::coverage_csv(result.coverage, env));
        write_file_atomic(dir / "train_log.csv", pcn::train_log_csv(result.log));
        std::cout << "seed " << seed << ": " << result.coverage.size() << " coverage points after " << result.steps
                  << " steps -> " << dir.string() << "\n";
    }
    return 0;
}

int cmd_sweep(const Options& opt, const std::vector<std::string>& args) {
    const Setup s = load_setup(opt);
    const MobelcovEnv env(s.params, s.env_cfg);
    const int repeats = opt.repeats > 0 ? opt.repeats : 1;
    json snapshot = env_snapshot(s);
    snapshot["levels"] = opt.levels;
    snapshot["repeats"] = repeats;
    snapshot["seed"] = opt.seed;
    write_metadata(opt.out, "sweep", args, snapshot);
    const baseline::SweepResult sweep = baseline::fixed_policy_sweep(env, opt.levels, repeats, opt.seed);
    write_file_atomic(fs::path(opt.out) / "baseline.csv", baseline::sweep_csv(sweep, env));
    std::cout << sweep.front().size() << " of " << sweep.policies.size() << " fixed policies non-dominated\n";
    return 0;
}

int cmd_evaluate(const Options& opt, const std::vector<std::string>& args) {
    const Setup s = load_setup(opt);
    const MobelcovEnv env(s.params, s.env_cfg);
    const int repeats = opt.repeats > 0 ? opt.repeats : (s.env_cfg.mode == SimulationMode::stochastic ? 10 : 1);
    json snapshot = env_snapshot(s);
    snapshot["checkpoint"] = opt.checkpoint;
    snapshot["coverage"] = opt.coverage;
    snapshot["repeats"] = repeats;
    snapshot["seed"] = opt.seed;
    write_metadata(opt.out, "evaluate", args, snapshot);
    const nn::PolicyNetwork net = nn::load_checkpoint(opt.checkpoint);
    const pcn::CoverageSet coverage = pcn::read_coverage_csv(opt.coverage, env);
    const pcn::RobustnessReport report = pcn::evaluate_policies(net, coverage, env, repeats, opt.seed);
    write_file_atomic(fs::path(opt.out) / "robustness.csv", pcn::robustness_csv(report, env));
    std::cout << "I_eps " << format_double(report.epsilon) << " I_eps_mean " << format_double(report.epsilon_mean)
              << " over " << report.rows.size() << " policies\n";
    return 0;
}

struct NamedSet {
    std::string label;
    pareto::PointSet points;
};

// Points of a coverage CSV (achieved returns), a baseline CSV (non-dominated
// rows) or any CSV with return_0/return_1 columns, in raw units.
pareto::PointSet read_point_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    pareto::PointSet out;
    const bool coverage = t.column("achieved_return_0") >= 0;
    const bool has_flag = t.column("nondominated") >= 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (coverage) {
            out.push_back({t.number(r, "achieved_return_0"), t.number(r, "achieved_return_1")});
        } else {
            if (has_flag && t.number(r, "nondominated") == 0.0) continue;
            out.push_back({t.number(r, "return_0"), t.number(r, "return_1")});
        }
    }
    return pareto::nondominated_filter(out);
}

void write_metrics_report(const fs::path& path, const std::vector<NamedSet>& sets, const pareto::PointSet& front,
                          const std::function<pareto::PointSet(const pareto::PointSet&)>& transform,
                          const pareto::Point& ref, const pareto::Bounds& bounds) {
    CsvWriter csv({"set", "hypervolume", "i_eps", "i_eps_mean", "lo_0", "hi_0", "lo_1", "hi_1"});
    const pareto::PointSet tf = transform(front);
    for (const NamedSet& set : sets) {
        const pareto::PointSet p = transform(set.points);
        const double hv = pareto::hypervolume_2d(p, ref);
        const auto eps = pareto::epsilon_indicators(tf, p);
        csv.row({set.label, format_double(hv), format_double(eps.max), format_double(eps.mean),
                 format_double(bounds.lo[0]), format_double(bounds.hi[0]), format_double(bounds.lo[1]),
                 format_double(bounds.hi[1])});
        std::cout << set.label << ": hypervolume " << format_double(hv) << " I_eps " << format_double(eps.max)
                  << " I_eps_mean " << format_double(eps.mean) << "\n";
    }
    csv.save(path);
}

int cmd_metrics(const Options& opt, const std::vector<std::string>& args) {
    json snapshot = {{"sets", opt.sets}, {"fixture", opt.fixture}};
    write_metadata(opt.out, "metrics", args, snapshot);
    const fs::path report = fs::path(opt.out) / "metrics.csv";
    if (!opt.fixture.empty()) {
        if (opt.fixture != "epsilon-example") throw ConfigError("unknown fixture '" + opt.fixture + "'");
        // Raw-unit fixture: reference front, a coverage set, reference point (-0.5, 0).
        const pareto::PointSet front{{1, 4}, {2, 2}, {4, 1}};
        const pareto::PointSet cs{{0.5, 3}, {0.75, 2.3}, {2.3, 1}, {3.3, 0.7}};
        const std::vector<NamedSet> sets{{"front", front}, {"coverage", cs}};
        const pareto::Bounds raw{{0, 0}, {1, 1}};
        write_metrics_report(report, sets, front, [](const pareto::PointSet& p) { return p; }, {-0.5, 0.0}, raw);
        return 0;
    }
    if (opt.sets.empty()) throw ConfigError("metrics needs --set label=path or --fixture epsilon-example");
    std::vector<NamedSet> sets;
    for (const std::string& spec : opt.sets) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects label=path, got '" + spec + "'");
        sets.push_back({spec.substr(0, eq), read_point_csv(spec.substr(eq + 1))});
        if (sets.back().points.empty()) throw ConfigError("set '" + sets.back().label + "' has no points");
    }
    std::vector<const pareto::PointSet*> ptrs;
    pareto::PointSet all;
    for (const NamedSet& s : sets) {
        ptrs.push_back(&s.points);
        all.insert(all.end(), s.points.begin(), s.points.end());
    }
    const pareto::Bounds bounds = pareto::bounds_of(ptrs);
    const pareto::PointSet front = pareto::nondominated_filter(all);
    write_metrics_report(
        report, sets, front, [&](const pareto::PointSet& p) { return pareto::normalize_points(p, bounds); },
        {0.0, 0.0}, bounds);
    return 0;
}

int cmd_rollout(const Options& opt, const std::vector<std::string>& args) {
    const Setup s = load_setup(opt);
    const MobelcovEnv env(s.params, s.env_cfg);
    json snapshot = env_snapshot(s);
    snapshot["seed"] = opt.seed;
    std::vector<DailyRecord> trace;
    Rng rng = make_stream(opt.seed, "cli/rollout");
    if (opt.level.has_value()) {
        if (*opt.level < 0.0 || *opt.level > 1.0) throw ConfigError("--level must lie in [0,1]");
        snapshot["level"] = *opt.level;
        write_metadata(opt.out, "rollout", args, snapshot);
        const Action a{*opt.level, *opt.level, *opt.level};
        EnvState state = env.reset(rng, &trace);
        while (!state.done) state = env.step(state, a, rng, &trace).state;
    } else {
        if (opt.checkpoint.empty() || opt.coverage.empty() || opt.policy_id < 0) {
            throw ConfigError("rollout needs --level, or --checkpoint, --coverage and --policy-id");
        }
        snapshot["checkpoint"] = opt.checkpoint;
        snapshot["coverage"] = opt.coverage;
        snapshot["policy_id"] = opt.policy_id;
        write_metadata(opt.out, "rollout", args, snapshot);
        const nn::PolicyNetwork net = nn::load_checkpoint(opt.checkpoint);
        const pcn::CoverageSet coverage = pcn::read_coverage_csv(opt.coverage, env);
        const auto it = std::find_if(coverage.begin(), coverage.end(),
                                     [&](const pcn::CoveragePoint& p) { return p.policy_id == opt.policy_id; });
        if (it == coverage.end()) throw ConfigError("policy id " + std::to_string(opt.policy_id) + " not in coverage set");
        pcn::run_episode(env, net, it->target, 0.0, rng, &trace);
    }
    CsvWriter csv({"dates", "i_hosp_new", "i_icu_new", "d_new", "p_w", "p_s", "p_l"});
    for (const DailyRecord& d : trace) {
        csv.row({env.date_of(d.calendar_day), format_double(d.hosp_admissions), format_double(d.icu_admissions),
                 format_double(d.deaths), format_double(d.applied.p_w), format_double(d.applied.p_s),
                 format_double(d.applied.p_l)});
    }
    csv.save(fs::path(opt.out) / "rollout.csv");
    std::cout << trace.size() << " days written\n";
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"MOBelCov: multi-objective epidemic control with Pareto Conditioned Networks", "mobelcov"};
    app.set_version_flag("--version", MOBELCOV_VERSION);
    app.require_subcommand(1);
    Options opt;

    const auto common = [&](CLI::App* sub, bool env_options) {
        sub->add_option("--out", opt.out, "output directory")->envname("MOBELCOV_OUT");
        sub->add_option("--log-level", opt.log_level, "trace|debug|info|warn|error")->envname("MOBELCOV_LOG_LEVEL");
        sub->add_option("--seed", opt.seed, "master seed")->envname("MOBELCOV_SEED");
        if (!env_options) return;
        sub->add_option("--config", opt.config, "experiment config JSON")->envname("MOBELCOV_CONFIG");
        sub->add_option("--params", opt.params, "model parameter JSON")->envname("MOBELCOV_PARAMS");
        sub->add_option("--mode", opt.mode, "ode|binomial")
            ->check(CLI::IsMember({"ode", "binomial"}))
            ->envname("MOBELCOV_MODE");
        sub->add_option("--objectives", opt.objectives, "arh-sb|ari-sb")
            ->check(CLI::IsMember({"arh-sb", "ari-sb"}))
            ->envname("MOBELCOV_OBJECTIVES");
        sub->add_option("--repeats", opt.repeats, "evaluation repeats")
            ->check(CLI::PositiveNumber)
            ->envname("MOBELCOV_REPEATS");
    };

    CLI::App* train = app.add_subcommand("train", "train PCN and write checkpoint, coverage set and log");
    common(train, true);
    train->add_option("--steps", opt.steps, "environment step budget")
        ->check(CLI::PositiveNumber)
        ->envname("MOBELCOV_STEPS");

    CLI::App* sweep = app.add_subcommand("sweep", "fixed-policy baseline sweep");
    common(sweep, true);
    sweep->add_option("--levels", opt.levels, "number of restriction levels")->envname("MOBELCOV_LEVELS");

    CLI::App* evaluate = app.add_subcommand("evaluate", "desired-vs-achieved robustness of a coverage set");
    common(evaluate, true);
    evaluate->add_option("--checkpoint", opt.checkpoint, "checkpoint file")->required();
    evaluate->add_option("--coverage", opt.coverage, "coverage CSV")->required();

    CLI::App* metrics = app.add_subcommand("metrics", "hypervolume and epsilon report over solution sets");
    common(metrics, false);
    metrics->add_option("--set", opt.sets, "label=path of a coverage or baseline CSV");
    metrics->add_option("--fixture", opt.fixture, "built-in fixture (epsilon-example)");

    CLI::App* rollout = app.add_subcommand("rollout", "daily trajectory of one policy");
    common(rollout, true);
    rollout->add_option("--checkpoint", opt.checkpoint, "checkpoint file");
    rollout->add_option("--coverage", opt.coverage, "coverage CSV");
    rollout->add_option("--policy-id", opt.policy_id, "coverage-set policy id");
    rollout->add_option("--level", opt.level, "fixed restriction level instead of a learned policy");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        spdlog::set_level(spdlog::level::from_str(opt.log_level));
        for (CLI::App* sub : {train, sweep, evaluate, metrics, rollout}) {
            if (sub->parsed()) opt.seed_given = sub->count("--seed") > 0 || std::getenv("MOBELCOV_SEED") != nullptr;
        }
        if (train->parsed()) return cmd_train(opt, args);
        if (sweep->parsed()) return cmd_sweep(opt, args);
        if (evaluate->parsed()) return cmd_evaluate(opt, args);
        if (metrics->parsed()) return cmd_metrics(opt, args);
        if (rollout->parsed()) return cmd_rollout(opt, args);
    } catch (const std::exception& e) {
        std::cerr << "mobelcov: error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace mobelcov::cli
