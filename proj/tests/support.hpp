#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "mobelcov/env.hpp"
#include "mobelcov/epi_core.hpp"
#include "mobelcov/params_io.hpp"
#include "mobelcov/rng.hpp"

namespace test_support {

using namespace mobelcov;

inline std::filesystem::path data_dir() { return MOBELCOV_TEST_DATA_DIR; }

inline const ModelParameters& default_params() {
    static const ModelParameters params = load_model_parameters(data_dir() / "default_params.json");
    return params;
}

inline EnvConfig default_env_config(SimulationMode mode = SimulationMode::deterministic) {
    EnvConfig cfg;
    cfg.mode = mode;
    cfg.seed_infections = default_seed_infections(default_params().ages.groups());
    return cfg;
}

inline MobelcovEnv default_env(SimulationMode mode = SimulationMode::deterministic) {
    return MobelcovEnv(default_params(), default_env_config(mode));
}

inline Vector constant(int k, double v) { return Vector::Constant(k, v); }

/// Single-group parameter set with every rate zero unless overridden.
inline EpiParams zero_rates(int k = 1) {
    EpiParams p;
    p.p = p.psi = p.omega = p.phi1 = constant(k, 0.0);
    p.delta1 = p.delta2 = p.delta3 = p.delta4 = p.tau1 = p.tau2 = constant(k, 0.0);
    p.beta1_star = 1.0;
    return p;
}

inline ContactMatrixSet scalar_contacts(double home, double work, double transport, double school,
                                        double leisure, double other) {
    ContactMatrixSet c;
    const auto m = [](double v) { return Matrix::Constant(1, 1, v); };
    c.home = m(home);
    c.work = m(work);
    c.transport = m(transport);
    c.school = m(school);
    c.leisure = m(leisure);
    c.other = m(other);
    c.asym = c.sym = m(home + work + transport + school + leisure + other);
    return c;
}

/// Integer-valued random state whose group totals equal `population` (rounded).
inline CompartmentState random_state(const Vector& population, Rng& rng, bool integral) {
    const int k = static_cast<int>(population.size());
    CompartmentState s = CompartmentState::zeros(k);
    for (int g = 0; g < k; ++g) {
        double weights[9];
        double total = 0.0;
        for (double& w : weights) {
            w = uniform01(rng);
            total += w;
        }
        // Mostly susceptible with a random infected tail.
        const double n = integral ? std::round(population[g]) : population[g];
        double remaining = n;
        const int order[9] = {1, 2, 3, 4, 5, 6, 7, 9, 10};  // every compartment but S and H_new
        for (int i = 0; i < 9; ++i) {
            double v = 0.05 * n * weights[i] / total;
            if (integral) v = std::floor(v);
            s[static_cast<Compartment>(order[i])][g] = v;
            remaining -= v;
        }
        s.S[g] = remaining;
    }
    return s;
}

}  // namespace test_support
