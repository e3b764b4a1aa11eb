#include "mobelcov/epi_core.hpp"

#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "mobelcov/errors.hpp"

namespace mobelcov {

namespace {

void require_shape(const Matrix& m, int groups, const char* name) {
    if (m.rows() != groups || m.cols() != groups) {
        std::ostringstream os;
        os << "contact matrix '" << name << "' is " << m.rows() << "x" << m.cols() << ", expected "
           << groups << "x" << groups;
        throw ConfigError(os.str());
    }
    if (!m.allFinite() || (m.array() < 0.0).any()) {
        throw ConfigError(std::string("contact matrix '") + name + "' has negative or non-finite entries");
    }
}

void require_rates(const Vector& v, int groups, const char* name, bool probability) {
    if (v.size() != groups) {
        std::ostringstream os;
        os << "parameter '" << name << "' has " << v.size() << " entries, expected " << groups;
        throw ConfigError(os.str());
    }
    if (!v.allFinite() || (v.array() < 0.0).any() || (probability && (v.array() > 1.0).any())) {
        throw ConfigError(std::string("parameter '") + name + "' is out of range");
    }
}

void require_rate(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw ConfigError(std::string("parameter '") + name + "' must be a finite non-negative rate");
    }
}

// 1 - exp(-h * rate), the per-substep event probability.
double event_probability(double h, double rate) { return -std::expm1(-h * rate); }

std::int64_t count(double x) { return static_cast<std::int64_t>(std::llround(x)); }

}  // namespace

void AgeStructure::validate() const {
    if (population.size() < 1) throw ConfigError("age structure needs at least one group");
    if (!labels.empty() && static_cast<int>(labels.size()) != groups()) {
        throw ConfigError("age structure labels do not match the number of groups");
    }
    if (!population.allFinite() || (population.array() <= 0.0).any()) {
        throw ConfigError("every age group needs a positive population");
    }
}

CompartmentState CompartmentState::zeros(int groups) {
    const Vector z = Vector::Zero(groups);
    return CompartmentState{z, z, z, z, z, z, z, z, z, z, z};
}

CompartmentState CompartmentState::fully_susceptible(const Vector& population) {
    CompartmentState s = zeros(static_cast<int>(population.size()));
    s.S = population;
    return s;
}

Vector& CompartmentState::operator[](Compartment c) {
    switch (c) {
        case Compartment::S: return S;
        case Compartment::E: return E;
        case Compartment::IPresym: return I_presym;
        case Compartment::IAsym: return I_asym;
        case Compartment::IMild: return I_mild;
        case Compartment::ISev: return I_sev;
        case Compartment::IHosp: return I_hosp;
        case Compartment::IIcu: return I_icu;
        case Compartment::HNew: return H_new;
        case Compartment::D: return D;
        case Compartment::R: return R;
    }
    return S;
}

const Vector& CompartmentState::operator[](Compartment c) const {
    return const_cast<CompartmentState&>(*this)[c];
}

Vector CompartmentState::group_totals() const {
    return S + E + I_presym + I_asym + I_mild + I_sev + I_hosp + I_icu + D + R;
}

bool CompartmentState::is_disease_free() const {
    const Vector active = E + I_presym + I_asym + I_mild + I_sev + I_hosp + I_icu;
    return (active.array() == 0.0).all();
}

bool CompartmentState::is_integral() const {
    for (int c = 0; c < kCompartmentCount; ++c) {
        const Vector& v = (*this)[static_cast<Compartment>(c)];
        if (((v.array() - v.array().round()).abs() > 0.0).any()) return false;
    }
    return true;
}

bool CompartmentState::all_non_negative() const {
    for (int c = 0; c < kCompartmentCount; ++c) {
        if (((*this)[static_cast<Compartment>(c)].array() < 0.0).any()) return false;
    }
    return true;
}

void Action::validate() const {
    for (double v : {p_w, p_s, p_l}) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            std::ostringstream os;
            os << "action (" << p_w << ", " << p_s << ", " << p_l << ") is outside [0,1]^3";
            throw ValidationError(os.str());
        }
    }
}

Matrix ContactMatrixSet::full() const { return home + work + transport + school + leisure + other; }

void ContactMatrixSet::validate() const {
    const int k = groups();
    if (k < 1) throw ConfigError("contact matrices are empty");
    require_shape(home, k, "home");
    require_shape(work, k, "work");
    require_shape(transport, k, "transport");
    require_shape(school, k, "school");
    require_shape(leisure, k, "leisure");
    require_shape(other, k, "other");
    require_shape(asym, k, "asym");
    require_shape(sym, k, "sym");
}

void EpiParams::validate(int groups) const {
    require_rate(q_a, "q_a");
    require_rate(q_s, "q_s");
    require_rate(gamma_rate, "gamma_rate");
    require_rate(theta, "theta");
    require_rates(p, groups, "p", true);
    require_rates(psi, groups, "psi", false);
    require_rates(omega, groups, "omega", false);
    require_rates(phi1, groups, "phi1", true);
    require_rates(delta1, groups, "delta1", false);
    require_rates(delta2, groups, "delta2", false);
    require_rates(delta3, groups, "delta3", false);
    require_rates(delta4, groups, "delta4", false);
    require_rates(tau1, groups, "tau1", false);
    require_rates(tau2, groups, "tau2", false);
    if (!std::isfinite(beta0_star) || !std::isfinite(beta1_star)) {
        throw ConfigError("compliance coefficients must be finite");
    }
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("substep h must be positive");
    const double per_day = 1.0 / h;
    if (std::abs(per_day - std::round(per_day)) > 1e-9) {
        throw ConfigError("substep h must divide one day evenly");
    }
}

Flows Flows::zeros(int groups) {
    const Vector z = Vector::Zero(groups);
    return Flows{z, z, z, z, z, 0};
}

Flows& Flows::operator+=(const Flows& other) {
    infections += other.infections;
    hosp_admissions += other.hosp_admissions;
    icu_admissions += other.icu_admissions;
    deaths += other.deaths;
    recoveries += other.recoveries;
    clamped_entries += other.clamped_entries;
    return *this;
}

SimulationMode parse_mode(std::string_view name) {
    if (name == "deterministic" || name == "ode") return SimulationMode::deterministic;
    if (name == "stochastic" || name == "binomial") return SimulationMode::stochastic;
    throw ConfigError("unknown simulation mode '" + std::string(name) + "'");
}

std::string_view to_string(SimulationMode mode) {
    return mode == SimulationMode::deterministic ? "ode" : "binomial";
}

Matrix effective_contact_matrix(const ContactMatrixSet& cms, const Action& action) {
    cms.validate();
    return cms.home + action.p_w * (cms.work + cms.transport) + action.p_s * cms.school +
           action.p_l * (cms.leisure + cms.other);
}

double compliance_weight(double t, double t_intervention, const EpiParams& params) {
    const double x = params.beta0_star + params.beta1_star * (t - t_intervention);
    // Written in the numerically stable form of the logistic.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix blended_matrix(const Matrix& previous, const Matrix& target, double c) {
    if (previous.rows() != target.rows() || previous.cols() != target.cols()) {
        throw ConfigError("cannot blend contact matrices of different dimensions");
    }
    return (1.0 - c) * previous + c * target;
}

Transmission modulated_transmission(const ContactMatrixSet& cms, const EpiParams& params,
                                    const Matrix& effective) {
    const Matrix full = cms.full();
    if (effective.rows() != full.rows() || effective.cols() != full.cols()) {
        throw ConfigError("effective contact matrix has the wrong dimension");
    }
    Matrix ratio(full.rows(), full.cols());
    for (Eigen::Index i = 0; i < full.rows(); ++i) {
        for (Eigen::Index j = 0; j < full.cols(); ++j) {
            ratio(i, j) = full(i, j) > 0.0 ? effective(i, j) / full(i, j) : 1.0;
        }
    }
    return Transmission{params.q_a * cms.asym.cwiseProduct(ratio),
                        params.q_s * cms.sym.cwiseProduct(ratio)};
}

Transmission baseline_transmission(const ContactMatrixSet& cms, const EpiParams& params) {
    return Transmission{params.q_a * cms.asym, params.q_s * cms.sym};
}

Vector force_of_infection(const CompartmentState& state, const Transmission& rates) {
    Vector lambda = rates.beta_a * (state.I_presym + state.I_asym) +
                    rates.beta_s * (state.I_mild + state.I_sev);
    return lambda.cwiseMax(0.0);
}

Vector force_of_infection(const CompartmentState& state, const EpiParams& params,
                          const ContactMatrixSet& cms) {
    return force_of_infection(state, baseline_transmission(cms, params));
}

CompartmentState deterministic_substep(const CompartmentState& state, const Transmission& rates,
                                       const EpiParams& params, Flows* flows) {
    const double h = params.h;
    const auto one = Vector::Ones(state.groups()).array();
    const Vector lambda = force_of_infection(state, rates);

    const Vector infections = h * lambda.cwiseProduct(state.S);
    const Vector incubated = h * params.gamma_rate * state.E;
    const Vector presym_out = h * params.theta * state.I_presym;
    const Vector to_asym = presym_out.cwiseProduct(params.p);
    const Vector to_mild = presym_out.array() * (one - params.p.array());
    const Vector asym_recovered = h * params.delta1.cwiseProduct(state.I_asym);
    const Vector to_severe = h * params.psi.cwiseProduct(state.I_mild);
    const Vector mild_recovered = h * params.delta2.cwiseProduct(state.I_mild);
    const Vector severe_out = h * params.omega.cwiseProduct(state.I_sev);
    const Vector to_hosp = severe_out.cwiseProduct(params.phi1);
    const Vector to_icu = severe_out.array() * (one - params.phi1.array());
    const Vector hosp_recovered = h * params.delta3.cwiseProduct(state.I_hosp);
    const Vector hosp_died = h * params.tau1.cwiseProduct(state.I_hosp);
    const Vector icu_recovered = h * params.delta4.cwiseProduct(state.I_icu);
    const Vector icu_died = h * params.tau2.cwiseProduct(state.I_icu);

    CompartmentState next = state;
    next.S -= infections;
    next.E += infections - incubated;
    next.I_presym += incubated - presym_out;
    next.I_asym += to_asym - asym_recovered;
    next.I_mild += to_mild - to_severe - mild_recovered;
    next.I_sev += to_severe - severe_out;
    next.I_hosp += to_hosp - hosp_recovered - hosp_died;
    next.I_icu += to_icu - icu_recovered - icu_died;
    next.H_new += to_hosp;
    next.D += hosp_died + icu_died;
    next.R += asym_recovered + mild_recovered + hosp_recovered + icu_recovered;

    std::size_t clamped = 0;
    for (int c = 0; c < kCompartmentCount; ++c) {
        Vector& v = next[static_cast<Compartment>(c)];
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            if (v[k] < 0.0) {
                v[k] = 0.0;
                ++clamped;
            }
        }
    }
    if (clamped > 0) {
        spdlog::debug("deterministic substep clamped {} negative compartment entries", clamped);
    }

    if (flows != nullptr) {
        flows->infections += infections;
        flows->hosp_admissions += to_hosp;
        flows->icu_admissions += to_icu;
        flows->deaths += hosp_died + icu_died;
        flows->recoveries += asym_recovered + mild_recovered + hosp_recovered + icu_recovered;
        flows->clamped_entries += clamped;
    }
    return next;
}

CompartmentState stochastic_substep(const CompartmentState& state, const Transmission& rates,
                                    const EpiParams& params, Rng& rng, Flows* flows) {
    const double h = params.h;
    const int groups = state.groups();
    const Vector lambda = force_of_infection(state, rates);
    CompartmentState next = state;

    for (int k = 0; k < groups; ++k) {
        const std::int64_t infections = binomial(rng, count(state.S[k]), event_probability(h, lambda[k]));
        const std::int64_t incubated = binomial(rng, count(state.E[k]), event_probability(h, params.gamma_rate));

        const std::int64_t presym_out = binomial(rng, count(state.I_presym[k]), event_probability(h, params.theta));
        const std::int64_t to_asym = binomial(rng, presym_out, params.p[k]);
        const std::int64_t to_mild = presym_out - to_asym;

        const std::int64_t asym_recovered =
            binomial(rng, count(state.I_asym[k]), event_probability(h, params.delta1[k]));

        const double mild_rate = params.psi[k] + params.delta2[k];
        const std::int64_t mild_out = binomial(rng, count(state.I_mild[k]), event_probability(h, mild_rate));
        const std::int64_t to_severe = mild_rate > 0.0 ? binomial(rng, mild_out, params.psi[k] / mild_rate) : 0;
        const std::int64_t mild_recovered = mild_out - to_severe;

        const std::int64_t severe_out = binomial(rng, count(state.I_sev[k]), event_probability(h, params.omega[k]));
        const std::int64_t to_hosp = binomial(rng, severe_out, params.phi1[k]);
        const std::int64_t to_icu = severe_out - to_hosp;

        const double hosp_rate = params.delta3[k] + params.tau1[k];
        const std::int64_t hosp_out = binomial(rng, count(state.I_hosp[k]), event_probability(h, hosp_rate));
        const std::int64_t hosp_died = hosp_rate > 0.0 ? binomial(rng, hosp_out, params.tau1[k] / hosp_rate) : 0;
        const std::int64_t hosp_recovered = hosp_out - hosp_died;

        const double icu_rate = params.delta4[k] + params.tau2[k];
        const std::int64_t icu_out = binomial(rng, count(state.I_icu[k]), event_probability(h, icu_rate));
        const std::int64_t icu_died = icu_rate > 0.0 ? binomial(rng, icu_out, params.tau2[k] / icu_rate) : 0;
        const std::int64_t icu_recovered = icu_out - icu_died;

        const auto d = [](std::int64_t x) { return static_cast<double>(x); };
        next.S[k] -= d(infections);
        next.E[k] += d(infections - incubated);
        next.I_presym[k] += d(incubated - presym_out);
        next.I_asym[k] += d(to_asym - asym_recovered);
        next.I_mild[k] += d(to_mild - mild_out);
        next.I_sev[k] += d(to_severe - severe_out);
        next.I_hosp[k] += d(to_hosp - hosp_out);
        next.I_icu[k] += d(to_icu - icu_out);
        next.H_new[k] += d(to_hosp);
        next.D[k] += d(hosp_died + icu_died);
        next.R[k] += d(asym_recovered + mild_recovered + hosp_recovered + icu_recovered);

        if (flows != nullptr) {
            flows->infections[k] += d(infections);
            flows->hosp_admissions[k] += d(to_hosp);
            flows->icu_admissions[k] += d(to_icu);
            flows->deaths[k] += d(hosp_died + icu_died);
            flows->recoveries[k] += d(asym_recovered + mild_recovered + hosp_recovered + icu_recovered);
        }
    }
    return next;
}

int substeps_per_day(const EpiParams& params) { return static_cast<int>(std::lround(1.0 / params.h)); }

CompartmentState simulate_days(const CompartmentState& state, const Matrix& previous,
                               const Matrix& target, const SimulationWindow& window,
                               SimulationMode mode, const EpiParams& params,
                               const ContactMatrixSet& cms, Rng& rng, Flows* flows) {
    if (window.n_days < 1) throw ValidationError("simulate_days needs n_days >= 1");
    if (previous.rows() != target.rows() || previous.cols() != target.cols()) {
        throw ConfigError("cannot blend contact matrices of different dimensions");
    }
    // Modulation is linear in the effective matrix, so blending the two endpoint
    // transmission sets equals modulating the blended contact matrix.
    const Transmission from = modulated_transmission(cms, params, previous);
    const Transmission to = modulated_transmission(cms, params, target);
    Transmission rates = from;

    const int steps = window.n_days * substeps_per_day(params);
    CompartmentState current = state;
    for (int s = 0; s < steps; ++s) {
        const double t = window.t_start + s * params.h;
        const double c = compliance_weight(t, window.t_intervention, params);
        rates.beta_a = (1.0 - c) * from.beta_a + c * to.beta_a;
        rates.beta_s = (1.0 - c) * from.beta_s + c * to.beta_s;
        current = mode == SimulationMode::deterministic
                      ? deterministic_substep(current, rates, params, flows)
                      : stochastic_substep(current, rates, params, rng, flows);
    }
    return current;
}

}  // namespace mobelcov
