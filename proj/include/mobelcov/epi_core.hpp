#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mobelcov/rng.hpp"

namespace mobelcov {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct AgeStructure {
    std::vector<std::string> labels;
    Vector population;  // N_k, one entry per age group

    int groups() const { return static_cast<int>(population.size()); }
    double total() const { return population.sum(); }
    void validate() const;
};

enum class Compartment : int { S, E, IPresym, IAsym, IMild, ISev, IHosp, IIcu, HNew, D, R };

inline constexpr int kCompartmentCount = 11;
inline constexpr std::array<std::string_view, kCompartmentCount> kCompartmentNames = {
    "S", "E", "I_presym", "I_asym", "I_mild", "I_sev", "I_hosp", "I_icu", "H_new", "D", "R"};

/// Person counts per age group for every tracked compartment. Values are real in
/// deterministic mode and integral (stored exactly in doubles) in stochastic mode.
/// H_new counts hospital admissions and is excluded from the population total.
struct CompartmentState {
    Vector S, E, I_presym, I_asym, I_mild, I_sev, I_hosp, I_icu, H_new, D, R;

    static CompartmentState zeros(int groups);
    static CompartmentState fully_susceptible(const Vector& population);

    int groups() const { return static_cast<int>(S.size()); }

    Vector& operator[](Compartment c);
    const Vector& operator[](Compartment c) const;

    /// Per-group population, i.e. every compartment except H_new.
    Vector group_totals() const;
    double total() const { return group_totals().sum(); }

    /// True when no one is exposed or infectious.
    bool is_disease_free() const;
    bool is_integral() const;
    bool all_non_negative() const;
};

/// Proportional contact levels for work (incl. transport), school and leisure (incl. other).
struct Action {
    double p_w = 1.0;
    double p_s = 1.0;
    double p_l = 1.0;

    /// Throws ValidationError unless every component is finite and in [0,1].
    void validate() const;
    bool operator==(const Action&) const = default;
};

struct ContactMatrixSet {
    Matrix home, work, transport, school, leisure, other;
    // Matrices used to build the asymptomatic/symptomatic transmission rates.
    Matrix asym, sym;

    int groups() const { return static_cast<int>(home.rows()); }
    /// Sum of the six location matrices.
    Matrix full() const;
    void validate() const;
};

struct EpiParams {
    double q_a = 0.0;
    double q_s = 0.0;
    double gamma_rate = 0.0;  // E -> I_presym
    double theta = 0.0;       // I_presym exit
    Vector p;                 // probability of an asymptomatic course
    Vector psi;               // I_mild -> I_sev
    Vector omega;             // I_sev -> hospital / ICU
    Vector phi1;              // share of severe cases admitted to a regular ward
    Vector delta1, delta2, delta3, delta4;  // recovery: asym, mild, hosp, icu
    Vector tau1, tau2;                      // death: hosp, icu
    double beta0_star = -5.0;
    double beta1_star = 0.0;
    double h = 1.0 / 24.0;

    void validate(int groups) const;
};

/// Transmission matrices in effect for one substep: q_a * C_asym and q_s * C_sym,
/// each modulated by the currently effective contact matrix.
struct Transmission {
    Matrix beta_a;
    Matrix beta_s;
};

/// Flows accumulated over one or more substeps, per age group.
struct Flows {
    Vector infections, hosp_admissions, icu_admissions, deaths, recoveries;
    std::size_t clamped_entries = 0;

    static Flows zeros(int groups);
    Flows& operator+=(const Flows& other);
};

enum class SimulationMode { deterministic, stochastic };

SimulationMode parse_mode(std::string_view name);
std::string_view to_string(SimulationMode mode);

/// C_home + p_w (C_work + C_transport) + p_s C_school + p_l (C_leisure + C_other).
Matrix effective_contact_matrix(const ContactMatrixSet& cms, const Action& action);

/// Logistic ramp exp(b0 + b1 (t - t_I)) / (1 + exp(b0 + b1 (t - t_I))).
double compliance_weight(double t, double t_intervention, const EpiParams& params);

/// (1 - c) C_prev + c C_target.
Matrix blended_matrix(const Matrix& previous, const Matrix& target, double c);

/// Asymptomatic and symptomatic transmission rates under the effective matrix
/// `effective`. Each location-level reduction applies to C_asym and C_sym in the
/// same proportion as to the aggregate matrix.
Transmission modulated_transmission(const ContactMatrixSet& cms, const EpiParams& params,
                                    const Matrix& effective);

/// Unmodulated rates q_a C_asym and q_s C_sym.
Transmission baseline_transmission(const ContactMatrixSet& cms, const EpiParams& params);

Vector force_of_infection(const CompartmentState& state, const Transmission& rates);
Vector force_of_infection(const CompartmentState& state, const EpiParams& params,
                          const ContactMatrixSet& cms);

/// One forward-Euler step of length h. Negative results are clamped to zero and
/// counted in `flows->clamped_entries`.
CompartmentState deterministic_substep(const CompartmentState& state, const Transmission& rates,
                                       const EpiParams& params, Flows* flows = nullptr);

/// One chain-binomial step of length h. Competing exits from a compartment are
/// drawn as one Binomial at the summed rate, then split by relative rate.
CompartmentState stochastic_substep(const CompartmentState& state, const Transmission& rates,
                                    const EpiParams& params, Rng& rng, Flows* flows = nullptr);

struct SimulationWindow {
    double t_intervention = 0.0;  // t_I, anchor of the compliance ramp
    double t_start = 0.0;         // day of the first substep
    int n_days = 1;
};

/// Runs n_days / h substeps; at each substep the effective matrix is
/// blended_matrix(C_prev, C_target, compliance_weight(t, t_I)).
CompartmentState simulate_days(const CompartmentState& state, const Matrix& previous,
                               const Matrix& target, const SimulationWindow& window,
                               SimulationMode mode, const EpiParams& params,
                               const ContactMatrixSet& cms, Rng& rng, Flows* flows = nullptr);

int substeps_per_day(const EpiParams& params);

}  // namespace mobelcov
