#!/usr/bin/env python3
"""Generate the shipped synthetic parameter file (data/default_params.json).

The values are epidemiologically plausible but NOT calibrated to any data set.
The transmission scale q is solved so that the basic reproduction number of the
unrestricted contact pattern equals TARGET_R0 (next-generation matrix).
"""
import json
import sys

import numpy as np

TARGET_R0 = 2.6
SYM_TO_ASYM_Q = 0.51

labels = ["[0,10)", "[10,20)", "[20,30)", "[30,40)", "[40,50)",
          "[50,60)", "[60,70)", "[70,80)", "[80,90)", "[90,inf)"]
population = np.array([1_290_000, 1_320_000, 1_420_000, 1_500_000, 1_500_000,
                       1_580_000, 1_360_000, 870_000, 540_000, 120_000], dtype=float)
K = len(population)


def reciprocal(raw):
    """Make a raw contact pattern reciprocal: C_ij N_i == C_ji N_j."""
    total = raw * population[:, None]
    total = 0.5 * (total + total.T)
    return total / population[:, None]


def band(values):
    m = np.zeros((K, K))
    for i in range(K):
        for j in range(K):
            m[i, j] = values(i, j)
    return m


home = reciprocal(band(lambda i, j: (1.0 if i == j else 0.25)
                       + (0.55 if abs(i - j) == 3 else 0.0)
                       + (0.25 if abs(i - j) == 6 else 0.0)))
work = reciprocal(band(lambda i, j: (2.2 if i == j else 1.2) if 2 <= i <= 6 and 2 <= j <= 6 and not (i == 6 and j == 6) else
                       (0.4 if (1 <= i <= 6 and 1 <= j <= 6) else 0.0)))
transport = reciprocal(band(lambda i, j: 0.35 if 1 <= i <= 6 and 1 <= j <= 6 else 0.05))
school = reciprocal(band(lambda i, j: (7.0 if i == j == 0 else 6.0 if i == j == 1 else
                                       0.6 if {i, j} == {0, 1} else
                                       0.35 if (i <= 1 and 3 <= j <= 5) else 0.0)))
leisure = reciprocal(band(lambda i, j: (1.6 if i == j else 0.5 if abs(i - j) == 1 else 0.15)
                          * (0.5 if min(i, j) >= 7 else 1.0)))
other = reciprocal(band(lambda i, j: 0.9 if i == j else 0.3))

full = home + work + transport + school + leisure + other

# Per-capita transmission matrices: contacts with group k' divided by N_k',
# expressed per million persons so q stays of moderate magnitude.
per_capita = 1.0e6 / population[None, :]
c_asym = full * per_capita
c_sym = (home + 0.5 * (work + transport + school + leisure + other)) * per_capita

gamma_rate = 1.0 / 3.0
theta = 1.0 / 2.5
p = np.array([0.94, 0.90, 0.80, 0.70, 0.62, 0.55, 0.48, 0.42, 0.36, 0.30])
psi = np.array([0.004, 0.004, 0.008, 0.012, 0.02, 0.035, 0.06, 0.10, 0.16, 0.20])
omega = np.full(K, 0.25)
phi1 = np.array([0.95, 0.95, 0.92, 0.90, 0.87, 0.84, 0.82, 0.84, 0.90, 0.95])
delta1 = np.full(K, 1.0 / 7.0)
delta2 = np.full(K, 1.0 / 7.0)
delta3 = np.array([0.15, 0.15, 0.14, 0.13, 0.12, 0.11, 0.10, 0.09, 0.08, 0.07])
delta4 = np.array([0.10, 0.10, 0.09, 0.09, 0.08, 0.07, 0.06, 0.05, 0.04, 0.04])
tau1 = np.array([0.0, 0.0, 0.0005, 0.001, 0.002, 0.004, 0.008, 0.016, 0.028, 0.04])
tau2 = np.array([0.0, 0.002, 0.004, 0.006, 0.01, 0.015, 0.02, 0.03, 0.05, 0.06])

# Next-generation matrix with unit q_a (q_s = SYM_TO_ASYM_Q * q_a).
asym_time = 1.0 / theta + p / delta1
sym_time = (1.0 - p) * (1.0 / (psi + delta2) + psi / ((psi + delta2) * omega))
ngm = population[:, None] * (c_asym * asym_time[None, :]
                             + SYM_TO_ASYM_Q * c_sym * sym_time[None, :])
rho = max(abs(np.linalg.eigvals(ngm)))
q_a = TARGET_R0 / rho
q_s = SYM_TO_ASYM_Q * q_a

lock = home + 0.2 * (work + transport) + 0.1 * (leisure + other)
ratio = np.divide(lock, full, out=np.ones_like(full), where=full > 0)
ngm_lock = population[:, None] * q_a * (c_asym * ratio * asym_time[None, :]
                                        + SYM_TO_ASYM_Q * c_sym * ratio * sym_time[None, :])
print(f"R0 full={TARGET_R0:.2f} lockdown={max(abs(np.linalg.eigvals(ngm_lock))):.3f} q_a={q_a:.4e}",
      file=sys.stderr)


def rows(m):
    return [[float(f"{x:.6g}") for x in row] for row in m]


doc = {
    "format": "mobelcov-params",
    "version": 1,
    "description": "Synthetic, NON-CALIBRATED parameter set with Belgian-sized age groups. "
                   "Generated by tools/make_default_params.py; not fitted to any data.",
    "age_structure": {"labels": labels, "population": population.tolist()},
    "epi": {
        "q_a": float(f"{q_a:.6g}"), "q_s": float(f"{q_s:.6g}"),
        "gamma_rate": gamma_rate, "theta": theta,
        "p": p.tolist(), "psi": psi.tolist(), "omega": omega.tolist(), "phi1": phi1.tolist(),
        "delta1": delta1.tolist(), "delta2": delta2.tolist(),
        "delta3": delta3.tolist(), "delta4": delta4.tolist(),
        "tau1": tau1.tolist(), "tau2": tau2.tolist(),
        "beta0_star": -5.0, "beta1_star": 1.0,
        "h": 1.0 / 24.0,
    },
    "contact_matrices": {
        "home": rows(home), "work": rows(work), "transport": rows(transport),
        "school": rows(school), "leisure": rows(leisure), "other": rows(other),
        "asym": rows(c_asym), "sym": rows(c_sym),
    },
}

json.dump(doc, sys.stdout, indent=1)
sys.stdout.write("\n")
