// Copyright 2026 The contextcalc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONTEXTCALC_QGAMES_HPP
#define CONTEXTCALC_QGAMES_HPP

// Quantum side of the guessing game: the minimax constants
//
//     alpha = inf_sigma max_x 2^{Dmax(rho_x || sigma)},
//     beta  = inf_sigma max_x 2^{Dmax(sigma || rho_x)},
//
// the optimal guessing probability alpha/d, closed forms for centred qubit
// configurations, and the Haar-random threshold H_D/D.
//
// alpha and beta are found by bisection on the level set with Dykstra's
// alternating projections as the feasibility oracle. Every iterate is
// certified: the primal side by evaluating the objective exactly at the
// iterate, the dual side by turning the Dykstra increments into a POVM (for
// alpha) or a dominating operator family (for beta). The returned value is
// always an attained objective value; the bracket width is the certified
// distance to the optimum. When the projections stall before the bracket
// closes (tangential level sets), a log-barrier Newton polish finishes it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "contextcalc/extended_real.hpp"
#include "contextcalc/kernels.hpp"
#include "contextcalc/qmath.hpp"

namespace contextcalc::qgames {

using qmath::BlochVector;
using qmath::DensityOperator;

struct GameConfig {
    std::size_t n = 0;
    std::size_t d = 0;
    /// states[k][x]
    std::vector<std::vector<DensityOperator>> states;
};

/// Validates shape, common dimension and d^n <= 4096.
GameConfig make_config(std::vector<std::vector<DensityOperator>> states);

/// rho_x = (1/n) sum_k rho_{(k, x_k)} for every string x, in message_digits order.
std::vector<DensityOperator> ensemble_states(const GameConfig &cfg);

struct SolverOptions {
    std::size_t max_sweeps = 10000;
    /// Bisection stops when the working bracket is narrower than this.
    double bisection_tol = 1e-7;
    /// Certified bracket width, relative to max(1, value), above which the
    /// solve is reported as failed.
    double certificate_tol = 1e-6;
};

struct MinimaxResult {
    ExtendedReal value;
    /// The optimizing sigma; absent when value is infinite.
    std::optional<DensityOperator> sigma_star;
    /// |value - objective(sigma_star)|, recomputed independently.
    double certificate_gap = 0.0;
    /// Certified lower bound on the infimum.
    double lower_bound = 1.0;
    /// Indices x attaining the max at sigma_star (within 1e-9 relative).
    std::vector<std::size_t> argmax;
    std::size_t probes = 0;
    /// True when the interior-point polish was needed to close the bracket.
    bool polished = false;
};

/// Throws NumericalError (message carries the bracket) when the certified
/// bracket stays wider than certificate_tol * max(1, value).
MinimaxResult alpha_min_quantum(const std::vector<DensityOperator> &ensembles, const SolverOptions &opt = {});
MinimaxResult beta_min_quantum(const std::vector<DensityOperator> &ensembles, const SolverOptions &opt = {});

/// max_x 2^{Dmax(rho_x || sigma)}
ExtendedReal alpha_objective(const std::vector<DensityOperator> &ensembles, const DensityOperator &sigma);
/// max_x 2^{Dmax(sigma || rho_x)}
ExtendedReal beta_objective(const std::vector<DensityOperator> &ensembles, const DensityOperator &sigma);

struct GuessReport {
    double q_guess = 0.0;
    /// Success probability of guessing the whole string x: q_guess / d^(n-1).
    double r_guess = 0.0;
    MinimaxResult alpha;
};

GuessReport qguess_quantum(const GameConfig &cfg, const SolverOptions &opt = {});

struct PolygonConfig {
    GameConfig config;
    std::vector<std::vector<BlochVector>> bloch;  // [k][x]
    double max_bloch_norm = 0.0;
};

/// The 2n equatorial states (|0> + e^{i pi (k/n + x)} |1>)/sqrt 2, k = 1..n, x = 1,2.
PolygonConfig polygon_states(std::size_t n);

struct ClosedForm {
    ExtendedReal alpha;
    ExtendedReal beta;
    double max_bloch_norm = 0.0;
    /// (I +- n_x/|n_x| . sigma)/2 for every x with n_x != 0, duplicates removed.
    std::vector<DensityOperator> completions;
};

/// Throws ContractError for non-qubit input, for d != 2, or (when require_centered) if the
/// uniform average of all states differs from I/2 by more than 1e-9.
ClosedForm qubit_closed_form(const GameConfig &cfg, bool require_centered = true);

struct HaarThreshold {
    double exact = 0.0;
    double mc_estimate = 0.0;
    double std_err = 0.0;
    std::size_t samples = 0;
};

/// max_j |<0|U|j>|^2 for one unitary.
double max_row_overlap(const qmath::ComplexMatrix &u);

HaarThreshold qudit_haar_threshold(std::size_t dim, std::size_t mc_samples, std::uint64_t seed);
/// Serial reference of the same estimate (bit-identical).
HaarThreshold qudit_haar_threshold_serial(std::size_t dim, std::size_t mc_samples, std::uint64_t seed);

struct ClassicalIdentity {
    double sum_max = 0.0;
    double minimax = 0.0;
    std::vector<double> nu_star;
};

/// Throws NumericalError if sum_max and minimax differ by 1e-9 or more.
ClassicalIdentity classical_guess_identity(const std::vector<std::vector<double>> &distributions);

}  // namespace contextcalc::qgames

#endif
