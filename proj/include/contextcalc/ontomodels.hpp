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


#ifndef CONTEXTCALC_ONTOMODELS_HPP
#define CONTEXTCALC_ONTOMODELS_HPP

// Executable ontological models: the Kochen-Specker qubit model, its noisy
// preparation non-contextual variant, and the kitchen-sink model of a finite
// table, plus the model-level bounds they are checked against.
//
// Continuous models live on a SphereGrid, a quadrature rule for dOmega/4pi.
// Three kinds are provided:
//   product   Gauss-Legendre in cos(theta), split at the equator, times a
//             uniform azimuth rule; the general-purpose default (200 x 400).
//   uniform   Monte-Carlo nodes, equal weights.
//   adapted   Gauss-Legendre in theta times piecewise Gauss-Legendre in phi,
//             with the pole and the azimuth breakpoints placed so that a given
//             family of great circles (all through the pole) are cell edges.
//             Integrands that are smooth off those circles, such as KS Born
//             integrals, are then integrated to rounding error.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "contextcalc/optable.hpp"
#include "contextcalc/qmath.hpp"

namespace contextcalc::ontomodels {

using qmath::BlochVector;
using qmath::DensityOperator;

/// Heaviside step with Theta(0) = 1/2.
inline double heaviside(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }

enum class GridKind { Product, Uniform, Adapted };
std::string to_string(GridKind k);

constexpr std::size_t kDefaultPolarOrder = 200;
constexpr std::size_t kDefaultAdaptedOrder = 48;

class SphereGrid {
   public:
    /// `polar` Gauss nodes in cos(theta) (split evenly between hemispheres)
    /// times `azimuthal` equally spaced angles. polar must be even and >= 8.
    static std::shared_ptr<const SphereGrid> product(std::size_t polar = kDefaultPolarOrder,
                                                     std::size_t azimuthal = 2 * kDefaultPolarOrder);
    static std::shared_ptr<const SphereGrid> uniform(std::size_t size, std::uint64_t seed);
    /// Every normal must be perpendicular to a common axis, which becomes the
    /// pole; the great circles orthogonal to the normals become azimuth cuts.
    static std::shared_ptr<const SphereGrid> adapted(const std::vector<BlochVector> &normals,
                                                     std::size_t order = kDefaultAdaptedOrder);

    GridKind kind() const { return kind_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<BlochVector> &nodes() const { return nodes_; }
    const std::vector<double> &weights() const { return weights_; }
    /// Estimated absolute error on a KS-type integral: twice the worst error on
    /// probe normalization and Born integrals for product grids, 1e-12 for adapted grids
    /// and three standard errors for uniform ones.
    double tolerance() const { return tolerance_; }

    /// Sum_i w_i f(n_i).
    double integrate(const std::function<double(const BlochVector &)> &f) const;

   private:
    SphereGrid() = default;

    GridKind kind_ = GridKind::Product;
    std::vector<BlochVector> nodes_;
    std::vector<double> weights_;
    double tolerance_ = 0.0;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

struct OnticDensity {
    GridPtr grid;
    std::vector<double> values;

    /// Sum_i w_i mu_i.
    double total() const;
};

/// Bloch vector of a pure qubit state; throws ContractError for other input.
BlochVector pure_qubit_direction(const DensityOperator &psi);

/// mu_psi(n) = 4 (n.s) Theta(n.s).
OnticDensity ks_density(const GridPtr &grid, const BlochVector &s);
/// xi(phi|n) = Theta(n.r) at every node.
std::vector<double> ks_response(const GridPtr &grid, const BlochVector &r);

struct KsEvaluation {
    OnticDensity density;
    std::vector<double> response;
    double born = 0.0;
};

KsEvaluation ks_model_eval(const GridPtr &grid, const DensityOperator &psi, const DensityOperator &phi);
/// Evaluates on the grid adapted to psi and phi.
KsEvaluation ks_model_eval(const DensityOperator &psi, const DensityOperator &phi,
                           std::size_t order = kDefaultAdaptedOrder);
/// Born value only, from Bloch directions.
double ks_born(const GridPtr &grid, const BlochVector &s, const BlochVector &r);
double ks_born(const BlochVector &s, const BlochVector &r, std::size_t order = kDefaultAdaptedOrder);

/// Born values of many (s, r) pairs on a common grid.
std::vector<double> ks_born_batch_serial(const GridPtr &grid,
                                         const std::vector<std::pair<BlochVector, BlochVector>> &pairs);
std::vector<double> ks_born_batch_parallel(const GridPtr &grid,
                                           const std::vector<std::pair<BlochVector, BlochVector>> &pairs);

/// 1/2 Sum_i w_i |a_i - b_i|; throws ContractError if the grids differ.
double model_total_variation(const OnticDensity &a, const OnticDensity &b);

struct EnsembleElement {
    double weight = 0.0;
    BlochVector direction;
};
using Ensemble = std::vector<EnsembleElement>;

/// Weights must sum to 1 within 1e-12 and directions be unit vectors.
/// Computes the mixture both as a convex sum of KS densities and in the
/// closed form 2(n.a + Sum p_i |n.s_i|); throws NumericalError if they differ
/// by more than 1e-10 at any node.
OnticDensity ks_ensemble_density(const GridPtr &grid, const Ensemble &ensemble);
BlochVector ensemble_average(const Ensemble &ensemble);

/// A random k-element pure-state ensemble whose Bloch average is exactly `a`
/// (|a| < 1): k - 1 random elements scaled by t, the last fixed by |a - t c| = 1 - t.
Ensemble random_ensemble_with_average(const BlochVector &a, std::size_t k, std::mt19937_64 &rng);

/// KS total variation between two pure states, on the grid adapted to both.
double ks_pair_total_variation(const BlochVector &a, const BlochVector &b, std::size_t order = kDefaultAdaptedOrder);

struct QuadratureCheck {
    double value = 0.0;
    double mc_value = 0.0;
    double mc_std_err = 0.0;
    /// The looser of the grid tolerance and the grid/Monte-Carlo discrepancy
    /// (or three Monte-Carlo standard errors, if larger).
    double error_estimate = 0.0;
};

/// KS total variation between two ensembles on `grid`, cross-checked on
/// `mc_samples` uniform nodes.
QuadratureCheck ks_ensemble_total_variation(const GridPtr &grid, const Ensemble &a, const Ensemble &b,
                                            std::size_t mc_samples, std::uint64_t seed);

/// Density 2(1-p)(n.s + 1) + (2p - 1) of the noisy-qubit model, p in [1/2, 1].
OnticDensity noisy_pnc_density(const GridPtr &grid, double p, const BlochVector &s);
double noisy_pnc_model_eval(const GridPtr &grid, double p, const DensityOperator &psi, const DensityOperator &phi);
double noisy_pnc_model_eval(double p, const DensityOperator &psi, const DensityOperator &phi,
                            std::size_t order = kDefaultAdaptedOrder);

struct ModelMeasurement {
    std::string label;
    std::vector<std::string> outcomes;
    /// xi[outcome][lambda]
    std::vector<std::vector<double>> xi;
};

class DiscreteModel {
   public:
    /// Validates shapes, mu rows summing to 1 and responses summing to 1 for
    /// every lambda (both within 1e-12), and entries in range. Throws
    /// ValidationError.
    DiscreteModel(std::vector<std::string> ontic_labels, std::map<std::string, std::vector<double>> mu,
                  std::vector<ModelMeasurement> measurements);

    const std::vector<std::string> &ontic_labels() const { return ontic_; }
    std::size_t size() const { return ontic_.size(); }
    const std::map<std::string, std::vector<double>> &mu() const { return mu_; }
    const std::vector<double> &mu(const std::string &label) const;
    const std::vector<ModelMeasurement> &measurements() const { return measurements_; }

    /// Sum_lambda xi(m|M, lambda) mu_P(lambda).
    double prob(const std::string &prep, const std::string &measurement, const std::string &outcome) const;
    std::vector<double> mixture(const optable::Mixture &m) const;
    double total_variation(const optable::Mixture &a, const optable::Mixture &b) const;
    /// Largest |model - table| over the given labels and all table measurements.
    double reconstruction_residual(const optable::ProbTable &t, const std::vector<std::string> &labels) const;

    nlohmann::json to_json() const;
    static DiscreteModel from_json(const nlohmann::json &j);

   private:
    std::vector<std::string> ontic_;
    std::map<std::string, std::vector<double>> mu_;
    std::vector<ModelMeasurement> measurements_;
};

constexpr std::size_t kKitchenSinkCap = 1000000;

/// Ontic states are joint outcome lists; mu_P(lambda) = Prod_k P(lambda_k|M_k, P)
/// for extremal labels, and other preparations are extended convex-linearly
/// from an exact decomposition into extremal columns (ContractError if none).
DiscreteModel kitchen_sink_model(const optable::ProbTable &t, const std::vector<std::string> &extremal_labels,
                                 std::size_t cap = kKitchenSinkCap);

/// The noisy-qubit model discretized on `grid`: one ontic state per node,
/// mu_P = w * density, xi = Theta(n.r). Preparations are pure directions,
/// measurements projective (outcome 0 along r).
DiscreteModel noisy_pnc_discrete_model(const GridPtr &grid, double p, const std::vector<std::string> &prep_labels,
                                       const std::vector<BlochVector> &prep_directions,
                                       const std::vector<std::string> &meas_labels,
                                       const std::vector<BlochVector> &meas_directions);

using TvOracle = std::function<double(const DensityOperator &, const DensityOperator &)>;

struct KkhBound {
    double bound = 1.0;
    double max_tv = 0.0;
    std::size_t accepted = 0;
    std::size_t drawn = 0;
    /// The inner max is sampled, so this is an estimate from below of an upper bound.
    bool sampled_estimate = true;
};

/// 1 - (1/2D)(1 - max d_TV) over Haar pairs with overlap >= 1/(2D).
KkhBound kkh_upper_bound(std::size_t dim, const TvOracle &oracle, std::size_t accepted_pairs = 2000,
                         std::uint64_t seed = 1);

struct Lemma1Report {
    std::size_t n = 0;
    double sum_max = 0.0;
    double sum_min = 0.0;
    ExtendedReal gamma1;
    ExtendedReal gamma2;
    double c_prep = 0.0;
    double max_rhs = 0.0;  // gamma1 (1 + N C), +inf if gamma1 is
    double min_rhs = 0.0;  // 1/gamma2 - N C
    bool max_holds = false;
    bool min_holds = false;
    bool passed = false;
};

/// gamma1 and gamma2 are the exact infima over the hull of t's preparations.
Lemma1Report lemma1_audit(const DiscreteModel &model, const std::vector<std::string> &labels,
                          const optable::ProbTable &theory, double c_prep_bound, double tol = 1e-6);

struct Theorem2Pair {
    double tv = 0.0;
    double trace = 0.0;
    double gap = 0.0;
    bool lower_ok = false;
    bool upper_ok = false;
};

struct Theorem2Report {
    std::vector<Theorem2Pair> pairs;
    double max_gap = 0.0;
    bool passed = true;
};

/// 0 <= d_TV - d_trace <= C (1 + d_trace) + tol for every pair.
Theorem2Report theorem2_audit(const TvOracle &oracle,
                              const std::vector<std::pair<DensityOperator, DensityOperator>> &pairs,
                              double c_prep_bound, double tol = 1e-6);

/// KS total variation as a TvOracle (pure qubit pairs only).
TvOracle ks_tv_oracle(std::size_t order = kDefaultAdaptedOrder);

}  // namespace contextcalc::ontomodels

#endif
