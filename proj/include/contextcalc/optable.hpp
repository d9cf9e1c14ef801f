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

#ifndef CONTEXTCALC_OPTABLE_HPP
#define CONTEXTCALC_OPTABLE_HPP

// Operational theories as finite prepare-measure tables, and the
// distinguishability measures that are linear programs over the convex hull
// of the listed preparations.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contextcalc/extended_real.hpp"
#include "contextcalc/noise.hpp"
#include "contextcalc/qmath.hpp"

namespace contextcalc::optable {

struct Measurement {
    std::string label;
    std::vector<std::string> outcomes;
};

class ProbTable {
   public:
    /// probs[measurement][outcome][preparation]. Throws ValidationError with
    /// code "duplicate-label", "shape", "probability-range" or "row-sum".
    ProbTable(std::vector<std::string> preparations, std::vector<Measurement> measurements,
              std::vector<std::vector<std::vector<double>>> probs, double row_tolerance = 1e-9);

    const std::vector<std::string> &preparations() const { return preparations_; }
    const std::vector<Measurement> &measurements() const { return measurements_; }
    std::size_t num_preparations() const { return preparations_.size(); }
    /// Number of (measurement, outcome) rows.
    std::size_t num_rows() const { return num_rows_; }
    std::size_t row_offset(std::size_t measurement) const { return offsets_[measurement]; }

    double prob(std::size_t measurement, std::size_t outcome, std::size_t preparation) const;
    /// P(.|., P) stacked over all (M, m) rows.
    const std::vector<double> &column(std::size_t preparation) const { return columns_[preparation]; }

    /// Throws ContractError for unknown labels.
    std::size_t prep_index(const std::string &label) const;
    std::size_t meas_index(const std::string &label) const;
    bool has_preparation(const std::string &label) const;

   private:
    std::vector<std::string> preparations_;
    std::vector<Measurement> measurements_;
    std::vector<std::size_t> offsets_;
    std::size_t num_rows_ = 0;
    std::vector<std::vector<double>> columns_;
};

/// Builds P(m|M,P) = Tr(E_m rho_P) for the given states and POVMs.
ProbTable born_table(const std::vector<std::string> &prep_labels, const std::vector<qmath::DensityOperator> &states,
                     const std::vector<Measurement> &measurements, const std::vector<qmath::Povm> &povms);

class Mixture {
   public:
    /// Weights must be non-negative and sum to 1 within 1e-12.
    explicit Mixture(std::map<std::string, double> weights);
    static Mixture point(const std::string &label);
    static Mixture uniform(const std::vector<std::string> &labels);

    const std::map<std::string, double> &weights() const { return weights_; }
    /// Mixed statistics over all rows of t.
    std::vector<double> row_vector(const ProbTable &t) const;

   private:
    std::map<std::string, double> weights_;
};

struct EquivalenceReport {
    bool equivalent = false;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    std::string worst_measurement;
    std::string worst_outcome;
};

EquivalenceReport operational_equivalence(const ProbTable &t, const Mixture &a, const Mixture &b,
                                          double tol = 1e-9);

/// -log2 of the largest y with y P_a + (1-y) P' ~ P_b for some P' in the hull.
ExtendedReal operational_dmax(const ProbTable &t, const Mixture &a, const Mixture &b);
ExtendedReal operational_dmax(const ProbTable &t, const std::string &a, const std::string &b);

/// Least r with P_a - P_b = r (P_v - P_u) for hull elements P_v, P_u.
double operational_dtv(const ProbTable &t, const Mixture &a, const Mixture &b);
double operational_dtv(const ProbTable &t, const std::string &a, const std::string &b);

/// groups[k][x]: the preparation sending message x under alphabet k.
using Groups = std::vector<std::vector<std::string>>;

constexpr std::size_t kDefaultEnumerationCap = 4096;

/// d^n, throwing ContractError for ragged groups or a count above `cap`.
std::size_t message_strings(const Groups &groups, std::size_t cap = kDefaultEnumerationCap);
/// Digits of string x in base d, alphabet k first.
std::vector<std::size_t> message_digits(std::size_t x, std::size_t n, std::size_t d);

struct AlphaBeta {
    ExtendedReal alpha;
    ExtendedReal beta;
};

AlphaBeta alpha_beta_operational(const ProbTable &t, const Groups &groups,
                                 std::size_t cap = kDefaultEnumerationCap);

struct WitnessReport {
    double p_guess = 0.0;
    ExtendedReal alpha_min;
    ExtendedReal beta_min;
    /// Guessing ceilings for a non-contextual model (C = 0).
    double bound_alpha = 0.0;
    double bound_beta = 0.0;
    /// Lower bounds on the inaccessible information from each inequality.
    double c_from_alpha = 0.0;
    double c_from_beta = 0.0;
    double c_lower = 0.0;
    bool violated = false;
    /// Success probability (1 + C)/2 of an observer with access to the ontic state, at C = c_lower.
    double observer_success = 0.5;
};

/// Inverts both guessing inequalities for C given P_guess, alpha and beta.
WitnessReport witness_from(double p_guess, ExtendedReal alpha, ExtendedReal beta, std::size_t n, std::size_t d,
                           double tol = 1e-9);

double table_guess(const ProbTable &t, const Groups &groups, const std::vector<std::string> &decoders);

WitnessReport table_guess_and_bounds(const ProbTable &t, const Groups &groups,
                                     const std::vector<std::string> &decoders, double tol = 1e-9);

struct InvariancePair {
    std::string a;
    std::string b;
    ExtendedReal dmax_before;
    ExtendedReal dmax_after;
    double dtv_before = 0.0;
    double dtv_after = 0.0;
};

struct InvarianceReport {
    bool injective = false;
    /// False when the channel is not injective and the equalities were skipped.
    bool asserted = false;
    bool passed = true;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    std::optional<AlphaBeta> before;
    std::optional<AlphaBeta> after;
    std::vector<InvariancePair> pairs;
};

/// Rebuilds t with every preparation state passed through `channel`, then
/// compares the operational measures before and after. `povms` must cover
/// every measurement of t. Empty `pairs` means all ordered label pairs.
InvarianceReport invariance_audit(const ProbTable &t, const noise::ChannelSpec &channel,
                                  const std::map<std::string, qmath::DensityOperator> &states,
                                  const std::map<std::string, qmath::Povm> &povms,
                                  const std::optional<Groups> &groups = std::nullopt,
                                  std::vector<std::pair<std::string, std::string>> pairs = {}, double tol = 1e-7);

}  // namespace contextcalc::optable

#endif
