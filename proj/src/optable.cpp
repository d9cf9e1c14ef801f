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

#include "contextcalc/optable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "contextcalc/errors.hpp"
#include "contextcalc/lp.hpp"

namespace contextcalc::optable {

namespace {

constexpr double kMixtureTol = 1e-12;
// y* below the LP feasibility slack counts as "only y = 0 is feasible".
constexpr double kZeroWeight = 1e-9;

void require_unique(const std::vector<std::string> &labels, const std::string &what) {
    std::set<std::string> seen;
    for (const auto &l : labels) {
        if (!seen.insert(l).second) {
            throw ValidationError("duplicate-label", what + " '" + l + "'", "duplicate label");
        }
    }
}

std::vector<double> lp_row(std::size_t width) { return std::vector<double>(width, 0.0); }

lp::Solution solve_checked(const lp::Problem &p, const char *what) {
    lp::Solution s = lp::solve(p);
    if (s.status == lp::Status::Optimal && s.residual > 1e-8) {
        std::ostringstream msg;
        msg << what << ": certificate residual " << s.residual;
        throw NumericalError(msg.str());
    }
    return s;
}

double deviation(const ExtendedReal &a, const ExtendedReal &b) {
    if (a.is_infinite() || b.is_infinite()) {
        return a.is_infinite() == b.is_infinite() ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::abs(a.value() - b.value());
}

}  // namespace

ProbTable::ProbTable(std::vector<std::string> preparations, std::vector<Measurement> measurements,
                     std::vector<std::vector<std::vector<double>>> probs, double row_tolerance)
    : preparations_(std::move(preparations)), measurements_(std::move(measurements)) {
    require_unique(preparations_, "preparation");
    std::vector<std::string> mlabels;
    for (const auto &m : measurements_) {
        mlabels.push_back(m.label);
        require_unique(m.outcomes, "outcome of measurement '" + m.label + "'");
        if (m.outcomes.empty()) {
            throw ValidationError("shape", "measurement '" + m.label + "'", "no outcomes");
        }
    }
    require_unique(mlabels, "measurement");
    if (preparations_.empty() || measurements_.empty()) {
        throw ValidationError("shape", "table", "needs at least one preparation and one measurement");
    }
    if (probs.size() != measurements_.size()) {
        throw ValidationError("shape", "table", "probability array does not match the measurement list");
    }
    for (std::size_t mi = 0; mi < measurements_.size(); ++mi) {
        offsets_.push_back(num_rows_);
        num_rows_ += measurements_[mi].outcomes.size();
    }
    columns_.assign(preparations_.size(), std::vector<double>(num_rows_, 0.0));
    for (std::size_t mi = 0; mi < measurements_.size(); ++mi) {
        const auto &m = measurements_[mi];
        if (probs[mi].size() != m.outcomes.size()) {
            throw ValidationError("shape", "measurement '" + m.label + "'", "outcome count mismatch");
        }
        for (std::size_t o = 0; o < m.outcomes.size(); ++o) {
            if (probs[mi][o].size() != preparations_.size()) {
                throw ValidationError("shape", "measurement '" + m.label + "'", "preparation count mismatch");
            }
            for (std::size_t p = 0; p < preparations_.size(); ++p) {
                double v = probs[mi][o][p];
                if (!std::isfinite(v) || v < -row_tolerance || v > 1.0 + row_tolerance) {
                    throw ValidationError("probability-range", "(" + m.label + "," + preparations_[p] + ")",
                                          "probability outside [0,1]");
                }
                columns_[p][offsets_[mi] + o] = v;
            }
        }
        for (std::size_t p = 0; p < preparations_.size(); ++p) {
            double s = 0.0;
            for (std::size_t o = 0; o < m.outcomes.size(); ++o) {
                s += probs[mi][o][p];
            }
            if (std::abs(s - 1.0) > row_tolerance) {
                std::ostringstream msg;
                msg << "outcome probabilities sum to " << s;
                throw ValidationError("row-sum", "(" + m.label + "," + preparations_[p] + ")", msg.str());
            }
        }
    }
}

double ProbTable::prob(std::size_t measurement, std::size_t outcome, std::size_t preparation) const {
    return columns_.at(preparation).at(offsets_.at(measurement) + outcome);
}

std::size_t ProbTable::prep_index(const std::string &label) const {
    auto it = std::find(preparations_.begin(), preparations_.end(), label);
    if (it == preparations_.end()) {
        throw ContractError("unknown preparation label '" + label + "'");
    }
    return static_cast<std::size_t>(it - preparations_.begin());
}

std::size_t ProbTable::meas_index(const std::string &label) const {
    for (std::size_t i = 0; i < measurements_.size(); ++i) {
        if (measurements_[i].label == label) {
            return i;
        }
    }
    throw ContractError("unknown measurement label '" + label + "'");
}

bool ProbTable::has_preparation(const std::string &label) const {
    return std::find(preparations_.begin(), preparations_.end(), label) != preparations_.end();
}

ProbTable born_table(const std::vector<std::string> &prep_labels, const std::vector<qmath::DensityOperator> &states,
                     const std::vector<Measurement> &measurements, const std::vector<qmath::Povm> &povms) {
    if (prep_labels.size() != states.size() || measurements.size() != povms.size()) {
        throw ContractError("born_table: label and object lists differ in length");
    }
    std::vector<std::vector<std::vector<double>>> probs;
    for (std::size_t mi = 0; mi < measurements.size(); ++mi) {
        const auto &effects = povms[mi].effects();
        if (effects.size() != measurements[mi].outcomes.size()) {
            throw ContractError("born_table: POVM '" + measurements[mi].label + "' has the wrong outcome count");
        }
        std::vector<std::vector<double>> rows;
        for (const auto &e : effects) {
            std::vector<double> row;
            for (const auto &rho : states) {
                row.push_back(qmath::born_probability(rho, e));
            }
            rows.push_back(std::move(row));
        }
        probs.push_back(std::move(rows));
    }
    return ProbTable(prep_labels, measurements, std::move(probs));
}

Mixture::Mixture(std::map<std::string, double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) {
        throw ContractError("Mixture: no components");
    }
    double s = 0.0;
    for (const auto &[label, w] : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ContractError("Mixture: negative or non-finite weight for '" + label + "'");
        }
        s += w;
    }
    if (std::abs(s - 1.0) > kMixtureTol) {
        throw ContractError("Mixture: weights sum to " + std::to_string(s));
    }
}

Mixture Mixture::point(const std::string &label) { return Mixture({{label, 1.0}}); }

Mixture Mixture::uniform(const std::vector<std::string> &labels) {
    if (labels.empty()) {
        throw ContractError("Mixture::uniform: no labels");
    }
    std::map<std::string, double> w;
    for (const auto &l : labels) {
        w[l] += 1.0 / static_cast<double>(labels.size());
    }
    double s = 0.0;
    for (const auto &[l, v] : w) {
        s += v;
    }
    // Fold the rounding residue into the first component.
    w.begin()->second += 1.0 - s;
    return Mixture(std::move(w));
}

std::vector<double> Mixture::row_vector(const ProbTable &t) const {
    std::vector<double> out(t.num_rows(), 0.0);
    for (const auto &[label, w] : weights_) {
        const auto &col = t.column(t.prep_index(label));
        for (std::size_t r = 0; r < out.size(); ++r) {
            out[r] += w * col[r];
        }
    }
    return out;
}

EquivalenceReport operational_equivalence(const ProbTable &t, const Mixture &a, const Mixture &b, double tol) {
    auto pa = a.row_vector(t);
    auto pb = b.row_vector(t);
    EquivalenceReport r;
    r.tolerance = tol;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        double dev = std::abs(pa[i] - pb[i]);
        if (dev > r.max_deviation) {
            r.max_deviation = dev;
            worst = i;
        }
    }
    for (std::size_t mi = 0; mi < t.measurements().size(); ++mi) {
        const auto &m = t.measurements()[mi];
        if (worst >= t.row_offset(mi) && worst < t.row_offset(mi) + m.outcomes.size()) {
            r.worst_measurement = m.label;
            r.worst_outcome = m.outcomes[worst - t.row_offset(mi)];
        }
    }
    r.equivalent = r.max_deviation <= tol;
    return r;
}

ExtendedReal operational_dmax(const ProbTable &t, const Mixture &a, const Mixture &b) {
    auto pa = a.row_vector(t);
    auto pb = b.row_vector(t);
    std::size_t n = t.num_preparations();
    // Variables: y, u_1..u_n.
    lp::Problem p(n + 1);
    p.set_objective(0, -1.0);
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        auto row = lp_row(n + 1);
        row[0] = pa[r];
        for (std::size_t i = 0; i < n; ++i) {
            row[i + 1] = t.column(i)[r];
        }
        p.add_equality(std::move(row), pb[r]);
    }
    auto norm = lp_row(n + 1);
    std::fill(norm.begin(), norm.end(), 1.0);
    p.add_equality(std::move(norm), 1.0);
    auto s = solve_checked(p, "operational_dmax");
    if (s.status != lp::Status::Optimal) {
        throw NumericalError("operational_dmax: LP reported " + lp::to_string(s.status) +
                             " although y = 0 is always feasible");
    }
    double y = std::min(s.x[0], 1.0);
    if (y <= kZeroWeight) {
        return ExtendedReal::infinity();
    }
    return ExtendedReal::finite(std::max(0.0, -std::log2(y)));
}

ExtendedReal operational_dmax(const ProbTable &t, const std::string &a, const std::string &b) {
    return operational_dmax(t, Mixture::point(a), Mixture::point(b));
}

double operational_dtv(const ProbTable &t, const Mixture &a, const Mixture &b) {
    auto pa = a.row_vector(t);
    auto pb = b.row_vector(t);
    std::size_t n = t.num_preparations();
    // Variables: v_1..v_n, u_1..u_n.
    lp::Problem p(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        p.set_objective(i, 1.0);
    }
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        auto row = lp_row(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = t.column(i)[r];
            row[n + i] = -t.column(i)[r];
        }
        p.add_equality(std::move(row), pa[r] - pb[r]);
    }
    auto bal = lp_row(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        bal[i] = 1.0;
        bal[n + i] = -1.0;
    }
    p.add_equality(std::move(bal), 0.0);
    auto s = solve_checked(p, "operational_dtv");
    if (s.status != lp::Status::Optimal) {
        throw NumericalError("operational_dtv: LP reported " + lp::to_string(s.status));
    }
    return std::max(0.0, s.objective);
}

double operational_dtv(const ProbTable &t, const std::string &a, const std::string &b) {
    return operational_dtv(t, Mixture::point(a), Mixture::point(b));
}

std::size_t message_strings(const Groups &groups, std::size_t cap) {
    if (groups.empty() || groups.front().empty()) {
        throw ContractError("groups: need at least one alphabet with one message");
    }
    std::size_t d = groups.front().size();
    std::size_t count = 1;
    for (const auto &g : groups) {
        if (g.size() != d) {
            throw ContractError("groups: every alphabet must have the same number of messages");
        }
        if (count > cap / d + 1) {
            count = cap + 1;
            break;
        }
        count *= d;
    }
    if (count > cap) {
        throw ContractError("groups: d^n exceeds the enumeration cap of " + std::to_string(cap));
    }
    return count;
}

std::vector<std::size_t> message_digits(std::size_t x, std::size_t n, std::size_t d) {
    std::vector<std::size_t> digits(n);
    for (std::size_t k = 0; k < n; ++k) {
        digits[k] = x % d;
        x /= d;
    }
    return digits;
}

namespace {

std::vector<std::vector<double>> ensemble_rows(const ProbTable &t, const Groups &groups, std::size_t cap) {
    std::size_t count = message_strings(groups, cap);
    std::size_t n = groups.size();
    std::size_t d = groups.front().size();
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::size_t x = 0; x < count; ++x) {
        auto digits = message_digits(x, n, d);
        std::vector<double> row(t.num_rows(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const auto &col = t.column(t.prep_index(groups[k][digits[k]]));
            for (std::size_t r = 0; r < row.size(); ++r) {
                row[r] += col[r] / static_cast<double>(n);
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

ExtendedReal solve_alpha(const ProbTable &t, const std::vector<std::vector<double>> &px) {
    std::size_t n = t.num_preparations();
    std::size_t count = px.size();
    std::size_t width = n + count * n;  // F, then G_x blocks
    lp::Problem p(width);
    for (std::size_t i = 0; i < n; ++i) {
        p.set_objective(i, 1.0);
    }
    for (std::size_t x = 0; x < count; ++x) {
        std::size_t g0 = n + x * n;
        for (std::size_t r = 0; r < t.num_rows(); ++r) {
            auto row = lp_row(width);
            for (std::size_t i = 0; i < n; ++i) {
                row[i] = t.column(i)[r];
                row[g0 + i] = -t.column(i)[r];
            }
            p.add_equality(std::move(row), px[x][r]);
        }
        auto bal = lp_row(width);
        for (std::size_t i = 0; i < n; ++i) {
            bal[i] = 1.0;
            bal[g0 + i] = -1.0;
        }
        p.add_equality(std::move(bal), 1.0);
    }
    auto s = solve_checked(p, "alpha_min");
    if (s.status != lp::Status::Optimal) {
        return ExtendedReal::infinity();
    }
    return ExtendedReal::finite(std::max(1.0, s.objective));
}

ExtendedReal solve_beta(const ProbTable &t, const std::vector<std::vector<double>> &px) {
    std::size_t n = t.num_preparations();
    std::size_t count = px.size();
    std::size_t width = 1 + n + count * n;  // t, F, then G_x blocks
    lp::Problem p(width);
    p.set_objective(0, 1.0);
    for (std::size_t x = 0; x < count; ++x) {
        std::size_t g0 = 1 + n + x * n;
        for (std::size_t r = 0; r < t.num_rows(); ++r) {
            auto row = lp_row(width);
            row[0] = px[x][r];
            for (std::size_t i = 0; i < n; ++i) {
                row[1 + i] = -t.column(i)[r];
                row[g0 + i] = -t.column(i)[r];
            }
            p.add_equality(std::move(row), 0.0);
        }
        auto bal = lp_row(width);
        bal[0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            bal[g0 + i] = -1.0;
        }
        p.add_equality(std::move(bal), 1.0);
    }
    auto norm = lp_row(width);
    for (std::size_t i = 0; i < n; ++i) {
        norm[1 + i] = 1.0;
    }
    p.add_equality(std::move(norm), 1.0);
    auto s = solve_checked(p, "beta_min");
    if (s.status != lp::Status::Optimal) {
        return ExtendedReal::infinity();
    }
    return ExtendedReal::finite(std::max(1.0, s.objective));
}

}  // namespace

AlphaBeta alpha_beta_operational(const ProbTable &t, const Groups &groups, std::size_t cap) {
    auto px = ensemble_rows(t, groups, cap);
    return {solve_alpha(t, px), solve_beta(t, px)};
}

WitnessReport witness_from(double p_guess, ExtendedReal alpha, ExtendedReal beta, std::size_t n, std::size_t d,
                           double tol) {
    if (n == 0 || d == 0) {
        throw ContractError("witness_from: n and d must be positive");
    }
    WitnessReport w;
    w.p_guess = p_guess;
    w.alpha_min = alpha;
    w.beta_min = beta;
    double dd = static_cast<double>(d);
    double dn = std::pow(dd, static_cast<double>(n));
    if (alpha.is_finite()) {
        w.bound_alpha = alpha.value() / dd;
        w.c_from_alpha = (dd * p_guess / alpha.value() - 1.0) / dn;
    } else {
        w.bound_alpha = std::numeric_limits<double>::infinity();
        w.c_from_alpha = -1.0 / dn;
    }
    double inv_beta = beta.is_finite() ? 1.0 / beta.value() : 0.0;
    w.bound_beta = 1.0 - (dd - 1.0) / dd * inv_beta;
    if (d > 1) {
        w.c_from_beta = (p_guess - w.bound_beta) / ((dd - 1.0) * dn / dd);
    } else {
        w.c_from_beta = 0.0;
    }
    w.c_lower = std::max({0.0, w.c_from_alpha, w.c_from_beta});
    w.violated = w.c_lower > tol;
    w.observer_success = (1.0 + w.c_lower) / 2.0;
    return w;
}

double table_guess(const ProbTable &t, const Groups &groups, const std::vector<std::string> &decoders) {
    message_strings(groups, std::numeric_limits<std::size_t>::max());
    std::size_t n = groups.size();
    std::size_t d = groups.front().size();
    if (decoders.size() != n) {
        throw ContractError("table_guess: need one decoder measurement per alphabet");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t mi = t.meas_index(decoders[k]);
        if (t.measurements()[mi].outcomes.size() != d) {
            throw ContractError("table_guess: decoder '" + decoders[k] + "' has " +
                                std::to_string(t.measurements()[mi].outcomes.size()) + " outcomes, expected " +
                                std::to_string(d));
        }
        for (std::size_t x = 0; x < d; ++x) {
            sum += t.prob(mi, x, t.prep_index(groups[k][x]));
        }
    }
    return sum / static_cast<double>(n * d);
}

WitnessReport table_guess_and_bounds(const ProbTable &t, const Groups &groups,
                                     const std::vector<std::string> &decoders, double tol) {
    double pg = table_guess(t, groups, decoders);
    auto ab = alpha_beta_operational(t, groups);
    return witness_from(pg, ab.alpha, ab.beta, groups.size(), groups.front().size(), tol);
}

InvarianceReport invariance_audit(const ProbTable &t, const noise::ChannelSpec &channel,
                                  const std::map<std::string, qmath::DensityOperator> &states,
                                  const std::map<std::string, qmath::Povm> &povms, const std::optional<Groups> &groups,
                                  std::vector<std::pair<std::string, std::string>> pairs, double tol) {
    std::vector<qmath::DensityOperator> noisy;
    for (const auto &label : t.preparations()) {
        auto it = states.find(label);
        if (it == states.end()) {
            throw ContractError("invariance_audit: no state for preparation '" + label + "'");
        }
        if (it->second.dim() != channel.dim()) {
            throw ContractError("invariance_audit: state '" + label + "' dimension does not match the channel");
        }
        noisy.push_back(channel.apply(it->second));
    }
    std::vector<qmath::Povm> ms;
    for (const auto &m : t.measurements()) {
        auto it = povms.find(m.label);
        if (it == povms.end()) {
            throw ContractError("invariance_audit: no POVM for measurement '" + m.label + "'");
        }
        ms.push_back(it->second);
    }
    ProbTable after = born_table(t.preparations(), noisy, t.measurements(), ms);

    if (pairs.empty()) {
        for (const auto &a : t.preparations()) {
            for (const auto &b : t.preparations()) {
                if (a != b) {
                    pairs.emplace_back(a, b);
                }
            }
        }
    }

    InvarianceReport r;
    r.tolerance = tol;
    r.injective = noise::channel_injectivity(channel).injective;
    r.asserted = r.injective;
    for (const auto &[a, b] : pairs) {
        InvariancePair ip;
        ip.a = a;
        ip.b = b;
        ip.dmax_before = operational_dmax(t, a, b);
        ip.dmax_after = operational_dmax(after, a, b);
        ip.dtv_before = operational_dtv(t, a, b);
        ip.dtv_after = operational_dtv(after, a, b);
        r.max_deviation = std::max({r.max_deviation, deviation(ip.dmax_before, ip.dmax_after),
                                    std::abs(ip.dtv_before - ip.dtv_after)});
        r.pairs.push_back(std::move(ip));
    }
    if (groups) {
        r.before = alpha_beta_operational(t, *groups);
        r.after = alpha_beta_operational(after, *groups);
        r.max_deviation = std::max({r.max_deviation, deviation(r.before->alpha, r.after->alpha),
                                    deviation(r.before->beta, r.after->beta)});
    }
    r.passed = !r.asserted || r.max_deviation <= tol;
    return r;
}

}  // namespace contextcalc::optable
