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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "contextcalc/errors.hpp"
#include "contextcalc/presets.hpp"
#include "generators.hpp"

using namespace contextcalc;
using namespace contextcalc::optable;
using qmath::BlochVector;
using qmath::DensityOperator;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

struct LabelledStates {
    std::vector<std::string> labels;
    std::vector<DensityOperator> states;

    ProbTable table() const {
        return born_table(labels, states, presets::pauli_measurements(), presets::pauli_povms());
    }
    std::map<std::string, DensityOperator> map() const {
        std::map<std::string, DensityOperator> out;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            out.emplace(labels[i], states[i]);
        }
        return out;
    }
};

LabelledStates ideal_qubit() {
    return {{"0", "1", "+", "-", "mix"},
            {qmath::bloch_density({0, 0, 1}), qmath::bloch_density({0, 0, -1}), qmath::bloch_density({1, 0, 0}),
             qmath::bloch_density({-1, 0, 0}), DensityOperator::maximally_mixed(2)}};
}

// Random qubit states, plus (optionally) the normalized positive and negative
// parts of rho_0 - rho_1 so that the distance between the first two is attained.
LabelledStates random_qubits(std::size_t count, std::mt19937_64 &rng, bool completions) {
    LabelledStates s;
    for (std::size_t i = 0; i < count; ++i) {
        s.labels.push_back("s" + std::to_string(i));
        s.states.push_back(testgen::random_state(2, rng));
    }
    if (completions) {
        BlochVector diff = qmath::bloch_vector(s.states[0]) - qmath::bloch_vector(s.states[1]);
        BlochVector dir = diff * (1.0 / diff.norm());
        s.labels.push_back("up");
        s.states.push_back(qmath::bloch_density(dir));
        s.labels.push_back("down");
        s.states.push_back(qmath::bloch_density(dir * -1.0));
    }
    return s;
}

}  // namespace

TEST(optable, table_validation) {
    std::vector<Measurement> z{{"Z", {"+", "-"}}};
    EXPECT_NO_THROW(ProbTable({"a"}, z, {{{0.25}, {0.75}}}));
    auto code_of = [](auto &&make) {
        try {
            make();
        } catch (const ValidationError &e) {
            return e.code();
        }
        return std::string("none");
    };
    EXPECT_EQ(code_of([&] { ProbTable({"a", "a"}, z, {{{0.5, 0.5}, {0.5, 0.5}}}); }), "duplicate-label");
    EXPECT_EQ(code_of([&] { ProbTable({"a"}, z, {{{0.5}}}); }), "shape");
    EXPECT_EQ(code_of([&] { ProbTable({"a"}, z, {{{1.5}, {-0.5}}}); }), "probability-range");
    EXPECT_EQ(code_of([&] { ProbTable({"a"}, z, {{{0.5}, {0.6}}}); }), "row-sum");
}

TEST(optable, born_table_entries) {
    auto s = ideal_qubit();
    auto t = s.table();
    EXPECT_EQ(t.num_preparations(), 5u);
    EXPECT_EQ(t.num_rows(), 6u);
    std::size_t z = t.meas_index("Z");
    EXPECT_NEAR(t.prob(z, 0, t.prep_index("0")), 1.0, 1e-12);
    EXPECT_NEAR(t.prob(z, 1, t.prep_index("+")), 0.5, 1e-12);
    EXPECT_THROW(t.prep_index("nope"), ContractError);
}

TEST(optable, equivalence_examples) {
    auto t = ideal_qubit().table();
    auto same = operational_equivalence(t, Mixture::point("+"), Mixture::point("+"));
    EXPECT_TRUE(same.equivalent);
    EXPECT_EQ(same.max_deviation, 0.0);

    auto mixed = operational_equivalence(t, Mixture::uniform({"0", "1"}), Mixture::uniform({"+", "-"}));
    EXPECT_TRUE(mixed.equivalent);
    EXPECT_LE(mixed.max_deviation, 1e-12);

    auto flipped = operational_equivalence(t, Mixture::point("0"), Mixture::point("1"));
    EXPECT_FALSE(flipped.equivalent);
    EXPECT_NEAR(flipped.max_deviation, 1.0, 1e-12);
    EXPECT_EQ(flipped.worst_measurement, "Z");

    EXPECT_THROW(operational_equivalence(t, Mixture::point("0"), Mixture::point("nope")), ContractError);
    EXPECT_THROW(Mixture({{"0", 0.5}, {"1", 0.4}}), ContractError);
}

TEST(optable, dmax_examples) {
    auto t = ideal_qubit().table();
    EXPECT_EQ(operational_dmax(t, "+", "+").value(), 0.0);
    EXPECT_NEAR(operational_dmax(t, "0", "mix").value(), 1.0, 1e-9);
    EXPECT_TRUE(operational_dmax(t, "mix", "0").is_infinite());

    LabelledStates restricted{{"0", "+", "mix"},
                              {qmath::bloch_density({0, 0, 1}), qmath::bloch_density({1, 0, 0}),
                               DensityOperator::maximally_mixed(2)}};
    EXPECT_TRUE(operational_dmax(restricted.table(), "0", "mix").is_infinite());
}

TEST(optable, dtv_examples) {
    auto t = ideal_qubit().table();
    EXPECT_NEAR(operational_dtv(t, "-", "-"), 0.0, 1e-12);
    EXPECT_NEAR(operational_dtv(t, "0", "1"), 1.0, 1e-9);

    // With the antipodal completions along (z - x)/sqrt2 the quantum distance is attained.
    LabelledStates completed = ideal_qubit();
    BlochVector dir{-1.0 / kSqrt2, 0.0, 1.0 / kSqrt2};
    completed.labels.push_back("up");
    completed.states.push_back(qmath::bloch_density(dir));
    completed.labels.push_back("down");
    completed.states.push_back(qmath::bloch_density(dir * -1.0));
    double td = qmath::trace_distance(completed.states[0], completed.states[2]);
    EXPECT_NEAR(td, kSqrt2 / 2.0, 1e-12);
    EXPECT_NEAR(operational_dtv(completed.table(), "0", "+"), td, 1e-9);

    LabelledStates pair{{"0", "+"}, {qmath::bloch_density({0, 0, 1}), qmath::bloch_density({1, 0, 0})}};
    EXPECT_NEAR(operational_dtv(pair.table(), "0", "+"), 1.0, 1e-9);
}

TEST(optable, alpha_beta_examples) {
    LabelledStates single{{"a"}, {qmath::bloch_density({0.3, 0.1, 0.2})}};
    auto one = alpha_beta_operational(single.table(), {{"a"}});
    EXPECT_NEAR(one.alpha.value(), 1.0, 1e-9);
    EXPECT_NEAR(one.beta.value(), 1.0, 1e-9);

    auto sq = presets::square_setup();
    auto ab = alpha_beta_operational(sq.table(), sq.groups);
    EXPECT_NEAR(ab.alpha.value(), 1.0 + kSqrt2 / 2.0, 1e-6);
    EXPECT_NEAR(ab.beta.value(), 1.0 / (1.0 - kSqrt2 / 2.0), 1e-6);

    auto hex = presets::hexagon_setup();
    auto hb = alpha_beta_operational(hex.table(), hex.groups);
    EXPECT_NEAR(hb.alpha.value(), 5.0 / 3.0, 1e-6);
    EXPECT_NEAR(hb.beta.value(), 3.0, 1e-6);

    // Without completions nothing in the hull cancels the square's Bloch vectors.
    auto bare = presets::square_setup(false);
    auto bb = alpha_beta_operational(bare.table(), bare.groups);
    EXPECT_TRUE(bb.beta.is_infinite());
    EXPECT_GE(bb.alpha.value(), ab.alpha.value() - 1e-9);
}

TEST(optable, enumeration_cap) {
    Groups groups(13, std::vector<std::string>{"a", "b"});
    EXPECT_THROW(message_strings(groups), ContractError);
    EXPECT_EQ(message_strings(Groups(12, std::vector<std::string>{"a", "b"})), 4096u);
    EXPECT_THROW(message_strings({{"a", "b"}, {"c"}}), ContractError);
    EXPECT_EQ(message_digits(5, 3, 2), (std::vector<std::size_t>{1, 0, 1}));
}

TEST(optable, witness_examples) {
    auto sq = presets::square_setup();
    auto w = table_guess_and_bounds(sq.table(), sq.groups, sq.decoders);
    EXPECT_NEAR(w.p_guess, 1.0, 1e-12);
    EXPECT_NEAR(w.c_lower, (2.0 - kSqrt2) / 8.0, 1e-6);
    EXPECT_TRUE(w.violated);
    EXPECT_NEAR(w.bound_alpha, (2.0 + kSqrt2) / 4.0, 1e-6);
    EXPECT_NEAR(w.observer_success, (1.0 + w.c_lower) / 2.0, 1e-15);

    auto hex = presets::hexagon_setup();
    auto wh = table_guess_and_bounds(hex.table(), hex.groups, hex.decoders);
    EXPECT_NEAR(wh.c_lower, 1.0 / 24.0, 1e-6);

    // Depolarized square: Born rule gives P_guess = 1 - p/2.
    auto noisy = sq;
    auto ch = noise::ChannelSpec::depolarizing(2, 0.5);
    for (auto &s : noisy.states) {
        s = ch.apply(s);
    }
    auto wn = table_guess_and_bounds(noisy.table(), noisy.groups, noisy.decoders);
    EXPECT_NEAR(wn.p_guess, 0.75, 1e-12);
    EXPECT_LE(wn.p_guess, (2.0 + kSqrt2) / 4.0);
    EXPECT_EQ(wn.c_lower, 0.0);
    EXPECT_FALSE(wn.violated);

    auto bad = sq.decoders;
    bad[0] = "Y";
    auto t = sq.table();
    EXPECT_NO_THROW(table_guess_and_bounds(t, sq.groups, bad));
    EXPECT_THROW(table_guess(t, {{"k1x1", "k1x2", "k2x1"}}, {"X"}), ContractError);
}

TEST(optable, witness_inversion_round_trip) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 0.2);
    std::uniform_real_distribution<double> ab(1.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + trial % 3;
        std::size_t d = 2 + trial % 2;
        double c = u(rng);
        double alpha = ab(rng);
        double beta = ab(rng);
        double dn = std::pow(double(d), double(n));
        double pa = alpha * (1.0 + c * dn) / d;
        double pb = 1.0 - (d - 1.0) / d / beta + (d - 1.0) * dn / d * c;
        if (pa <= 1.0) {
            auto w = witness_from(pa, ExtendedReal::finite(alpha), ExtendedReal::finite(beta), n, d);
            EXPECT_NEAR(w.c_from_alpha, c, 1e-12);
            EXPECT_NEAR(w.bound_alpha, alpha / d, 1e-12);
            EXPECT_GE(w.c_lower, c - 1e-12);
        }
        if (pb <= 1.0) {
            auto w = witness_from(pb, ExtendedReal::finite(alpha), ExtendedReal::finite(beta), n, d);
            EXPECT_NEAR(w.c_from_beta, c, 1e-12);
            EXPECT_GE(w.c_lower, c - 1e-12);
        }
    }
    auto inf = witness_from(1.0, ExtendedReal::infinity(), ExtendedReal::infinity(), 2, 2);
    EXPECT_EQ(inf.c_lower, 0.0);
    EXPECT_FALSE(inf.violated);
}

TEST(optable, invariance_audit_examples) {
    auto sq = presets::square_setup();
    auto t = sq.table();
    std::vector<std::pair<std::string, std::string>> pairs{{"k1x1", "k2x1"}, {"k1x1", "k1x2"}, {"k2x2", "T1"}};

    const double angle = 0.7;
    qmath::ComplexMatrix u = qmath::ComplexMatrix::identity(2) * qmath::Complex(std::cos(angle), 0.0) -
                             qmath::pauli(1) * qmath::Complex(0.0, std::sin(angle));
    auto rot = invariance_audit(t, noise::ChannelSpec::unitary(u), sq.state_map(), sq.povm_map(), sq.groups, pairs);
    EXPECT_TRUE(rot.injective);
    EXPECT_TRUE(rot.asserted);
    EXPECT_TRUE(rot.passed) << rot.max_deviation;
    EXPECT_LE(rot.max_deviation, 1e-7);

    auto dep = invariance_audit(t, noise::ChannelSpec::depolarizing(2, 0.3), sq.state_map(), sq.povm_map(), sq.groups,
                                pairs);
    EXPECT_TRUE(dep.passed) << dep.max_deviation;
    ASSERT_TRUE(dep.before && dep.after);
    EXPECT_NEAR(dep.before->alpha.value(), dep.after->alpha.value(), 1e-7);
    EXPECT_NEAR(dep.before->beta.value(), dep.after->beta.value(), 1e-7);

    auto full = invariance_audit(t, noise::ChannelSpec::depolarizing(2, 1.0), sq.state_map(), sq.povm_map(),
                                 std::nullopt, pairs);
    EXPECT_FALSE(full.injective);
    EXPECT_FALSE(full.asserted);

    EXPECT_THROW(invariance_audit(t, noise::ChannelSpec::identity(3), sq.state_map(), sq.povm_map()), ContractError);
}

TEST(optable, dtv_is_a_metric) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        auto s = random_qubits(5, rng, false);
        // Duplicate a state under a new label so zero distance is exercised.
        s.labels.push_back("copy");
        s.states.push_back(s.states[2]);
        auto t = s.table();
        std::size_t k = s.labels.size();
        std::vector<std::vector<double>> d(k, std::vector<double>(k));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                d[i][j] = operational_dtv(t, s.labels[i], s.labels[j]);
                bool eq = operational_equivalence(t, Mixture::point(s.labels[i]), Mixture::point(s.labels[j])).equivalent;
                EXPECT_EQ(d[i][j] <= 1e-8, eq) << s.labels[i] << " " << s.labels[j];
                EXPECT_LE(d[i][j], 1.0 + 1e-8);
            }
        }
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                EXPECT_NEAR(d[i][j], d[j][i], 1e-8);
                for (std::size_t l = 0; l < k; ++l) {
                    EXPECT_LE(d[i][l], d[i][j] + d[j][l] + 1e-8);
                }
            }
        }
    }
}

TEST(optable, dmax_zero_iff_equivalent) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        auto s = random_qubits(4, rng, false);
        s.labels.push_back("copy");
        s.states.push_back(s.states[1]);
        auto t = s.table();
        for (const auto &a : s.labels) {
            for (const auto &b : s.labels) {
                auto dm = operational_dmax(t, a, b);
                bool eq = operational_equivalence(t, Mixture::point(a), Mixture::point(b)).equivalent;
                bool zero = dm.is_finite() && dm.value() <= 1e-8;
                EXPECT_EQ(zero, eq) << a << " " << b;
            }
        }
    }
}

TEST(optable, operational_measures_dominate_quantum_ones) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = random_qubits(4, rng, trial % 2 == 0);
        auto t = s.table();
        for (std::size_t i = 0; i < s.labels.size(); ++i) {
            for (std::size_t j = 0; j < s.labels.size(); ++j) {
                auto op = operational_dmax(t, s.labels[i], s.labels[j]);
                auto q = qmath::dmax_quantum(s.states[i], s.states[j]);
                if (q.is_infinite()) {
                    EXPECT_TRUE(op.is_infinite());
                } else if (op.is_finite()) {
                    EXPECT_GE(op.value(), q.value() - 1e-7);
                }
                double dtv = operational_dtv(t, s.labels[i], s.labels[j]);
                EXPECT_GE(dtv, qmath::trace_distance(s.states[i], s.states[j]) - 1e-7);
            }
        }
        if (trial % 2 == 0) {
            EXPECT_NEAR(operational_dtv(t, "s0", "s1"), qmath::trace_distance(s.states[0], s.states[1]), 1e-7);
        }
    }
}

TEST(optable, alpha_beta_at_least_one) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = random_qubits(4, rng, false);
        auto ab = alpha_beta_operational(s.table(), {{"s0", "s1"}, {"s2", "s3"}});
        EXPECT_GE(ab.alpha.value_or(1e300), 1.0 - 1e-9);
        EXPECT_GE(ab.beta.value_or(1e300), 1.0 - 1e-9);
    }
}

TEST(optable, operational_minimax_bounds_quantum_minimax) {
    // The operational values dominate the quantum ones, with equality for the
    // completed polygons.
    auto sq = presets::square_setup();
    auto q = qgames::alpha_min_quantum(qgames::ensemble_states(sq.config()));
    auto op = alpha_beta_operational(sq.table(), sq.groups);
    EXPECT_NEAR(op.alpha.value(), q.value.value(), 1e-5);
    auto bare = presets::square_setup(false);
    EXPECT_GE(alpha_beta_operational(bare.table(), bare.groups).alpha.value(), q.value.value() - 1e-6);
}
