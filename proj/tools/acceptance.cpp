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


// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "contextcalc/cli.hpp"
#include "contextcalc/errors.hpp"
#include "contextcalc/noise.hpp"
#include "contextcalc/ontomodels.hpp"
#include "contextcalc/optable.hpp"
#include "contextcalc/presets.hpp"
#include "contextcalc/qgames.hpp"
#include "generators.hpp"

using namespace contextcalc;
using qmath::BlochVector;
using qmath::DensityOperator;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Accumulates checks; the first failures are kept in the detail line.
class Checker {
   public:
    void check(bool ok, const std::string &what) {
        if (!ok) {
            ++failures_;
            if (failures_ <= 3) {
                failed_ << (failures_ > 1 ? "; " : "") << what;
            }
        }
    }
    void note(const std::string &s) { notes_ << (notes_.tellp() > 0 ? ", " : "") << s; }
    Outcome done() const {
        if (failures_ == 0) {
            return {true, notes_.str()};
        }
        std::ostringstream out;
        out << failures_ << " failed check(s): " << failed_.str();
        return {false, out.str()};
    }

   private:
    int failures_ = 0;
    std::ostringstream failed_;
    std::ostringstream notes_;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome square_pipeline() {
    Checker c;
    auto t0 = std::chrono::steady_clock::now();
    auto sim = cli::simulate_table(cli::preset_setup("square"), noise::ChannelSpec::identity(2), std::nullopt, 1);
    auto report = cli::analyze(cli::parse_theory(cli::dump_json(sim)), std::nullopt);
    double elapsed = seconds_since(t0);
    const auto &w = report["witness"];
    double pg = w["p_guess"].get<double>();
    double q = w["q_guess_bound"].get<double>();
    double cl = w["c_lower"].get<double>();
    c.check(std::abs(pg - 1.0) <= 1e-9, "P_guess " + fmt(pg));
    c.check(std::abs(q - (2.0 + kSqrt2) / 4.0) <= 1e-6, "alpha/d " + fmt(q));
    c.check(std::abs(cl - (2.0 - kSqrt2) / 8.0) <= 1e-6, "c_lower " + fmt(cl));
    c.check(w["violated"].get<bool>(), "not violated");
    c.check(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
    c.note("P_guess=" + fmt(pg) + " alpha/d=" + fmt(q) + " c_lower=" + fmt(cl));
    return c.done();
}

Outcome hexagon() {
    Checker c;
    auto setup = presets::hexagon_setup();
    auto guess = qgames::qguess_quantum(setup.config());
    auto w = optable::table_guess_and_bounds(setup.table(), setup.groups, setup.decoders);
    c.check(std::abs(guess.q_guess - 5.0 / 6.0) <= 1e-6, "Q_guess " + fmt(guess.q_guess));
    c.check(std::abs(w.c_lower - 1.0 / 24.0) <= 1e-6, "c_lower " + fmt(w.c_lower));
    c.note("Q_guess=" + fmt(guess.q_guess) + " c_lower=" + fmt(w.c_lower));
    return c.done();
}

Outcome sdp_vs_closed_form() {
    Checker c;
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> len(0.3, 1.0);
    double worst = 0.0;
    double slowest = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
        auto cfg = testgen::centered_qubit_config(n, rng, len(rng));
        auto cf = qgames::qubit_closed_form(cfg);
        auto ens = qgames::ensemble_states(cfg);
        for (bool alpha : {true, false}) {
            auto t0 = std::chrono::steady_clock::now();
            auto r = alpha ? qgames::alpha_min_quantum(ens) : qgames::beta_min_quantum(ens);
            double dt = seconds_since(t0);
            slowest = std::max(slowest, dt);
            const auto &expect = alpha ? cf.alpha : cf.beta;
            if (expect.is_infinite() || r.value.is_infinite()) {
                c.check(expect.is_infinite() && r.value.is_infinite(), "infinite mismatch");
                continue;
            }
            double diff = std::abs(r.value.value() - expect.value());
            worst = std::max(worst, diff);
            c.check(diff <= 1e-6, std::string(alpha ? "alpha" : "beta") + " off by " + fmt(diff));
            c.check(dt < 1.0, "solve took " + fmt(dt) + " s");
        }
    }
    c.note("max |SDP - closed form|=" + fmt(worst) + " slowest solve=" + fmt(slowest) + " s");
    return c.done();
}

Outcome operational_vs_quantum() {
    Checker c;
    std::mt19937_64 rng(404);
    auto meas = presets::pauli_measurements();
    auto povms = presets::pauli_povms();
    double worst = 0.0;
    double least_excess = 1e300;
    int finite_dmax = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto a = testgen::random_state(2, rng);
        auto b = testgen::random_state(2, rng);
        BlochVector diff = qmath::bloch_vector(a) - qmath::bloch_vector(b);
        if (diff.norm() < 1e-6) {
            --trial;
            continue;
        }
        std::vector<std::string> labels{"a", "b", "up", "down"};
        std::vector<DensityOperator> states{a, b, qmath::bloch_density(diff * (1.0 / diff.norm())),
                                            qmath::bloch_density(diff * (-1.0 / diff.norm()))};
        // b = y a + (1 - y) s_ab at the largest y, and likewise with a and b swapped.
        auto qab = qmath::dmax_quantum(a, b);
        auto qba = qmath::dmax_quantum(b, a);
        for (const auto &[x, z, q, name] : {std::tuple{&a, &b, qab, "s_ab"}, std::tuple{&b, &a, qba, "s_ba"}}) {
            if (q.is_finite()) {
                double y = std::exp2(-q.value());
                labels.push_back(name);
                states.push_back(DensityOperator((z->matrix() - x->matrix() * y) * (1.0 / (1.0 - y))));
            }
        }
        finite_dmax += static_cast<int>(qab.is_finite()) + static_cast<int>(qba.is_finite());
        auto full = optable::born_table(labels, states, meas, povms);
        auto dmax_error = [&](const std::string &x, const std::string &z, const ExtendedReal &q) {
            auto op = optable::operational_dmax(full, x, z);
            if (q.is_infinite() || op.is_infinite()) {
                return q.is_infinite() && op.is_infinite() ? 0.0 : 1e300;
            }
            return std::abs(op.value() - q.value());
        };
        double td = qmath::trace_distance(a, b);
        double e1 = std::abs(optable::operational_dtv(full, "a", "b") - td);
        double e2 = dmax_error("a", "b", qab);
        double e3 = dmax_error("b", "a", qba);
        worst = std::max({worst, e1, e2, e3});
        c.check(e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-6, "pair " + std::to_string(trial) + " off by " +
                                                             fmt(std::max({e1, e2, e3})));

        auto restricted = optable::born_table({"a", "b"}, {a, b}, meas, povms);
        double dtv_r = optable::operational_dtv(restricted, "a", "b");
        auto dmax_r = optable::operational_dmax(restricted, "a", "b");
        double excess = dtv_r - td;
        least_excess = std::min(least_excess, excess);
        c.check(excess > 1e-6, "restricted dtv not above trace distance");
        c.check(dmax_r.is_infinite() || dmax_r.value() > qab.value() + 1e-6, "restricted dmax not above quantum");
    }
    c.note("max deviation=" + fmt(worst) + " (" + std::to_string(finite_dmax) +
           " of 200 Dmax values finite) least restricted dtv excess=" + fmt(least_excess));
    return c.done();
}

Outcome noise_invariance() {
    Checker c;
    auto sq = presets::square_setup();
    auto t = sq.table();
    double worst = 0.0;
    for (double p : {0.1, 0.3, 0.6, 0.9}) {
        auto r = optable::invariance_audit(t, noise::ChannelSpec::depolarizing(2, p), sq.state_map(), sq.povm_map(),
                                           sq.groups, {}, 1e-6);
        worst = std::max(worst, r.max_deviation);
        c.check(r.injective && r.asserted, "p=" + fmt(p) + " not asserted");
        c.check(r.passed, "p=" + fmt(p) + " deviation " + fmt(r.max_deviation));
        c.check(r.pairs.size() == t.num_preparations() * (t.num_preparations() - 1), "pair count");
    }
    c.note("max deviation over alpha, beta, d_prep, Dmax=" + fmt(worst));
    return c.done();
}

BlochVector random_unit(std::mt19937_64 &rng) { return testgen::unit_vector(rng); }

Outcome ks_model() {
    using namespace ontomodels;
    Checker c;
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(6);
    double born_worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        BlochVector s = random_unit(rng);
        BlochVector r = random_unit(rng);
        born_worst = std::max(born_worst, std::abs(ks_born(s, r) - (1.0 + s.dot(r)) / 2.0));
    }
    c.check(born_worst < 1e-6, "Born residual " + fmt(born_worst));

    auto grid = SphereGrid::product();
    double tv_worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        BlochVector a = testgen::ball_vector(rng) * 0.95;
        Ensemble e1 = random_ensemble_with_average(a, 2 + i % 3, rng);
        Ensemble e2 = random_ensemble_with_average(a, 2 + (i / 3) % 3, rng);
        tv_worst = std::max(tv_worst, model_total_variation(ks_ensemble_density(grid, e1), ks_ensemble_density(grid, e2)));
    }
    c.check(tv_worst <= 0.5 + 1e-6, "ensemble TV " + fmt(tv_worst));

    std::vector<std::pair<DensityOperator, DensityOperator>> pairs;
    for (int i = 0; i < 100; ++i) {
        pairs.emplace_back(qmath::bloch_density(random_unit(rng)), qmath::bloch_density(random_unit(rng)));
    }
    auto t2 = theorem2_audit(ks_tv_oracle(), pairs, 0.5);
    c.check(t2.passed, "theorem 2 sandwich, max gap " + fmt(t2.max_gap));
    double elapsed = seconds_since(t0);
    c.check(elapsed < 60.0, "runtime " + fmt(elapsed) + " s");
    c.note("Born residual=" + fmt(born_worst) + " max TV=" + fmt(tv_worst) + " sandwich gap=" + fmt(t2.max_gap));
    return c.done();
}

Outcome noisy_model() {
    using namespace ontomodels;
    Checker c;
    std::mt19937_64 rng(9);
    double born_worst = 0.0;
    double pnc_worst = 0.0;
    auto grid = SphereGrid::product(40, 80);
    for (double p : {0.5, 0.6, 0.8}) {
        for (int i = 0; i < 200; ++i) {
            auto psi = testgen::random_pure(2, rng);
            auto phi = testgen::random_pure(2, rng);
            double overlap = (psi.matrix() * phi.matrix()).trace().real();
            double err = std::abs(noisy_pnc_model_eval(p, psi, phi) - ((1.0 - p) * overlap + p / 2.0));
            born_worst = std::max(born_worst, err);
            c.check(err <= 1e-12, "p=" + fmt(p) + " Born residual " + fmt(err));

            BlochVector a = testgen::ball_vector(rng) * 0.9;
            std::vector<OnticDensity> mix;
            for (std::size_t k : {2u, 3u}) {
                OnticDensity m{grid, std::vector<double>(grid->size(), 0.0)};
                for (const auto &el : random_ensemble_with_average(a, k + static_cast<std::size_t>(i % 2), rng)) {
                    auto d = noisy_pnc_density(grid, p, el.direction);
                    for (std::size_t j = 0; j < grid->size(); ++j) {
                        m.values[j] += el.weight * d.values[j];
                    }
                }
                mix.push_back(std::move(m));
            }
            double tv = model_total_variation(mix[0], mix[1]);
            pnc_worst = std::max(pnc_worst, tv);
            c.check(tv < 1e-12, "p=" + fmt(p) + " equal-average TV " + fmt(tv));
        }
    }
    c.note("Born residual=" + fmt(born_worst) + " (adapted grid tolerance 1e-12) equal-average TV=" + fmt(pnc_worst));
    return c.done();
}

Outcome haar_threshold() {
    Checker c;
    for (std::size_t d : {2u, 3u, 4u}) {
        auto t0 = std::chrono::steady_clock::now();
        auto h = qgames::qudit_haar_threshold(d, 100000, 100 + d);
        double dt = seconds_since(t0);
        double z = (h.mc_estimate - h.exact) / h.std_err;
        c.check(std::abs(z) <= 3.0, "D=" + std::to_string(d) + " z=" + fmt(z));
        c.check(dt < 60.0, "D=" + std::to_string(d) + " took " + fmt(dt) + " s");
        c.note("D=" + std::to_string(d) + " z=" + fmt(z));
    }
    return c.done();
}

Outcome depolarizing_thresholds() {
    Checker c;
    auto r = noise::depolarizing_report(2, 0.3);
    c.check(std::abs(r.depol_contextual_below - 0.5) <= 1e-12, "contextual-below " + fmt(r.depol_contextual_below));
    c.check(std::abs(r.depol_eb_at - 2.0 / 3.0) <= 1e-12, "EB at " + fmt(r.depol_eb_at));
    c.check(std::abs(r.fidelity_threshold - 0.75) <= 1e-12, "fidelity threshold " + fmt(r.fidelity_threshold));
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        std::size_t d = 2 + static_cast<std::size_t>(i % 4);
        double p = u(rng);
        double dd = static_cast<double>(d);
        double err = std::abs(noise::average_gate_fidelity(noise::ChannelSpec::depolarizing(d, p)) -
                              (1.0 - p * (dd - 1.0) / dd));
        worst = std::max(worst, err);
        c.check(err <= 1e-12, "AGF off by " + fmt(err));
    }
    c.note("max AGF error=" + fmt(worst));
    return c.done();
}

Outcome classical_and_lemma1() {
    using namespace ontomodels;
    Checker c;
    std::mt19937_64 rng(30);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        std::size_t count = 2 + static_cast<std::size_t>(i % 5);
        std::size_t size = 2 + static_cast<std::size_t>((i / 5) % 6);
        std::vector<std::vector<double>> dists;
        for (std::size_t k = 0; k < count; ++k) {
            dists.push_back(testgen::random_distribution(size, rng));
        }
        try {
            auto r = qgames::classical_guess_identity(dists);
            worst = std::max(worst, std::abs(r.sum_max - r.minimax));
            c.check(std::abs(r.sum_max - r.minimax) < 1e-9, "identity gap " + fmt(std::abs(r.sum_max - r.minimax)));
        } catch (const NumericalError &e) {
            c.check(false, e.what());
        }
    }

    const BlochVector ex{1, 0, 0}, ey{0, 1, 0}, ez{0, 0, 1};
    std::vector<DensityOperator> xz_states{qmath::bloch_density(ez), qmath::bloch_density(ez * -1.0),
                                           qmath::bloch_density(ex), qmath::bloch_density(ex * -1.0)};
    std::vector<std::string> xz_labels{"0", "1", "+", "-"};
    auto toy = optable::born_table(xz_labels, xz_states, {{"X", {"+", "-"}}, {"Z", {"0", "1"}}},
                                   {qmath::bloch_measurement(ex), qmath::bloch_measurement(ez)});
    auto sink = kitchen_sink_model(toy, {});
    auto l1 = lemma1_audit(sink, xz_labels, toy, 1.0);
    c.check(l1.passed, "kitchen-sink lemma 1");

    std::vector<std::string> labels{"a", "b", "c", "d"};
    std::vector<BlochVector> dirs{ex, ey, ex * -1.0, ey * -1.0};
    auto grid = SphereGrid::adapted({ex, ey}, 32);
    for (double p : {0.5, 0.6, 0.8}) {
        auto ch = noise::ChannelSpec::depolarizing(2, p);
        std::vector<DensityOperator> states;
        for (const auto &d : dirs) {
            states.push_back(ch.apply(qmath::bloch_density(d)));
        }
        auto theory = optable::born_table(labels, states, {{"X", {"0", "1"}}, {"Y", {"0", "1"}}},
                                          {qmath::bloch_measurement(ex), qmath::bloch_measurement(ey)});
        auto model = noisy_pnc_discrete_model(grid, p, labels, dirs, {"X", "Y"}, {ex, ey});
        double residual = model.reconstruction_residual(theory, labels);
        c.check(residual <= 1e-12, "noisy model reconstruction " + fmt(residual));
        c.check(lemma1_audit(model, labels, theory, 0.0).passed, "noisy model lemma 1 at p=" + fmt(p));
    }
    c.note("max identity gap=" + fmt(worst) + " lemma 1 on kitchen-sink and noisy model p in {0.5, 0.6, 0.8}");
    return c.done();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"square pipeline", square_pipeline},
        {"hexagon Q_guess and c_lower", hexagon},
        {"SDP vs qubit closed form", sdp_vs_closed_form},
        {"operational vs quantum measures", operational_vs_quantum},
        {"depolarizing invariance", noise_invariance},
        {"Kochen-Specker model", ks_model},
        {"noisy-qubit PNC model", noisy_model},
        {"Haar threshold", haar_threshold},
        {"depolarizing thresholds", depolarizing_thresholds},
        {"classical identity and lemma 1", classical_and_lemma1},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double dt = seconds_since(t0);
        failed += o.pass ? 0 : 1;
        std::printf("%s %2zu  %-32s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), dt,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
