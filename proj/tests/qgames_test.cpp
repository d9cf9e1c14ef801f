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


#include "contextcalc/qgames.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "contextcalc/errors.hpp"
#include "generators.hpp"

using namespace contextcalc;
using namespace contextcalc::qgames;
using qmath::BlochVector;
using qmath::Complex;
using qmath::ComplexMatrix;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

DensityOperator ket0() { return qmath::bloch_density({0, 0, 1}); }
DensityOperator ket1() { return qmath::bloch_density({0, 0, -1}); }

double objective_at(const std::vector<DensityOperator> &rho, bool alpha, BlochVector b) {
    if (b.norm() > 1.0) {
        return std::numeric_limits<double>::infinity();
    }
    auto s = qmath::bloch_density(b);
    ExtendedReal v = alpha ? alpha_objective(rho, s) : beta_objective(rho, s);
    return v.is_finite() ? v.value() : std::numeric_limits<double>::infinity();
}

// Brute force over the Bloch disc y = 0 on a 0.005 grid, then a 0.0005 grid
// around the best node (beta is steep near nearly pure inputs). Only valid
// for inputs in the x-z plane, where reflecting y -> -y maps the input set
// to itself and the objective is quasi-convex, so the optimum lies in the plane.
double disc_grid_min(const std::vector<DensityOperator> &rho, bool alpha) {
    double best = std::numeric_limits<double>::infinity();
    BlochVector centre;
    const double h = 0.005;
    for (double x = -1.0; x <= 1.0 + 1e-12; x += h) {
        for (double z = -1.0; z <= 1.0 + 1e-12; z += h) {
            double v = objective_at(rho, alpha, {x, 0.0, z});
            if (v < best) {
                best = v;
                centre = {x, 0.0, z};
            }
        }
    }
    for (int i = -10; i <= 10; ++i) {
        for (int k = -10; k <= 10; ++k) {
            best = std::min(best, objective_at(rho, alpha, centre + BlochVector{i * 0.0005, 0.0, k * 0.0005}));
        }
    }
    return best;
}

// Coarse Bloch-ball grid, then a 0.005 grid around the best coarse node.
double ball_grid_min(const std::vector<DensityOperator> &rho, bool alpha) {
    auto eval = [&](BlochVector b) { return objective_at(rho, alpha, b); };
    BlochVector centre;
    double best = std::numeric_limits<double>::infinity();
    for (double x = -1.0; x <= 1.0; x += 0.05) {
        for (double y = -1.0; y <= 1.0; y += 0.05) {
            for (double z = -1.0; z <= 1.0; z += 0.05) {
                double v = eval({x, y, z});
                if (v < best) {
                    best = v;
                    centre = {x, y, z};
                }
            }
        }
    }
    for (int i = -10; i <= 10; ++i) {
        for (int j = -10; j <= 10; ++j) {
            for (int k = -10; k <= 10; ++k) {
                best = std::min(best, eval(centre + BlochVector{i * 0.005, j * 0.005, k * 0.005}));
            }
        }
    }
    return best;
}

}  // namespace

TEST(qgames, single_state_is_its_own_optimum) {
    std::mt19937_64 rng(1);
    for (std::size_t dim : {2, 3}) {
        auto rho = testgen::random_mixed(dim, rng);
        auto a = alpha_min_quantum({rho});
        auto b = beta_min_quantum({rho});
        EXPECT_NEAR(a.value.value(), 1.0, 1e-7);
        EXPECT_NEAR(b.value.value(), 1.0, 1e-7);
        ASSERT_TRUE(a.sigma_star.has_value());
        EXPECT_LT(qmath::trace_distance(*a.sigma_star, rho), 1e-4);
        EXPECT_LT(a.certificate_gap, 1e-6);
    }
}

TEST(qgames, orthogonal_pair) {
    auto a = alpha_min_quantum({ket0(), ket1()});
    EXPECT_NEAR(a.value.value(), 2.0, 1e-7);
    EXPECT_LT(qmath::trace_distance(*a.sigma_star, DensityOperator::maximally_mixed(2)), 1e-6);
    EXPECT_EQ(a.argmax.size(), 2u);
    EXPECT_NEAR(disc_grid_min({ket0(), ket1()}, true), 2.0, 1e-9);

    auto b = beta_min_quantum({ket0(), ket1()});
    EXPECT_TRUE(b.value.is_infinite());
    EXPECT_FALSE(b.sigma_star.has_value());
}

TEST(qgames, square_and_hexagon_values) {
    for (std::size_t n : {2, 3}) {
        auto pc = polygon_states(n);
        auto rho = ensemble_states(pc.config);
        auto a = alpha_min_quantum(rho);
        auto b = beta_min_quantum(rho);
        double m = pc.max_bloch_norm;
        EXPECT_NEAR(a.value.value(), 1.0 + m, 1e-6) << n;
        EXPECT_NEAR(b.value.value(), 1.0 / (1.0 - m), 1e-6) << n;
        EXPECT_LT(a.certificate_gap, 1e-6);
        EXPECT_LT(b.certificate_gap, 1e-6);
        EXPECT_LE(a.lower_bound, a.value.value());
        EXPECT_GT(a.lower_bound, a.value.value() - 1e-6);
        EXPECT_LT(qmath::trace_distance(*a.sigma_star, DensityOperator::maximally_mixed(2)), 1e-4);
    }
    EXPECT_NEAR(alpha_min_quantum(ensemble_states(polygon_states(2).config)).value.value(), 1.0 + kSqrt2 / 2, 1e-6);
    EXPECT_NEAR(beta_min_quantum(ensemble_states(polygon_states(3).config)).value.value(), 3.0, 1e-6);
}

TEST(qgames, objectives_match_dmax) {
    std::mt19937_64 rng(2);
    std::vector<DensityOperator> rho;
    for (int i = 0; i < 4; ++i) {
        rho.push_back(testgen::random_mixed(3, rng));
    }
    auto sigma = testgen::random_mixed(3, rng);
    double a = 0.0;
    double b = 0.0;
    for (const auto &r : rho) {
        a = std::max(a, std::exp2(qmath::dmax_quantum(r, sigma).value()));
        b = std::max(b, std::exp2(qmath::dmax_quantum(sigma, r).value()));
    }
    EXPECT_NEAR(alpha_objective(rho, sigma).value(), a, 1e-9);
    EXPECT_NEAR(beta_objective(rho, sigma).value(), b, 1e-9);
}

TEST(qgames, qguess_values) {
    auto pair = make_config({{ket0(), ket1()}});
    EXPECT_NEAR(qguess_quantum(pair).q_guess, 1.0, 1e-7);

    auto sq = qguess_quantum(polygon_states(2).config);
    EXPECT_NEAR(sq.q_guess, (2.0 + kSqrt2) / 4.0, 1e-6);
    EXPECT_NEAR(sq.r_guess, sq.q_guess / 2.0, 1e-15);
    EXPECT_NEAR(qguess_quantum(polygon_states(3).config).q_guess, 5.0 / 6.0, 1e-6);
}

TEST(qgames, qguess_lies_between_random_guessing_and_one) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 1 + trial % 2;
        std::size_t d = 2 + trial % 3;
        std::vector<std::vector<DensityOperator>> st(n);
        for (auto &row : st) {
            for (std::size_t x = 0; x < d; ++x) {
                row.push_back(testgen::random_state(2, rng));
            }
        }
        double q = qguess_quantum(make_config(st)).q_guess;
        EXPECT_GE(q, 1.0 / static_cast<double>(d) - 1e-9);
        EXPECT_LE(q, 1.0 + 1e-9);
    }
}

TEST(qgames, polygon_max_norms) {
    EXPECT_NEAR(polygon_states(1).max_bloch_norm, 1.0, 1e-12);
    EXPECT_NEAR(polygon_states(2).max_bloch_norm, kSqrt2 / 2, 1e-12);
    EXPECT_NEAR(polygon_states(3).max_bloch_norm, 2.0 / 3.0, 1e-12);
    auto pc = polygon_states(4);
    EXPECT_EQ(pc.config.n, 4u);
    EXPECT_EQ(pc.config.d, 2u);
    for (const auto &row : pc.bloch) {
        for (const auto &b : row) {
            EXPECT_NEAR(b.norm(), 1.0, 1e-12);
            EXPECT_NEAR(b.z, 0.0, 1e-12);
        }
    }
}

TEST(qgames, closed_form_examples) {
    auto sq = qubit_closed_form(polygon_states(2).config);
    EXPECT_NEAR(sq.alpha.value(), 1.0 + kSqrt2 / 2, 1e-12);
    EXPECT_NEAR(sq.beta.value(), 1.0 / (1.0 - kSqrt2 / 2), 1e-12);
    // Four ensembles along the diagonals, two signs each, pairwise shared.
    EXPECT_EQ(sq.completions.size(), 4u);

    auto hex = qubit_closed_form(polygon_states(3).config);
    EXPECT_NEAR(hex.alpha.value(), 5.0 / 3.0, 1e-12);
    EXPECT_NEAR(hex.beta.value(), 3.0, 1e-12);

    auto pair = qubit_closed_form(polygon_states(1).config);
    EXPECT_NEAR(pair.alpha.value(), 2.0, 1e-12);
    EXPECT_TRUE(pair.beta.is_infinite());
}

TEST(qgames, closed_form_preconditions) {
    auto off = make_config({{ket0(), qmath::bloch_density({1, 0, 0})}});
    EXPECT_THROW(qubit_closed_form(off), ContractError);
    EXPECT_NO_THROW(qubit_closed_form(off, /*require_centered=*/false));
    auto three = make_config({{qmath::bloch_density({1, 0, 0}), qmath::bloch_density({-0.5, 0.8660254037844386, 0}),
                               qmath::bloch_density({-0.5, -0.8660254037844386, 0})}});
    EXPECT_THROW(qubit_closed_form(three), ContractError);
    auto qutrit = DensityOperator::maximally_mixed(3);
    EXPECT_THROW(qubit_closed_form(make_config({{qutrit, qutrit}})), ContractError);
}

TEST(qgames, solver_matches_closed_form_on_centered_configs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> len(0.3, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto cfg = testgen::centered_qubit_config(1 + trial % 4, rng, len(rng));
        auto cf = qubit_closed_form(cfg);
        auto rho = ensemble_states(cfg);
        EXPECT_NEAR(alpha_min_quantum(rho).value.value(), cf.alpha.value(), 1e-6) << trial;
        auto b = beta_min_quantum(rho);
        if (cf.beta.is_infinite()) {
            EXPECT_TRUE(b.value.is_infinite()) << trial;
        } else {
            EXPECT_NEAR(b.value.value(), cf.beta.value(), 1e-6) << trial;
        }
    }
}

TEST(qgames, binary_inequalities_coincide_for_centered_qubits) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> len(0.2, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
        auto cf = qubit_closed_form(testgen::centered_qubit_config(1 + trial % 4, rng, len(rng)));
        double d = 2.0;
        EXPECT_NEAR(1.0 - (d - 1.0) / (d * cf.beta.value()), cf.alpha.value() / d, 1e-9);
    }
}

TEST(qgames, values_are_unitarily_invariant) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 4; ++trial) {
        std::size_t dim = 2 + trial % 2;
        std::vector<DensityOperator> rho;
        for (int i = 0; i < 4; ++i) {
            rho.push_back(testgen::random_mixed(dim, rng));
        }
        ComplexMatrix u = qmath::haar_unitary(dim, rng);
        std::vector<DensityOperator> rot;
        for (const auto &r : rho) {
            rot.push_back(qmath::conjugate(r, u));
        }
        EXPECT_NEAR(alpha_min_quantum(rho).value.value(), alpha_min_quantum(rot).value.value(), 1e-6);
        EXPECT_NEAR(beta_min_quantum(rho).value.value(), beta_min_quantum(rot).value.value(), 1e-6);
    }
}

TEST(qgames, planar_inputs_bracketed_by_disc_grid) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> rad(0.3, 1.0);
    for (int trial = 0; trial < 4; ++trial) {
        std::vector<DensityOperator> rho;
        for (int i = 0; i < 3; ++i) {
            double t = ang(rng);
            double r = rad(rng);
            rho.push_back(qmath::bloch_density({r * std::cos(t), 0.0, r * std::sin(t)}));
        }
        for (bool alpha : {true, false}) {
            auto res = alpha ? alpha_min_quantum(rho) : beta_min_quantum(rho);
            double grid = disc_grid_min(rho, alpha);
            ASSERT_TRUE(res.value.is_finite());
            EXPECT_LE(res.value.value(), grid + 1e-9) << trial << alpha;
            EXPECT_GE(res.value.value(), grid - 0.01) << trial << alpha;
        }
    }
}

TEST(qgames, general_inputs_bracketed_by_ball_grid) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 2; ++trial) {
        std::vector<DensityOperator> rho;
        for (int i = 0; i < 3; ++i) {
            rho.push_back(qmath::bloch_density(testgen::ball_vector(rng)));
        }
        for (bool alpha : {true, false}) {
            auto res = alpha ? alpha_min_quantum(rho) : beta_min_quantum(rho);
            double grid = ball_grid_min(rho, alpha);
            EXPECT_LE(res.value.value(), grid + 1e-9) << trial << alpha;
            EXPECT_GE(res.value.value(), grid - 0.01) << trial << alpha;
        }
    }
}

TEST(qgames, tangential_level_sets_still_certify) {
    // Uncentred three-message qubit games converge slowly under projections
    // alone; the returned bracket must still be certified.
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<std::vector<DensityOperator>> st(2);
        for (auto &row : st) {
            for (int x = 0; x < 3; ++x) {
                row.push_back(qmath::bloch_density(testgen::ball_vector(rng)));
            }
        }
        auto rho = ensemble_states(make_config(st));
        SolverOptions opt;
        opt.max_sweeps = 500;
        auto a = alpha_min_quantum(rho, opt);
        EXPECT_LE(a.value.value() - a.lower_bound, opt.certificate_tol);
        EXPECT_NEAR(alpha_objective(rho, *a.sigma_star).value(), a.value.value(), 1e-9);
        auto full = alpha_min_quantum(rho);
        EXPECT_NEAR(full.value.value(), a.value.value(), 1e-6);
    }
}

TEST(qgames, covariant_sets_are_optimized_by_maximally_mixed_state) {
    // Closing a random two-basis configuration under the Weyl group makes the
    // input set covariant under an irreducible group, so sigma = I/D is optimal.
    std::mt19937_64 rng(11);
    for (std::size_t dim = 2; dim <= 4; ++dim) {
        std::vector<std::vector<DensityOperator>> st(2);
        for (auto &row : st) {
            auto povm = qmath::Povm::basis(qmath::haar_unitary(dim, rng));
            for (const auto &e : povm.effects()) {
                row.push_back(DensityOperator(e));
            }
        }
        auto base = ensemble_states(make_config(st));
        std::vector<DensityOperator> orbit;
        const double w = 2.0 * std::numbers::pi / static_cast<double>(dim);
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = 0; b < dim; ++b) {
                ComplexMatrix weyl(dim, dim);
                for (std::size_t j = 0; j < dim; ++j) {
                    weyl((j + a) % dim, j) = std::polar(1.0, w * static_cast<double>(b * j));
                }
                for (const auto &r : base) {
                    orbit.push_back(qmath::conjugate(r, weyl));
                }
            }
        }
        auto mixed = DensityOperator::maximally_mixed(dim);
        double at_mixed = alpha_objective(orbit, mixed).value();
        SolverOptions opt;
        opt.max_sweeps = 500;
        auto a = alpha_min_quantum(orbit, opt);
        EXPECT_NEAR(a.value.value(), at_mixed, 1e-6) << dim;
        EXPECT_LE(a.lower_bound, at_mixed + 1e-9);
    }
}

TEST(qgames, haar_threshold_exact_values) {
    auto d2 = qudit_haar_threshold(2, 1000, 1);
    auto d3 = qudit_haar_threshold(3, 1000, 1);
    EXPECT_DOUBLE_EQ(d2.exact, 0.75);
    EXPECT_NEAR(d3.exact, 11.0 / 18.0, 1e-15);
}

TEST(qgames, haar_threshold_monte_carlo) {
    for (std::size_t dim : {2, 3}) {
        auto h = qudit_haar_threshold(dim, 20000, 42 + dim);
        EXPECT_EQ(h.samples, 20000u);
        EXPECT_GT(h.std_err, 0.0);
        EXPECT_LT(std::abs(h.mc_estimate - h.exact), 3.0 * h.std_err) << dim;
    }
}

TEST(qgames, haar_threshold_parallel_matches_serial) {
    auto p = qudit_haar_threshold(3, 5000, 77);
    auto s = qudit_haar_threshold_serial(3, 5000, 77);
    EXPECT_EQ(p.mc_estimate, s.mc_estimate);
    EXPECT_EQ(p.std_err, s.std_err);
    auto again = qudit_haar_threshold(3, 5000, 77);
    EXPECT_EQ(p.mc_estimate, again.mc_estimate);
}

TEST(qgames, max_row_overlap_of_basis_permutation) {
    ComplexMatrix u(3, 3);
    u(0, 2) = 1.0;
    u(1, 0) = 1.0;
    u(2, 1) = 1.0;
    EXPECT_DOUBLE_EQ(max_row_overlap(u), 1.0);
    ComplexMatrix f(2, 2);
    f(0, 0) = f(0, 1) = f(1, 0) = kSqrt2 / 2;
    f(1, 1) = -kSqrt2 / 2;
    EXPECT_NEAR(max_row_overlap(f), 0.5, 1e-15);
}

TEST(qgames, classical_identity_examples) {
    auto same = classical_guess_identity({{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}});
    EXPECT_NEAR(same.sum_max, 1.0, 1e-15);
    EXPECT_NEAR(same.nu_star[2], 0.5, 1e-15);

    auto apart = classical_guess_identity({{1.0, 0.0}, {0.0, 1.0}});
    EXPECT_DOUBLE_EQ(apart.sum_max, 2.0);
    EXPECT_DOUBLE_EQ(apart.nu_star[0], 0.5);
    EXPECT_DOUBLE_EQ(apart.nu_star[1], 0.5);

    EXPECT_THROW(classical_guess_identity({}), ContractError);
}

TEST(qgames, classical_identity_random) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> mu;
        for (int i = 0; i < 3; ++i) {
            mu.push_back(testgen::random_distribution(5, rng));
        }
        auto id = classical_guess_identity(mu);
        double sum_max = 0.0;
        for (std::size_t l = 0; l < 5; ++l) {
            sum_max += std::max({mu[0][l], mu[1][l], mu[2][l]});
        }
        EXPECT_NEAR(id.sum_max, sum_max, 1e-12);
        double mm = 0.0;
        for (const auto &m : mu) {
            mm = std::max(mm, std::exp2(qmath::dmax_classical(m, id.nu_star).value()));
        }
        EXPECT_LT(std::abs(mm - sum_max), 1e-9);
        // No other distribution does better than nu_star.
        auto other = testgen::random_distribution(5, rng);
        double mo = 0.0;
        for (const auto &m : mu) {
            mo = std::max(mo, std::exp2(qmath::dmax_classical(m, other).value()));
        }
        EXPECT_GE(mo, mm - 1e-12);
    }
}

TEST(qgames, config_validation) {
    EXPECT_THROW(make_config({}), ContractError);
    EXPECT_THROW(make_config({{ket0(), ket1()}, {ket0()}}), ContractError);
    EXPECT_THROW(make_config({{ket0(), DensityOperator::maximally_mixed(3)}}), ContractError);
    std::vector<std::vector<DensityOperator>> big(13, std::vector<DensityOperator>(2, ket0()));
    EXPECT_THROW(make_config(big), ContractError);
}

TEST(qgames, ensemble_state_ordering) {
    auto pc = polygon_states(2);
    auto rho = ensemble_states(pc.config);
    ASSERT_EQ(rho.size(), 4u);
    // x = 1: digits (k1 -> 1, k2 -> 0).
    auto expect = qmath::bloch_density((pc.bloch[0][1] + pc.bloch[1][0]) * 0.5);
    EXPECT_LT(qmath::trace_distance(rho[1], expect), 1e-12);
}
