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

#include "contextcalc/lp.hpp"

#include <gtest/gtest.h>

#include <random>

#include "contextcalc/errors.hpp"

using namespace contextcalc;

TEST(lp, small_textbook_problem) {
    // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18. Optimum (2, 6), value 36.
    lp::Problem p(5);
    p.set_objective(0, -3.0);
    p.set_objective(1, -5.0);
    p.add_equality({1, 0, 1, 0, 0}, 4);
    p.add_equality({0, 2, 0, 1, 0}, 12);
    p.add_equality({3, 2, 0, 0, 1}, 18);
    auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    EXPECT_NEAR(s.objective, -36.0, 1e-12);
    EXPECT_NEAR(s.x[0], 2.0, 1e-12);
    EXPECT_NEAR(s.x[1], 6.0, 1e-12);
    EXPECT_LT(s.residual, 1e-12);
}

TEST(lp, detects_infeasible) {
    lp::Problem p(2);
    p.add_equality({1, 1}, 1);
    p.add_equality({1, 1}, 2);
    EXPECT_EQ(lp::solve(p).status, lp::Status::Infeasible);
}

TEST(lp, detects_unbounded) {
    lp::Problem p(2);
    p.set_objective(0, -1.0);
    p.add_equality({1, -1}, 0);
    EXPECT_EQ(lp::solve(p).status, lp::Status::Unbounded);
}

TEST(lp, redundant_and_negative_rhs_rows) {
    lp::Problem p(3);
    p.set_objective(2, 1.0);
    p.add_equality({1, 1, 1}, 1);
    p.add_equality({2, 2, 2}, 2);
    p.add_equality({-1, 0, 0}, -0.25);
    auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    EXPECT_NEAR(s.objective, 0.0, 1e-12);
    EXPECT_NEAR(s.x[0], 0.25, 1e-12);
    EXPECT_NEAR(s.x[1], 0.75, 1e-12);
}

TEST(lp, rejects_bad_row_width) {
    lp::Problem p(3);
    EXPECT_THROW(p.add_equality({1, 2}, 1), ContractError);
}

TEST(lp, degenerate_assignment_does_not_cycle) {
    // Assignment polytope: highly degenerate vertices.
    const int n = 5;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    lp::Problem p(n * n);
    std::vector<double> cost(n * n);
    for (int i = 0; i < n * n; ++i) {
        cost[i] = std::floor(u(rng) * 4);
        p.set_objective(i, cost[i]);
    }
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(n * n, 0.0), col(n * n, 0.0);
        for (int j = 0; j < n; ++j) {
            row[i * n + j] = 1;
            col[j * n + i] = 1;
        }
        p.add_equality(row, 1);
        p.add_equality(col, 1);
    }
    auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    // Brute force over permutations.
    std::vector<int> perm{0, 1, 2, 3, 4};
    double best = 1e9;
    do {
        double c = 0;
        for (int i = 0; i < n; ++i) {
            c += cost[i * n + perm[i]];
        }
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(s.objective, best, 1e-10);
}

TEST(lp, random_feasible_programs_satisfy_weak_duality_bound) {
    // Property: for random A, b = A x0 with x0 >= 0, the solver returns a
    // feasible point whose objective is no worse than x0's.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 4 + trial % 7;
        std::size_t m = 2 + trial % 4;
        lp::Problem p(n);
        std::vector<double> x0(n);
        for (auto &v : x0) {
            v = u(rng);
        }
        double f0 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double c = u(rng);
            p.set_objective(j, c);
            f0 += c * x0[j];
        }
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<double> row(n);
            double b = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] = u(rng) - 0.3;
                b += row[j] * x0[j];
            }
            p.add_equality(row, b);
        }
        auto s = lp::solve(p);
        ASSERT_EQ(s.status, lp::Status::Optimal);
        EXPECT_LT(s.residual, 1e-9);
        EXPECT_LE(s.objective, f0 + 1e-10);
    }
}
