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

#ifndef CONTEXTCALC_LP_HPP
#define CONTEXTCALC_LP_HPP

// Dense two-phase tableau simplex for small standard-form programs
//
//     minimize  c.x   subject to   A x = b,  x >= 0.
//
// Bland's rule is used for both entering and leaving variables, so the method
// cannot cycle. After the simplex terminates the optimal basis is refactored
// against the original data (Gaussian elimination with partial pivoting) to
// remove tableau drift before the solution is returned.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace contextcalc::lp {

class Problem {
   public:
    explicit Problem(std::size_t num_vars) : num_vars_(num_vars), objective_(num_vars, 0.0) {}

    std::size_t num_vars() const { return num_vars_; }
    std::size_t num_rows() const { return rhs_.size(); }

    void set_objective(std::size_t var, double coeff) { objective_.at(var) = coeff; }
    /// Appends the equality row coeffs . x = rhs; coeffs must have num_vars entries.
    void add_equality(std::vector<double> coeffs, double rhs);

    const std::vector<double> &objective() const { return objective_; }
    const std::vector<double> &row(std::size_t i) const { return rows_[i]; }
    double rhs(std::size_t i) const { return rhs_[i]; }

    /// max_i |A_i x - b_i| and the most negative entry of x (as a positive violation).
    double residual(std::span<const double> x) const;

   private:
    std::size_t num_vars_;
    std::vector<double> objective_;
    std::vector<std::vector<double>> rows_;
    std::vector<double> rhs_;
};

enum class Status { Optimal, Infeasible, Unbounded };

std::string to_string(Status s);

struct Options {
    /// Phase-1 objective above this means infeasible.
    double feasibility_tol = 1e-9;
    /// Reduced costs above -cost_tol count as non-improving.
    double cost_tol = 1e-11;
    /// Smallest admissible pivot magnitude.
    double pivot_tol = 1e-11;
    std::size_t max_iterations = 200000;
};

struct Solution {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    /// Constraint residual of x after basis refactoring.
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Linearly dependent rows are dropped up front (and checked at the end).
/// Throws NumericalError if the iteration cap is hit or the refactored
/// solution violates the constraints by more than 1e-8 after a restart with
/// tighter pivoting.
Solution solve(const Problem &problem, const Options &options = {});

}  // namespace contextcalc::lp

#endif
