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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "contextcalc/errors.hpp"

namespace contextcalc::lp {

void Problem::add_equality(std::vector<double> coeffs, double rhs) {
    if (coeffs.size() != num_vars_) {
        throw ContractError("lp::Problem::add_equality: row has " + std::to_string(coeffs.size()) +
                            " coefficients, expected " + std::to_string(num_vars_));
    }
    if (!std::isfinite(rhs) || !std::all_of(coeffs.begin(), coeffs.end(), [](double v) { return std::isfinite(v); })) {
        throw ContractError("lp::Problem::add_equality: non-finite coefficient");
    }
    rows_.push_back(std::move(coeffs));
    rhs_.push_back(rhs);
}

double Problem::residual(std::span<const double> x) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < num_vars_; ++j) {
            s += rows_[i][j] * x[j];
        }
        worst = std::max(worst, std::abs(s - rhs_[i]));
    }
    for (double v : x) {
        worst = std::max(worst, -v);
    }
    return worst;
}

std::string to_string(Status s) {
    switch (s) {
        case Status::Optimal:
            return "optimal";
        case Status::Infeasible:
            return "infeasible";
        case Status::Unbounded:
            return "unbounded";
    }
    return "unknown";
}

namespace {

// Row-major tableau. Columns [0, n) are structural, [n, n+m) artificial,
// the last column is the right-hand side. Row m is the reduced-cost row,
// whose rhs entry holds minus the current objective. Every kReinvertEvery
// pivots the rows are recomputed from the original data for the current
// basis, so elimination drift cannot accumulate.
class Tableau {
   public:
    Tableau(const Problem &p, const Options &opt) : n_(p.num_vars()), m_(p.num_rows()), opt_(opt) {
        width_ = n_ + m_ + 1;
        t_.assign((m_ + 1) * width_, 0.0);
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            double sign = p.rhs(i) < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) {
                at(i, j) = sign * p.row(i)[j];
            }
            at(i, n_ + i) = 1.0;
            at(i, width_ - 1) = sign * p.rhs(i);
            basis_[i] = n_ + i;
        }
        row_alive_.assign(m_, true);
        orig_ = t_;
    }

    static constexpr std::size_t kReinvertEvery = 16;

    double &at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
    double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }

    void pivot(std::size_t r, std::size_t c) {
        double inv = 1.0 / at(r, c);
        for (std::size_t j = 0; j < width_; ++j) {
            at(r, j) *= inv;
        }
        at(r, c) = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r || (i < m_ && !row_alive_[i])) {
                continue;
            }
            double f = at(i, c);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < width_; ++j) {
                at(i, j) -= f * at(r, j);
            }
            at(i, c) = 0.0;
        }
        basis_[r] = c;
    }

    // Loads cost vector c (size n+m) into the reduced-cost row.
    void load_costs(const std::vector<double> &c) {
        costs_ = c;
        for (std::size_t j = 0; j < width_; ++j) {
            at(m_, j) = j + 1 < width_ ? c[j] : 0.0;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (!row_alive_[i]) {
                continue;
            }
            double cb = c[basis_[i]];
            if (cb == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < width_; ++j) {
                at(m_, j) -= cb * at(i, j);
            }
        }
    }

    // Runs Bland's-rule simplex over columns [0, allowed). Returns false if unbounded.
    bool run(std::size_t allowed, std::size_t &iterations) {
        while (true) {
            if (iterations >= opt_.max_iterations) {
                throw NumericalError("lp::solve: iteration cap reached");
            }
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (at(m_, j) < -opt_.cost_tol) {
                    enter = j;
                    break;
                }
            }
            if (enter == allowed) {
                return true;
            }
            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                if (!row_alive_[i]) {
                    continue;
                }
                double a = at(i, enter);
                if (a <= opt_.pivot_tol) {
                    continue;
                }
                double ratio = at(i, width_ - 1) / a;
                if (ratio < best - 1e-15 || (leave != m_ && std::abs(ratio - best) <= 1e-15 && basis_[i] < basis_[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave == m_) {
                return false;
            }
            pivot(leave, enter);
            ++iterations;
            if (iterations % kReinvertEvery == 0) {
                reinvert();
            }
        }
    }

    // After phase 1: pivot basic artificials out, or drop their row if it is
    // a linear combination of the others.
    void expel_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!row_alive_[i] || basis_[i] < n_) {
                continue;
            }
            std::size_t best_j = n_;
            double best_a = opt_.pivot_tol;
            for (std::size_t j = 0; j < n_; ++j) {
                if (std::abs(at(i, j)) > best_a) {
                    best_a = std::abs(at(i, j));
                    best_j = j;
                }
            }
            if (best_j == n_) {
                row_alive_[i] = false;
            } else {
                pivot(i, best_j);
            }
        }
    }

    // Gauss-Jordan on the original rows for the current basis. Leaves the
    // tableau alone if the basis is numerically singular.
    bool reinvert() {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < m_; ++i) {
            if (row_alive_[i]) {
                rows.push_back(i);
            }
        }
        std::size_t k = rows.size();
        std::vector<double> s(k * width_);
        std::vector<std::size_t> cols(k);
        for (std::size_t r = 0; r < k; ++r) {
            std::copy_n(orig_.begin() + static_cast<std::ptrdiff_t>(rows[r] * width_), width_,
                        s.begin() + static_cast<std::ptrdiff_t>(r * width_));
            cols[r] = basis_[rows[r]];
        }
        auto e = [&](std::size_t r, std::size_t c) -> double & { return s[r * width_ + c]; };
        for (std::size_t c = 0; c < k; ++c) {
            std::size_t col = cols[c];
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < k; ++r) {
                if (std::abs(e(r, col)) > std::abs(e(piv, col))) {
                    piv = r;
                }
            }
            if (std::abs(e(piv, col)) < 1e-12) {
                return false;
            }
            if (piv != c) {
                for (std::size_t j = 0; j < width_; ++j) {
                    std::swap(e(piv, j), e(c, j));
                }
            }
            double inv = 1.0 / e(c, col);
            for (std::size_t j = 0; j < width_; ++j) {
                e(c, j) *= inv;
            }
            e(c, col) = 1.0;
            for (std::size_t r = 0; r < k; ++r) {
                if (r == c || e(r, col) == 0.0) {
                    continue;
                }
                double f = e(r, col);
                for (std::size_t j = 0; j < width_; ++j) {
                    e(r, j) -= f * e(c, j);
                }
                e(r, col) = 0.0;
            }
        }
        for (std::size_t r = 0; r < k; ++r) {
            double &rhs = e(r, width_ - 1);
            if (rhs < 0.0 && rhs > -opt_.feasibility_tol) {
                rhs = 0.0;
            }
            std::copy_n(s.begin() + static_cast<std::ptrdiff_t>(r * width_), width_,
                        t_.begin() + static_cast<std::ptrdiff_t>(rows[r] * width_));
            basis_[rows[r]] = cols[r];
        }
        load_costs(std::vector<double>(costs_));
        return true;
    }

    std::size_t n_;
    std::size_t m_;
    std::size_t width_;
    const Options &opt_;
    std::vector<double> orig_;
    std::vector<double> costs_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
    std::vector<bool> row_alive_;
};

// The basic solution as the tableau carries it.
std::vector<double> tableau_solution(const Problem &p, const Tableau &tab) {
    std::vector<double> x(p.num_vars(), 0.0);
    for (std::size_t i = 0; i < tab.m_; ++i) {
        if (tab.row_alive_[i] && tab.basis_[i] < tab.n_) {
            x[tab.basis_[i]] = std::max(tab.at(i, tab.width_ - 1), 0.0);
        }
    }
    return x;
}

// Solves the square system A_B x_B = b for the final basis using only the
// rows that survived phase 1. A numerically singular basis keeps the tableau
// values; the caller's residual check decides whether they are good enough.
std::vector<double> refactor(const Problem &p, const Tableau &tab) {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < tab.m_; ++i) {
        if (tab.row_alive_[i]) {
            rows.push_back(i);
            cols.push_back(tab.basis_[i]);
        }
    }
    std::size_t k = rows.size();
    std::vector<double> a(k * (k + 1));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            a[r * (k + 1) + c] = p.row(rows[r])[cols[c]];
        }
        a[r * (k + 1) + k] = p.rhs(rows[r]);
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r) {
            if (std::abs(a[r * (k + 1) + c]) > std::abs(a[piv * (k + 1) + c])) {
                piv = r;
            }
        }
        if (std::abs(a[piv * (k + 1) + c]) < 1e-14) {
            return tableau_solution(p, tab);
        }
        if (piv != c) {
            for (std::size_t j = 0; j <= k; ++j) {
                std::swap(a[piv * (k + 1) + j], a[c * (k + 1) + j]);
            }
        }
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c) {
                continue;
            }
            double f = a[r * (k + 1) + c] / a[c * (k + 1) + c];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = c; j <= k; ++j) {
                a[r * (k + 1) + j] -= f * a[c * (k + 1) + j];
            }
        }
    }
    std::vector<double> x(p.num_vars(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double v = a[c * (k + 1) + k] / a[c * (k + 1) + c];
        // Degenerate basics can come out as -1e-17; they are zero.
        x[cols[c]] = std::max(v, 0.0);
    }
    return x;
}

// Indices of a maximal linearly independent subset of the rows (modified
// Gram-Schmidt with one re-orthogonalization pass).
std::vector<std::size_t> independent_rows(const Problem &p) {
    std::size_t n = p.num_vars();
    std::vector<std::vector<double>> basis;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < p.num_rows(); ++i) {
        std::vector<double> r = p.row(i);
        double norm0 = 0.0;
        for (double v : r) {
            norm0 += v * v;
        }
        norm0 = std::sqrt(norm0);
        if (norm0 == 0.0) {
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto &q : basis) {
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    dot += q[j] * r[j];
                }
                for (std::size_t j = 0; j < n; ++j) {
                    r[j] -= dot * q[j];
                }
            }
        }
        double norm = 0.0;
        for (double v : r) {
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm > 1e-9 * norm0) {
            for (double &v : r) {
                v /= norm;
            }
            basis.push_back(std::move(r));
            keep.push_back(i);
        }
    }
    return keep;
}

Solution solve_once(const Problem &p, const Options &opt) {
    Solution sol;
    Tableau tab(p, opt);
    std::size_t n = p.num_vars();
    std::size_t m = p.num_rows();

    std::vector<double> phase1(n + m, 0.0);
    std::fill(phase1.begin() + static_cast<std::ptrdiff_t>(n), phase1.end(), 1.0);
    tab.load_costs(phase1);
    tab.run(n + m, sol.iterations);
    double infeas = -tab.at(m, n + m);
    double scale = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        scale = std::max(scale, std::abs(p.rhs(i)));
    }
    if (infeas > opt.feasibility_tol * scale) {
        sol.status = Status::Infeasible;
        return sol;
    }
    tab.expel_artificials();

    std::vector<double> phase2(n + m, 0.0);
    std::copy(p.objective().begin(), p.objective().end(), phase2.begin());
    tab.load_costs(phase2);
    if (!tab.run(n, sol.iterations)) {
        sol.status = Status::Unbounded;
        return sol;
    }
    sol.status = Status::Optimal;
    sol.x = refactor(p, tab);
    sol.residual = p.residual(sol.x);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sol.objective += p.objective()[j] * sol.x[j];
    }
    return sol;
}

Solution solve_full_rank(const Problem &problem, const Options &options) {
    constexpr double kMaxResidual = 1e-8;
    Solution sol = solve_once(problem, options);
    if (sol.status != Status::Optimal || sol.residual <= kMaxResidual) {
        return sol;
    }
    Options strict = options;
    strict.pivot_tol = std::max(options.pivot_tol * 100.0, 1e-9);
    sol = solve_once(problem, strict);
    if (sol.status == Status::Optimal && sol.residual > kMaxResidual) {
        std::ostringstream msg;
        msg << "lp::solve: residual " << sol.residual << " exceeds " << kMaxResidual << " after restart";
        throw NumericalError(msg.str());
    }
    return sol;
}

}  // namespace

Solution solve(const Problem &problem, const Options &options) {
    std::vector<std::size_t> keep = independent_rows(problem);
    if (keep.size() == problem.num_rows()) {
        return solve_full_rank(problem, options);
    }
    Problem reduced(problem.num_vars());
    for (std::size_t j = 0; j < problem.num_vars(); ++j) {
        reduced.set_objective(j, problem.objective()[j]);
    }
    for (std::size_t i : keep) {
        reduced.add_equality(problem.row(i), problem.rhs(i));
    }
    Solution sol = solve_full_rank(reduced, options);
    if (sol.status != Status::Optimal) {
        return sol;
    }
    // Dropped rows are combinations of kept ones, so their residual is the
    // same at every point satisfying the kept rows: a violation here means
    // the full system is inconsistent.
    sol.residual = problem.residual(sol.x);
    double scale = 1.0;
    for (std::size_t i = 0; i < problem.num_rows(); ++i) {
        scale = std::max(scale, std::abs(problem.rhs(i)));
    }
    if (sol.residual > 1e-8 * scale) {
        return Solution{Status::Infeasible, 0.0, {}, sol.residual, sol.iterations};
    }
    return sol;
}

}  // namespace contextcalc::lp
