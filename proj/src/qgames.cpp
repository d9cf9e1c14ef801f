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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_linalg.h>
#include <gsl/gsl_matrix.h>
#include <gsl/gsl_vector.h>

#include "contextcalc/errors.hpp"

namespace contextcalc::qgames {

using qmath::Complex;
using qmath::ComplexMatrix;
using qmath::HermitianEigen;

namespace {

constexpr std::size_t kEnumerationCap = 4096;
// Slack that turns "t sigma >= rho" into a strictly feasible target, so
// that Dykstra iterates approaching from outside still land inside.
constexpr double kInteriorSlack = 1e-9;
constexpr double kBetaInfinity = 1e-9;
constexpr std::size_t kMaxProbes = 200;
constexpr double kInf = std::numeric_limits<double>::infinity();

ComplexMatrix hermitize(const ComplexMatrix &m) { return (m + m.adjoint()) * Complex(0.5); }

ComplexMatrix positive_part(const ComplexMatrix &m) {
    HermitianEigen e = qmath::hermitian_eig(hermitize(m));
    std::vector<double> v = e.values;
    for (double &x : v) {
        x = std::max(x, 0.0);
    }
    return qmath::from_spectrum(e, v);
}

// Euclidean projection of v onto {x >= 0, sum x = total}.
std::vector<double> simplex_project(std::vector<double> v, double total) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        double cand = (cum - total) / static_cast<double>(i + 1);
        if (u[i] - cand > 0.0) {
            theta = cand;
        }
    }
    for (double &x : v) {
        x = std::max(x - theta, 0.0);
    }
    return v;
}

ComplexMatrix project_trace_psd(const ComplexMatrix &m, double total) {
    HermitianEigen e = qmath::hermitian_eig(hermitize(m));
    return qmath::from_spectrum(e, simplex_project(e.values, total));
}

double trace_product(const ComplexMatrix &a, const ComplexMatrix &b) {
    Complex s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            s += a(r, c) * b(c, r);
        }
    }
    return s.real();
}

DensityOperator to_density(const ComplexMatrix &m) {
    ComplexMatrix h = hermitize(m);
    h *= Complex(1.0 / h.trace().real());
    return DensityOperator(std::move(h));
}

std::vector<ComplexMatrix> matrices_of(const std::vector<DensityOperator> &states) {
    if (states.empty()) {
        throw ContractError("minimax: need at least one state");
    }
    std::vector<ComplexMatrix> out;
    for (const auto &s : states) {
        if (s.dim() != states.front().dim()) {
            throw ContractError("minimax: states differ in dimension");
        }
        out.push_back(s.matrix());
    }
    return out;
}

// max_j 2^{Dmax(rho_j || sigma)}, +inf if sigma misses some support.
double alpha_value(const std::vector<ComplexMatrix> &rho, const ComplexMatrix &sigma) {
    HermitianEigen e = qmath::hermitian_eig(hermitize(sigma));
    double worst = 0.0;
    for (const auto &r : rho) {
        auto v = qmath::dmax_ratio(r, e);
        if (v.is_infinite()) {
            return kInf;
        }
        worst = std::max(worst, v.value());
    }
    return worst;
}

// max_j 2^{Dmax(sigma || rho_j)} for sigma of any positive trace (normalized here).
double beta_value(const std::vector<HermitianEigen> &rho_eig, const ComplexMatrix &a) {
    double tr = a.trace().real();
    if (!(tr > 0.0)) {
        return kInf;
    }
    ComplexMatrix sigma = hermitize(a) * Complex(1.0 / tr);
    double worst = 0.0;
    for (const auto &e : rho_eig) {
        auto v = qmath::dmax_ratio(sigma, e);
        if (v.is_infinite()) {
            return kInf;
        }
        worst = std::max(worst, v.value());
    }
    return worst;
}

// For PSD b_j with S = sum b_j, returns sum_j Tr(S^-1/2 b_j S^-1/2 rho_j).
// The whitened family sums to the projector onto supp(S); the remainder of
// the identity is given to whichever term pairs best, which keeps the
// family a POVM. With need_full_rank, a singular S yields +inf (no bound).
double whitened_pairing(std::vector<ComplexMatrix> b, const std::vector<ComplexMatrix> &rho,
                        bool need_full_rank = false) {
    std::size_t dim = rho.front().rows();
    ComplexMatrix s(dim, dim);
    for (auto &m : b) {
        m = positive_part(m);
        s += m;
    }
    HermitianEigen e = qmath::hermitian_eig(hermitize(s));
    double top = std::max(e.values.front(), 0.0);
    if (top <= 0.0) {
        return need_full_rank ? kInf : 0.0;
    }
    std::vector<double> inv_sqrt(dim);
    std::vector<double> kernel(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        bool live = e.values[i] > 1e-13 * top;
        if (!live && need_full_rank) {
            return kInf;
        }
        inv_sqrt[i] = live ? 1.0 / std::sqrt(e.values[i]) : 0.0;
        kernel[i] = live ? 0.0 : 1.0;
    }
    ComplexMatrix w = qmath::from_spectrum(e, inv_sqrt);
    double total = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        total += trace_product(w * b[j] * w, rho[j]);
    }
    ComplexMatrix rest = qmath::from_spectrum(e, kernel);
    double extra = 0.0;
    for (const auto &r : rho) {
        extra = std::max(extra, trace_product(rest, r));
    }
    return total + extra;
}

struct Tracker {
    double best = kInf;      // certified attained objective
    ComplexMatrix best_sigma;
    double bound = 0.0;      // certified bound on the other side
};

enum class Verdict { Feasible, Infeasible, Undecided };

bool check_now(std::size_t sweep) { return sweep <= 30 || sweep % 5 == 0; }

// Is there a density sigma with t sigma >= rho_j for all j?
Verdict probe_alpha(const std::vector<ComplexMatrix> &rho, double t, const SolverOptions &opt, Tracker &tr) {
    std::size_t dim = rho.front().rows();
    std::size_t n = rho.size();
    std::vector<ComplexMatrix> target;
    for (const auto &r : rho) {
        ComplexMatrix g = r * Complex(1.0 / t);
        for (std::size_t i = 0; i < dim; ++i) {
            g(i, i) += kInteriorSlack;
        }
        target.push_back(std::move(g));
    }
    std::vector<ComplexMatrix> inc(n + 1, ComplexMatrix(dim, dim));
    ComplexMatrix x = tr.best_sigma;
    for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        for (std::size_t j = 0; j < n; ++j) {
            ComplexMatrix z = x + inc[j];
            ComplexMatrix y = target[j] + positive_part(z - target[j]);
            inc[j] = z - y;
            x = std::move(y);
        }
        ComplexMatrix z = x + inc[n];
        ComplexMatrix y = project_trace_psd(z, 1.0);
        inc[n] = z - y;
        x = std::move(y);
        if (!check_now(sweep)) {
            continue;
        }
        double f = alpha_value(rho, x);
        if (f < tr.best) {
            tr.best = f;
            tr.best_sigma = x;
        }
        if (f <= t) {
            return Verdict::Feasible;
        }
        // Dual witness: the increments -inc_j, whitened into a POVM.
        std::vector<ComplexMatrix> b;
        for (std::size_t j = 0; j < n; ++j) {
            b.push_back(inc[j] * Complex(-1.0));
        }
        tr.bound = std::max(tr.bound, whitened_pairing(b, rho));
        if (tr.bound > t) {
            return Verdict::Infeasible;
        }
    }
    return Verdict::Undecided;
}

// Is there A >= 0 with Tr A = lam and A <= rho_j for all j?
Verdict probe_beta(const std::vector<ComplexMatrix> &rho, const std::vector<HermitianEigen> &rho_eig, double lam,
                   const SolverOptions &opt, Tracker &tr) {
    std::size_t dim = rho.front().rows();
    std::size_t n = rho.size();
    std::vector<ComplexMatrix> target;
    for (const auto &r : rho) {
        target.push_back(r * Complex(1.0 - kInteriorSlack));
    }
    std::vector<ComplexMatrix> inc(n + 1, ComplexMatrix(dim, dim));
    ComplexMatrix x = tr.best_sigma * Complex(lam);
    for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        for (std::size_t j = 0; j < n; ++j) {
            ComplexMatrix z = x + inc[j];
            ComplexMatrix y = z - positive_part(z - target[j]);
            inc[j] = z - y;
            x = std::move(y);
        }
        ComplexMatrix z = x + inc[n];
        ComplexMatrix y = project_trace_psd(z, lam);
        inc[n] = z - y;
        x = std::move(y);
        if (!check_now(sweep)) {
            continue;
        }
        double g = beta_value(rho_eig, x);
        if (g < tr.best) {
            tr.best = g;
            tr.best_sigma = hermitize(x) * Complex(1.0 / x.trace().real());
        }
        if (1.0 / g >= lam) {
            return Verdict::Feasible;
        }
        // Dual witness: the increments inc_j whitened so they sum to I;
        // sum_j Tr(C_j rho_j) then caps max Tr A.
        std::vector<ComplexMatrix> c(inc.begin(), inc.begin() + static_cast<std::ptrdiff_t>(n));
        double upper = whitened_pairing(c, rho, /*need_full_rank=*/true);
        if (upper < tr.bound) {
            tr.bound = upper;
        }
        if (upper < lam) {
            return Verdict::Infeasible;
        }
    }
    return Verdict::Undecided;
}

// ---------------------------------------------------------------------------
// Interior-point polish. Alternating projections converge sublinearly when
// the level sets meet tangentially, so a bracket left open by the bisection
// is closed by a log-barrier Newton method on the same primal:
//
//     alpha:  min Tr X            s.t. X - rho_j > 0
//     beta:   max Tr A            s.t. A > 0, rho_j - A > 0
//
// On the central path mu S_j^{-1} is a dual-feasible family up to whitening,
// so both sides stay certified exactly as in the projection solver.

// Real basis of the D x D Hermitian matrices.
std::vector<ComplexMatrix> hermitian_basis(std::size_t dim) {
    std::vector<ComplexMatrix> basis;
    for (std::size_t i = 0; i < dim; ++i) {
        ComplexMatrix e(dim, dim);
        e(i, i) = 1.0;
        basis.push_back(std::move(e));
        for (std::size_t j = i + 1; j < dim; ++j) {
            ComplexMatrix re(dim, dim);
            re(i, j) = re(j, i) = std::numbers::sqrt2 / 2;
            basis.push_back(std::move(re));
            ComplexMatrix im(dim, dim);
            im(i, j) = Complex(0.0, -std::numbers::sqrt2 / 2);
            im(j, i) = Complex(0.0, std::numbers::sqrt2 / 2);
            basis.push_back(std::move(im));
        }
    }
    return basis;
}

struct BarrierTerm {
    double sign;         // +1 for X - rho (or A), -1 for rho - A
    ComplexMatrix base;  // the constant part: -rho, 0 or rho
    ComplexMatrix embed; // the term sees L x L^dagger; empty means L = I
};

ComplexMatrix lift(const BarrierTerm &t, const ComplexMatrix &x) {
    return t.embed.rows() == 0 ? x : t.embed * x * t.embed.adjoint();
}

// log det(sign*L X L' + base) and its inverse; false if not positive definite.
bool term_state(const BarrierTerm &t, const ComplexMatrix &x, double &logdet, ComplexMatrix &inv) {
    ComplexMatrix s = hermitize(lift(t, x) * Complex(t.sign) + t.base);
    HermitianEigen e = qmath::hermitian_eig(s);
    if (!(e.values.back() > 0.0)) {
        return false;
    }
    logdet = 0.0;
    std::vector<double> r(e.values.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        logdet += std::log(e.values[i]);
        r[i] = 1.0 / e.values[i];
    }
    inv = qmath::from_spectrum(e, r);
    return true;
}

// Minimizes c*Tr X - mu sum log det(term) along a decreasing mu schedule.
struct BarrierResult {
    ComplexMatrix x;
    bool ok = false;
};

// on_center sees every centred iterate with its scaled inverses; certificates
// are best at moderate mu, before rounding in the near-singular terms takes over.
using CenterCallback = std::function<void(const ComplexMatrix &, const std::vector<ComplexMatrix> &)>;

BarrierResult barrier_solve(const std::vector<BarrierTerm> &terms, double c, ComplexMatrix x, double target_gap,
                            const CenterCallback &on_center) {
    std::size_t dim = x.rows();
    auto basis = hermitian_basis(dim);
    std::size_t nb = basis.size();
    gsl_set_error_handler_off();
    gsl_matrix *h = gsl_matrix_alloc(nb, nb);
    gsl_vector *g = gsl_vector_alloc(nb);
    gsl_vector *dx = gsl_vector_alloc(nb);

    auto phi = [&](const ComplexMatrix &y, double mu, std::vector<ComplexMatrix> *invs) -> double {
        double val = c * y.trace().real();
        for (std::size_t j = 0; j < terms.size(); ++j) {
            double ld = 0.0;
            ComplexMatrix inv;
            if (!term_state(terms[j], y, ld, inv)) {
                return kInf;
            }
            val -= mu * ld;
            if (invs) {
                (*invs)[j] = std::move(inv);
            }
        }
        return val;
    };

    BarrierResult res;
    std::vector<ComplexMatrix> invs(terms.size());
    double mu = 1e-2;
    double barrier_dim = static_cast<double>(terms.size() * dim);
    for (int outer = 0; outer < 60; ++outer) {
        for (int it = 0; it < 60; ++it) {
            double f0 = phi(x, mu, &invs);
            if (!std::isfinite(f0)) {
                break;
            }
            gsl_matrix_set_zero(h);
            for (std::size_t a = 0; a < nb; ++a) {
                gsl_vector_set(g, a, c * basis[a].trace().real());
            }
            std::vector<ComplexMatrix> m(nb);
            for (std::size_t j = 0; j < terms.size(); ++j) {
                const ComplexMatrix &l = terms[j].embed;
                ComplexMatrix pulled = l.rows() == 0 ? invs[j] : l.adjoint() * invs[j] * l;
                for (std::size_t a = 0; a < nb; ++a) {
                    m[a] = pulled * basis[a];
                    double ga = gsl_vector_get(g, a) - mu * terms[j].sign * m[a].trace().real();
                    gsl_vector_set(g, a, ga);
                }
                for (std::size_t a = 0; a < nb; ++a) {
                    for (std::size_t b = a; b < nb; ++b) {
                        double v = mu * trace_product(m[a], m[b]);
                        gsl_matrix_set(h, a, b, gsl_matrix_get(h, a, b) + v);
                        if (b != a) {
                            gsl_matrix_set(h, b, a, gsl_matrix_get(h, b, a) + v);
                        }
                    }
                }
            }
            if (gsl_linalg_cholesky_decomp1(h) != GSL_SUCCESS) {
                break;
            }
            gsl_linalg_cholesky_solve(h, g, dx);
            double decrement = 0.0;
            ComplexMatrix step(dim, dim);
            for (std::size_t a = 0; a < nb; ++a) {
                decrement += gsl_vector_get(g, a) * gsl_vector_get(dx, a);
                step -= basis[a] * Complex(gsl_vector_get(dx, a));
            }
            // In units of mu the barrier is self-concordant, so the
            // decrement is scale-free and a full step is safe once it is
            // below 1/4.
            double lambda2 = decrement / mu;
            if (lambda2 < 1e-16) {
                break;
            }
            if (lambda2 < 0.25) {
                x += step;
                continue;
            }
            double s = 1.0;
            bool moved = false;
            while (s > 1e-12) {
                ComplexMatrix y = x + step * Complex(s);
                double f1 = phi(y, mu, nullptr);
                if (std::isfinite(f1) && (f1 - f0) / mu <= -0.25 * s * lambda2) {
                    x = std::move(y);
                    moved = true;
                    break;
                }
                s *= 0.5;
            }
            if (!moved) {
                break;
            }
        }
        if (!std::isfinite(phi(x, mu, &invs))) {
            break;
        }
        res.ok = true;
        std::vector<ComplexMatrix> duals;
        for (const auto &inv : invs) {
            duals.push_back(inv * Complex(mu));
        }
        on_center(x, duals);
        if (mu * barrier_dim < target_gap) {
            break;
        }
        mu *= 0.2;
    }
    res.x = x;
    gsl_matrix_free(h);
    gsl_vector_free(g);
    gsl_vector_free(dx);
    return res;
}

void polish_alpha(const std::vector<ComplexMatrix> &rho, Tracker &tr, double target_gap) {
    std::size_t dim = rho.front().rows();
    std::vector<BarrierTerm> terms;
    for (const auto &r : rho) {
        terms.push_back({1.0, r * Complex(-1.0), {}});
    }
    // t sigma dominates every rho_j; the extra identity makes it strict.
    double t0 = std::isfinite(tr.best) ? tr.best : 2.0;
    ComplexMatrix x = tr.best_sigma * Complex(t0) + ComplexMatrix::identity(dim) * Complex(1e-3);
    barrier_solve(terms, 1.0, x, target_gap, [&](const ComplexMatrix &xc, const std::vector<ComplexMatrix> &duals) {
        ComplexMatrix sigma = hermitize(xc) * Complex(1.0 / xc.trace().real());
        double f = alpha_value(rho, sigma);
        if (f < tr.best) {
            tr.best = f;
            tr.best_sigma = std::move(sigma);
        }
        tr.bound = std::max(tr.bound, whitened_pairing(duals, rho));
    });
}

void polish_beta(const std::vector<ComplexMatrix> &rho, const std::vector<HermitianEigen> &rho_eig, Tracker &tr,
                 double target_gap) {
    std::size_t dim = rho.front().rows();
    // Any feasible A lives on the common support V of the rho_j, where
    // A <= rho_j is equivalent to A <= (V' rho_j^+ V)^{-1}.
    ComplexMatrix kernels(dim, dim);
    for (const auto &e : rho_eig) {
        double cut = 1e-10 * std::max(e.values.front(), 1e-300);
        std::vector<double> k(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            k[i] = e.values[i] <= cut ? 1.0 : 0.0;
        }
        kernels += qmath::from_spectrum(e, k);
    }
    HermitianEigen ke = qmath::hermitian_eig(hermitize(kernels));
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < dim; ++i) {
        if (ke.values[i] < 1e-8) {
            keep.push_back(i);
        }
    }
    std::size_t m = keep.size();
    if (m == 0) {
        return;
    }
    ComplexMatrix v(dim, m);
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t r = 0; r < dim; ++r) {
            v(r, c) = ke.vectors(r, keep[c]);
        }
    }
    std::vector<ComplexMatrix> reduced;
    double floor = kInf;
    for (const auto &e : rho_eig) {
        double cut = 1e-10 * std::max(e.values.front(), 1e-300);
        std::vector<double> pinv(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            pinv[i] = e.values[i] > cut ? 1.0 / e.values[i] : 0.0;
        }
        HermitianEigen re = qmath::hermitian_eig(hermitize(v.adjoint() * qmath::from_spectrum(e, pinv) * v));
        if (!(re.values.back() > 0.0)) {
            return;
        }
        std::vector<double> inv(m);
        for (std::size_t i = 0; i < m; ++i) {
            inv[i] = 1.0 / re.values[i];
        }
        reduced.push_back(qmath::from_spectrum(re, inv));
        floor = std::min(floor, 1.0 / re.values.front());
    }
    // Each barrier run yields an attained primal point and, through
    // C_j = mu (R_j - A)^{-1}, a cap on lambda. sum_j C_j = I + mu A^{-1}
    // dominates the identity; dividing by its smallest eigenvalue keeps it
    // dominating without whitening away directions where A is nearly singular.
    auto absorb = [&](const ComplexMatrix &a_full, const std::vector<ComplexMatrix> &duals) {
        std::vector<ComplexMatrix> c(duals.begin() + 1, duals.end());
        ComplexMatrix full = hermitize(v * a_full * v.adjoint());
        double g = beta_value(rho_eig, full);
        if (g < tr.best) {
            tr.best = g;
            tr.best_sigma = full * Complex(1.0 / full.trace().real());
        }
        ComplexMatrix total(m, m);
        double pairing = 0.0;
        for (std::size_t j = 0; j < reduced.size(); ++j) {
            total += c[j];
            pairing += trace_product(c[j], reduced[j]);
        }
        double scale = qmath::hermitian_eig(hermitize(total)).values.back();
        if (scale > 0.0) {
            tr.bound = std::min(tr.bound, pairing / scale);
        }
    };
    std::vector<BarrierTerm> terms;
    terms.push_back({1.0, ComplexMatrix(m, m), {}});
    for (const auto &r : reduced) {
        terms.push_back({-1.0, r, {}});
    }
    ComplexMatrix a = ComplexMatrix::identity(m) * Complex(0.5 * floor);
    BarrierResult br = barrier_solve(terms, -1.0, a, target_gap, absorb);
    if (!br.ok) {
        return;
    }

    // When A >= 0 is active the optimum is rank deficient and the Newton
    // systems become ill-conditioned; re-solve on the face spanned by the
    // non-vanishing eigenvectors, where the PSD constraint is slack.
    HermitianEigen ae = qmath::hermitian_eig(hermitize(br.x));
    std::size_t r = 0;
    while (r < m && ae.values[r] > 1e-6 * ae.values.front()) {
        ++r;
    }
    if (r == 0 || r == m) {
        return;
    }
    ComplexMatrix face(m, r);
    for (std::size_t col = 0; col < r; ++col) {
        for (std::size_t row = 0; row < m; ++row) {
            face(row, col) = ae.vectors(row, col);
        }
    }
    std::vector<BarrierTerm> face_terms;
    face_terms.push_back({1.0, ComplexMatrix(r, r), {}});
    for (const auto &red : reduced) {
        face_terms.push_back({-1.0, red, face});
    }
    barrier_solve(face_terms, -1.0, hermitize(face.adjoint() * br.x * face), target_gap,
                  [&](const ComplexMatrix &xc, const std::vector<ComplexMatrix> &duals) {
                      absorb(face * xc * face.adjoint(), duals);
                  });
}

void fill_argmax(MinimaxResult &r, const std::vector<double> &per_state) {
    double top = *std::max_element(per_state.begin(), per_state.end());
    for (std::size_t j = 0; j < per_state.size(); ++j) {
        if (per_state[j] >= top * (1.0 - 1e-9)) {
            r.argmax.push_back(j);
        }
    }
}

std::string bracket_message(const char *what, double lo, double hi) {
    std::ostringstream msg;
    msg.precision(12);
    msg << what << ": certified bracket [" << lo << ", " << hi << "] did not close";
    return msg.str();
}

}  // namespace

GameConfig make_config(std::vector<std::vector<DensityOperator>> states) {
    if (states.empty() || states.front().empty()) {
        throw ContractError("GameConfig: need n >= 1 alphabets and d >= 1 messages");
    }
    GameConfig cfg;
    cfg.n = states.size();
    cfg.d = states.front().size();
    std::size_t dim = states.front().front().dim();
    std::size_t count = 1;
    for (const auto &row : states) {
        if (row.size() != cfg.d) {
            throw ContractError("GameConfig: every alphabet must have d messages");
        }
        for (const auto &s : row) {
            if (s.dim() != dim) {
                throw ContractError("GameConfig: states differ in dimension");
            }
        }
        count *= cfg.d;
        if (count > kEnumerationCap) {
            throw ContractError("GameConfig: d^n exceeds " + std::to_string(kEnumerationCap));
        }
    }
    cfg.states = std::move(states);
    return cfg;
}

std::vector<DensityOperator> ensemble_states(const GameConfig &cfg) {
    std::size_t count = 1;
    for (std::size_t k = 0; k < cfg.n; ++k) {
        count *= cfg.d;
    }
    std::vector<DensityOperator> out;
    std::vector<double> w(cfg.n, 1.0 / static_cast<double>(cfg.n));
    for (std::size_t x = 0; x < count; ++x) {
        std::vector<DensityOperator> parts;
        std::size_t rest = x;
        for (std::size_t k = 0; k < cfg.n; ++k) {
            parts.push_back(cfg.states[k][rest % cfg.d]);
            rest /= cfg.d;
        }
        out.push_back(DensityOperator::mixture(w, parts));
    }
    return out;
}

ExtendedReal alpha_objective(const std::vector<DensityOperator> &ensembles, const DensityOperator &sigma) {
    double worst = 0.0;
    for (const auto &r : ensembles) {
        auto v = qmath::dmax_ratio(r, sigma);
        if (v.is_infinite()) {
            return v;
        }
        worst = std::max(worst, v.value());
    }
    return ExtendedReal::finite(worst);
}

ExtendedReal beta_objective(const std::vector<DensityOperator> &ensembles, const DensityOperator &sigma) {
    double worst = 0.0;
    for (const auto &r : ensembles) {
        auto v = qmath::dmax_ratio(sigma, r);
        if (v.is_infinite()) {
            return v;
        }
        worst = std::max(worst, v.value());
    }
    return ExtendedReal::finite(worst);
}

MinimaxResult alpha_min_quantum(const std::vector<DensityOperator> &ensembles, const SolverOptions &opt) {
    auto rho = matrices_of(ensembles);
    std::size_t dim = rho.front().rows();
    Tracker tr;
    tr.bound = 1.0;  // Tr sigma = 1 <= t Tr sigma forces t >= 1.
    ComplexMatrix avg(dim, dim);
    for (const auto &r : rho) {
        avg += r * Complex(1.0 / static_cast<double>(rho.size()));
    }
    for (const ComplexMatrix &start : {avg, ComplexMatrix::identity(dim) * Complex(1.0 / static_cast<double>(dim))}) {
        double f = alpha_value(rho, start);
        if (f < tr.best) {
            tr.best = f;
            tr.best_sigma = start;
        }
    }
    MinimaxResult res;
    double lo = tr.bound;
    double hi = tr.best;
    while (hi - lo > opt.bisection_tol && res.probes < kMaxProbes) {
        double mid = 0.5 * (lo + hi);
        ++res.probes;
        Verdict v = probe_alpha(rho, mid, opt, tr);
        if (v == Verdict::Undecided) {
            break;
        }
        if (v == Verdict::Feasible) {
            hi = std::min(mid, tr.best);
        } else {
            lo = std::max(mid, tr.bound);
        }
        hi = std::min(hi, tr.best);
    }
    if (tr.best - tr.bound > opt.bisection_tol) {
        polish_alpha(rho, tr, 0.1 * opt.bisection_tol);
        res.polished = true;
    }
    if (tr.best - tr.bound > opt.certificate_tol * std::max(1.0, tr.best)) {
        throw NumericalError(bracket_message("alpha_min_quantum", tr.bound, tr.best));
    }
    DensityOperator sigma = to_density(tr.best_sigma);
    std::vector<double> per;
    for (const auto &r : ensembles) {
        per.push_back(qmath::dmax_ratio(r, sigma).value());
    }
    double check = *std::max_element(per.begin(), per.end());
    res.value = ExtendedReal::finite(tr.best);
    res.lower_bound = std::min(tr.bound, tr.best);
    res.certificate_gap = std::abs(tr.best - check);
    fill_argmax(res, per);
    res.sigma_star = std::move(sigma);
    return res;
}

MinimaxResult beta_min_quantum(const std::vector<DensityOperator> &ensembles, const SolverOptions &opt) {
    auto rho = matrices_of(ensembles);
    std::size_t dim = rho.front().rows();
    std::vector<HermitianEigen> rho_eig;
    for (const auto &r : rho) {
        rho_eig.push_back(qmath::hermitian_eig(r));
    }
    Tracker tr;
    tr.bound = 1.0;  // A <= rho_j forces Tr A <= 1.
    ComplexMatrix avg(dim, dim);
    for (const auto &r : rho) {
        avg += r * Complex(1.0 / static_cast<double>(rho.size()));
    }
    tr.best_sigma = ComplexMatrix::identity(dim) * Complex(1.0 / static_cast<double>(dim));
    for (const ComplexMatrix &start : {avg, tr.best_sigma}) {
        double g = beta_value(rho_eig, start);
        if (g < tr.best) {
            tr.best = g;
            tr.best_sigma = start;
        }
    }
    // Bisection on lam = 1/beta; lo is attained, hi is a certified cap.
    MinimaxResult res;
    auto lam_lo = [&] { return std::isfinite(tr.best) ? 1.0 / tr.best : 0.0; };
    double lo = lam_lo();
    double hi = tr.bound;
    auto narrow = [&] {
        if (hi < kBetaInfinity) {
            return true;
        }
        if (lo <= 0.0) {
            return false;
        }
        return 1.0 / lo - 1.0 / hi <= opt.bisection_tol;
    };
    while (!narrow() && res.probes < kMaxProbes) {
        double mid = lo > 0.0 ? 0.5 * (lo + hi) : 0.5 * hi;
        ++res.probes;
        Verdict v = probe_beta(rho, rho_eig, mid, opt, tr);
        if (v == Verdict::Undecided) {
            break;
        }
        if (v == Verdict::Feasible) {
            lo = std::max(mid, lam_lo());
        } else {
            hi = std::min(mid, tr.bound);
        }
        lo = std::max(lo, lam_lo());
    }
    if (tr.bound >= kBetaInfinity && (!std::isfinite(tr.best) || tr.best - 1.0 / tr.bound > opt.bisection_tol)) {
        polish_beta(rho, rho_eig, tr, 0.1 * opt.bisection_tol / std::max(1.0, tr.best * tr.best));
        res.polished = true;
    }
    double cap = tr.bound;
    if (cap < kBetaInfinity) {
        res.value = ExtendedReal::infinity();
        res.lower_bound = 1.0 / std::max(cap, 1e-300);
        return res;
    }
    double lower = 1.0 / cap;
    if (!std::isfinite(tr.best) || tr.best - lower > opt.certificate_tol * tr.best) {
        throw NumericalError(bracket_message("beta_min_quantum", lower, tr.best));
    }
    DensityOperator sigma = to_density(tr.best_sigma);
    std::vector<double> per;
    for (const auto &r : ensembles) {
        per.push_back(qmath::dmax_ratio(sigma, r).value());
    }
    double check = *std::max_element(per.begin(), per.end());
    res.value = ExtendedReal::finite(tr.best);
    res.lower_bound = std::min(lower, tr.best);
    res.certificate_gap = std::abs(tr.best - check);
    fill_argmax(res, per);
    res.sigma_star = std::move(sigma);
    return res;
}

GuessReport qguess_quantum(const GameConfig &cfg, const SolverOptions &opt) {
    GuessReport g;
    g.alpha = alpha_min_quantum(ensemble_states(cfg), opt);
    g.q_guess = g.alpha.value.value() / static_cast<double>(cfg.d);
    g.r_guess = g.q_guess / std::pow(static_cast<double>(cfg.d), static_cast<double>(cfg.n - 1));
    return g;
}

PolygonConfig polygon_states(std::size_t n) {
    if (n == 0) {
        throw ContractError("polygon_states: n must be at least 1");
    }
    PolygonConfig pc;
    std::vector<std::vector<DensityOperator>> states;
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<DensityOperator> row;
        std::vector<BlochVector> brow;
        for (std::size_t x = 1; x <= 2; ++x) {
            double phase = std::numbers::pi * (static_cast<double>(k) / static_cast<double>(n) + static_cast<double>(x));
            std::vector<Complex> ket{std::numbers::sqrt2 / 2, std::polar(std::numbers::sqrt2 / 2, phase)};
            row.push_back(DensityOperator::pure(ket));
            brow.push_back({std::cos(phase), std::sin(phase), 0.0});
        }
        states.push_back(std::move(row));
        pc.bloch.push_back(std::move(brow));
    }
    pc.config = make_config(std::move(states));
    std::size_t count = std::size_t{1} << n;
    for (std::size_t x = 0; x < count; ++x) {
        BlochVector v;
        for (std::size_t k = 0; k < n; ++k) {
            v = v + pc.bloch[k][(x >> k) & 1U] * (1.0 / static_cast<double>(n));
        }
        pc.max_bloch_norm = std::max(pc.max_bloch_norm, v.norm());
    }
    return pc;
}

ClosedForm qubit_closed_form(const GameConfig &cfg, bool require_centered) {
    if (cfg.states.front().front().dim() != 2) {
        throw ContractError("qubit_closed_form: states must be qubits");
    }
    if (cfg.d != 2) {
        throw ContractError("qubit_closed_form: requires binary messages (d = 2), got d = " + std::to_string(cfg.d));
    }
    if (require_centered) {
        BlochVector avg;
        double total = static_cast<double>(cfg.n * cfg.d);
        for (const auto &row : cfg.states) {
            for (const auto &s : row) {
                avg = avg + qmath::bloch_vector(s) * (1.0 / total);
            }
        }
        // rho_avg - I/2 = avg . sigma / 2; its largest entry is at most |avg|.
        if (avg.norm() / 2.0 > 1e-9) {
            std::ostringstream msg;
            msg << "qubit_closed_form: uniform average of all states has Bloch vector (" << avg.x << ", " << avg.y
                << ", " << avg.z << "), not the centre of the ball";
            throw ContractError(msg.str());
        }
    }
    ClosedForm cf;
    std::vector<BlochVector> dirs;
    for (const auto &rho : ensemble_states(cfg)) {
        BlochVector v = qmath::bloch_vector(rho);
        double len = v.norm();
        cf.max_bloch_norm = std::max(cf.max_bloch_norm, len);
        if (len < 1e-12) {
            continue;
        }
        for (double sign : {1.0, -1.0}) {
            BlochVector u = v * (sign / len);
            bool seen = std::any_of(dirs.begin(), dirs.end(), [&](const BlochVector &w) { return (w - u).norm() < 1e-9; });
            if (!seen) {
                dirs.push_back(u);
                cf.completions.push_back(qmath::bloch_density(u));
            }
        }
    }
    cf.alpha = ExtendedReal::finite(1.0 + cf.max_bloch_norm);
    cf.beta = cf.max_bloch_norm >= 1.0 - 1e-12 ? ExtendedReal::infinity()
                                               : ExtendedReal::finite(1.0 / (1.0 - cf.max_bloch_norm));
    return cf;
}

double max_row_overlap(const ComplexMatrix &u) {
    double best = 0.0;
    for (std::size_t j = 0; j < u.cols(); ++j) {
        best = std::max(best, std::norm(u(0, j)));
    }
    return best;
}

namespace {

template <class Estimator>
HaarThreshold haar_threshold_with(std::size_t dim, std::size_t mc_samples, std::uint64_t seed, Estimator &&est) {
    if (dim < 2) {
        throw ContractError("qudit_haar_threshold: D must be at least 2");
    }
    auto sampler = [dim](std::mt19937_64 &rng) { return max_row_overlap(qmath::haar_unitary(dim, rng)); };
    HaarThreshold h;
    h.exact = qmath::harmonic_ratio(dim);
    if (mc_samples > 0) {
        kernels::MeanEstimate m = est(mc_samples, seed, sampler);
        h.mc_estimate = m.mean;
        h.std_err = m.std_err;
        h.samples = m.samples;
    }
    return h;
}

}  // namespace

HaarThreshold qudit_haar_threshold(std::size_t dim, std::size_t mc_samples, std::uint64_t seed) {
    return haar_threshold_with(dim, mc_samples, seed, [](std::size_t s, std::uint64_t sd, const auto &f) {
        return kernels::mc_mean_parallel(s, sd, f);
    });
}

HaarThreshold qudit_haar_threshold_serial(std::size_t dim, std::size_t mc_samples, std::uint64_t seed) {
    return haar_threshold_with(dim, mc_samples, seed, [](std::size_t s, std::uint64_t sd, const auto &f) {
        return kernels::mc_mean_serial(s, sd, f);
    });
}

ClassicalIdentity classical_guess_identity(const std::vector<std::vector<double>> &distributions) {
    if (distributions.empty() || distributions.front().empty()) {
        throw ContractError("classical_guess_identity: empty input");
    }
    std::size_t m = distributions.front().size();
    for (const auto &mu : distributions) {
        if (mu.size() != m) {
            throw ContractError("classical_guess_identity: distributions differ in support size");
        }
        double s = 0.0;
        for (double v : mu) {
            if (!(v >= 0.0)) {
                throw ContractError("classical_guess_identity: negative probability");
            }
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12) {
            throw ContractError("classical_guess_identity: distribution does not sum to 1");
        }
    }
    ClassicalIdentity ci;
    std::vector<double> top(m, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
        for (const auto &mu : distributions) {
            top[l] = std::max(top[l], mu[l]);
        }
        ci.sum_max += top[l];
    }
    for (double v : top) {
        ci.nu_star.push_back(v / ci.sum_max);
    }
    for (const auto &mu : distributions) {
        ci.minimax = std::max(ci.minimax, std::exp2(qmath::dmax_classical(mu, ci.nu_star).value()));
    }
    if (std::abs(ci.sum_max - ci.minimax) >= 1e-9) {
        std::ostringstream msg;
        msg << "classical_guess_identity: sum of maxima " << ci.sum_max << " differs from minimax " << ci.minimax;
        throw NumericalError(msg.str());
    }
    return ci;
}

}  // namespace contextcalc::qgames
