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

#include "contextcalc/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "contextcalc/errors.hpp"

namespace contextcalc::qmath {

namespace {

constexpr double kJacobiOffTol = 1e-14;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kSupportCutoff = 1e-12;
constexpr double kOffSupportLeak = 1e-9;

void require_same_shape(const ComplexMatrix &a, const ComplexMatrix &b, const char *where) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream msg;
        msg << where << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
            << b.cols();
        throw ContractError(msg.str());
    }
}

double off_diagonal_norm(const ComplexMatrix &a) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            if (r != c) {
                s += std::norm(a(r, c));
            }
        }
    }
    return std::sqrt(s);
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw ContractError("ComplexMatrix: entry count does not match shape");
    }
    if (!all_finite()) {
        throw ContractError("ComplexMatrix: non-finite entry");
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag) {
    ComplexMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

ComplexMatrix ComplexMatrix::projector(std::span<const Complex> ket) {
    ComplexMatrix m(ket.size(), ket.size());
    for (std::size_t r = 0; r < ket.size(); ++r) {
        for (std::size_t c = 0; c < ket.size(); ++c) {
            m(r, c) = ket[r] * std::conj(ket[c]);
        }
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = std::conj((*this)(r, c));
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = (*this)(r, c);
        }
    }
    return out;
}

Complex ComplexMatrix::trace() const {
    if (!is_square()) {
        throw ContractError("trace of non-square matrix");
    }
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < rows_; ++i) {
        t += (*this)(i, i);
    }
    return t;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const auto &z : data_) {
        m = std::max(m, std::abs(z));
    }
    return m;
}

bool ComplexMatrix::is_hermitian(double tol) const {
    if (!is_square()) {
        return false;
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = r; c < cols_; ++c) {
            if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) {
                return false;
            }
        }
    }
    return true;
}

bool ComplexMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const Complex &z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ComplexMatrix &ComplexMatrix::operator+=(const ComplexMatrix &o) {
    require_same_shape(*this, o, "operator+");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += o.data_[i];
    }
    return *this;
}

ComplexMatrix &ComplexMatrix::operator-=(const ComplexMatrix &o) {
    require_same_shape(*this, o, "operator-");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= o.data_[i];
    }
    return *this;
}

ComplexMatrix &ComplexMatrix::operator*=(Complex s) {
    for (auto &z : data_) {
        z *= s;
    }
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.cols() != b.rows()) {
        throw ContractError("matrix product: inner dimensions differ");
    }
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex ark = a(r, k);
            if (ark == Complex{0.0, 0.0}) {
                continue;
            }
            for (std::size_t c = 0; c < b.cols(); ++c) {
                out(r, c) += ark * b(k, c);
            }
        }
    }
    return out;
}

double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b) {
    require_same_shape(a, b, "max_abs_diff");
    return (a - b).max_abs();
}

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar) {
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            for (std::size_t br = 0; br < b.rows(); ++br) {
                for (std::size_t bc = 0; bc < b.cols(); ++bc) {
                    out(ar * b.rows() + br, ac * b.cols() + bc) = a(ar, ac) * b(br, bc);
                }
            }
        }
    }
    return out;
}

ComplexMatrix partial_transpose_second(const ComplexMatrix &m, std::size_t dim_a, std::size_t dim_b) {
    if (!m.is_square() || m.rows() != dim_a * dim_b) {
        throw ContractError("partial_transpose_second: shape does not match dim_a*dim_b");
    }
    ComplexMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < dim_a; ++i) {
        for (std::size_t j = 0; j < dim_a; ++j) {
            for (std::size_t k = 0; k < dim_b; ++k) {
                for (std::size_t l = 0; l < dim_b; ++l) {
                    out(i * dim_b + k, j * dim_b + l) = m(i * dim_b + l, j * dim_b + k);
                }
            }
        }
    }
    return out;
}

HermitianEigen hermitian_eig(const ComplexMatrix &m) {
    if (!m.is_square()) {
        throw ContractError("hermitian_eig: matrix is not square");
    }
    const double scale = std::max(1.0, m.max_abs());
    if (!m.is_hermitian(1e-10 * scale)) {
        throw ContractError("hermitian_eig: matrix is not Hermitian");
    }
    const std::size_t n = m.rows();
    ComplexMatrix a = (m + m.adjoint()) * Complex{0.5, 0.0};
    ComplexMatrix v = ComplexMatrix::identity(n);

    double frob = 0.0;
    for (const auto &z : a.entries()) {
        frob += std::norm(z);
    }
    const double threshold = kJacobiOffTol * std::max(1.0, std::sqrt(frob));

    int sweep = 0;
    for (; sweep < kJacobiMaxSweeps && off_diagonal_norm(a) > threshold; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double r = std::abs(apq);
                if (r == 0.0) {
                    continue;
                }
                // Phase the (p,q) entry real, then apply the real symmetric rotation.
                const Complex phase = apq / r;
                const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * r);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Complex gpp = c;
                const Complex gpq = s;
                const Complex gqp = -s * std::conj(phase);
                const Complex gqq = c * std::conj(phase);

                for (std::size_t k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * gpp + akq * gqp;
                    a(k, q) = akp * gpq + akq * gqq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
                    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = vkp * gpp + vkq * gqp;
                    v(k, q) = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    if (off_diagonal_norm(a) > threshold * 1e3) {
        throw NumericalError("hermitian_eig: Jacobi sweeps did not converge");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });
    HermitianEigen out;
    out.values.reserve(n);
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values.push_back(a(order[j], order[j]).real());
        for (std::size_t k = 0; k < n; ++k) {
            out.vectors(k, j) = v(k, order[j]);
        }
    }
    return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix &m) { return hermitian_eig(m).values; }

ComplexMatrix from_spectrum(const HermitianEigen &e, std::span<const double> new_values) {
    const std::size_t n = e.vectors.rows();
    if (new_values.size() != n) {
        throw ContractError("from_spectrum: eigenvalue count mismatch");
    }
    ComplexMatrix out(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        if (new_values[j] == 0.0) {
            continue;
        }
        for (std::size_t r = 0; r < n; ++r) {
            const Complex vr = e.vectors(r, j) * new_values[j];
            for (std::size_t c = 0; c < n; ++c) {
                out(r, c) += vr * std::conj(e.vectors(c, j));
            }
        }
    }
    return out;
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

DensityOperator::DensityOperator(ComplexMatrix m) : m_(std::move(m)) {
    if (!m_.is_square() || m_.rows() == 0) {
        throw ContractError("DensityOperator: matrix must be square and non-empty");
    }
    if (!m_.is_hermitian(1e-12)) {
        throw ContractError("DensityOperator: matrix is not Hermitian");
    }
    if (std::abs(m_.trace() - Complex{1.0, 0.0}) > 1e-12) {
        throw ContractError("DensityOperator: trace is not 1");
    }
    const auto ev = hermitian_eigenvalues(m_);
    if (ev.back() < -1e-10) {
        throw ContractError("DensityOperator: negative eigenvalue " + std::to_string(ev.back()));
    }
}

DensityOperator DensityOperator::pure(std::span<const Complex> ket) {
    double n2 = 0.0;
    for (const auto &z : ket) {
        n2 += std::norm(z);
    }
    if (ket.empty() || n2 <= 0.0) {
        throw ContractError("DensityOperator::pure: zero vector");
    }
    ComplexMatrix p = ComplexMatrix::projector(ket) * Complex{1.0 / n2, 0.0};
    return DensityOperator(std::move(p));
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
    return DensityOperator(ComplexMatrix::identity(dim) * Complex{1.0 / static_cast<double>(dim), 0.0});
}

DensityOperator DensityOperator::mixture(std::span<const double> weights, std::span<const DensityOperator> states) {
    if (weights.size() != states.size() || states.empty()) {
        throw ContractError("DensityOperator::mixture: weights/states size mismatch");
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12 || std::any_of(weights.begin(), weights.end(), [](double w) { return w < 0; })) {
        throw ContractError("DensityOperator::mixture: weights must be a probability vector");
    }
    ComplexMatrix m(states.front().dim(), states.front().dim());
    for (std::size_t i = 0; i < states.size(); ++i) {
        m += states[i].matrix() * Complex{weights[i], 0.0};
    }
    return DensityOperator(std::move(m));
}

Povm::Povm(std::vector<ComplexMatrix> effects) : effects_(std::move(effects)) {
    if (effects_.empty()) {
        throw ContractError("Povm: no effects");
    }
    const std::size_t d = effects_.front().rows();
    ComplexMatrix sum(d, d);
    for (const auto &e : effects_) {
        if (!e.is_square() || e.rows() != d) {
            throw ContractError("Povm: effects must share one square shape");
        }
        if (!e.is_hermitian(1e-10)) {
            throw ContractError("Povm: effect is not Hermitian");
        }
        if (hermitian_eigenvalues(e).back() < -1e-10) {
            throw ContractError("Povm: effect is not positive semidefinite");
        }
        sum += e;
    }
    if (max_abs_diff(sum, ComplexMatrix::identity(d)) > 1e-10) {
        throw ContractError("Povm: effects do not sum to the identity");
    }
}

Povm Povm::projective_pair(std::span<const Complex> ket) {
    const DensityOperator p = DensityOperator::pure(ket);
    return Povm({p.matrix(), ComplexMatrix::identity(ket.size()) - p.matrix()});
}

Povm Povm::basis(const ComplexMatrix &unitary) {
    std::vector<ComplexMatrix> effects;
    for (std::size_t j = 0; j < unitary.cols(); ++j) {
        std::vector<Complex> col(unitary.rows());
        for (std::size_t r = 0; r < unitary.rows(); ++r) {
            col[r] = unitary(r, j);
        }
        effects.push_back(ComplexMatrix::projector(col));
    }
    return Povm(std::move(effects));
}

const ComplexMatrix &pauli(int axis) {
    static const ComplexMatrix sx(2, 2, {0.0, 1.0, 1.0, 0.0});
    static const ComplexMatrix sy(2, 2, {0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0});
    static const ComplexMatrix sz(2, 2, {1.0, 0.0, 0.0, -1.0});
    switch (axis) {
        case 0:
            return sx;
        case 1:
            return sy;
        case 2:
            return sz;
        default:
            throw ContractError("pauli: axis must be 0, 1 or 2");
    }
}

BlochVector bloch_vector(const DensityOperator &rho) {
    if (rho.dim() != 2) {
        throw ContractError("bloch_vector: qubit states only");
    }
    const auto &m = rho.matrix();
    return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

DensityOperator bloch_density(const BlochVector &v) {
    if (v.norm() > 1.0 + 1e-12) {
        throw ContractError("bloch_density: Bloch vector longer than 1");
    }
    ComplexMatrix m = ComplexMatrix::identity(2);
    m += pauli(0) * Complex{v.x, 0.0};
    m += pauli(1) * Complex{v.y, 0.0};
    m += pauli(2) * Complex{v.z, 0.0};
    return DensityOperator(m * Complex{0.5, 0.0});
}

Povm bloch_measurement(const BlochVector &axis) {
    const double n = axis.norm();
    if (n < 1e-12) {
        throw ContractError("bloch_measurement: zero axis");
    }
    const DensityOperator plus = bloch_density(axis * (1.0 / n));
    return Povm({plus.matrix(), ComplexMatrix::identity(2) - plus.matrix()});
}

double trace_distance(const DensityOperator &a, const DensityOperator &b) {
    if (a.dim() != b.dim()) {
        throw ContractError("trace_distance: dimension mismatch");
    }
    const auto ev = hermitian_eigenvalues(a.matrix() - b.matrix());
    double s = 0.0;
    for (double l : ev) {
        s += std::abs(l);
    }
    return std::clamp(0.5 * s, 0.0, 1.0);
}

ExtendedReal dmax_ratio(const DensityOperator &a, const DensityOperator &b) {
    if (a.dim() != b.dim()) {
        throw ContractError("dmax: dimension mismatch");
    }
    return dmax_ratio(a.matrix(), hermitian_eig(b.matrix()));
}

ExtendedReal dmax_ratio(const ComplexMatrix &am, const HermitianEigen &eb) {
    const std::size_t n = am.rows();
    if (eb.values.size() != n) {
        throw ContractError("dmax: dimension mismatch");
    }
    const double cutoff = kSupportCutoff * std::max(eb.values.front(), 0.0);

    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < n; ++j) {
        if (eb.values[j] > cutoff) {
            support.push_back(j);
            continue;
        }
        // <v|a|v> for a kernel direction of b.
        Complex leak{0.0, 0.0};
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                leak += std::conj(eb.vectors(r, j)) * am(r, c) * eb.vectors(c, j);
            }
        }
        if (leak.real() > kOffSupportLeak) {
            return ExtendedReal::infinity();
        }
    }
    // M = B^{-1/2} V_s^dagger a V_s B^{-1/2} restricted to the support of b.
    const std::size_t k = support.size();
    ComplexMatrix compressed(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            Complex s{0.0, 0.0};
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < n; ++c) {
                    s += std::conj(eb.vectors(r, support[i])) * am(r, c) * eb.vectors(c, support[j]);
                }
            }
            compressed(i, j) = s / std::sqrt(eb.values[support[i]] * eb.values[support[j]]);
        }
    }
    const double top = hermitian_eigenvalues(compressed).front();
    return ExtendedReal::finite(std::max(top, 0.0));
}

ExtendedReal dmax_quantum(const DensityOperator &a, const DensityOperator &b) {
    const ExtendedReal ratio = dmax_ratio(a, b);
    if (ratio.is_infinite()) {
        return ratio;
    }
    // a == b up to rounding must report exactly zero divergence.
    return ExtendedReal::finite(std::max(0.0, std::log2(ratio.value())));
}

ExtendedReal dmax_classical(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw ContractError("dmax_classical: support size mismatch");
    }
    double best = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) {
            continue;
        }
        if (q[i] <= 0.0) {
            return ExtendedReal::infinity();
        }
        best = std::max(best, p[i] / q[i]);
    }
    return ExtendedReal::finite(std::log2(best));
}

double born_probability(const DensityOperator &state, const ComplexMatrix &effect) {
    if (!effect.is_square() || effect.rows() != state.dim()) {
        throw ContractError("born_probability: dimension mismatch");
    }
    const auto ev = hermitian_eigenvalues(effect);
    if (ev.back() < -1e-10 || ev.front() > 1.0 + 1e-10) {
        throw ContractError("born_probability: effect eigenvalue outside [0,1]");
    }
    double s = 0.0;
    const auto &rho = state.matrix();
    for (std::size_t r = 0; r < rho.rows(); ++r) {
        for (std::size_t c = 0; c < rho.cols(); ++c) {
            s += (rho(r, c) * effect(c, r)).real();
        }
    }
    return s;
}

ComplexMatrix haar_unitary(std::size_t dim, std::mt19937_64 &rng) {
    if (dim == 0) {
        throw ContractError("haar_unitary: dim must be positive");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix q(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            const double re = normal(rng);
            const double im = normal(rng);
            q(r, c) = Complex{re, im};
        }
    }
    // Modified Gram-Schmidt (two passes) gives Q R with R_jj = column norm > 0;
    // the phase correction Q_j *= R_jj/|R_jj| is kept explicit for clarity.
    for (std::size_t j = 0; j < dim; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                Complex proj{0.0, 0.0};
                for (std::size_t r = 0; r < dim; ++r) {
                    proj += std::conj(q(r, i)) * q(r, j);
                }
                for (std::size_t r = 0; r < dim; ++r) {
                    q(r, j) -= proj * q(r, i);
                }
            }
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < dim; ++r) {
            nrm += std::norm(q(r, j));
        }
        nrm = std::sqrt(nrm);
        const Complex rjj{nrm, 0.0};
        const Complex phase = rjj / std::abs(rjj);
        for (std::size_t r = 0; r < dim; ++r) {
            q(r, j) = q(r, j) / nrm * phase;
        }
    }
    return q;
}

ComplexMatrix haar_unitary(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return haar_unitary(dim, rng);
}

std::vector<Complex> haar_ket(std::size_t dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Complex> v(dim);
    double n2 = 0.0;
    for (auto &z : v) {
        const double re = normal(rng);
        const double im = normal(rng);
        z = Complex{re, im};
        n2 += std::norm(z);
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (auto &z : v) {
        z *= inv;
    }
    return v;
}

DensityOperator conjugate(const DensityOperator &rho, const ComplexMatrix &unitary) {
    ComplexMatrix m = unitary * rho.matrix() * unitary.adjoint();
    // Re-symmetrize so rounding cannot trip the Hermiticity check.
    m = (m + m.adjoint()) * Complex{0.5, 0.0};
    const Complex tr = m.trace();
    m *= Complex{1.0 / tr.real(), 0.0};
    return DensityOperator(std::move(m));
}

double harmonic_ratio(std::size_t dim) {
    if (dim == 0) {
        throw ContractError("harmonic_ratio: dim must be positive");
    }
    double h = 0.0;
    for (std::size_t k = dim; k >= 1; --k) {
        h += 1.0 / static_cast<double>(k);
    }
    return h / static_cast<double>(dim);
}

}  // namespace contextcalc::qmath
