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

#ifndef CONTEXTCALC_QMATH_HPP
#define CONTEXTCALC_QMATH_HPP

// Dense complex linear algebra plus the primitive quantum objects
// (density operators, POVMs, Bloch vectors) and the distances between them.
// Matrices here are small (at most a few dozen rows), so everything is
// row-major std::vector storage and O(n^3) loops.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "contextcalc/extended_real.hpp"

namespace contextcalc::qmath {

using Complex = std::complex<double>;

class ComplexMatrix {
   public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    /// Throws ContractError if entries.size() != rows*cols or any entry is non-finite.
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const double> diag);
    /// |v><v|
    static ComplexMatrix projector(std::span<const Complex> ket);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    Complex &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const Complex> entries() const { return data_; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    Complex trace() const;
    /// Largest |entry|.
    double max_abs() const;
    bool is_hermitian(double tol) const;
    bool all_finite() const;

    ComplexMatrix &operator+=(const ComplexMatrix &o);
    ComplexMatrix &operator-=(const ComplexMatrix &o);
    ComplexMatrix &operator*=(Complex s);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix &b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix &b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
    friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b);

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

/// max_ij |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b);
ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b);
/// Partial transpose on the second tensor factor of a (dim_a*dim_b)-square matrix.
ComplexMatrix partial_transpose_second(const ComplexMatrix &m, std::size_t dim_a, std::size_t dim_b);

struct HermitianEigen {
    std::vector<double> values;  // descending
    ComplexMatrix vectors;       // column j pairs with values[j]
};

/// Cyclic complex Jacobi. Throws ContractError for non-square or non-Hermitian
/// (tolerance 1e-10 scaled by max(1, max|m_ij|)) input.
HermitianEigen hermitian_eig(const ComplexMatrix &m);
std::vector<double> hermitian_eigenvalues(const ComplexMatrix &m);
/// V diag(f(lambda)) V^dagger.
ComplexMatrix from_spectrum(const HermitianEigen &e, std::span<const double> new_values);

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    double dot(const BlochVector &o) const { return x * o.x + y * o.y + z * o.z; }
    BlochVector operator+(const BlochVector &o) const { return {x + o.x, y + o.y, z + o.z}; }
    BlochVector operator-(const BlochVector &o) const { return {x - o.x, y - o.y, z - o.z}; }
    BlochVector operator*(double s) const { return {x * s, y * s, z * s}; }
};

class DensityOperator {
   public:
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and min eigenvalue >= -1e-10.
    explicit DensityOperator(ComplexMatrix m);

    static DensityOperator pure(std::span<const Complex> ket);
    static DensityOperator maximally_mixed(std::size_t dim);
    /// Convex combination; weights must be non-negative and sum to 1.
    static DensityOperator mixture(std::span<const double> weights, std::span<const DensityOperator> states);

    std::size_t dim() const { return m_.rows(); }
    const ComplexMatrix &matrix() const { return m_; }

   private:
    ComplexMatrix m_;
};

class Povm {
   public:
    /// Each effect Hermitian and PSD within 1e-10; effects sum to identity within 1e-10.
    explicit Povm(std::vector<ComplexMatrix> effects);

    /// Two-outcome projective measurement {|v><v|, I - |v><v|}.
    static Povm projective_pair(std::span<const Complex> ket);
    /// Rank-one projectors onto an orthonormal basis (columns of a unitary).
    static Povm basis(const ComplexMatrix &unitary);

    std::size_t dim() const { return effects_.front().rows(); }
    std::size_t size() const { return effects_.size(); }
    const std::vector<ComplexMatrix> &effects() const { return effects_; }

   private:
    std::vector<ComplexMatrix> effects_;
};

/// Pauli matrices sigma_x, sigma_y, sigma_z.
const ComplexMatrix &pauli(int axis);

BlochVector bloch_vector(const DensityOperator &rho);
DensityOperator bloch_density(const BlochVector &v);
/// Projective qubit measurement along unit vector `axis` (outcome 0 = +axis).
Povm bloch_measurement(const BlochVector &axis);

double trace_distance(const DensityOperator &a, const DensityOperator &b);
/// log2 of 2^{Dmax} = min{t : a <= t b}; +infinity when supp(a) is not inside supp(b).
ExtendedReal dmax_quantum(const DensityOperator &a, const DensityOperator &b);
/// 2^{Dmax(a||b)}, the multiplicative form used by the minimax solvers.
ExtendedReal dmax_ratio(const DensityOperator &a, const DensityOperator &b);
/// Same, for a PSD matrix `a` of any trace and a precomputed eigensystem of b.
ExtendedReal dmax_ratio(const ComplexMatrix &a, const HermitianEigen &b);
/// Classical max-relative entropy (log2 max_i p_i/q_i).
ExtendedReal dmax_classical(std::span<const double> p, std::span<const double> q);

/// Re Tr(state * effect).
double born_probability(const DensityOperator &state, const ComplexMatrix &effect);

/// Haar-distributed unitary by QR of a complex Ginibre matrix with the
/// R-diagonal phase correction.
ComplexMatrix haar_unitary(std::size_t dim, std::mt19937_64 &rng);
ComplexMatrix haar_unitary(std::size_t dim, std::uint64_t seed);
/// Column 0 of a Haar unitary: a uniformly random pure state.
std::vector<Complex> haar_ket(std::size_t dim, std::mt19937_64 &rng);

/// (1 + 1/2 + ... + 1/D) / D, the guessing ceiling for Haar-random bases.
double harmonic_ratio(std::size_t dim);

/// U rho U^dagger.
DensityOperator conjugate(const DensityOperator &rho, const ComplexMatrix &unitary);

}  // namespace contextcalc::qmath

#endif
