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

#include "contextcalc/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "contextcalc/errors.hpp"

namespace contextcalc::noise {

using qmath::Complex;

namespace {

constexpr double kKrausTol = 1e-10;
constexpr double kPptTol = 1e-10;
constexpr double kRankTol = 1e-10;

// Weyl operator X^a Z^b on C^D.
ComplexMatrix weyl(std::size_t dim, std::size_t a, std::size_t b) {
    ComplexMatrix w(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        double angle = 2.0 * std::numbers::pi * static_cast<double>(b * j) / static_cast<double>(dim);
        w((j + a) % dim, j) = std::polar(1.0, angle);
    }
    return w;
}

ComplexMatrix unit(std::size_t dim, std::size_t i, std::size_t j) {
    ComplexMatrix e(dim, dim);
    e(i, j) = 1.0;
    return e;
}

}  // namespace

ChannelSpec ChannelSpec::depolarizing(std::size_t dim, double p) {
    if (dim == 0) {
        throw ContractError("ChannelSpec::depolarizing: dim must be positive");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ContractError("ChannelSpec::depolarizing: p must lie in [0,1]");
    }
    return ChannelSpec(dim, p, {});
}

ChannelSpec ChannelSpec::kraus(std::vector<ComplexMatrix> ops) {
    if (ops.empty()) {
        throw ContractError("ChannelSpec::kraus: empty Kraus list");
    }
    std::size_t dim = ops.front().rows();
    ComplexMatrix sum(dim, dim);
    for (const auto &k : ops) {
        if (k.rows() != dim || k.cols() != dim) {
            throw ContractError("ChannelSpec::kraus: Kraus operators must all be D x D");
        }
        sum += k.adjoint() * k;
    }
    double defect = qmath::max_abs_diff(sum, ComplexMatrix::identity(dim));
    if (defect > kKrausTol) {
        std::ostringstream msg;
        msg << "ChannelSpec::kraus: completeness defect " << defect << " exceeds " << kKrausTol;
        throw ContractError(msg.str());
    }
    return ChannelSpec(dim, std::nullopt, std::move(ops));
}

ChannelSpec ChannelSpec::identity(std::size_t dim) { return kraus({ComplexMatrix::identity(dim)}); }

ChannelSpec ChannelSpec::unitary(const ComplexMatrix &u) { return kraus({u}); }

double ChannelSpec::depolarizing_p() const {
    if (!p_) {
        throw ContractError("ChannelSpec: not a depolarizing channel");
    }
    return *p_;
}

std::vector<ComplexMatrix> ChannelSpec::kraus_ops() const {
    if (!p_) {
        return ops_;
    }
    double d2 = static_cast<double>(dim_ * dim_);
    std::vector<ComplexMatrix> out;
    for (std::size_t a = 0; a < dim_; ++a) {
        for (std::size_t b = 0; b < dim_; ++b) {
            double w = (a == 0 && b == 0) ? 1.0 - *p_ + *p_ / d2 : *p_ / d2;
            out.push_back(weyl(dim_, a, b) * Complex(std::sqrt(w)));
        }
    }
    return out;
}

ComplexMatrix ChannelSpec::apply(const ComplexMatrix &x) const {
    if (x.rows() != dim_ || x.cols() != dim_) {
        throw ContractError("ChannelSpec::apply: operator dimension does not match channel");
    }
    if (p_) {
        ComplexMatrix out = x * Complex(1.0 - *p_);
        Complex shift = x.trace() * (*p_ / static_cast<double>(dim_));
        for (std::size_t i = 0; i < dim_; ++i) {
            out(i, i) += shift;
        }
        return out;
    }
    ComplexMatrix out(dim_, dim_);
    for (const auto &k : ops_) {
        out += k * x * k.adjoint();
    }
    return out;
}

DensityOperator ChannelSpec::apply(const DensityOperator &rho) const {
    ComplexMatrix m = apply(rho.matrix());
    // Re-symmetrize so rounding cannot break the Hermiticity check.
    ComplexMatrix h = (m + m.adjoint()) * Complex(0.5);
    h *= Complex(1.0 / h.trace().real());
    return DensityOperator(std::move(h));
}

ComplexMatrix choi_matrix(const ChannelSpec &ch) {
    std::size_t d = ch.dim();
    ComplexMatrix j(d * d, d * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            ComplexMatrix e = ch.apply(unit(d, i, k));
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = 0; b < d; ++b) {
                    j(i * d + a, k * d + b) = e(a, b);
                }
            }
        }
    }
    return j;
}

ComplexMatrix transfer_matrix(const ChannelSpec &ch) {
    std::size_t d = ch.dim();
    ComplexMatrix s(d * d, d * d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            ComplexMatrix e = ch.apply(unit(d, i, k));
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = 0; b < d; ++b) {
                    s(a * d + b, i * d + k) = e(a, b);
                }
            }
        }
    }
    return s;
}

double entanglement_fidelity(const ChannelSpec &ch) {
    std::size_t d = ch.dim();
    Complex acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            acc += ch.apply(unit(d, i, k))(i, k);
        }
    }
    return acc.real() / static_cast<double>(d * d);
}

double average_gate_fidelity(const ChannelSpec &ch) {
    double d = static_cast<double>(ch.dim());
    return (d * entanglement_fidelity(ch) + 1.0) / (d + 1.0);
}

kernels::MeanEstimate average_gate_fidelity_mc(const ChannelSpec &ch, std::size_t samples, std::uint64_t seed) {
    std::size_t d = ch.dim();
    auto sampler = [&ch, d](std::mt19937_64 &rng) {
        auto eta = qmath::haar_ket(d, rng);
        ComplexMatrix out = ch.apply(ComplexMatrix::projector(eta));
        Complex f = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                f += std::conj(eta[a]) * out(a, b) * eta[b];
            }
        }
        return f.real();
    };
    return kernels::mc_mean_parallel(samples, seed, sampler);
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Contextual:
            return "preparation-contextual";
        case Regime::PncOnly:
            return "PNC model exists, MNC fails";
        case Regime::PncAndMnc:
            return "preparation- and measurement-non-contextual";
        case Regime::Indeterminate:
            return "indeterminate by the known bounds";
    }
    return "unknown";
}

ThresholdReport depolarizing_report(std::size_t dim, double p) {
    if (dim < 2) {
        throw ContractError("depolarizing_report: D must be at least 2");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ContractError("depolarizing_report: p must lie in [0,1]");
    }
    double d = static_cast<double>(dim);
    double h = qmath::harmonic_ratio(dim) * d;
    ThresholdReport r;
    r.dim = dim;
    r.p = p;
    r.fidelity_threshold = h / d;
    r.depol_contextual_below = (d - h) / (d - 1.0);
    r.depol_eb_at = d / (d + 1.0);
    if (p < r.depol_contextual_below) {
        r.regime = Regime::Contextual;
    } else if (p >= r.depol_eb_at) {
        r.regime = Regime::PncAndMnc;
    } else if (dim == 2) {
        // The qubit gap is closed from below by an explicit noisy-qubit PNC model.
        r.regime = Regime::PncOnly;
    } else {
        r.regime = Regime::Indeterminate;
    }
    r.classification = to_string(r.regime);
    return r;
}

std::string to_string(EbVerdict v) {
    switch (v) {
        case EbVerdict::EntanglementBreaking:
            return "entanglement-breaking";
        case EbVerdict::NotEntanglementBreaking:
            return "not entanglement-breaking";
        case EbVerdict::PptNecessaryOnly:
            return "PPT necessary condition passed";
    }
    return "unknown";
}

EbReport entanglement_breaking_check(const ChannelSpec &ch) {
    std::size_t d = ch.dim();
    ComplexMatrix j = choi_matrix(ch) * Complex(1.0 / static_cast<double>(d));
    ComplexMatrix pt = qmath::partial_transpose_second(j, d, d);
    EbReport r;
    r.min_pt_eigenvalue = qmath::hermitian_eigenvalues(pt).back();
    if (r.min_pt_eigenvalue < -kPptTol) {
        r.verdict = EbVerdict::NotEntanglementBreaking;
    } else if (d == 2) {
        r.verdict = EbVerdict::EntanglementBreaking;
    } else {
        r.verdict = EbVerdict::PptNecessaryOnly;
    }
    return r;
}

InjectivityReport channel_injectivity(const ChannelSpec &ch) {
    ComplexMatrix s = transfer_matrix(ch);
    auto ev = qmath::hermitian_eigenvalues(s.adjoint() * s);
    InjectivityReport r;
    for (double v : ev) {
        r.singular_values.push_back(std::sqrt(std::max(v, 0.0)));
    }
    double top = r.singular_values.empty() ? 0.0 : r.singular_values.front();
    for (double sv : r.singular_values) {
        if (sv > kRankTol * top) {
            ++r.transfer_rank;
        }
    }
    r.injective = r.transfer_rank == ch.dim() * ch.dim();
    return r;
}

}  // namespace contextcalc::noise
