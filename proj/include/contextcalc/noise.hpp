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

#ifndef CONTEXTCALC_NOISE_HPP
#define CONTEXTCALC_NOISE_HPP

// Noise channels on preparations, and the quantities deciding how much noise
// a contextuality witness survives: average gate fidelity, entanglement
// breaking (Choi PPT) and injectivity (transfer-matrix rank).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "contextcalc/kernels.hpp"
#include "contextcalc/qmath.hpp"

namespace contextcalc::noise {

using qmath::ComplexMatrix;
using qmath::DensityOperator;

class ChannelSpec {
   public:
    /// rho -> (1-p) rho + p I/D
    static ChannelSpec depolarizing(std::size_t dim, double p);
    /// Validates sum K^dagger K = I within 1e-10.
    static ChannelSpec kraus(std::vector<ComplexMatrix> ops);
    static ChannelSpec identity(std::size_t dim);
    static ChannelSpec unitary(const ComplexMatrix &u);

    std::size_t dim() const { return dim_; }
    bool is_depolarizing() const { return p_.has_value(); }
    double depolarizing_p() const;
    /// Kraus operators; for the depolarizing form these are built on demand.
    std::vector<ComplexMatrix> kraus_ops() const;

    /// The linear extension, valid on any D x D operator.
    ComplexMatrix apply(const ComplexMatrix &x) const;
    DensityOperator apply(const DensityOperator &rho) const;

   private:
    ChannelSpec(std::size_t dim, std::optional<double> p, std::vector<ComplexMatrix> ops)
        : dim_(dim), p_(p), ops_(std::move(ops)) {}

    std::size_t dim_;
    std::optional<double> p_;
    std::vector<ComplexMatrix> ops_;
};

/// J = sum_ij |i><j| (x) E(|i><j|), unnormalized (trace D).
ComplexMatrix choi_matrix(const ChannelSpec &ch);
/// S_{(ab),(ij)} = <a| E(|i><j|) |b>.
ComplexMatrix transfer_matrix(const ChannelSpec &ch);

/// <Phi| (id (x) E)(|Phi><Phi|) |Phi> for the maximally entangled Phi.
double entanglement_fidelity(const ChannelSpec &ch);
/// (D F_e + 1)/(D + 1)
double average_gate_fidelity(const ChannelSpec &ch);
/// Haar average of <eta| E(|eta><eta|) |eta> by sampling.
kernels::MeanEstimate average_gate_fidelity_mc(const ChannelSpec &ch, std::size_t samples, std::uint64_t seed);

enum class Regime { Contextual, PncOnly, PncAndMnc, Indeterminate };
std::string to_string(Regime r);

struct ThresholdReport {
    std::size_t dim = 2;
    double p = 0.0;
    double fidelity_threshold = 0.0;      // H_D / D
    double depol_contextual_below = 0.0;  // (D - H_D)/(D - 1)
    double depol_eb_at = 0.0;             // D/(D + 1)
    Regime regime = Regime::Indeterminate;
    std::string classification;
};

ThresholdReport depolarizing_report(std::size_t dim, double p);

enum class EbVerdict { EntanglementBreaking, NotEntanglementBreaking, PptNecessaryOnly };
std::string to_string(EbVerdict v);

struct EbReport {
    EbVerdict verdict = EbVerdict::NotEntanglementBreaking;
    /// Smallest eigenvalue of the partial transpose of J/D.
    double min_pt_eigenvalue = 0.0;
};

EbReport entanglement_breaking_check(const ChannelSpec &ch);

struct InjectivityReport {
    bool injective = false;
    std::size_t transfer_rank = 0;
    std::vector<double> singular_values;  // descending
};

InjectivityReport channel_injectivity(const ChannelSpec &ch);

}  // namespace contextcalc::noise

#endif
