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


#ifndef CONTEXTCALC_PRESETS_HPP
#define CONTEXTCALC_PRESETS_HPP

// Ready-made qubit prepare-measure setups: the equatorial polygon families
// (square for n = 2, hexagon for n = 3) with decoders along each alphabet's
// axis, Pauli measurements for tomographic completeness, and optionally the
// antipodal completion states that make the operational minimax equal to
// the quantum one.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "contextcalc/optable.hpp"
#include "contextcalc/qgames.hpp"
#include "contextcalc/qmath.hpp"

namespace contextcalc::presets {

struct QubitSetup {
    std::vector<std::string> labels;
    std::vector<qmath::DensityOperator> states;
    std::vector<optable::Measurement> measurements;
    std::vector<qmath::Povm> povms;
    /// groups[k][x] is the label "k<k+1>x<x+1>".
    optable::Groups groups;
    /// Decoder measurement per alphabet; outcome x is message x.
    std::vector<std::string> decoders;
    /// Labels of the completion states ("T1", "T2", ...), empty when omitted.
    std::vector<std::string> completions;

    optable::ProbTable table() const;
    qgames::GameConfig config() const;
    std::map<std::string, qmath::DensityOperator> state_map() const;
    std::map<std::string, qmath::Povm> povm_map() const;
    const qmath::DensityOperator &state(const std::string &label) const;
};

/// 2n equatorial states, decoders D1..Dn, Pauli X, Y, Z, and (optionally)
/// the pure states along +-n_x/|n_x| for every message string x.
QubitSetup polygon_setup(std::size_t n, bool with_completions = true);
inline QubitSetup square_setup(bool with_completions = true) { return polygon_setup(2, with_completions); }
inline QubitSetup hexagon_setup(bool with_completions = true) { return polygon_setup(3, with_completions); }

/// Pauli X, Y, Z measurements (outcomes "+", "-").
std::vector<optable::Measurement> pauli_measurements();
std::vector<qmath::Povm> pauli_povms();

}  // namespace contextcalc::presets

#endif
