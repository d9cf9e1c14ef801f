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


#include "contextcalc/presets.hpp"

#include <algorithm>

#include "contextcalc/errors.hpp"

namespace contextcalc::presets {

using qmath::BlochVector;
using qmath::DensityOperator;
using qmath::Povm;

std::vector<optable::Measurement> pauli_measurements() {
    return {{"X", {"+", "-"}}, {"Y", {"+", "-"}}, {"Z", {"+", "-"}}};
}

std::vector<Povm> pauli_povms() {
    return {qmath::bloch_measurement({1, 0, 0}), qmath::bloch_measurement({0, 1, 0}),
            qmath::bloch_measurement({0, 0, 1})};
}

QubitSetup polygon_setup(std::size_t n, bool with_completions) {
    qgames::PolygonConfig pc = qgames::polygon_states(n);
    QubitSetup s;
    s.groups.assign(n, {});
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t x = 0; x < 2; ++x) {
            std::string label = "k" + std::to_string(k + 1) + "x" + std::to_string(x + 1);
            s.labels.push_back(label);
            s.states.push_back(pc.config.states[k][x]);
            s.groups[k].push_back(label);
        }
    }
    if (with_completions) {
        auto cf = qgames::qubit_closed_form(pc.config, /*require_centered=*/true);
        for (std::size_t i = 0; i < cf.completions.size(); ++i) {
            std::string label = "T" + std::to_string(i + 1);
            s.labels.push_back(label);
            s.states.push_back(cf.completions[i]);
            s.completions.push_back(label);
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::string label = "D" + std::to_string(k + 1);
        s.measurements.push_back({label, {"1", "2"}});
        s.povms.push_back(qmath::bloch_measurement(pc.bloch[k][0]));
        s.decoders.push_back(label);
    }
    for (auto &m : pauli_measurements()) {
        s.measurements.push_back(std::move(m));
    }
    for (auto &p : pauli_povms()) {
        s.povms.push_back(std::move(p));
    }
    return s;
}

optable::ProbTable QubitSetup::table() const { return optable::born_table(labels, states, measurements, povms); }

qgames::GameConfig QubitSetup::config() const {
    std::vector<std::vector<DensityOperator>> grid;
    for (const auto &row : groups) {
        std::vector<DensityOperator> r;
        for (const auto &label : row) {
            r.push_back(state(label));
        }
        grid.push_back(std::move(r));
    }
    return qgames::make_config(std::move(grid));
}

std::map<std::string, DensityOperator> QubitSetup::state_map() const {
    std::map<std::string, DensityOperator> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.emplace(labels[i], states[i]);
    }
    return out;
}

std::map<std::string, Povm> QubitSetup::povm_map() const {
    std::map<std::string, Povm> out;
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        out.emplace(measurements[i].label, povms[i]);
    }
    return out;
}

const DensityOperator &QubitSetup::state(const std::string &label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
        throw ContractError("QubitSetup: unknown preparation '" + label + "'");
    }
    return states[static_cast<std::size_t>(it - labels.begin())];
}

}  // namespace contextcalc::presets
