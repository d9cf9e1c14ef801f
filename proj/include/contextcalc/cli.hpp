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


#ifndef CONTEXTCALC_CLI_HPP
#define CONTEXTCALC_CLI_HPP

// Theory files, synthetic experiments and the analysis pipeline behind the
// contextcalc command-line tool.
//
// A theory file (format_version "1") looks like
//
//   {
//     "format_version": "1",
//     "tolerance": 1e-9,
//     "preparations": ["k1x1", ...],
//     "measurements": [{"label": "D1", "outcomes": ["1", "2"]}, ...],
//     "probs": {"D1": {"k1x1": [1.0, 0.0], ...}, ...},
//     "quantum": {"dim": 2, "states": {"k1x1": M}, "povms": {"D1": [M, M]},
//                 "channel": {"kind": "depolarizing", "dim": 2, "p": 0.3}},
//     "analysis": {"groups": [["k1x1", "k1x2"], ...], "decoders": ["D1", ...]}
//   }
//
// where every matrix M is a row-major nested array of [re, im] pairs. The
// quantum block is optional; when present its states are the preparations
// before the channel, and probs are the statistics after it.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "contextcalc/extended_real.hpp"
#include "contextcalc/noise.hpp"
#include "contextcalc/optable.hpp"
#include "contextcalc/qmath.hpp"

namespace contextcalc::cli {

inline constexpr const char *kToolVersion = "0.1.0";
inline constexpr const char *kFormatVersion = "1";
constexpr double kDefaultTolerance = 1e-9;

struct QuantumAnnotation {
    std::size_t dim = 0;
    std::map<std::string, qmath::DensityOperator> states;
    std::map<std::string, qmath::Povm> povms;
    std::optional<noise::ChannelSpec> channel;
};

/// Message alphabets and the decoder measurement of each.
struct GroupSpec {
    optable::Groups groups;
    std::vector<std::string> decoders;
};

struct Theory {
    optable::ProbTable table;
    double tolerance = kDefaultTolerance;
    std::vector<std::string> warnings;
    std::optional<QuantumAnnotation> quantum;
    std::optional<GroupSpec> analysis;
    /// SHA-256 of the file bytes, hex.
    std::string sha256;
};

/// Parses and validates a theory file. ValidationError codes: "io", "parse",
/// "format-version", "schema", "duplicate-label", "unknown-label",
/// "missing-row", "shape", "probability-range", "row-sum", "quantum",
/// "dimension". `tolerance` overrides the file's declared tolerance.
Theory ingest_theory(const std::string &path, std::optional<double> tolerance = std::nullopt);
Theory parse_theory(const std::string &text, std::optional<double> tolerance = std::nullopt);

/// "D1=k1x1,k1x2;D2=k2x1,k2x2": one alphabet per decoder measurement, the
/// preparations listed in message order.
GroupSpec parse_groups(const std::string &spec);
std::string format_groups(const GroupSpec &g);

nlohmann::json matrix_to_json(const qmath::ComplexMatrix &m);
qmath::ComplexMatrix matrix_from_json(const nlohmann::json &j, const std::string &location);
nlohmann::json channel_to_json(const noise::ChannelSpec &ch);
noise::ChannelSpec channel_from_json(const nlohmann::json &j);
/// "identity", "depolarizing:P" (dimension from context).
noise::ChannelSpec channel_from_string(const std::string &spec, std::size_t dim);
nlohmann::json extended_to_json(const ExtendedReal &x);

/// States, measurements and effects to simulate.
struct SimulationSetup {
    std::vector<std::string> labels;
    std::vector<qmath::DensityOperator> states;
    std::vector<optable::Measurement> measurements;
    std::vector<qmath::Povm> povms;
    std::optional<GroupSpec> analysis;
};

/// "square", "hexagon" (with completion states) and "square-bare", "hexagon-bare".
SimulationSetup preset_setup(const std::string &name);
/// A theory-file-shaped JSON without "probs"; the quantum block is required.
SimulationSetup setup_from_json(const nlohmann::json &j);

/// Exact mode (no shots) writes Tr(E_m C(rho_P)); otherwise each (M, P) row
/// is a multinomial draw of `shots` outcomes from its own seeded substream.
/// Throws ValidationError "dimension" on inconsistent dimensions.
nlohmann::json simulate_table(const SimulationSetup &setup, const noise::ChannelSpec &channel,
                              std::optional<std::uint64_t> shots, std::uint64_t seed);

struct AnalyzeOptions {
    std::uint64_t seed = 1;
    /// Skip the quantum-side solves even when annotations exist.
    bool quantum = true;
};

/// The analysis report; deterministic in (theory, groups, options).
nlohmann::json analyze(const Theory &theory, const std::optional<GroupSpec> &groups, const AnalyzeOptions &opt = {});
std::string summarize(const nlohmann::json &report);

nlohmann::json thresholds_report(std::size_t dim, double p, std::size_t mc_samples, std::uint64_t seed);
nlohmann::json haar_verify(std::size_t dim, std::size_t mc_samples, std::uint64_t seed);

struct KsAuditOptions {
    std::size_t pairs = 200;
    std::size_t grid_order = 48;
    std::size_t mc_samples = 20000;
    std::uint64_t seed = 1;
};

nlohmann::json ks_audit(const KsAuditOptions &opt);

/// JSON text with every floating-point number at 17 significant digits.
std::string dump_json(const nlohmann::json &j, int indent = 2);
std::string sha256_hex(const std::string &bytes);

/// The command-line entry point. Exit codes: 0 ran, 2 validation error,
/// 3 numerical failure, 1 anything else.
int run(int argc, char **argv);

}  // namespace contextcalc::cli

#endif
