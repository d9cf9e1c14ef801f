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


#include "contextcalc/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "contextcalc/errors.hpp"
#include "contextcalc/kernels.hpp"
#include "contextcalc/ontomodels.hpp"
#include "contextcalc/presets.hpp"
#include "contextcalc/qgames.hpp"

namespace contextcalc::cli {

using nlohmann::json;
using qmath::BlochVector;
using qmath::Complex;
using qmath::ComplexMatrix;
using qmath::DensityOperator;
using qmath::Povm;

namespace {

[[noreturn]] void fail(const std::string &code, const std::string &location, const std::string &message) {
    throw ValidationError(code, location, message);
}

std::string row_location(const std::string &m, const std::string &p) { return "(" + m + ", " + p + ")"; }

std::vector<std::string> string_array(const json &j, const std::string &location) {
    if (!j.is_array()) {
        fail("schema", location, "expected an array of strings");
    }
    std::vector<std::string> out;
    for (const auto &e : j) {
        if (!e.is_string()) {
            fail("schema", location, "expected an array of strings");
        }
        out.push_back(e.get<std::string>());
    }
    return out;
}

void check_unique(const std::vector<std::string> &labels, const std::string &what) {
    std::set<std::string> seen;
    for (const auto &l : labels) {
        if (!seen.insert(l).second) {
            fail("duplicate-label", what + " '" + l + "'", "duplicate label");
        }
    }
}

struct Labels {
    std::vector<std::string> preparations;
    std::vector<optable::Measurement> measurements;
};

Labels parse_labels(const json &j) {
    Labels out;
    if (!j.contains("preparations")) {
        fail("schema", "preparations", "missing");
    }
    out.preparations = string_array(j["preparations"], "preparations");
    if (out.preparations.empty()) {
        fail("shape", "preparations", "no preparations");
    }
    check_unique(out.preparations, "preparation");
    if (!j.contains("measurements") || !j["measurements"].is_array() || j["measurements"].empty()) {
        fail("schema", "measurements", "expected a non-empty array");
    }
    std::vector<std::string> mlabels;
    for (const auto &m : j["measurements"]) {
        if (!m.is_object() || !m.contains("label") || !m["label"].is_string() || !m.contains("outcomes")) {
            fail("schema", "measurements", "each measurement needs a label and outcomes");
        }
        std::string label = m["label"].get<std::string>();
        auto outcomes = string_array(m["outcomes"], "measurement '" + label + "'");
        if (outcomes.empty()) {
            fail("shape", "measurement '" + label + "'", "no outcomes");
        }
        check_unique(outcomes, "measurement '" + label + "' outcome");
        mlabels.push_back(label);
        out.measurements.push_back({label, std::move(outcomes)});
    }
    check_unique(mlabels, "measurement");
    return out;
}

std::string where(const std::string &what, const std::string &label) { return what + " '" + label + "'"; }

GroupSpec parse_analysis(const json &j, const Labels &labels) {
    if (!j.is_object() || !j.contains("groups") || !j.contains("decoders") || !j["groups"].is_array()) {
        fail("schema", "analysis", "expected {\"groups\": [[...]], \"decoders\": [...]}");
    }
    GroupSpec g;
    for (const auto &row : j["groups"]) {
        g.groups.push_back(string_array(row, "analysis.groups"));
    }
    g.decoders = string_array(j["decoders"], "analysis.decoders");
    std::set<std::string> preps(labels.preparations.begin(), labels.preparations.end());
    for (const auto &row : g.groups) {
        for (const auto &l : row) {
            if (!preps.count(l)) {
                fail("unknown-label", where("preparation", l), "not among the preparations");
            }
        }
    }
    for (const auto &d : g.decoders) {
        bool found = std::any_of(labels.measurements.begin(), labels.measurements.end(),
                                 [&](const optable::Measurement &m) { return m.label == d; });
        if (!found) {
            fail("unknown-label", where("measurement", d), "not among the measurements");
        }
    }
    return g;
}

QuantumAnnotation parse_quantum(const json &j, const Labels &labels) {
    if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
        fail("schema", "quantum.dim", "expected a positive integer");
    }
    QuantumAnnotation q;
    q.dim = j["dim"].get<std::size_t>();
    if (!j.contains("states") || !j["states"].is_object()) {
        fail("schema", "quantum.states", "expected an object keyed by preparation");
    }
    if (!j.contains("povms") || !j["povms"].is_object()) {
        fail("schema", "quantum.povms", "expected an object keyed by measurement");
    }
    for (const auto &p : labels.preparations) {
        if (!j["states"].contains(p)) {
            fail("quantum", where("preparation", p), "no state given");
        }
        ComplexMatrix m = matrix_from_json(j["states"][p], where("state", p));
        if (m.rows() != q.dim) {
            fail("dimension", where("state", p), "dimension " + std::to_string(m.rows()) + ", expected " +
                                                      std::to_string(q.dim));
        }
        try {
            q.states.emplace(p, DensityOperator(m));
        } catch (const ContractError &e) {
            fail("quantum", where("state", p), e.what());
        }
    }
    for (const auto &meas : labels.measurements) {
        if (!j["povms"].contains(meas.label) || !j["povms"][meas.label].is_array()) {
            fail("quantum", where("measurement", meas.label), "no POVM given");
        }
        const json &effects = j["povms"][meas.label];
        if (effects.size() != meas.outcomes.size()) {
            fail("shape", where("povm", meas.label), "effect count differs from the outcome count");
        }
        std::vector<ComplexMatrix> ops;
        for (std::size_t o = 0; o < effects.size(); ++o) {
            ops.push_back(matrix_from_json(effects[o], where("povm", meas.label)));
            if (ops.back().rows() != q.dim) {
                fail("dimension", where("povm", meas.label), "effect dimension differs from quantum.dim");
            }
        }
        try {
            q.povms.emplace(meas.label, Povm(std::move(ops)));
        } catch (const ContractError &e) {
            fail("quantum", where("povm", meas.label), e.what());
        }
    }
    if (j.contains("channel")) {
        q.channel = channel_from_json(j["channel"]);
        if (q.channel->dim() != q.dim) {
            fail("dimension", "quantum.channel", "channel dimension differs from quantum.dim");
        }
    }
    return q;
}

double born(const DensityOperator &rho, const ComplexMatrix &effect) {
    return std::clamp(qmath::born_probability(rho, effect), 0.0, 1.0);
}

std::vector<double> born_row(const DensityOperator &rho, const Povm &povm) {
    std::vector<double> row;
    for (const auto &e : povm.effects()) {
        row.push_back(born(rho, e));
    }
    double s = std::accumulate(row.begin(), row.end(), 0.0);
    for (double &x : row) {
        x /= s;
    }
    return row;
}

void validate_groups(const GroupSpec &g, const optable::ProbTable &t) {
    if (g.groups.empty() || g.groups.size() != g.decoders.size()) {
        throw ContractError("analyze: need one decoder per alphabet");
    }
    std::size_t d = g.groups.front().size();
    for (std::size_t k = 0; k < g.groups.size(); ++k) {
        if (g.groups[k].size() != d || d < 2) {
            throw ContractError("analyze: alphabets must have the same size d >= 2");
        }
        for (const auto &l : g.groups[k]) {
            if (!t.has_preparation(l)) {
                throw ValidationError("unknown-label", where("preparation", l), "not in the table");
            }
        }
        const auto &m = t.measurements()[t.meas_index(g.decoders[k])];
        if (m.outcomes.size() != d) {
            throw ValidationError("shape", where("measurement", m.label), "decoder needs one outcome per message");
        }
    }
}

json minimax_json(const qgames::MinimaxResult &r) {
    return {{"value", extended_to_json(r.value)},
            {"lower_bound", r.lower_bound},
            {"certificate_gap", r.certificate_gap},
            {"polished", r.polished}};
}

bool agree(const ExtendedReal &a, const ExtendedReal &b, double tol, double &diff) {
    if (a.is_infinite() || b.is_infinite()) {
        diff = a.is_infinite() && b.is_infinite() ? 0.0 : INFINITY;
        return diff == 0.0;
    }
    diff = std::abs(a.value() - b.value());
    return diff <= tol * std::max(1.0, std::abs(b.value()));
}

json eb_json(const noise::EbReport &r) {
    return {{"verdict", noise::to_string(r.verdict)}, {"min_pt_eigenvalue", r.min_pt_eigenvalue}};
}

json injectivity_json(const noise::InjectivityReport &r) {
    return {{"injective", r.injective}, {"transfer_rank", r.transfer_rank}};
}

json depolarizing_json(const noise::ThresholdReport &r) {
    return {{"dim", r.dim},
            {"p", r.p},
            {"fidelity_threshold", r.fidelity_threshold},
            {"depol_contextual_below", r.depol_contextual_below},
            {"depol_eb_at", r.depol_eb_at},
            {"regime", noise::to_string(r.regime)},
            {"classification", r.classification}};
}

json channel_block(const noise::ChannelSpec &ch) {
    json out = {{"average_gate_fidelity", noise::average_gate_fidelity(ch)},
                {"entanglement_fidelity", noise::entanglement_fidelity(ch)},
                {"entanglement_breaking", eb_json(noise::entanglement_breaking_check(ch))},
                {"injectivity", injectivity_json(noise::channel_injectivity(ch))}};
    if (ch.is_depolarizing()) {
        out["depolarizing"] = depolarizing_json(noise::depolarizing_report(ch.dim(), ch.depolarizing_p()));
    }
    return out;
}

void dump_rec(const json &j, int indent, int level, std::string &out) {
    auto newline = [&](int lvl) {
        if (indent >= 0) {
            out += '\n';
            out.append(static_cast<std::size_t>(indent * lvl), ' ');
        }
    };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ',';
                }
                first = false;
                newline(level + 1);
                out += json(it.key()).dump();
                out += indent >= 0 ? ": " : ":";
                dump_rec(it.value(), indent, level + 1, out);
            }
            newline(level);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            bool flat = std::none_of(j.begin(), j.end(), [](const json &e) { return e.is_structured(); });
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i > 0) {
                    out += flat && indent >= 0 ? ", " : ",";
                }
                if (!flat) {
                    newline(level + 1);
                }
                dump_rec(j[i], indent, level + 1, out);
            }
            if (!flat) {
                newline(level);
            }
            out += ']';
            return;
        }
        case json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            std::string s(buf);
            if (s.find_first_of(".e") == std::string::npos) {
                s += ".0";
            }
            out += s;
            return;
        }
        default:
            out += j.dump();
    }
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("io", path, "cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        fail("io", path, "cannot write file");
    }
}

BlochVector random_direction(std::mt19937_64 &rng) {
    std::normal_distribution<double> n;
    BlochVector v;
    do {
        v = {n(rng), n(rng), n(rng)};
    } while (v.norm() < 1e-12);
    return v * (1.0 / v.norm());
}

BlochVector random_ball(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return random_direction(rng) * std::cbrt(u(rng));
}

}  // namespace

// ---------------------------------------------------------------------------
// Serialization

std::string sha256_hex(const std::string &bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("sha256: digest failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

std::string dump_json(const json &j, int indent) {
    std::string out;
    dump_rec(j, indent, 0, out);
    if (indent >= 0) {
        out += '\n';
    }
    return out;
}

json extended_to_json(const ExtendedReal &x) { return x.is_infinite() ? json("inf") : json(x.value()); }

json matrix_to_json(const ComplexMatrix &m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix matrix_from_json(const json &j, const std::string &location) {
    if (!j.is_array() || j.empty()) {
        fail("schema", location, "expected a nested array of [re, im] pairs");
    }
    std::size_t n = j.size();
    std::vector<Complex> entries;
    for (const auto &row : j) {
        if (!row.is_array() || row.size() != n) {
            fail("shape", location, "matrix must be square");
        }
        for (const auto &e : row) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                fail("schema", location, "entries must be [re, im] pairs");
            }
            entries.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
    }
    try {
        return ComplexMatrix(n, n, std::move(entries));
    } catch (const ContractError &e) {
        fail("schema", location, e.what());
    }
}

json channel_to_json(const noise::ChannelSpec &ch) {
    if (ch.is_depolarizing()) {
        return {{"kind", "depolarizing"}, {"dim", ch.dim()}, {"p", ch.depolarizing_p()}};
    }
    auto ops = ch.kraus_ops();
    if (ops.size() == 1 && qmath::max_abs_diff(ops.front(), ComplexMatrix::identity(ch.dim())) == 0.0) {
        return {{"kind", "identity"}, {"dim", ch.dim()}};
    }
    json list = json::array();
    for (const auto &k : ops) {
        list.push_back(matrix_to_json(k));
    }
    return {{"kind", "kraus"}, {"ops", list}};
}

noise::ChannelSpec channel_from_json(const json &j) {
    const std::string loc = "quantum.channel";
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        fail("schema", loc, "expected an object with a \"kind\"");
    }
    std::string kind = j["kind"].get<std::string>();
    auto dim = [&]() {
        if (!j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
            fail("schema", loc, "expected a positive integer \"dim\"");
        }
        return j["dim"].get<std::size_t>();
    };
    try {
        if (kind == "identity") {
            return noise::ChannelSpec::identity(dim());
        }
        if (kind == "depolarizing") {
            if (!j.contains("p") || !j["p"].is_number()) {
                fail("schema", loc, "expected a number \"p\"");
            }
            return noise::ChannelSpec::depolarizing(dim(), j["p"].get<double>());
        }
        if (kind == "kraus") {
            if (!j.contains("ops") || !j["ops"].is_array() || j["ops"].empty()) {
                fail("schema", loc, "expected a non-empty \"ops\" array");
            }
            std::vector<ComplexMatrix> ops;
            for (const auto &k : j["ops"]) {
                ops.push_back(matrix_from_json(k, loc));
            }
            return noise::ChannelSpec::kraus(std::move(ops));
        }
        if (kind == "unitary") {
            if (!j.contains("u")) {
                fail("schema", loc, "expected a matrix \"u\"");
            }
            return noise::ChannelSpec::unitary(matrix_from_json(j["u"], loc));
        }
    } catch (const ContractError &e) {
        fail("quantum", loc, e.what());
    }
    fail("schema", loc, "unknown channel kind '" + kind + "'");
}

noise::ChannelSpec channel_from_string(const std::string &spec, std::size_t dim) {
    if (spec.empty() || spec == "identity") {
        return noise::ChannelSpec::identity(dim);
    }
    const std::string prefix = "depolarizing:";
    if (spec.rfind(prefix, 0) == 0) {
        std::size_t used = 0;
        double p = 0.0;
        try {
            p = std::stod(spec.substr(prefix.size()), &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != spec.size() - prefix.size()) {
            fail("schema", "--channel", "cannot read p in '" + spec + "'");
        }
        try {
            return noise::ChannelSpec::depolarizing(dim, p);
        } catch (const ContractError &e) {
            fail("schema", "--channel", e.what());
        }
    }
    fail("schema", "--channel", "expected 'identity' or 'depolarizing:P', got '" + spec + "'");
}

GroupSpec parse_groups(const std::string &spec) {
    GroupSpec g;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) {
            continue;
        }
        auto eq = part.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == part.size()) {
            fail("schema", "--groups", "expected DECODER=prep,prep;... but got '" + part + "'");
        }
        g.decoders.push_back(part.substr(0, eq));
        std::vector<std::string> row;
        std::stringstream rs(part.substr(eq + 1));
        std::string label;
        while (std::getline(rs, label, ',')) {
            if (label.empty()) {
                fail("schema", "--groups", "empty preparation label in '" + part + "'");
            }
            row.push_back(label);
        }
        g.groups.push_back(std::move(row));
    }
    if (g.groups.empty()) {
        fail("schema", "--groups", "no alphabets given");
    }
    return g;
}

std::string format_groups(const GroupSpec &g) {
    std::string out;
    for (std::size_t k = 0; k < g.groups.size(); ++k) {
        if (k > 0) {
            out += ';';
        }
        out += g.decoders.at(k) + "=";
        for (std::size_t x = 0; x < g.groups[k].size(); ++x) {
            out += (x > 0 ? "," : "") + g.groups[k][x];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ingestion

Theory parse_theory(const std::string &text, std::optional<double> tolerance) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        fail("parse", "byte " + std::to_string(e.byte), e.what());
    }
    if (!j.is_object()) {
        fail("schema", "document", "expected a JSON object");
    }
    if (!j.contains("format_version")) {
        fail("format-version", "format_version", "missing");
    }
    if (!j["format_version"].is_string() || j["format_version"].get<std::string>() != kFormatVersion) {
        fail("format-version", "format_version", "unsupported version " + j["format_version"].dump());
    }
    double tol = kDefaultTolerance;
    if (j.contains("tolerance")) {
        if (!j["tolerance"].is_number() || !(j["tolerance"].get<double>() > 0.0)) {
            fail("schema", "tolerance", "expected a positive number");
        }
        tol = j["tolerance"].get<double>();
    }
    if (tolerance) {
        if (!(*tolerance > 0.0)) {
            fail("schema", "--tolerance", "expected a positive number");
        }
        tol = *tolerance;
    }

    Labels labels = parse_labels(j);
    if (!j.contains("probs") || !j["probs"].is_object()) {
        fail("schema", "probs", "expected an object keyed by measurement");
    }
    const json &probs = j["probs"];
    for (auto it = probs.begin(); it != probs.end(); ++it) {
        bool known = std::any_of(labels.measurements.begin(), labels.measurements.end(),
                                 [&](const optable::Measurement &m) { return m.label == it.key(); });
        if (!known) {
            fail("unknown-label", where("measurement", it.key()), "probs names an undeclared measurement");
        }
    }

    std::vector<std::string> warnings;
    std::vector<std::vector<std::vector<double>>> table(labels.measurements.size());
    for (std::size_t mi = 0; mi < labels.measurements.size(); ++mi) {
        const auto &meas = labels.measurements[mi];
        std::size_t no = meas.outcomes.size();
        table[mi].assign(no, std::vector<double>(labels.preparations.size(), 0.0));
        if (!probs.contains(meas.label) || !probs[meas.label].is_object()) {
            fail("missing-row", row_location(meas.label, labels.preparations.front()), "no rows for this measurement");
        }
        const json &rows = probs[meas.label];
        for (auto it = rows.begin(); it != rows.end(); ++it) {
            if (std::find(labels.preparations.begin(), labels.preparations.end(), it.key()) ==
                labels.preparations.end()) {
                fail("unknown-label", row_location(meas.label, it.key()), "probs names an undeclared preparation");
            }
        }
        for (std::size_t pi = 0; pi < labels.preparations.size(); ++pi) {
            const std::string &prep = labels.preparations[pi];
            const std::string loc = row_location(meas.label, prep);
            if (!rows.contains(prep)) {
                fail("missing-row", loc, "row missing");
            }
            const json &row = rows[prep];
            if (!row.is_array() || row.size() != no) {
                fail("shape", loc, "expected " + std::to_string(no) + " probabilities");
            }
            double sum = 0.0;
            for (std::size_t o = 0; o < no; ++o) {
                if (!row[o].is_number()) {
                    fail("schema", loc, "probabilities must be numbers");
                }
                double v = row[o].get<double>();
                if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) {
                    fail("probability-range", loc, "entry " + std::to_string(v) + " outside [0, 1]");
                }
                table[mi][o][pi] = std::clamp(v, 0.0, 1.0);
                sum += table[mi][o][pi];
            }
            double dev = std::abs(sum - 1.0);
            if (dev > tol) {
                std::ostringstream msg;
                msg << "row sums to " << std::setprecision(17) << sum << " (tolerance " << std::setprecision(6) << tol
                    << ")";
                fail("row-sum", loc, msg.str());
            }
            if (sum != 1.0) {
                for (std::size_t o = 0; o < no; ++o) {
                    table[mi][o][pi] /= sum;
                }
                if (dev > 1e-12) {
                    std::ostringstream msg;
                    msg << "renormalized row " << loc << " (deviation " << dev << ")";
                    warnings.push_back(msg.str());
                }
            }
        }
    }
    Theory out{optable::ProbTable(labels.preparations, labels.measurements, std::move(table), tol), tol,
               std::move(warnings), std::nullopt, std::nullopt, {}};
    if (j.contains("quantum")) {
        out.quantum = parse_quantum(j["quantum"], labels);
    }
    if (j.contains("analysis")) {
        out.analysis = parse_analysis(j["analysis"], labels);
    }
    out.sha256 = sha256_hex(text);
    return out;
}

Theory ingest_theory(const std::string &path, std::optional<double> tolerance) {
    return parse_theory(read_file(path), tolerance);
}

// ---------------------------------------------------------------------------
// Simulation

SimulationSetup preset_setup(const std::string &name) {
    std::size_t n = 0;
    bool completions = true;
    if (name == "square" || name == "square-bare") {
        n = 2;
    } else if (name == "hexagon" || name == "hexagon-bare") {
        n = 3;
    } else {
        fail("schema", "--preset", "unknown preset '" + name + "' (square, hexagon, square-bare, hexagon-bare)");
    }
    completions = name.find("-bare") == std::string::npos;
    auto s = presets::polygon_setup(n, completions);
    return {s.labels, s.states, s.measurements, s.povms, GroupSpec{s.groups, s.decoders}};
}

SimulationSetup setup_from_json(const json &j) {
    if (!j.is_object()) {
        fail("schema", "document", "expected a JSON object");
    }
    if (j.contains("format_version") &&
        (!j["format_version"].is_string() || j["format_version"].get<std::string>() != kFormatVersion)) {
        fail("format-version", "format_version", "unsupported version " + j["format_version"].dump());
    }
    Labels labels = parse_labels(j);
    if (!j.contains("quantum")) {
        fail("schema", "quantum", "a setup needs states and POVMs");
    }
    QuantumAnnotation q = parse_quantum(j["quantum"], labels);
    SimulationSetup s;
    s.labels = labels.preparations;
    for (const auto &l : s.labels) {
        s.states.push_back(q.states.at(l));
    }
    s.measurements = labels.measurements;
    for (const auto &m : s.measurements) {
        s.povms.push_back(q.povms.at(m.label));
    }
    if (j.contains("analysis")) {
        s.analysis = parse_analysis(j["analysis"], labels);
    }
    return s;
}

json simulate_table(const SimulationSetup &setup, const noise::ChannelSpec &channel, std::optional<std::uint64_t> shots,
                    std::uint64_t seed) {
    if (setup.labels.size() != setup.states.size() || setup.measurements.size() != setup.povms.size()) {
        throw ContractError("simulate_table: labels and states (or measurements and POVMs) differ in count");
    }
    const std::size_t dim = channel.dim();
    for (std::size_t i = 0; i < setup.states.size(); ++i) {
        if (setup.states[i].dim() != dim) {
            fail("dimension", where("state", setup.labels[i]), "dimension differs from the channel's");
        }
    }
    for (std::size_t m = 0; m < setup.povms.size(); ++m) {
        if (setup.povms[m].dim() != dim) {
            fail("dimension", where("povm", setup.measurements[m].label), "dimension differs from the channel's");
        }
        if (setup.povms[m].size() != setup.measurements[m].outcomes.size()) {
            fail("shape", where("povm", setup.measurements[m].label), "effect count differs from the outcome count");
        }
    }
    if (shots && *shots == 0) {
        fail("schema", "--shots", "need at least one shot");
    }

    std::vector<DensityOperator> noisy;
    for (const auto &s : setup.states) {
        noisy.push_back(channel.apply(s));
    }
    json probs = json::object();
    std::uint64_t stream = 0;
    for (std::size_t m = 0; m < setup.measurements.size(); ++m) {
        json rows = json::object();
        for (std::size_t p = 0; p < setup.labels.size(); ++p, ++stream) {
            std::vector<double> row = born_row(noisy[p], setup.povms[m]);
            if (shots) {
                std::mt19937_64 rng(kernels::substream_seed(seed, stream));
                std::uint64_t left = *shots;
                double mass = 1.0;
                for (std::size_t o = 0; o < row.size(); ++o) {
                    std::uint64_t k = left;
                    if (o + 1 < row.size()) {
                        double q = mass > 0.0 ? std::clamp(row[o] / mass, 0.0, 1.0) : 0.0;
                        k = std::binomial_distribution<std::uint64_t>(left, q)(rng);
                    }
                    mass -= row[o];
                    left -= k;
                    row[o] = static_cast<double>(k) / static_cast<double>(*shots);
                }
            }
            rows[setup.labels[p]] = row;
        }
        probs[setup.measurements[m].label] = std::move(rows);
    }

    json measurements = json::array();
    json povms = json::object();
    for (std::size_t m = 0; m < setup.measurements.size(); ++m) {
        measurements.push_back({{"label", setup.measurements[m].label}, {"outcomes", setup.measurements[m].outcomes}});
        json effects = json::array();
        for (const auto &e : setup.povms[m].effects()) {
            effects.push_back(matrix_to_json(e));
        }
        povms[setup.measurements[m].label] = std::move(effects);
    }
    json states = json::object();
    for (std::size_t p = 0; p < setup.labels.size(); ++p) {
        states[setup.labels[p]] = matrix_to_json(setup.states[p].matrix());
    }
    json out = {{"format_version", kFormatVersion},
                {"tolerance", kDefaultTolerance},
                {"preparations", setup.labels},
                {"measurements", measurements},
                {"probs", probs},
                {"quantum", {{"dim", dim}, {"states", states}, {"povms", povms}, {"channel", channel_to_json(channel)}}},
                {"simulation", shots ? json{{"mode", "shots"}, {"shots", *shots}, {"seed", seed}}
                                     : json{{"mode", "exact"}}}};
    if (setup.analysis) {
        out["analysis"] = {{"groups", setup.analysis->groups}, {"decoders", setup.analysis->decoders}};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analysis

json analyze(const Theory &theory, const std::optional<GroupSpec> &groups, const AnalyzeOptions &opt) {
    if (!groups && !theory.analysis) {
        throw ContractError("analyze: no alphabets given (use --groups or an \"analysis\" block)");
    }
    const GroupSpec gs = groups ? *groups : *theory.analysis;
    const auto &t = theory.table;
    validate_groups(gs, t);
    const std::size_t n = gs.groups.size();
    const std::size_t d = gs.groups.front().size();
    const double tol = theory.tolerance;
    const double agreement_tol = 1e-6;

    auto w = optable::table_guess_and_bounds(t, gs.groups, gs.decoders, tol);
    json report;
    report["table"] = {{"preparations", t.num_preparations()},
                       {"measurements", t.measurements().size()},
                       {"n", n},
                       {"d", d},
                       {"warnings", theory.warnings}};
    report["witness"] = {{"p_guess", w.p_guess},
                         {"alpha_min", extended_to_json(w.alpha_min)},
                         {"beta_min", extended_to_json(w.beta_min)},
                         {"q_guess_bound", w.alpha_min.is_finite() ? json(w.alpha_min.value() / static_cast<double>(d))
                                                                   : json("inf")},
                         {"bound_alpha", w.bound_alpha},
                         {"bound_beta", w.bound_beta},
                         {"c_from_alpha", w.c_from_alpha},
                         {"c_from_beta", w.c_from_beta},
                         {"c_lower", w.c_lower},
                         {"violated", w.violated},
                         {"observer_success", w.observer_success}};

    // Operationally equivalent preparations, by union-find over listed labels.
    const std::size_t np = t.num_preparations();
    std::vector<std::size_t> parent(np);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
        return parent[i] == i ? i : parent[i] = root(parent[i]);
    };
    for (std::size_t a = 0; a < np; ++a) {
        for (std::size_t b = a + 1; b < np; ++b) {
            auto r = optable::operational_equivalence(t, optable::Mixture::point(t.preparations()[a]),
                                                      optable::Mixture::point(t.preparations()[b]), tol);
            if (r.equivalent) {
                parent[root(b)] = root(a);
            }
        }
    }
    std::map<std::size_t, std::vector<std::string>> classes;
    for (std::size_t i = 0; i < np; ++i) {
        classes[root(i)].push_back(t.preparations()[i]);
    }
    json cls = json::array();
    for (const auto &[r, members] : classes) {
        if (members.size() > 1) {
            cls.push_back(members);
        }
    }
    double avg_dev = 0.0;
    bool avg_eq = true;
    for (std::size_t k = 1; k < n; ++k) {
        auto r = optable::operational_equivalence(t, optable::Mixture::uniform(gs.groups[0]),
                                                  optable::Mixture::uniform(gs.groups[k]), tol);
        avg_dev = std::max(avg_dev, r.max_deviation);
        avg_eq = avg_eq && r.equivalent;
    }
    report["equivalence"] = {{"classes", cls},
                             {"alphabet_averages_equivalent", avg_eq},
                             {"alphabet_averages_max_deviation", avg_dev},
                             {"tolerance", tol}};

    if (theory.quantum && opt.quantum) {
        const auto &q = *theory.quantum;
        const noise::ChannelSpec ch = q.channel ? *q.channel : noise::ChannelSpec::identity(q.dim);
        auto game = [&](bool noisy) {
            std::vector<std::vector<DensityOperator>> grid;
            for (const auto &row : gs.groups) {
                std::vector<DensityOperator> r;
                for (const auto &l : row) {
                    r.push_back(noisy ? ch.apply(q.states.at(l)) : q.states.at(l));
                }
                grid.push_back(std::move(r));
            }
            return qgames::make_config(std::move(grid));
        };
        // The annotated states are the comparison point for the table: the
        // operational constants do not move under an injective channel.
        auto cfg = game(false);
        auto guess = qgames::qguess_quantum(cfg);
        auto beta = qgames::beta_min_quantum(qgames::ensemble_states(cfg));
        json quantum = {{"dim", q.dim},
                        {"alpha", minimax_json(guess.alpha)},
                        {"beta", minimax_json(beta)},
                        {"q_guess", guess.q_guess},
                        {"r_guess", guess.r_guess}};
        json closed = nullptr;
        if (q.dim == 2) {
            try {
                auto cf = qgames::qubit_closed_form(cfg);
                closed = {{"alpha", extended_to_json(cf.alpha)},
                          {"beta", extended_to_json(cf.beta)},
                          {"max_bloch_norm", cf.max_bloch_norm}};
            } catch (const ContractError &) {
                closed = nullptr;
            }
        }
        if (q.channel) {
            auto noisy_cfg = game(true);
            auto ng = qgames::qguess_quantum(noisy_cfg);
            auto nb = qgames::beta_min_quantum(qgames::ensemble_states(noisy_cfg));
            quantum["after_channel"] = {{"alpha", minimax_json(ng.alpha)},
                                        {"beta", minimax_json(nb)},
                                        {"q_guess", ng.q_guess},
                                        {"r_guess", ng.r_guess}};
        }
        quantum["closed_form"] = closed;
        double da = 0.0;
        double db = 0.0;
        bool aa = agree(w.alpha_min, guess.alpha.value, agreement_tol, da);
        bool ab = agree(w.beta_min, beta.value, agreement_tol, db);
        quantum["table_vs_quantum"] = {{"alpha_diff", std::isfinite(da) ? json(da) : json("inf")},
                                       {"beta_diff", std::isfinite(db) ? json(db) : json("inf")},
                                       {"agree", aa && ab},
                                       {"tolerance", agreement_tol}};

        // The table against the annotation it claims to come from.
        double annotation_dev = 0.0;
        for (std::size_t m = 0; m < t.measurements().size(); ++m) {
            const auto &povm = q.povms.at(t.measurements()[m].label);
            for (std::size_t p = 0; p < np; ++p) {
                auto row = born_row(ch.apply(q.states.at(t.preparations()[p])), povm);
                for (std::size_t o = 0; o < row.size(); ++o) {
                    annotation_dev = std::max(annotation_dev, std::abs(row[o] - t.prob(m, o, p)));
                }
            }
        }
        quantum["annotation_max_deviation"] = annotation_dev;
        report["quantum"] = std::move(quantum);

        std::vector<DensityOperator> ideal_states;
        for (const auto &l : t.preparations()) {
            ideal_states.push_back(q.states.at(l));
        }
        std::vector<Povm> povms;
        for (const auto &m : t.measurements()) {
            povms.push_back(q.povms.at(m.label));
        }
        auto ideal = optable::born_table(t.preparations(), ideal_states, t.measurements(), povms);
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto &ra : gs.groups) {
            for (const auto &a : ra) {
                for (const auto &rb : gs.groups) {
                    for (const auto &b : rb) {
                        if (a != b) {
                            pairs.emplace_back(a, b);
                        }
                    }
                }
            }
        }
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        auto inv = optable::invariance_audit(ideal, ch, q.states, q.povms, gs.groups, pairs, agreement_tol);
        json inv_json = {{"injective", inv.injective},
                         {"asserted", inv.asserted},
                         {"passed", inv.passed},
                         {"max_deviation", inv.max_deviation},
                         {"tolerance", inv.tolerance},
                         {"pairs", inv.pairs.size()}};
        if (inv.before && inv.after) {
            inv_json["alpha_before"] = extended_to_json(inv.before->alpha);
            inv_json["alpha_after"] = extended_to_json(inv.after->alpha);
            inv_json["beta_before"] = extended_to_json(inv.before->beta);
            inv_json["beta_after"] = extended_to_json(inv.after->beta);
        }
        report["invariance"] = std::move(inv_json);

        if (q.channel) {
            report["thresholds"] = channel_block(*q.channel);
        }
    }

    report["provenance"] = {{"tool_version", kToolVersion},
                            {"format_version", kFormatVersion},
                            {"input_sha256", theory.sha256},
                            {"seed", opt.seed},
                            {"tolerance", tol},
                            {"agreement_tolerance", agreement_tol},
                            {"groups", format_groups(gs)}};
    return report;
}

namespace {

std::string num(const json &j) {
    if (j.is_string()) {
        return j.get<std::string>();
    }
    if (j.is_boolean()) {
        return j.get<bool>() ? "yes" : "no";
    }
    if (j.is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.10g", j.get<double>());
        return buf;
    }
    return j.dump();
}

}  // namespace

std::string summarize(const json &r) {
    std::ostringstream out;
    const json &w = r.at("witness");
    out << "table           " << num(r["table"]["preparations"]) << " preparations, "
        << num(r["table"]["measurements"]) << " measurements, n = " << num(r["table"]["n"])
        << ", d = " << num(r["table"]["d"]) << "\n";
    for (const auto &warning : r["table"]["warnings"]) {
        out << "warning         " << warning.get<std::string>() << "\n";
    }
    out << "P_guess         " << num(w["p_guess"]) << "\n";
    out << "alpha_min       " << num(w["alpha_min"]) << "  (alpha/d = " << num(w["q_guess_bound"]) << ")\n";
    out << "beta_min        " << num(w["beta_min"]) << "\n";
    out << "NC ceilings     " << num(w["bound_alpha"]) << " (alpha), " << num(w["bound_beta"]) << " (beta)\n";
    out << "C lower bound   " << num(w["c_lower"]) << "  violated: " << num(w["violated"]) << "\n";
    out << "(1 + C)/2       " << num(w["observer_success"]) << "\n";
    out << "equivalences    " << r["equivalence"]["classes"].size() << " classes of listed preparations; "
        << "alphabet averages equivalent: " << num(r["equivalence"]["alphabet_averages_equivalent"]) << "\n";
    if (r.contains("quantum")) {
        const json &q = r["quantum"];
        out << "quantum         Q_guess " << num(q["q_guess"]) << ", R_guess " << num(q["r_guess"]) << ", alpha "
            << num(q["alpha"]["value"]) << ", beta " << num(q["beta"]["value"]) << "\n";
        if (q.contains("after_channel")) {
            out << "after channel   Q_guess " << num(q["after_channel"]["q_guess"]) << ", alpha "
                << num(q["after_channel"]["alpha"]["value"]) << ", beta " << num(q["after_channel"]["beta"]["value"])
                << "\n";
        }
        if (!q["closed_form"].is_null()) {
            out << "closed form     alpha " << num(q["closed_form"]["alpha"]) << ", beta "
                << num(q["closed_form"]["beta"]) << "\n";
        }
        out << "table/quantum   agree: " << num(q["table_vs_quantum"]["agree"]) << " (alpha diff "
            << num(q["table_vs_quantum"]["alpha_diff"]) << ", beta diff " << num(q["table_vs_quantum"]["beta_diff"])
            << ")\n";
    }
    if (r.contains("invariance")) {
        const json &inv = r["invariance"];
        out << "invariance      "
            << (inv["asserted"].get<bool>() ? (inv["passed"].get<bool>() ? "passed" : "FAILED")
                                            : "skipped (channel not injective)")
            << ", max deviation " << num(inv["max_deviation"]) << "\n";
    }
    if (r.contains("thresholds")) {
        const json &th = r["thresholds"];
        out << "channel         AGF " << num(th["average_gate_fidelity"]) << ", "
            << th["entanglement_breaking"]["verdict"].get<std::string>()
            << ", injective: " << num(th["injectivity"]["injective"]) << "\n";
        if (th.contains("depolarizing")) {
            out << "depolarizing    " << th["depolarizing"]["classification"].get<std::string>() << "\n";
        }
    }
    out << "input sha256    " << r["provenance"]["input_sha256"].get<std::string>() << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Other verbs

json thresholds_report(std::size_t dim, double p, std::size_t mc_samples, std::uint64_t seed) {
    auto ch = noise::ChannelSpec::depolarizing(dim, p);
    json out = depolarizing_json(noise::depolarizing_report(dim, p));
    const double dd = static_cast<double>(dim);
    out["average_gate_fidelity"] = noise::average_gate_fidelity(ch);
    out["average_gate_fidelity_formula"] = 1.0 - p * (dd - 1.0) / dd;
    out["entanglement_fidelity"] = noise::entanglement_fidelity(ch);
    out["entanglement_breaking"] = eb_json(noise::entanglement_breaking_check(ch));
    out["injectivity"] = injectivity_json(noise::channel_injectivity(ch));
    if (mc_samples > 0) {
        auto mc = noise::average_gate_fidelity_mc(ch, mc_samples, seed);
        out["average_gate_fidelity_mc"] = {
            {"mean", mc.mean}, {"std_err", mc.std_err}, {"samples", mc.samples}, {"seed", seed}};
    }
    return out;
}

json haar_verify(std::size_t dim, std::size_t mc_samples, std::uint64_t seed) {
    auto h = qgames::qudit_haar_threshold(dim, mc_samples, seed);
    double z = h.std_err > 0.0 ? (h.mc_estimate - h.exact) / h.std_err : 0.0;
    return {{"dim", dim},
            {"exact", h.exact},
            {"mc_estimate", h.mc_estimate},
            {"std_err", h.std_err},
            {"samples", h.samples},
            {"seed", seed},
            {"z_score", z},
            {"within_3_std_err", std::abs(h.mc_estimate - h.exact) <= 3.0 * h.std_err}};
}

json ks_audit(const KsAuditOptions &opt) {
    using namespace ontomodels;
    if (opt.pairs == 0) {
        throw ContractError("ks_audit: need at least one pair");
    }
    std::mt19937_64 rng(opt.seed);
    json out;

    // Born rule on random pure pairs.
    std::vector<std::pair<BlochVector, BlochVector>> dirs;
    for (std::size_t i = 0; i < opt.pairs; ++i) {
        BlochVector s = random_direction(rng);
        dirs.emplace_back(s, random_direction(rng));
    }
    double adapted_res = 0.0;
    for (const auto &[s, r] : dirs) {
        adapted_res = std::max(adapted_res, std::abs(ks_born(s, r, opt.grid_order) - (1.0 + s.dot(r)) / 2.0));
    }
    auto product = SphereGrid::product();
    auto batch = ks_born_batch_parallel(product, dirs);
    double product_res = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        product_res = std::max(product_res, std::abs(batch[i] - (1.0 + dirs[i].first.dot(dirs[i].second)) / 2.0));
    }
    out["born"] = {{"pairs", opt.pairs},
                   {"adapted_order", opt.grid_order},
                   {"adapted_max_residual", adapted_res},
                   {"product_max_residual", product_res},
                   {"product_grid_tolerance", product->tolerance()},
                   {"product_within_tolerance", product_res < product->tolerance()},
                   {"passed", adapted_res < 1e-6}};

    // Equal-average ensembles never differ by more than 1/2 in total variation.
    double max_tv = 0.0;
    std::vector<std::pair<Ensemble, Ensemble>> ensembles;
    for (std::size_t i = 0; i < opt.pairs; ++i) {
        BlochVector a = random_ball(rng) * 0.95;
        Ensemble e1 = random_ensemble_with_average(a, 2 + i % 3, rng);
        Ensemble e2 = random_ensemble_with_average(a, 2 + (i / 3) % 3, rng);
        max_tv = std::max(max_tv, model_total_variation(ks_ensemble_density(product, e1),
                                                        ks_ensemble_density(product, e2)));
        ensembles.emplace_back(std::move(e1), std::move(e2));
    }
    json cap = {{"pairs", opt.pairs}, {"max_tv", max_tv}, {"cap", 0.5}, {"passed", max_tv <= 0.5 + 1e-6}};
    if (opt.mc_samples > 0) {
        auto check = ks_ensemble_total_variation(product, ensembles.front().first, ensembles.front().second,
                                                 opt.mc_samples, opt.seed);
        cap["cross_check"] = {{"grid", check.value},
                              {"monte_carlo", check.mc_value},
                              {"monte_carlo_std_err", check.mc_std_err},
                              {"error_estimate", check.error_estimate}};
    }
    out["half_cap"] = std::move(cap);

    // d_trace <= d_TV <= d_trace + C (1 + d_trace) with C = 1/2.
    std::vector<std::pair<DensityOperator, DensityOperator>> states;
    for (const auto &[s, r] : dirs) {
        states.emplace_back(qmath::bloch_density(s), qmath::bloch_density(r));
    }
    auto t2 = theorem2_audit(ks_tv_oracle(opt.grid_order), states, 0.5);
    out["theorem2"] = {{"pairs", t2.pairs.size()}, {"c_prep", 0.5}, {"max_gap", t2.max_gap}, {"passed", t2.passed}};

    // The noisy-qubit model: Born statistics of the depolarized state, and
    // identical ontic densities for ensembles with equal Bloch averages.
    json noisy = json::array();
    auto coarse = SphereGrid::product(40, 80);
    for (double p : {0.5, 0.6, 0.8}) {
        double res = 0.0;
        for (const auto &[a, b] : states) {
            double overlap = (a.matrix() * b.matrix()).trace().real();
            res = std::max(res, std::abs(noisy_pnc_model_eval(p, a, b, opt.grid_order) -
                                         ((1.0 - p) * overlap + p / 2.0)));
        }
        double pnc = 0.0;
        for (const auto &[e1, e2] : ensembles) {
            OnticDensity m1{coarse, std::vector<double>(coarse->size(), 0.0)};
            OnticDensity m2 = m1;
            for (const auto &[e, m] : {std::pair{&e1, &m1}, std::pair{&e2, &m2}}) {
                for (const auto &el : *e) {
                    auto dens = noisy_pnc_density(coarse, p, el.direction);
                    for (std::size_t i = 0; i < coarse->size(); ++i) {
                        m->values[i] += el.weight * dens.values[i];
                    }
                }
            }
            pnc = std::max(pnc, model_total_variation(m1, m2));
        }
        noisy.push_back({{"p", p},
                         {"max_born_residual", res},
                         {"max_equal_average_tv", pnc},
                         {"passed", res < 1e-6 && pnc < 1e-12}});
    }
    out["noisy_model"] = std::move(noisy);

    auto kkh = kkh_upper_bound(2, ks_tv_oracle(opt.grid_order), opt.pairs, opt.seed);
    out["kkh_bound"] = {{"dim", 2},
                        {"bound", kkh.bound},
                        {"max_tv", kkh.max_tv},
                        {"accepted", kkh.accepted},
                        {"drawn", kkh.drawn},
                        {"sampled_estimate", kkh.sampled_estimate}};
    out["provenance"] = {{"tool_version", kToolVersion},
                         {"seed", opt.seed},
                         {"pairs", opt.pairs},
                         {"grid_order", opt.grid_order},
                         {"mc_samples", opt.mc_samples}};
    return out;
}

// ---------------------------------------------------------------------------
// Command line

int run(int argc, char **argv) {
    CLI::App app{"contextcalc: contextuality witnesses and inaccessible-information bounds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    std::string file;
    std::string output;
    std::optional<double> tolerance;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> shots;
    std::string groups;
    std::string preset;
    std::string setup_file;
    std::string channel = "identity";
    std::string channel_file;
    bool json_out = false;
    bool no_quantum = false;
    std::size_t dim = 2;
    double p = 0.0;
    std::size_t mc_samples = 0;
    KsAuditOptions ks;

    auto *ingest = app.add_subcommand("ingest-check", "Validate a theory file");
    ingest->add_option("file", file, "Theory file")->required();
    ingest->add_option("--tolerance", tolerance, "Row-sum tolerance (overrides the file)");

    auto *simulate = app.add_subcommand("simulate", "Write the theory file of a synthetic experiment");
    auto *source = simulate->add_option_group("source");
    source->add_option("--preset", preset, "square, hexagon, square-bare or hexagon-bare");
    source->add_option("--setup", setup_file, "JSON with preparations, measurements and a quantum block");
    source->require_option(1);
    simulate->add_option("--channel", channel, "identity or depolarizing:P");
    simulate->add_option("--channel-file", channel_file, "JSON channel description (overrides --channel)");
    simulate->add_option("--shots", shots, "Shots per (measurement, preparation); exact when omitted");
    simulate->add_option("--seed", seed, "Sampling seed");
    simulate->add_option("-o,--output", output, "Output path (stdout when omitted)");

    auto *analyze_cmd = app.add_subcommand("analyze", "Witness report for a theory file");
    analyze_cmd->add_option("file", file, "Theory file")->required();
    analyze_cmd->add_option("--groups", groups, "Alphabets as DECODER=prep,prep;DECODER=...");
    analyze_cmd->add_option("--tolerance", tolerance, "Equivalence and row-sum tolerance");
    analyze_cmd->add_option("--seed", seed, "Seed recorded in the provenance");
    analyze_cmd->add_option("-o,--output", output, "Write the JSON report here");
    analyze_cmd->add_flag("--json", json_out, "Print the JSON report instead of the summary");
    analyze_cmd->add_flag("--no-quantum", no_quantum, "Skip the quantum-side solves");

    auto *thresholds = app.add_subcommand("thresholds", "Depolarizing-noise thresholds and channel checks");
    thresholds->add_option("--dim", dim, "Dimension")->check(CLI::Range(2, 16));
    thresholds->add_option("--p", p, "Depolarizing parameter")->required();
    thresholds->add_option("--mc-samples", mc_samples, "Monte-Carlo samples for the fidelity cross-check");
    thresholds->add_option("--seed", seed, "Monte-Carlo seed");

    auto *haar = app.add_subcommand("haar-verify", "Monte-Carlo check of the Haar threshold H_D/D");
    haar->add_option("--dim", dim, "Dimension")->check(CLI::Range(2, 16));
    haar->add_option("--mc-samples", mc_samples, "Samples (default 100000)");
    haar->add_option("--seed", seed, "Seed");

    auto *ks_cmd = app.add_subcommand("ks-audit", "Numerical audit of the Kochen-Specker and noisy-qubit models");
    ks_cmd->add_option("--pairs", ks.pairs, "Random pairs per check");
    ks_cmd->add_option("--grid-order", ks.grid_order, "Gauss order of the adapted grids");
    ks_cmd->add_option("--mc-samples", ks.mc_samples, "Samples of the Monte-Carlo cross-check");
    ks_cmd->add_option("--seed", ks.seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            Theory th = ingest_theory(file, tolerance);
            json out = {{"ok", true},
                        {"preparations", th.table.num_preparations()},
                        {"measurements", th.table.measurements().size()},
                        {"tolerance", th.tolerance},
                        {"quantum", th.quantum.has_value()},
                        {"warnings", th.warnings},
                        {"sha256", th.sha256}};
            std::cout << dump_json(out);
        } else if (*simulate) {
            SimulationSetup s = preset.empty() ? setup_from_json([&] {
                try {
                    return json::parse(read_file(setup_file));
                } catch (const json::parse_error &e) {
                    fail("parse", setup_file, e.what());
                }
            }())
                                     : preset_setup(preset);
            std::size_t d = s.states.empty() ? 2 : s.states.front().dim();
            noise::ChannelSpec ch = channel_from_string(channel, d);
            if (!channel_file.empty()) {
                try {
                    ch = channel_from_json(json::parse(read_file(channel_file)));
                } catch (const json::parse_error &e) {
                    fail("parse", channel_file, e.what());
                }
            }
            write_text(output, dump_json(simulate_table(s, ch, shots, seed)));
        } else if (*analyze_cmd) {
            Theory th = ingest_theory(file, tolerance);
            std::optional<GroupSpec> gs;
            if (!groups.empty()) {
                gs = parse_groups(groups);
            }
            AnalyzeOptions opt;
            opt.seed = seed;
            opt.quantum = !no_quantum;
            json report = analyze(th, gs, opt);
            std::string text = dump_json(report);
            if (!output.empty()) {
                write_text(output, text);
            }
            std::cout << (json_out ? text : summarize(report));
        } else if (*thresholds) {
            std::cout << dump_json(thresholds_report(dim, p, mc_samples, seed));
        } else if (*haar) {
            std::cout << dump_json(haar_verify(dim, mc_samples == 0 ? 100000 : mc_samples, seed));
        } else if (*ks_cmd) {
            std::cout << dump_json(ks_audit(ks));
        }
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError &e) {
        std::cerr << "error [contract]: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace contextcalc::cli
