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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "contextcalc/errors.hpp"
#include "contextcalc/presets.hpp"
#include "contextcalc/qgames.hpp"
#include "generators.hpp"

using namespace contextcalc;
using namespace contextcalc::cli;
using nlohmann::json;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

Theory simulate_and_ingest(const std::string &preset, double p = 0.0) {
    auto ch = noise::ChannelSpec::depolarizing(2, p);
    return parse_theory(dump_json(simulate_table(preset_setup(preset), ch, std::nullopt, 1)));
}

std::string validation_code(const std::string &text, std::string *location = nullptr) {
    try {
        parse_theory(text);
    } catch (const ValidationError &e) {
        if (location) {
            *location = e.location();
        }
        return e.code();
    }
    return "";
}

json square_json() { return simulate_table(preset_setup("square"), noise::ChannelSpec::identity(2), std::nullopt, 1); }

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string &name, const std::string &text)
        : path(std::filesystem::temp_directory_path() / ("contextcalc_cli_test_" + name)) {
        std::ofstream(path) << text;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

int run_quiet(std::vector<std::string> args) {
    std::vector<char *> argv;
    for (auto &a : args) {
        argv.push_back(a.data());
    }
    std::ostringstream sink;
    auto *old_out = std::cout.rdbuf(sink.rdbuf());
    auto *old_err = std::cerr.rdbuf(sink.rdbuf());
    int code = run(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return code;
}

}  // namespace

TEST(cli, square_pipeline_matches_the_closed_form) {
    Theory th = simulate_and_ingest("square");
    EXPECT_EQ(th.table.num_preparations(), 8u);
    EXPECT_TRUE(th.warnings.empty());
    json r = analyze(th, std::nullopt);
    const json &w = r["witness"];
    EXPECT_NEAR(w["p_guess"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(w["q_guess_bound"].get<double>(), (2.0 + kSqrt2) / 4.0, 1e-6);
    EXPECT_NEAR(w["c_lower"].get<double>(), (2.0 - kSqrt2) / 8.0, 1e-6);
    EXPECT_NEAR(w["c_lower"].get<double>(), 0.0732, 5e-5);
    EXPECT_TRUE(w["violated"].get<bool>());
    EXPECT_NEAR(w["observer_success"].get<double>(), (1.0 + (2.0 - kSqrt2) / 8.0) / 2.0, 1e-6);
    EXPECT_TRUE(r["quantum"]["table_vs_quantum"]["agree"].get<bool>());
    EXPECT_NEAR(r["quantum"]["q_guess"].get<double>(), (2.0 + kSqrt2) / 4.0, 1e-6);
    EXPECT_NEAR(r["quantum"]["r_guess"].get<double>(), (2.0 + kSqrt2) / 8.0, 1e-6);
    EXPECT_TRUE(r["invariance"]["passed"].get<bool>());
    EXPECT_EQ(r["provenance"]["input_sha256"].get<std::string>().size(), 64u);
}

TEST(cli, hexagon_pipeline) {
    json r = analyze(simulate_and_ingest("hexagon"), std::nullopt);
    EXPECT_NEAR(r["witness"]["q_guess_bound"].get<double>(), 5.0 / 6.0, 1e-6);
    EXPECT_NEAR(r["witness"]["c_lower"].get<double>(), 1.0 / 24.0, 1e-6);
    EXPECT_NEAR(r["quantum"]["q_guess"].get<double>(), 5.0 / 6.0, 1e-6);
}

TEST(cli, depolarized_square_is_not_violated) {
    const double p = 0.6;
    Theory th = simulate_and_ingest("square", p);
    json r = analyze(th, std::nullopt);
    // Born arithmetic: a decoder aligned with a pure state reads (1 - p) + p/2.
    EXPECT_NEAR(r["witness"]["p_guess"].get<double>(), (1.0 - p) + p / 2.0, 1e-12);
    EXPECT_FALSE(r["witness"]["violated"].get<bool>());
    EXPECT_EQ(r["witness"]["c_lower"].get<double>(), 0.0);
    // The operational constants do not move under the injective channel.
    EXPECT_NEAR(r["witness"]["q_guess_bound"].get<double>(), (2.0 + kSqrt2) / 4.0, 1e-6);
    EXPECT_TRUE(r["invariance"]["passed"].get<bool>());
    EXPECT_LT(r["quantum"]["after_channel"]["q_guess"].get<double>(), r["quantum"]["q_guess"].get<double>());
    EXPECT_EQ(r["thresholds"]["depolarizing"]["regime"].get<std::string>(),
              noise::to_string(noise::Regime::PncOnly));
}

TEST(cli, half_depolarized_decoder_rows) {
    json j = simulate_table(preset_setup("square"), noise::ChannelSpec::depolarizing(2, 0.5), std::nullopt, 1);
    for (const auto &[meas, prep] : {std::pair{"D1", "k1x1"}, std::pair{"D2", "k2x1"}}) {
        auto row = j["probs"][meas][prep].get<std::vector<double>>();
        EXPECT_NEAR(row[0], 0.75, 1e-15);
        EXPECT_NEAR(row[1], 0.25, 1e-15);
    }
    auto row = j["probs"]["D1"]["k1x2"].get<std::vector<double>>();
    EXPECT_NEAR(row[0], 0.25, 1e-15);
}

TEST(cli, missing_completions_weaken_the_bound) {
    json full = analyze(simulate_and_ingest("square"), std::nullopt);
    json bare = analyze(simulate_and_ingest("square-bare"), std::nullopt);
    EXPECT_GT(bare["witness"]["alpha_min"].get<double>(), 1.0 + kSqrt2 / 2.0 + 1e-6);
    EXPECT_LT(bare["witness"]["c_lower"].get<double>(), full["witness"]["c_lower"].get<double>());
    EXPECT_FALSE(bare["quantum"]["table_vs_quantum"]["agree"].get<bool>());
}

TEST(cli, table_and_quantum_sides_agree_on_random_configs) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 0.9);
    for (int trial = 0; trial < 6; ++trial) {
        std::size_t n = 2 + static_cast<std::size_t>(trial % 2);
        auto cfg = testgen::centered_qubit_config(n, rng, 0.6 + 0.4 * u(rng));
        auto cf = qgames::qubit_closed_form(cfg);
        SimulationSetup s;
        GroupSpec g;
        for (std::size_t k = 0; k < n; ++k) {
            g.groups.emplace_back();
            for (std::size_t x = 0; x < 2; ++x) {
                std::string label = "k" + std::to_string(k + 1) + "x" + std::to_string(x + 1);
                s.labels.push_back(label);
                s.states.push_back(cfg.states[k][x]);
                g.groups[k].push_back(label);
            }
            std::string dec = "D" + std::to_string(k + 1);
            s.measurements.push_back({dec, {"1", "2"}});
            s.povms.push_back(qmath::bloch_measurement(qmath::bloch_vector(cfg.states[k][0])));
            g.decoders.push_back(dec);
        }
        for (std::size_t i = 0; i < cf.completions.size(); ++i) {
            s.labels.push_back("T" + std::to_string(i + 1));
            s.states.push_back(cf.completions[i]);
        }
        for (auto &m : presets::pauli_measurements()) {
            s.measurements.push_back(m);
        }
        for (auto &p : presets::pauli_povms()) {
            s.povms.push_back(p);
        }
        s.analysis = g;
        auto ch = noise::ChannelSpec::depolarizing(2, u(rng));
        json r = analyze(parse_theory(dump_json(simulate_table(s, ch, std::nullopt, 1))), std::nullopt);
        const json &tq = r["quantum"]["table_vs_quantum"];
        EXPECT_TRUE(tq["agree"].get<bool>()) << r.dump();
        EXPECT_LE(tq["alpha_diff"].get<double>(), 1e-6);
        EXPECT_LE(tq["beta_diff"].get<double>(), 1e-6 * std::max(1.0, cf.beta.value()));
        EXPECT_NEAR(r["witness"]["alpha_min"].get<double>(), cf.alpha.value(), 1e-6);
    }
}

TEST(cli, simulation_and_reports_are_deterministic) {
    auto setup = preset_setup("square");
    auto ch = noise::ChannelSpec::depolarizing(2, 0.1);
    std::string a = dump_json(simulate_table(setup, ch, 10000, 7));
    std::string b = dump_json(simulate_table(setup, ch, 10000, 7));
    std::string c = dump_json(simulate_table(setup, ch, 10000, 8));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    // Frequencies are multiples of 1/shots.
    json j = json::parse(a);
    for (const auto &[m, rows] : j["probs"].items()) {
        for (const auto &[p, row] : rows.items()) {
            for (double v : row.get<std::vector<double>>()) {
                EXPECT_NEAR(v * 10000.0, std::round(v * 10000.0), 1e-9);
            }
        }
    }
    Theory th = parse_theory(a, 0.05);
    EXPECT_EQ(dump_json(analyze(th, std::nullopt)), dump_json(analyze(parse_theory(b, 0.05), std::nullopt)));
    EXPECT_EQ(dump_json(square_json()), dump_json(square_json()));
}

TEST(cli, finite_shot_tables_analyze) {
    auto setup = preset_setup("square");
    Theory th = parse_theory(dump_json(simulate_table(setup, noise::ChannelSpec::identity(2), 2000, 3)), 0.05);
    json r = analyze(th, std::nullopt);
    // Sampled columns break the exact completion decomposition, so the hull
    // constants can only move up from their ideal values.
    EXPECT_GE(r["witness"]["alpha_min"].get<double>(), 1.0 + kSqrt2 / 2.0 - 1e-6);
    EXPECT_GT(r["witness"]["p_guess"].get<double>(), 0.95);
}

TEST(cli, ingest_validation_codes) {
    json good = square_json();
    std::string loc;

    json j = good;
    j["probs"]["D1"]["T2"] = {0.5, 0.48};
    EXPECT_EQ(validation_code(j.dump(), &loc), "row-sum");
    EXPECT_EQ(loc, "(D1, T2)");

    j = good;
    j["preparations"].push_back("T1");
    EXPECT_EQ(validation_code(j.dump(), &loc), "duplicate-label");
    EXPECT_EQ(loc, "preparation 'T1'");

    j = good;
    j["probs"]["X"].erase("k1x2");
    EXPECT_EQ(validation_code(j.dump(), &loc), "missing-row");
    EXPECT_EQ(loc, "(X, k1x2)");

    j = good;
    j["probs"]["X"]["nobody"] = {0.5, 0.5};
    EXPECT_EQ(validation_code(j.dump()), "unknown-label");

    j = good;
    j["probs"]["X"]["k1x1"] = {1.0};
    EXPECT_EQ(validation_code(j.dump()), "shape");

    j = good;
    j["probs"]["X"]["k1x1"] = {1.5, -0.5};
    EXPECT_EQ(validation_code(j.dump()), "probability-range");

    j = good;
    j["format_version"] = "2";
    EXPECT_EQ(validation_code(j.dump()), "format-version");

    j = good;
    j.erase("format_version");
    EXPECT_EQ(validation_code(j.dump()), "format-version");

    j = good;
    j["measurements"][0]["outcomes"] = {"1", "1"};
    EXPECT_EQ(validation_code(j.dump()), "duplicate-label");

    j = good;
    j["quantum"]["states"]["k1x1"] = json::array({json::array({json::array({1.0, 0.0})})});
    EXPECT_EQ(validation_code(j.dump()), "dimension");

    j = good;
    j["quantum"]["states"]["k1x1"] =
        json::array({json::array({json::array({2.0, 0.0}), json::array({0.0, 0.0})}),
                     json::array({json::array({0.0, 0.0}), json::array({0.0, 0.0})})});
    EXPECT_EQ(validation_code(j.dump()), "quantum");

    EXPECT_EQ(validation_code("{ not json"), "parse");
    EXPECT_EQ(validation_code("[]"), "schema");
    EXPECT_THROW(ingest_theory("/nonexistent/theory.json"), ValidationError);
}

TEST(cli, renormalization_within_tolerance) {
    json j = square_json();
    j["probs"]["X"]["k1x1"] = {0.5 + 4e-10, 0.5};
    Theory th = parse_theory(j.dump());
    ASSERT_EQ(th.warnings.size(), 1u);
    EXPECT_NE(th.warnings.front().find("(X, k1x1)"), std::string::npos);
    std::size_t m = th.table.meas_index("X");
    std::size_t p = th.table.prep_index("k1x1");
    EXPECT_NEAR(th.table.prob(m, 0, p) + th.table.prob(m, 1, p), 1.0, 1e-15);

    j["probs"]["X"]["k1x1"] = {0.5 + 1e-14, 0.5};
    EXPECT_TRUE(parse_theory(j.dump()).warnings.empty());

    j["probs"]["X"]["k1x1"] = {0.5 + 4e-10, 0.5};
    EXPECT_THROW(parse_theory(j.dump(), 1e-10), ValidationError);
}

TEST(cli, dump_json_writes_17_digits) {
    EXPECT_EQ(dump_json(json(0.1), -1), "0.10000000000000001");
    EXPECT_EQ(dump_json(json(1.0), -1), "1.0");
    EXPECT_EQ(dump_json(json::array({1, 2}), -1), "[1,2]");
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(json::parse(dump_json(json(v))).get<double>(), v);
    }
    // A file round trip preserves every table entry bit for bit.
    json j = square_json();
    Theory th = parse_theory(dump_json(j));
    std::size_t m = th.table.meas_index("D1");
    std::size_t p = th.table.prep_index("T1");
    EXPECT_EQ(th.table.prob(m, 0, p), j["probs"]["D1"]["T1"][0].get<double>());
}

TEST(cli, group_spec_parsing) {
    GroupSpec g = parse_groups("D1=k1x1,k1x2;D2=k2x1,k2x2");
    ASSERT_EQ(g.groups.size(), 2u);
    EXPECT_EQ(g.groups[1][0], "k2x1");
    EXPECT_EQ(g.decoders[1], "D2");
    EXPECT_EQ(format_groups(g), "D1=k1x1,k1x2;D2=k2x1,k2x2");
    EXPECT_THROW(parse_groups(""), ValidationError);
    EXPECT_THROW(parse_groups("D1"), ValidationError);
    EXPECT_THROW(parse_groups("D1=a,,b"), ValidationError);

    Theory th = simulate_and_ingest("square");
    json r = analyze(th, parse_groups("D2=k2x1,k2x2;D1=k1x1,k1x2"));
    EXPECT_NEAR(r["witness"]["c_lower"].get<double>(), (2.0 - kSqrt2) / 8.0, 1e-6);
    EXPECT_THROW(analyze(th, parse_groups("D1=k1x1")), ContractError);
    EXPECT_THROW(analyze(th, parse_groups("D1=k1x1,zz;D2=k2x1,k2x2")), ValidationError);
    EXPECT_THROW(analyze(th, parse_groups("X=k1x1,k1x2;Q=k2x1,k2x2")), ContractError);
}

TEST(cli, matrix_and_channel_json) {
    std::mt19937_64 rng(4);
    auto rho = testgen::random_mixed(3, rng);
    auto back = matrix_from_json(matrix_to_json(rho.matrix()), "m");
    EXPECT_EQ(qmath::max_abs_diff(back, rho.matrix()), 0.0);
    EXPECT_THROW(matrix_from_json(json::array({json::array({1.0, 2.0})}), "m"), ValidationError);

    auto dep = channel_from_json(channel_to_json(noise::ChannelSpec::depolarizing(3, 0.25)));
    EXPECT_TRUE(dep.is_depolarizing());
    EXPECT_EQ(dep.depolarizing_p(), 0.25);
    EXPECT_EQ(channel_to_json(noise::ChannelSpec::identity(2))["kind"], "identity");

    // Amplitude damping survives a Kraus round trip.
    const double g = 0.3;
    qmath::ComplexMatrix k0(2, 2, {1.0, 0.0, 0.0, std::sqrt(1.0 - g)});
    qmath::ComplexMatrix k1(2, 2, {0.0, std::sqrt(g), 0.0, 0.0});
    auto ad = noise::ChannelSpec::kraus({k0, k1});
    auto ad2 = channel_from_json(channel_to_json(ad));
    auto q = testgen::random_mixed(2, rng);
    EXPECT_EQ(qmath::max_abs_diff(ad.apply(q.matrix()), ad2.apply(q.matrix())), 0.0);
    EXPECT_THROW(channel_from_json(json{{"kind", "kraus"}, {"ops", json::array({matrix_to_json(k0)})}}),
                 ValidationError);
    EXPECT_THROW(channel_from_json(json{{"kind", "teleport"}}), ValidationError);

    EXPECT_TRUE(channel_from_string("depolarizing:0.3", 2).is_depolarizing());
    EXPECT_THROW(channel_from_string("depolarizing:x", 2), ValidationError);
    EXPECT_THROW(channel_from_string("depolarizing:0.3junk", 2), ValidationError);
    EXPECT_THROW(channel_from_string("bitflip", 2), ValidationError);
}

TEST(cli, simulate_rejects_dimension_mismatch) {
    auto setup = preset_setup("square");
    EXPECT_THROW(simulate_table(setup, noise::ChannelSpec::identity(3), std::nullopt, 1), ValidationError);
    EXPECT_THROW(simulate_table(setup, noise::ChannelSpec::identity(2), 0, 1), ValidationError);
    EXPECT_THROW(preset_setup("octagon"), ValidationError);
    // A setup file is a theory file without probs.
    json j = square_json();
    j.erase("probs");
    SimulationSetup s = setup_from_json(j);
    EXPECT_EQ(s.labels, setup.labels);
    EXPECT_EQ(dump_json(simulate_table(s, noise::ChannelSpec::identity(2), std::nullopt, 1)),
              dump_json(square_json()));
}

TEST(cli, sha256_known_vector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(cli, other_verbs) {
    json th = thresholds_report(2, 0.3, 2000, 5);
    EXPECT_EQ(th["depol_contextual_below"].get<double>(), 0.5);
    EXPECT_NEAR(th["depol_eb_at"].get<double>(), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(th["fidelity_threshold"].get<double>(), 0.75);
    EXPECT_NEAR(th["average_gate_fidelity"].get<double>(), 1.0 - 0.3 / 2.0, 1e-12);
    EXPECT_NEAR(th["average_gate_fidelity_mc"]["mean"].get<double>(), 0.85, 1e-9);

    json h = haar_verify(2, 20000, 3);
    EXPECT_NEAR(h["exact"].get<double>(), 0.75, 1e-15);
    EXPECT_TRUE(h["within_3_std_err"].get<bool>());

    KsAuditOptions ko;
    ko.pairs = 20;
    ko.mc_samples = 2000;
    json ks = ks_audit(ko);
    EXPECT_TRUE(ks["born"]["passed"].get<bool>());
    EXPECT_TRUE(ks["half_cap"]["passed"].get<bool>());
    EXPECT_TRUE(ks["theorem2"]["passed"].get<bool>());
    for (const auto &e : ks["noisy_model"]) {
        EXPECT_TRUE(e["passed"].get<bool>());
    }
    EXPECT_LT(ks["kkh_bound"]["bound"].get<double>(), 1.0);
}

TEST(cli, exit_codes) {
    TempFile good("good.json", dump_json(square_json()));
    json bad = square_json();
    bad["probs"]["D1"]["T2"] = {0.5, 0.48};
    TempFile rowsum("rowsum.json", bad.dump());
    EXPECT_EQ(run_quiet({"contextcalc", "analyze", good.path.string()}), 0);
    EXPECT_EQ(run_quiet({"contextcalc", "ingest-check", good.path.string()}), 0);
    EXPECT_EQ(run_quiet({"contextcalc", "ingest-check", rowsum.path.string()}), 2);
    EXPECT_EQ(run_quiet({"contextcalc", "analyze", rowsum.path.string()}), 2);
    EXPECT_EQ(run_quiet({"contextcalc", "analyze", good.path.string(), "--groups", "D1=k1x1"}), 2);
    EXPECT_EQ(run_quiet({"contextcalc", "frobnicate"}), 2);
    EXPECT_EQ(run_quiet({"contextcalc"}), 2);
    EXPECT_EQ(run_quiet({"contextcalc", "thresholds", "--p", "0.2"}), 0);

    // Repeated CLI runs write byte-identical reports.
    auto out1 = std::filesystem::temp_directory_path() / "contextcalc_cli_test_r1.json";
    auto out2 = std::filesystem::temp_directory_path() / "contextcalc_cli_test_r2.json";
    EXPECT_EQ(run_quiet({"contextcalc", "analyze", good.path.string(), "-o", out1.string()}), 0);
    EXPECT_EQ(run_quiet({"contextcalc", "analyze", good.path.string(), "-o", out2.string()}), 0);
    std::ifstream f1(out1), f2(out2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    EXPECT_FALSE(s1.str().empty());
    EXPECT_EQ(s1.str(), s2.str());
    std::filesystem::remove(out1);
    std::filesystem::remove(out2);
}
