// Copyright 2026 DGR Contributors
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

#include "dgr/harness.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"

namespace dgr {
namespace {

TEST(Wilson, FrozenValuesAndBounds) {
    WilsonInterval w = wilson_interval(5, 100);
    EXPECT_NEAR(w.lower, 0.021543, 1e-4);
    EXPECT_NEAR(w.upper, 0.111753, 1e-4);

    WilsonInterval zero = wilson_interval(0, 1000);
    EXPECT_DOUBLE_EQ(zero.lower, 0.0);
    EXPECT_GT(zero.upper, 0.0);
    WilsonInterval all = wilson_interval(1000, 1000);
    EXPECT_DOUBLE_EQ(all.upper, 1.0);
    EXPECT_LT(all.lower, 1.0);

    // The point estimate lies inside the interval.
    for (uint64_t k : {1u, 17u, 50u, 99u}) {
        WilsonInterval ci = wilson_interval(k, 100);
        double phat = k / 100.0;
        EXPECT_LT(ci.lower, phat);
        EXPECT_GT(ci.upper, phat);
    }
    EXPECT_THROW(wilson_interval(0, 0), std::invalid_argument);
}

TEST(Config, ParseAllSections) {
    std::string text =
        "# comment\n"
        "[code]\n"
        "distance = 5\n"
        "rounds = 7\n"
        "p = 0.02\n"
        "p_meas = 0.015\n"
        "y_bias = 2.5\n"
        "[mismatch]\n"
        "kind = random\n"
        "strength = 10\n"
        "seed = 42\n"
        "[shots]\n"
        "trace = 5000\n"
        "eval = 2500\n"
        "[policy]\n"
        "window = 100\n"
        "min_trials = 50\n"
        "align_iters = 2\n"
        "mode = heuristic\n"
        "tau = 6\n"
        "epsilon = 0.001\n"
        "scale = 0.5\n"
        "[train]\n"
        "lr = 0.002\n"
        "weight_decay = 0.0005\n"
        "batch = 64\n"
        "epochs = 3\n"
        "dataset = 500\n"
        "spsa_q = 4\n"
        "spsa_sigma = 0.05\n"
        "hidden = 32\n"
        "[run]\n"
        "seed = 9\n"
        "arms = oracle, mismatched, aligned+heuristic\n";
    ExperimentConfig cfg = parse_config(text);
    EXPECT_EQ(cfg.code.distance, 5);
    EXPECT_EQ(cfg.code.rounds, 7);
    EXPECT_DOUBLE_EQ(cfg.code.p, 0.02);
    EXPECT_DOUBLE_EQ(cfg.code.p_meas, 0.015);
    EXPECT_DOUBLE_EQ(cfg.code.y_bias, 2.5);
    EXPECT_EQ(cfg.mismatch.kind, MismatchKind::kRandom);
    EXPECT_DOUBLE_EQ(cfg.mismatch.strength, 10);
    EXPECT_EQ(cfg.mismatch.seed, 42u);
    EXPECT_EQ(cfg.t_trace, 5000u);
    EXPECT_EQ(cfg.t_eval, 2500u);
    EXPECT_EQ(cfg.policy.window, 100u);
    EXPECT_EQ(cfg.policy.min_trials, 50u);
    EXPECT_EQ(cfg.policy.align_iters, 2u);
    EXPECT_EQ(cfg.policy.mode, CorrMode::kHeuristic);
    EXPECT_EQ(cfg.policy.tau, 6u);
    EXPECT_DOUBLE_EQ(cfg.policy.epsilon, 0.001);
    EXPECT_DOUBLE_EQ(cfg.policy.scale, 0.5);
    EXPECT_DOUBLE_EQ(cfg.train.learning_rate, 0.002);
    EXPECT_DOUBLE_EQ(cfg.train.weight_decay, 0.0005);
    EXPECT_EQ(cfg.train.batch_size, 64u);
    EXPECT_EQ(cfg.train.epochs, 3u);
    EXPECT_EQ(cfg.train_dataset, 500u);
    EXPECT_EQ(cfg.train.spsa_q, 4u);
    EXPECT_DOUBLE_EQ(cfg.train.spsa_sigma, 0.05);
    EXPECT_EQ(cfg.train.hidden, 32u);
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.arms, (std::vector<std::string>{"oracle", "mismatched", "aligned+heuristic"}));

    // Canonical form is a serialization fixed point.
    std::string canon = serialize_config(cfg);
    EXPECT_EQ(serialize_config(parse_config(canon)), canon);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config("[code]\nnope = 1\narms = oracle\n"), ConfigError);
    EXPECT_THROW(parse_config("[code]\ndistance = abc\n"), ConfigError);
    EXPECT_THROW(parse_config("[shots]\ntrace = -3\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\narms = oracle, bogus\n"), ConfigError);
    EXPECT_THROW(parse_config("[run\nseed = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\nseed 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[run]\narms =\n"), ConfigError);
    EXPECT_THROW(parse_config("[shots]\neval = 0\n[run]\narms = oracle\n"), ConfigError);
    EXPECT_THROW(parse_config("[code]\ndem = /nonexistent/file.dem\n[run]\narms = oracle\n"), ConfigError);
    EXPECT_THROW(read_config_file("/nonexistent/config.ini"), ConfigError);

    ExperimentConfig cfg;
    EXPECT_THROW(apply_config_value(cfg, "policy", "mode", "sideways"), ConfigError);
    apply_config_value(cfg, "policy", "mode", "nn");
    EXPECT_EQ(cfg.policy.mode, CorrMode::kNn);
}

TEST(EstimateLer, MatchesAnalyticRate) {
    // Edge (0,1) carries L0 but gets weight 10, so the decoder always ejects
    // both detectors to the boundary and errs exactly when (0,1) fired.
    DetectorErrorModel m = parse_dem(
        "dem v1 detectors 2 observables 1\n"
        "error(0.1) D0 D1 L0\nerror(0.01) D0\nerror(0.01) D1\n");
    DecodingGraph g = build_decoding_graph(m);
    std::vector<double> w(3, 1.0);
    w[g.find_edge(0, 1)] = 10.0;
    Decoder dec(g, w);
    Sampler sampler(m);

    const uint64_t shots = 20000;
    LerResult r = estimate_ler(sampler, dec, shots, 7);
    EXPECT_EQ(r.shots, shots);
    EXPECT_DOUBLE_EQ(r.ler, static_cast<double>(r.errors) / shots);
    double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(shots));
    EXPECT_NEAR(r.ler, 0.1, 5 * sigma);
    WilsonInterval ci = wilson_interval(r.errors, shots);
    EXPECT_DOUBLE_EQ(r.ci.lower, ci.lower);
    EXPECT_DOUBLE_EQ(r.ci.upper, ci.upper);

    EXPECT_THROW(estimate_ler(sampler, dec, 0, 7), std::invalid_argument);
}

TEST(CalibrateTau, RateClosestToTarget) {
    SurfaceCodeSpec spec;
    spec.distance = 3;
    spec.p = 0.01;
    DetectorErrorModel m = generate_surface_pheno(spec);
    Sampler sampler(m);
    const uint64_t shots = 5000;
    const uint64_t seed = 77;
    uint32_t tau = calibrate_tau(sampler, shots, seed);
    ASSERT_GE(tau, 1u);

    auto rate_of = [&](uint32_t t) {
        uint64_t hits = 0;
        for (uint64_t i = 0; i < shots; ++i) {
            if (sampler.sample(seed, i).flipped.size() >= t) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(shots);
    };
    double best_gap = std::abs(rate_of(tau) - 0.15);
    for (uint32_t t = 1; t <= 12; ++t) {
        EXPECT_LE(best_gap, std::abs(rate_of(t) - 0.15) + 1e-12) << "tau=" << t;
    }
}

TEST(TruthEdges, XorReducesFiredComponents) {
    DetectorErrorModel m = parse_dem(
        "dem v1 detectors 3 observables 0\n"
        "error(0.999999) D0 ^ D1 D2\nerror(0.999999) D0\n");
    DecodingGraph g = build_decoding_graph(m);
    Sampler sampler(m);
    int seen = 0;
    for (uint64_t i = 0; i < 100; ++i) {
        Shot shot = sampler.sample(3, i, /*keep_fired=*/true);
        if (shot.fired.size() != 2) continue;
        ++seen;
        // D0-boundary fired twice and cancels; only (1,2) survives.
        std::vector<uint32_t> expect = {static_cast<uint32_t>(g.find_edge(1, 2))};
        EXPECT_EQ(truth_edges_from_fired(g, m, shot), expect);
    }
    EXPECT_GT(seen, 95);
}

TEST(TrainingSet, HonorsMinSyndromesAndCount) {
    SurfaceCodeSpec spec;
    spec.distance = 3;
    spec.p = 0.03;
    DetectorErrorModel m = generate_surface_pheno(spec);
    DecodingGraph g = build_decoding_graph(m);
    Sampler sampler(m);
    auto set_a = build_training_set(sampler, g, m, 50, 3, 11);
    auto set_b = build_training_set(sampler, g, m, 50, 3, 11);
    ASSERT_EQ(set_a.size(), 50u);
    for (const TrainSample &s : set_a) {
        EXPECT_GE(s.flipped.size(), 3u);
        EXPECT_TRUE(std::is_sorted(s.truth_edges.begin(), s.truth_edges.end()));
    }
    for (size_t i = 0; i < set_a.size(); ++i) {
        EXPECT_EQ(set_a[i].flipped, set_b[i].flipped);
        EXPECT_EQ(set_a[i].truth_edges, set_b[i].truth_edges);
    }

    // A one-detector model can never reach two simultaneous syndromes.
    DetectorErrorModel mq = parse_dem("dem v1 detectors 1 observables 0\nerror(0.1) D0\n");
    Sampler sq(mq);
    EXPECT_THROW(build_training_set(sq, build_decoding_graph(mq), mq, 1, 2, 0), std::runtime_error);
}

TEST(Crossing, LogLogInterpolation) {
    // Exact grid point.
    EXPECT_DOUBLE_EQ(interpolate_crossing({0.01, 0.02, 0.04}, {0.5, 1.0, 2.0}), 0.02);
    // Symmetric log ratios cross at the geometric mean.
    EXPECT_NEAR(interpolate_crossing({0.01, 0.02}, {0.25, 4.0}), std::sqrt(0.01 * 0.02), 1e-12);
    EXPECT_THROW(interpolate_crossing({0.01, 0.02}, {2.0, 4.0}), std::runtime_error);
    EXPECT_THROW(interpolate_crossing({0.01}, {1.0}), std::invalid_argument);
    EXPECT_THROW(interpolate_crossing({0.01, 0.02}, {1.0}), std::invalid_argument);
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.code.distance = 3;
    cfg.code.p = 0.02;
    cfg.t_trace = 20000;
    cfg.t_eval = 20000;
    cfg.seed = 5;
    return cfg;
}

TEST(RunExperiment, IdentityMismatchMakesArmsAgree) {
    ExperimentConfig cfg = small_config();
    cfg.mismatch.kind = MismatchKind::kNone;
    cfg.arms = {"oracle", "mismatched"};
    MetricsReport rep = run_experiment(cfg);
    ASSERT_EQ(rep.arms.size(), 2u);
    EXPECT_EQ(rep.arms[0].errors, rep.arms[1].errors);
    EXPECT_DOUBLE_EQ(rep.arms[0].ler, rep.arms[1].ler);
}

TEST(RunExperiment, AlignmentRecoversMismatchedLoss) {
    ExperimentConfig cfg = small_config();
    cfg.mismatch.kind = MismatchKind::kRandom;
    cfg.mismatch.strength = 8;
    cfg.mismatch.seed = 3;
    cfg.arms = {"oracle", "mismatched", "aligned"};
    MetricsReport rep = run_experiment(cfg);
    ASSERT_EQ(rep.arms.size(), 3u);
    double oracle = rep.arms[0].ler, mism = rep.arms[1].ler, aligned = rep.arms[2].ler;
    EXPECT_GT(mism, 1.05 * oracle);
    EXPECT_LT(aligned, 0.95 * mism);
    EXPECT_EQ(rep.arms[2].trace_trials, cfg.t_trace);
    EXPECT_EQ(rep.arms[0].trace_trials, 0u);

    // Byte-identical reruns.
    MetricsReport again = run_experiment(cfg);
    std::ostringstream a, b;
    write_metrics_csv(rep, a);
    write_metrics_csv(again, b);
    EXPECT_EQ(a.str(), b.str());
}

TEST(RunExperiment, ConfigGuards) {
    ExperimentConfig cfg = small_config();
    cfg.arms = {"aligned"};
    cfg.t_trace = 5;
    cfg.policy.min_trials = 10;
    EXPECT_THROW(run_experiment(cfg), ConfigError);

    cfg = small_config();
    cfg.arms = {"bogus"};
    EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(RunExperiment, AutoTauAndHeuristicArm) {
    ExperimentConfig cfg = small_config();
    cfg.t_trace = 10000;
    cfg.t_eval = 5000;
    cfg.mismatch.kind = MismatchKind::kRandom;
    cfg.mismatch.strength = 6;
    cfg.policy.mode = CorrMode::kHeuristic;
    cfg.policy.tau = 0;  // auto-calibrate
    cfg.arms = {"aligned", "aligned+heuristic"};
    RunArtifacts artifacts;
    MetricsReport rep = run_experiment(cfg, &artifacts);
    EXPECT_GE(rep.tau, 1u);
    ASSERT_EQ(rep.arms.size(), 2u);
    EXPECT_DOUBLE_EQ(rep.arms[0].trigger_rate, 0.0);
    EXPECT_GT(rep.arms[1].trigger_rate, 0.02);
    EXPECT_LT(rep.arms[1].trigger_rate, 0.5);
    EXPECT_NE(artifacts.heatmap_csv.find("estimated,truth"), std::string::npos);
}

TEST(Reports, CsvAndJsonShape) {
    ExperimentConfig cfg = small_config();
    cfg.t_trace = 2000;
    cfg.t_eval = 2000;
    cfg.arms = {"oracle"};
    MetricsReport rep = run_experiment(cfg);
    std::ostringstream csv, json;
    write_metrics_csv(rep, csv);
    write_report_json(rep, cfg, json);
    EXPECT_NE(csv.str().find("arm,shots,errors,ler,ci_lower,ci_upper,trigger_rate,trace_trials"),
              std::string::npos);
    EXPECT_NE(csv.str().find("oracle,2000,"), std::string::npos);

    auto j = nlohmann::json::parse(json.str());
    EXPECT_EQ(j["seed"], 5);
    EXPECT_EQ(j["config_hash"], rep.config_hash);
    EXPECT_NE(rep.config_hash, 0u);
    ASSERT_EQ(j["arms"].size(), 1u);
    EXPECT_EQ(j["arms"][0]["name"], "oracle");
    EXPECT_EQ(j["arms"][0]["shots"], 2000);
    EXPECT_EQ(parse_config(j["config"].get<std::string>()).t_eval, 2000u);
}

TEST(Sweep, AxisHandlingAndCsv) {
    ExperimentConfig cfg = small_config();
    cfg.t_eval = 2000;
    cfg.arms = {"oracle"};
    auto rows = sweep(cfg, "p", {0.005, 0.02});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_DOUBLE_EQ(rows[0].first, 0.005);
    EXPECT_LT(rows[0].second.arms[0].ler, rows[1].second.arms[0].ler);
    std::ostringstream csv;
    write_sweep_csv("p", rows, csv);
    EXPECT_NE(csv.str().find("p,arm,shots,errors"), std::string::npos);
    EXPECT_THROW(sweep(cfg, "bogus", {1.0}), ConfigError);
    EXPECT_THROW(sweep(cfg, "p", {}), ConfigError);
}

TEST(Threshold, OracleCrossingInRange) {
    ExperimentConfig cfg = small_config();
    cfg.t_eval = 4000;
    cfg.arms = {"oracle"};
    ThresholdEstimate est = estimate_threshold(cfg, {3, 5}, {0.005, 0.02, 0.06});
    ASSERT_TRUE(est.crossing.count("oracle"));
    EXPECT_GT(est.crossing["oracle"], 0.005);
    EXPECT_LT(est.crossing["oracle"], 0.06);

    EXPECT_THROW(estimate_threshold(cfg, {3}, {0.005, 0.02, 0.06}), ConfigError);
    EXPECT_THROW(estimate_threshold(cfg, {3, 5}, {0.01, 0.02}), ConfigError);
}

}  // namespace
}  // namespace dgr
