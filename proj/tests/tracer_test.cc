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

#include "dgr/tracer.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "dgr/sampler.h"
#include "dgr/surfgen.h"

namespace dgr {
namespace {

DecodingGraph test_graph() {
    SurfaceCodeSpec spec;
    spec.distance = 3;
    spec.p = 0.02;
    spec.y_bias = 10;
    static DetectorErrorModel m = generate_surface_pheno(spec);
    return build_decoding_graph(m);
}

Matching make_matching(std::vector<uint32_t> edges) {
    Matching m;
    m.edges = std::move(edges);
    return m;
}

TEST(TraceStore, RecordCounts) {
    DecodingGraph g = test_graph();
    TraceStore store(g);
    store.record(make_matching({}));
    EXPECT_EQ(store.trials(), 1u);
    for (uint64_t c : store.edge_counts()) EXPECT_EQ(c, 0u);

    ASSERT_FALSE(g.candidate_pairs.empty());
    auto [e1, e2] = g.candidate_pairs.front();
    for (int i = 0; i < 10; ++i) store.record(make_matching({e1, e2}));
    EXPECT_EQ(store.trials(), 11u);
    EXPECT_EQ(store.edge_counts()[e1], 10u);
    EXPECT_EQ(store.edge_counts()[e2], 10u);
    EXPECT_EQ(store.pair_counts().at({e1, e2}), 10u);
}

TEST(TraceStore, NonCandidatePairsNotTracked) {
    DecodingGraph g = test_graph();
    // Find an edge pair outside the candidate set.
    std::set<PairKey> candidates(g.candidate_pairs.begin(), g.candidate_pairs.end());
    PairKey outside{0, 0};
    bool found = false;
    for (uint32_t a = 0; a < g.edges.size() && !found; ++a) {
        for (uint32_t b = a + 1; b < g.edges.size() && !found; ++b) {
            if (!candidates.count({a, b})) {
                outside = {a, b};
                found = true;
            }
        }
    }
    ASSERT_TRUE(found);
    TraceStore store(g);
    store.record(make_matching({outside.first, outside.second}));
    EXPECT_EQ(store.pair_counts().count(outside), 0u);
    EXPECT_EQ(store.edge_counts()[outside.first], 1u);

    TraceStore full(g, /*full_pairs=*/true);
    full.record(make_matching({outside.first, outside.second}));
    EXPECT_EQ(full.pair_counts().at(outside), 1u);
}

TEST(TraceStore, EstimatesAndFloor) {
    DecodingGraph g = test_graph();
    TraceStore store(g);
    for (int i = 0; i < 250; ++i) store.record(make_matching({0}));
    for (int i = 0; i < 750; ++i) store.record(make_matching({}));
    EdgeProbs probs = store.estimate_edge_probs();
    EXPECT_DOUBLE_EQ(probs[0], 0.25);
    EXPECT_DOUBLE_EQ(probs[1], 0.0005);  // zero-count floor 1/(2*1000)
    PairProbs pairs = store.estimate_pair_probs();
    EXPECT_TRUE(pairs.empty());
}

TEST(TraceStore, PairEstimateRatio) {
    DecodingGraph g = test_graph();
    ASSERT_FALSE(g.candidate_pairs.empty());
    auto [e1, e2] = g.candidate_pairs.front();
    TraceStore store(g);
    for (int i = 0; i < 30; ++i) store.record(make_matching({e1, e2}));
    for (int i = 0; i < 970; ++i) store.record(make_matching({}));
    EXPECT_DOUBLE_EQ(store.estimate_pair_probs().at({e1, e2}), 0.03);
}

TEST(TraceStore, ErrorsWithoutTrials) {
    DecodingGraph g = test_graph();
    TraceStore store(g);
    EXPECT_THROW(store.estimate_edge_probs(), std::runtime_error);
    EXPECT_THROW(store.estimate_pair_probs(), std::runtime_error);
}

TEST(TraceStore, MergeIsCommutativeAndMatchesSerial) {
    DecodingGraph g = test_graph();
    Decoder dec(g);
    SurfaceCodeSpec spec;
    spec.distance = 3;
    spec.p = 0.02;
    spec.y_bias = 10;
    DetectorErrorModel m = generate_surface_pheno(spec);
    Sampler sampler(m);

    TraceStore serial(g), half_a(g), half_b(g);
    const uint64_t t = 400;
    for (uint64_t i = 0; i < 2 * t; ++i) {
        Matching match = dec.decode(sampler.sample(3, i).flipped);
        serial.record(match);
        (i < t ? half_a : half_b).record(match);
    }
    TraceStore ab = half_a;
    ab.merge(half_b);
    TraceStore ba = half_b;
    ba.merge(half_a);
    EXPECT_EQ(ab.trials(), serial.trials());
    EXPECT_EQ(ab.edge_counts(), serial.edge_counts());
    EXPECT_EQ(ab.pair_counts(), serial.pair_counts());
    EXPECT_EQ(ba.edge_counts(), serial.edge_counts());
    EXPECT_EQ(ba.pair_counts(), serial.pair_counts());

    // Merge with an empty store is the identity.
    TraceStore empty(g);
    TraceStore copy = serial;
    copy.merge(empty);
    EXPECT_EQ(copy.edge_counts(), serial.edge_counts());
    EXPECT_EQ(copy.trials(), serial.trials());
}

TEST(TraceStore, MergeRejectsMismatchedStores) {
    DecodingGraph g = test_graph();
    TraceStore a(g), b(g, true);
    EXPECT_THROW(a.merge(b), std::invalid_argument);
}

TEST(TraceStore, WindowKeepsRecentTrials) {
    DecodingGraph g = test_graph();
    TraceStore store(g, false, 100);
    for (int i = 0; i < 100; ++i) store.record(make_matching({0}));
    for (int i = 0; i < 100; ++i) store.record(make_matching({1}));
    EXPECT_EQ(store.trials(), 100u);
    EXPECT_EQ(store.total_recorded(), 200u);
    EXPECT_EQ(store.edge_counts()[0], 0u);
    EXPECT_EQ(store.edge_counts()[1], 100u);
}

TEST(TraceStore, SyntheticPairProbabilityConsistent) {
    // Y-biased model: Y firings produce correlated edge pairs. With oracle
    // weights the matched pair frequency should approximate corr_truth.
    SurfaceCodeSpec spec;
    spec.distance = 3;
    spec.rounds = 1;
    spec.p = 0.04;
    spec.y_bias = 30;
    DetectorErrorModel m = generate_surface_pheno(spec);
    DecodingGraph g = build_decoding_graph(m);
    Decoder dec(g);
    Sampler sampler(m);
    TraceStore store(g);
    const uint64_t t = 200000;
    for (uint64_t i = 0; i < t; ++i) store.record(dec.decode(sampler.sample(10, i).flipped));
    PairProbs pairs = store.estimate_pair_probs();

    // Pick the strongest ground-truth pair and compare within 5 sigma plus
    // a tolerance for decoder mis-attribution.
    auto best = std::max_element(g.corr_truth.begin(), g.corr_truth.end(),
                                 [](const auto &a, const auto &b) { return a.second < b.second; });
    ASSERT_NE(best, g.corr_truth.end());
    double p_true = best->second;
    double p_est = pairs.count(best->first) ? pairs.at(best->first) : 0.0;
    double sigma = std::sqrt(p_true * (1 - p_true) / static_cast<double>(t));
    EXPECT_NEAR(p_est, p_true, 5 * sigma + 0.3 * p_true);
}

TEST(TraceStore, CsvExports) {
    DecodingGraph g = test_graph();
    TraceStore store(g);
    ASSERT_FALSE(g.candidate_pairs.empty());
    auto [e1, e2] = g.candidate_pairs.front();
    store.record(make_matching({e1, e2}));
    std::ostringstream edges_csv, pairs_csv, heat_csv;
    store.write_edge_counts_csv(edges_csv);
    store.write_pair_counts_csv(pairs_csv);
    store.write_heatmap_csv(heat_csv);
    EXPECT_NE(edges_csv.str().find("edge_id,count"), std::string::npos);
    EXPECT_NE(pairs_csv.str().find(std::to_string(e1) + "," + std::to_string(e2) + ",1"),
              std::string::npos);
    EXPECT_NE(heat_csv.str().find("estimated,truth"), std::string::npos);
}

}  // namespace
}  // namespace dgr
