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

#include "dgr/reweight.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "dgr/sampler.h"
#include "dgr/surfgen.h"

namespace dgr {
namespace {

DetectorErrorModel line_model(const std::vector<double> &probs) {
    std::ostringstream text;
    size_t n = probs.size() - 1;
    text << "dem v1 detectors " << n << " observables 0\n";
    text << "error(" << probs[0] << ") D0\n";
    for (size_t i = 1; i < n; ++i) {
        text << "error(" << probs[i] << ") D" << (i - 1) << " D" << i << "\n";
    }
    text << "error(" << probs[n] << ") D" << (n - 1) << "\n";
    return parse_dem(text.str());
}

TEST(AlignmentReweight, KnownValuesAndClamp) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1}));
    ASSERT_EQ(g.edges.size(), 3u);
    std::vector<double> w = alignment_reweight(g, {0.25, 0.5, 0.6});
    EXPECT_NEAR(w[0], std::log(3.0), 1e-12);  // -ln(0.25/0.75)
    EXPECT_DOUBLE_EQ(w[1], 0.0);
    EXPECT_DOUBLE_EQ(w[2], 0.0);  // clamped to 0.5
}

TEST(AlignmentReweight, PerfectEstimatesReproduceModelWeights) {
    SurfaceCodeSpec spec;
    spec.distance = 3;
    spec.p = 0.01;
    DecodingGraph g = build_decoding_graph(generate_surface_pheno(spec));
    EdgeProbs probs(g.edges.size());
    for (const Edge &e : g.edges) probs[e.id] = e.probability;
    std::vector<double> w = alignment_reweight(g, probs);
    for (const Edge &e : g.edges) EXPECT_DOUBLE_EQ(w[e.id], e.weight);
}

TEST(AlignmentReweight, MonotoneInProbability) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1}));
    std::vector<double> w = alignment_reweight(g, {0.01, 0.1, 0.3});
    EXPECT_GT(w[0], w[1]);
    EXPECT_GT(w[1], w[2]);
}

TEST(AlignmentReweight, RejectsBadInput) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1}));
    EXPECT_THROW(alignment_reweight(g, {0.1, 0.1}), std::invalid_argument);
    EXPECT_THROW(alignment_reweight(g, {0.1, 0.0, 0.1}), std::invalid_argument);
    EXPECT_THROW(alignment_reweight(g, {0.1, -0.2, 0.1}), std::invalid_argument);
}

TEST(HeuristicCorr, HandComputedCorrection) {
    // Edges 0..3 on a 3-detector line; condition edge 0 is matched, edge 2 is
    // not. Target edge 1 with base weight 5 gets 5 - 0.2 + 0.1 = 4.9.
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1, 0.1}));
    ASSERT_EQ(g.edges.size(), 4u);
    std::vector<double> base = {1.0, 5.0, 1.0, 1.0};
    Matching m0;
    m0.edges = {0};
    PairProbs pairs;
    pairs[{0, 1}] = 0.02;  // p/p(0) = 0.02/0.1 = 0.2
    pairs[{1, 2}] = 0.01;  // p/p(2) = 0.01/0.1 = 0.1
    EdgeProbs probs = {0.1, 0.1, 0.1, 0.1};
    std::vector<double> w = heuristic_corr_reweight(g, base, m0, pairs, probs, 0.0);
    EXPECT_NEAR(w[1], 4.9, 1e-12);
    // Reverse directions: edge 0 conditioned by unmatched edge 1 (+0.2),
    // edge 2 conditioned by unmatched edge 1 (+0.1).
    EXPECT_NEAR(w[0], 1.2, 1e-12);
    EXPECT_NEAR(w[2], 1.1, 1e-12);
    EXPECT_DOUBLE_EQ(w[3], 1.0);
}

TEST(HeuristicCorr, EpsilonSkipsWeakConditioners) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1, 0.1}));
    std::vector<double> base = {1.0, 5.0, 1.0, 1.0};
    Matching m0;
    m0.edges = {0};
    PairProbs pairs;
    pairs[{0, 1}] = 0.02;
    EdgeProbs probs = {0.001, 0.1, 0.1, 0.1};
    // p(0) = 0.001 < epsilon: edge 0 cannot condition edge 1, but edge 1
    // (p = 0.1 >= epsilon) still conditions edge 0.
    std::vector<double> w = heuristic_corr_reweight(g, base, m0, pairs, probs, 0.01);
    EXPECT_DOUBLE_EQ(w[1], 5.0);
    EXPECT_NEAR(w[0], 1.2, 1e-12);
}

TEST(HeuristicCorr, FlooredAtZero) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1, 0.1}));
    std::vector<double> base = {1.0, 0.05, 1.0, 1.0};
    Matching m0;
    m0.edges = {0};
    PairProbs pairs;
    pairs[{0, 1}] = 0.02;
    EdgeProbs probs = {0.1, 0.1, 0.1, 0.1};
    std::vector<double> w = heuristic_corr_reweight(g, base, m0, pairs, probs, 0.0);
    EXPECT_DOUBLE_EQ(w[1], 0.0);  // 0.05 - 0.2 floors at 0
}

TEST(HeuristicCorr, ScaleKnob) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1, 0.1}));
    std::vector<double> base = {1.0, 5.0, 1.0, 1.0};
    Matching m0;
    m0.edges = {0};
    PairProbs pairs;
    pairs[{0, 1}] = 0.02;
    EdgeProbs probs = {0.1, 0.1, 0.1, 0.1};
    std::vector<double> w = heuristic_corr_reweight(g, base, m0, pairs, probs, 0.0, 2.0);
    EXPECT_NEAR(w[1], 5.0 - 0.4, 1e-12);
}

TEST(HeuristicCorr, RejectsSizeMismatch) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1, 0.1}));
    Matching m0;
    EXPECT_THROW(heuristic_corr_reweight(g, {1.0}, m0, {}, {0.1, 0.1, 0.1, 0.1}, 0.0),
                 std::invalid_argument);
    EXPECT_THROW(heuristic_corr_reweight(g, {1, 1, 1, 1}, m0, {}, {0.1}, 0.0), std::invalid_argument);
}

TEST(DifficultyTrigger, ThresholdSemantics) {
    EXPECT_TRUE(difficulty_trigger({}, 0));
    EXPECT_TRUE(difficulty_trigger({1, 2}, 2));
    EXPECT_FALSE(difficulty_trigger({1, 2}, 3));
}

TEST(TwoPass, OffModeReturnsFirstPass) {
    SurfaceCodeSpec spec;
    spec.distance = 3;
    spec.p = 0.03;
    DetectorErrorModel m = generate_surface_pheno(spec);
    DecodingGraph g = build_decoding_graph(m);
    Decoder dec(g);
    Sampler sampler(m);
    ReweightPolicy policy;
    policy.mode = CorrMode::kOff;
    for (uint64_t i = 0; i < 50; ++i) {
        Shot shot = sampler.sample(11, i);
        bool triggered = true;
        Matching two = two_pass_decode(dec, shot.flipped, policy, {}, {}, nullptr, &triggered);
        EXPECT_FALSE(triggered);
        EXPECT_EQ(two.edges, dec.decode(shot.flipped).edges);
    }
}

TEST(TwoPass, CorrectionFlipsHandConstructedDecision) {
    // Syndrome {0, 3} on a 4-detector line. Base weights make the two
    // boundary ejections (2.4) beat the middle path (3.0). Matched boundary
    // edges condition their inner neighbours with term 0.8 each, dropping the
    // middle path to 1.4 so the second pass routes through the bulk.
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1, 0.1, 0.1}));
    ASSERT_EQ(g.edges.size(), 5u);
    auto eb0 = static_cast<uint32_t>(g.find_edge(0, g.boundary()));
    auto e01 = static_cast<uint32_t>(g.find_edge(0, 1));
    auto e12 = static_cast<uint32_t>(g.find_edge(1, 2));
    auto e23 = static_cast<uint32_t>(g.find_edge(2, 3));
    auto e3b = static_cast<uint32_t>(g.find_edge(3, g.boundary()));
    std::vector<double> base(5, 1.0);
    base[eb0] = base[e3b] = 1.2;
    Decoder dec(g, base);
    std::vector<uint32_t> boundary_pair = {eb0, e3b};
    std::sort(boundary_pair.begin(), boundary_pair.end());
    Matching first = dec.decode({0, 3});
    EXPECT_EQ(first.edges, boundary_pair);

    ReweightPolicy policy;
    policy.mode = CorrMode::kHeuristic;
    policy.tau = 2;
    PairProbs pairs;
    pairs[{std::min(eb0, e01), std::max(eb0, e01)}] = 0.08;
    pairs[{std::min(e3b, e23), std::max(e3b, e23)}] = 0.08;
    EdgeProbs probs(5, 0.1);
    bool triggered = false;
    Matching second = two_pass_decode(dec, {0, 3}, policy, pairs, probs, nullptr, &triggered);
    EXPECT_TRUE(triggered);
    std::vector<uint32_t> bulk_path = {e01, e12, e23};
    std::sort(bulk_path.begin(), bulk_path.end());
    EXPECT_EQ(second.edges, bulk_path);
}

TEST(TwoPass, BelowTauSkipsSecondPass) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1, 0.1, 0.1}));
    auto eb0 = static_cast<uint32_t>(g.find_edge(0, g.boundary()));
    auto e3b = static_cast<uint32_t>(g.find_edge(3, g.boundary()));
    std::vector<double> base(5, 1.0);
    base[eb0] = base[e3b] = 1.2;
    Decoder dec(g, base);
    ReweightPolicy policy;
    policy.mode = CorrMode::kHeuristic;
    policy.tau = 3;
    bool triggered = true;
    Matching out = two_pass_decode(dec, {0, 3}, policy, {}, EdgeProbs(5, 0.1), nullptr, &triggered);
    EXPECT_FALSE(triggered);
    std::vector<uint32_t> boundary_pair = {eb0, e3b};
    std::sort(boundary_pair.begin(), boundary_pair.end());
    EXPECT_EQ(out.edges, boundary_pair);
}

TEST(TwoPass, NnModeRequiresParams) {
    DecodingGraph g = build_decoding_graph(line_model({0.1, 0.1, 0.1}));
    Decoder dec(g);
    ReweightPolicy policy;
    policy.mode = CorrMode::kNn;
    policy.tau = 0;
    EXPECT_THROW(two_pass_decode(dec, {0}, policy, {}, EdgeProbs(3, 0.1)), std::invalid_argument);
}

TEST(TwoPass, SecondPassKeepsBoundaryInvariant) {
    SurfaceCodeSpec spec;
    spec.distance = 3;
    spec.p = 0.04;
    spec.y_bias = 10;
    DetectorErrorModel m = generate_surface_pheno(spec);
    DecodingGraph g = build_decoding_graph(m);
    Decoder dec(g);
    Sampler sampler(m);
    EdgeProbs probs(g.edges.size());
    for (const Edge &e : g.edges) probs[e.id] = e.probability;
    PairProbs pairs(g.corr_truth.begin(), g.corr_truth.end());
    ReweightPolicy policy;
    policy.mode = CorrMode::kHeuristic;
    policy.tau = 0;
    for (uint64_t i = 0; i < 500; ++i) {
        Shot shot = sampler.sample(13, i);
        Matching out = two_pass_decode(dec, shot.flipped, policy, pairs, probs);
        std::vector<uint32_t> boundary = matching_boundary(g, out);
        std::sort(boundary.begin(), boundary.end());
        std::vector<uint32_t> expect = shot.flipped;
        std::sort(expect.begin(), expect.end());
        EXPECT_EQ(boundary, expect);
    }
}

}  // namespace
}  // namespace dgr
