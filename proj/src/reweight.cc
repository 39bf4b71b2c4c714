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

#include "dgr/nnrw.h"

namespace dgr {

std::vector<double> alignment_reweight(const DecodingGraph &graph, const EdgeProbs &edge_probs) {
    if (edge_probs.size() != graph.edges.size()) {
        throw std::invalid_argument("edge probability vector does not cover every edge");
    }
    std::vector<double> weights(graph.edges.size());
    for (size_t e = 0; e < weights.size(); ++e) {
        double p = edge_probs[e];
        if (p <= 0) {
            throw std::invalid_argument("edge probability estimate must be positive");
        }
        weights[e] = weight_from_prob(std::min(p, 0.5));
    }
    return weights;
}

std::vector<double> heuristic_corr_reweight(const DecodingGraph &graph, const std::vector<double> &weights,
                                            const Matching &m0, const PairProbs &pair_probs,
                                            const EdgeProbs &edge_probs, double epsilon, double scale) {
    if (weights.size() != graph.edges.size() || edge_probs.size() != graph.edges.size()) {
        throw std::invalid_argument("weights/edge probabilities do not cover every edge");
    }
    std::vector<uint8_t> in_m(graph.edges.size(), 0);
    for (uint32_t e : m0.edges) in_m[e] = 1;

    std::vector<double> out = weights;
    for (const auto &[key, p_pair] : pair_probs) {
        auto [a, b] = key;
        // Each pair contributes in both directions: a conditions b and
        // b conditions a.
        for (int dir = 0; dir < 2; ++dir) {
            uint32_t cond = dir == 0 ? a : b;
            uint32_t target = dir == 0 ? b : a;
            double p_cond = edge_probs[cond];
            if (p_cond < epsilon) continue;
            double term = scale * p_pair / p_cond;
            out[target] += in_m[cond] ? -term : term;
        }
    }
    for (double &w : out) w = std::max(w, 0.0);
    return out;
}

Matching two_pass_decode(const Decoder &decoder, const std::vector<uint32_t> &flipped,
                         const ReweightPolicy &policy, const PairProbs &pair_probs,
                         const EdgeProbs &edge_probs, const MlpParams *params, bool *triggered_out) {
    Matching m0 = decoder.decode(flipped);
    bool fire = policy.mode != CorrMode::kOff && difficulty_trigger(flipped, policy.tau);
    if (triggered_out) *triggered_out = fire;
    if (!fire) return m0;

    std::vector<double> corrected;
    if (policy.mode == CorrMode::kHeuristic) {
        corrected = heuristic_corr_reweight(decoder.graph(), decoder.weights(), m0, pair_probs, edge_probs,
                                            policy.epsilon, policy.scale);
    } else {
        if (!params) throw std::invalid_argument("NN correlation mode requires trained parameters");
        corrected = nn_corr_reweight(decoder.graph(), decoder.weights(), m0, pair_probs, *params);
    }
    return decode_with_weights(decoder.graph(), corrected, flipped);
}

}  // namespace dgr
