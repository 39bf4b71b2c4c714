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

#ifndef DGR_REWEIGHT_H
#define DGR_REWEIGHT_H

#include <cstdint>
#include <vector>

#include "dgr/tracer.h"

namespace dgr {

struct MlpParams;

enum class CorrMode { kOff, kHeuristic, kNn };

struct ReweightPolicy {
    /// Alignment phase: trailing window (0 = unbounded) and the minimum
    /// trial count before estimates are trusted.
    uint64_t window = 0;
    uint64_t min_trials = 1;
    /// Alignment tracing passes. The first pass decodes with the mismatched
    /// weights; each further pass re-traces with the previous pass's aligned
    /// weights, which stabilizes estimates under severe mismatch.
    uint64_t align_iters = 1;

    CorrMode mode = CorrMode::kOff;
    /// Correlation pass fires when |flipped detectors| >= tau.
    uint32_t tau = 0;
    /// Pairs whose conditioning edge has p(e_i) < epsilon are skipped.
    double epsilon = 0;
    /// Scale applied to the heuristic probability-ratio correction.
    double scale = 1.0;
};

/// Per-edge weights from traced estimates: w'_e = weight_from_prob(p-hat
/// clamped to (0, 0.5]). Throws std::invalid_argument when edge_probs does
/// not cover every edge.
std::vector<double> alignment_reweight(const DecodingGraph &graph, const EdgeProbs &edge_probs);

/// Eq.-1 correction around a first-pass matching: for each edge j,
///   w~_j = w_j - sum_{e_i in M} p(e_i,e_j)/p(e_i)
///             + sum_{e_i not in M} p(e_i,e_j)/p(e_i),
/// floored at 0. Pairs with p(e_i) < epsilon contribute nothing.
std::vector<double> heuristic_corr_reweight(const DecodingGraph &graph, const std::vector<double> &weights,
                                            const Matching &m0, const PairProbs &pair_probs,
                                            const EdgeProbs &edge_probs, double epsilon, double scale = 1.0);

inline bool difficulty_trigger(const std::vector<uint32_t> &flipped, uint32_t tau) {
    return flipped.size() >= tau;
}

/// Two-iteration decode: plain decode, then, when the trigger fires and a
/// correlation mode is active, re-decode with corrected weights. `decoder`
/// carries the (possibly alignment-reweighted) base weights. `params` is
/// required in NN mode.
Matching two_pass_decode(const Decoder &decoder, const std::vector<uint32_t> &flipped,
                         const ReweightPolicy &policy, const PairProbs &pair_probs,
                         const EdgeProbs &edge_probs, const MlpParams *params = nullptr,
                         bool *triggered_out = nullptr);

}  // namespace dgr

#endif
