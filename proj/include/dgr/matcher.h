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

#ifndef DGR_MATCHER_H
#define DGR_MATCHER_H

#include <limits>
#include <optional>
#include <vector>

#include "dgr/dem.h"

namespace dgr {

struct Matching {
    /// Decoding-graph edge ids after path XOR-cancellation, sorted.
    std::vector<uint32_t> edges;
    /// Sum of matched-pair path distances.
    double total_weight = 0;
    /// Which syndrome pair each path serves; second == boundary id for
    /// boundary matches.
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
};

struct ShortestPaths {
    std::vector<double> dist;
    /// Edge id used to reach each node, -1 at the source / unreachable.
    std::vector<int32_t> pred_edge;
};

/// Dijkstra over the decoding graph (boundary node included) with the given
/// per-edge weights. Ties broken deterministically toward lower edge ids.
ShortestPaths shortest_paths(const DecodingGraph &graph, const std::vector<double> &weights, uint32_t source);

/// MWPM decoder for a fixed weight assignment. Precomputes all-pairs
/// shortest paths once; decode() is then a dense matching over the flipped
/// detectors plus boundary twins.
class Decoder {
  public:
    explicit Decoder(const DecodingGraph &graph);
    Decoder(const DecodingGraph &graph, std::vector<double> weights);

    const DecodingGraph &graph() const { return *graph_; }
    const std::vector<double> &weights() const { return weights_; }

    Matching decode(const std::vector<uint32_t> &flipped) const;

    /// Exhaustive-pairing oracle: globally minimum matching weight over all
    /// ways to pair flipped detectors or send them to the boundary.
    /// Requires <= 12 flipped detectors.
    Matching exact_oracle_decode(const std::vector<uint32_t> &flipped) const;

    double dist(uint32_t a, uint32_t b) const { return dist_[a][b]; }

  private:
    void build_tables();
    void xor_path(uint32_t source, uint32_t target, std::vector<uint32_t> &count) const;

    const DecodingGraph *graph_;
    std::vector<double> weights_;
    std::vector<std::vector<double>> dist_;        // (n+1) x (n+1)
    std::vector<std::vector<int32_t>> pred_edge_;  // per source
};

/// One-off decode with explicit weights (per-source Dijkstra, no cached
/// tables); used by the two-pass re-weighting path.
Matching decode_with_weights(const DecodingGraph &graph, const std::vector<double> &weights,
                             const std::vector<uint32_t> &flipped);

/// XOR of observable masks over the matching's member edges.
uint64_t predict_observables(const DecodingGraph &graph, const Matching &matching);

/// Multiset XOR of member-edge endpoints (boundary dropped); equals the
/// flipped-detector set for any valid matching.
std::vector<uint32_t> matching_boundary(const DecodingGraph &graph, const Matching &matching);

}  // namespace dgr

#endif
