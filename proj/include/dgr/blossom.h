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

#ifndef DGR_BLOSSOM_H
#define DGR_BLOSSOM_H

#include <array>
#include <cstdint>
#include <vector>

namespace dgr {

struct WeightedEdge {
    int u;
    int v;
    double weight;
};

/// Exact minimum-weight perfect matching on a general graph (Edmonds'
/// blossom algorithm, primal-dual O(n^3) formulation). Returns mate[v] for
/// every vertex. Throws std::invalid_argument on odd vertex count and
/// std::runtime_error when no perfect matching exists.
///
/// Weights are quantized to 64-bit integers internally (relative resolution
/// ~2^-40), so near-ties may resolve either way within that resolution.
std::vector<int> blossom_mwpm(int num_nodes, const std::vector<WeightedEdge> &edges);

namespace detail {

/// Maximum-weight maximum-cardinality matching with integer weights.
/// Returns mate[v] (vertex index or -1).
std::vector<int> max_weight_matching(int num_nodes, const std::vector<std::array<int64_t, 3>> &edges);

}  // namespace detail

}  // namespace dgr

#endif
