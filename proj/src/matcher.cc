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

#include "dgr/matcher.h"

#include <algorithm>
#include <cmath>
#include <queue>

#include "dgr/blossom.h"

namespace dgr {

ShortestPaths shortest_paths(const DecodingGraph &graph, const std::vector<double> &weights, uint32_t source) {
    if (weights.size() != graph.edges.size()) {
        throw std::invalid_argument("weight vector size does not match edge count");
    }
    const size_t n = graph.num_nodes();
    ShortestPaths result;
    result.dist.assign(n, std::numeric_limits<double>::infinity());
    result.pred_edge.assign(n, -1);
    result.dist[source] = 0;

    using Item = std::pair<double, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0, source});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > result.dist[v]) continue;
        for (uint32_t eid : graph.incident[v]) {
            const Edge &e = graph.edges[eid];
            uint32_t w = (e.u == v) ? e.v : e.u;
            double nd = d + weights[eid];
            if (nd < result.dist[w]) {
                result.dist[w] = nd;
                result.pred_edge[w] = static_cast<int32_t>(eid);
                pq.push({nd, w});
            } else if (nd == result.dist[w] && result.pred_edge[w] >= 0 &&
                       static_cast<int32_t>(eid) < result.pred_edge[w]) {
                // deterministic tie-break toward lower edge ids
                result.pred_edge[w] = static_cast<int32_t>(eid);
            }
        }
    }
    return result;
}

namespace {

void xor_path_impl(const DecodingGraph &graph, const int32_t *pred, uint32_t source, uint32_t target,
                   std::vector<uint8_t> &parity) {
    uint32_t v = target;
    while (v != source) {
        int32_t eid = pred[v];
        if (eid < 0) throw std::logic_error("path reconstruction hit an unreachable node");
        parity[eid] ^= 1;
        const Edge &e = graph.edges[eid];
        v = (e.u == v) ? e.v : e.u;
    }
}

Matching assemble(const DecodingGraph &graph, const std::vector<uint32_t> &flipped,
                  const std::vector<std::pair<uint32_t, uint32_t>> &pairs_idx,
                  const std::vector<const double *> &dist_rows, const std::vector<const int32_t *> &pred_rows) {
    const uint32_t boundary = graph.boundary();
    Matching m;
    std::vector<uint8_t> parity(graph.edges.size(), 0);
    for (auto [i, j] : pairs_idx) {
        if (j == UINT32_MAX) {
            m.total_weight += dist_rows[i][boundary];
            xor_path_impl(graph, pred_rows[i], flipped[i], boundary, parity);
            m.pairs.push_back({flipped[i], boundary});
        } else {
            m.total_weight += dist_rows[i][flipped[j]];
            xor_path_impl(graph, pred_rows[i], flipped[i], flipped[j], parity);
            m.pairs.push_back({flipped[i], flipped[j]});
        }
    }
    for (uint32_t eid = 0; eid < parity.size(); ++eid) {
        if (parity[eid]) m.edges.push_back(eid);
    }
    return m;
}

Matching decode_from_rows(const DecodingGraph &graph, const std::vector<uint32_t> &flipped,
                          const std::vector<const double *> &dist_rows,
                          const std::vector<const int32_t *> &pred_rows) {
    const uint32_t k = static_cast<uint32_t>(flipped.size());
    if (k == 0) return {};
    const uint32_t boundary = graph.boundary();

    // Syndrome graph: detectors 0..k-1 and one boundary twin per detector at
    // k..2k-1. Twins interconnect at zero weight so unused boundary exits
    // pair off for free.
    std::vector<WeightedEdge> edges;
    for (uint32_t i = 0; i < k; ++i) {
        for (uint32_t j = i + 1; j < k; ++j) {
            double d = dist_rows[i][flipped[j]];
            if (std::isfinite(d)) edges.push_back({static_cast<int>(i), static_cast<int>(j), d});
        }
        double bd = dist_rows[i][boundary];
        if (std::isfinite(bd)) edges.push_back({static_cast<int>(i), static_cast<int>(k + i), bd});
        for (uint32_t j = i + 1; j < k; ++j) {
            edges.push_back({static_cast<int>(k + i), static_cast<int>(k + j), 0.0});
        }
    }
    std::vector<int> mate = blossom_mwpm(static_cast<int>(2 * k), edges);

    std::vector<std::pair<uint32_t, uint32_t>> pairs_idx;
    for (uint32_t i = 0; i < k; ++i) {
        int m = mate[i];
        if (m == static_cast<int>(k + i)) {
            pairs_idx.push_back({i, UINT32_MAX});
        } else if (m > static_cast<int>(i) && m < static_cast<int>(k)) {
            pairs_idx.push_back({i, static_cast<uint32_t>(m)});
        }
    }
    return assemble(graph, flipped, pairs_idx, dist_rows, pred_rows);
}

void check_flipped(const DecodingGraph &graph, const std::vector<uint32_t> &flipped) {
    for (uint32_t d : flipped) {
        if (d >= graph.num_detectors) {
            throw std::invalid_argument("flipped detector index out of range");
        }
    }
}

}  // namespace

Decoder::Decoder(const DecodingGraph &graph) : graph_(&graph) {
    weights_.reserve(graph.edges.size());
    for (const Edge &e : graph.edges) weights_.push_back(e.weight);
    build_tables();
}

Decoder::Decoder(const DecodingGraph &graph, std::vector<double> weights)
    : graph_(&graph), weights_(std::move(weights)) {
    if (weights_.size() != graph.edges.size()) {
        throw std::invalid_argument("weight vector size does not match edge count");
    }
    build_tables();
}

void Decoder::build_tables() {
    const size_t n = graph_->num_nodes();
    dist_.resize(n);
    pred_edge_.resize(n);
    for (uint32_t s = 0; s < n; ++s) {
        ShortestPaths sp = shortest_paths(*graph_, weights_, s);
        dist_[s] = std::move(sp.dist);
        pred_edge_[s] = std::move(sp.pred_edge);
    }
}

Matching Decoder::decode(const std::vector<uint32_t> &flipped) const {
    check_flipped(*graph_, flipped);
    std::vector<const double *> dist_rows;
    std::vector<const int32_t *> pred_rows;
    dist_rows.reserve(flipped.size());
    pred_rows.reserve(flipped.size());
    for (uint32_t d : flipped) {
        dist_rows.push_back(dist_[d].data());
        pred_rows.push_back(pred_edge_[d].data());
    }
    return decode_from_rows(*graph_, flipped, dist_rows, pred_rows);
}

Matching Decoder::exact_oracle_decode(const std::vector<uint32_t> &flipped) const {
    check_flipped(*graph_, flipped);
    const uint32_t k = static_cast<uint32_t>(flipped.size());
    if (k > 12) {
        throw std::invalid_argument("exact oracle limited to 12 flipped detectors");
    }
    if (k == 0) return {};
    const uint32_t boundary = graph_->boundary();

    std::vector<std::pair<uint32_t, uint32_t>> current, best_pairs;
    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> used(k, false);

    auto recurse = [&](auto &&self, uint32_t start, double acc) -> void {
        if (acc >= best) return;
        uint32_t i = start;
        while (i < k && used[i]) ++i;
        if (i == k) {
            best = acc;
            best_pairs = current;
            return;
        }
        used[i] = true;
        double bd = dist_[flipped[i]][boundary];
        if (std::isfinite(bd)) {
            current.push_back({i, UINT32_MAX});
            self(self, i + 1, acc + bd);
            current.pop_back();
        }
        for (uint32_t j = i + 1; j < k; ++j) {
            if (used[j]) continue;
            double d = dist_[flipped[i]][flipped[j]];
            if (!std::isfinite(d)) continue;
            used[j] = true;
            current.push_back({i, j});
            self(self, i + 1, acc + d);
            current.pop_back();
            used[j] = false;
        }
        used[i] = false;
    };
    recurse(recurse, 0, 0.0);
    if (!std::isfinite(best)) {
        throw std::runtime_error("no valid pairing exists for the flipped detectors");
    }

    std::vector<const double *> dist_rows;
    std::vector<const int32_t *> pred_rows;
    for (uint32_t d : flipped) {
        dist_rows.push_back(dist_[d].data());
        pred_rows.push_back(pred_edge_[d].data());
    }
    return assemble(*graph_, flipped, best_pairs, dist_rows, pred_rows);
}

Matching decode_with_weights(const DecodingGraph &graph, const std::vector<double> &weights,
                             const std::vector<uint32_t> &flipped) {
    check_flipped(graph, flipped);
    if (flipped.empty()) return {};
    std::vector<ShortestPaths> sp;
    sp.reserve(flipped.size());
    std::vector<const double *> dist_rows;
    std::vector<const int32_t *> pred_rows;
    for (uint32_t d : flipped) {
        sp.push_back(shortest_paths(graph, weights, d));
        dist_rows.push_back(sp.back().dist.data());
        pred_rows.push_back(sp.back().pred_edge.data());
    }
    return decode_from_rows(graph, flipped, dist_rows, pred_rows);
}

uint64_t predict_observables(const DecodingGraph &graph, const Matching &matching) {
    uint64_t mask = 0;
    for (uint32_t eid : matching.edges) mask ^= graph.edges[eid].observables;
    return mask;
}

std::vector<uint32_t> matching_boundary(const DecodingGraph &graph, const Matching &matching) {
    std::vector<uint32_t> counts(graph.num_detectors, 0);
    for (uint32_t eid : matching.edges) {
        const Edge &e = graph.edges[eid];
        if (e.u < graph.num_detectors) ++counts[e.u];
        if (e.v < graph.num_detectors) ++counts[e.v];
    }
    std::vector<uint32_t> odd;
    for (uint32_t d = 0; d < counts.size(); ++d) {
        if (counts[d] % 2) odd.push_back(d);
    }
    return odd;
}

}  // namespace dgr
