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

#ifndef DGR_TRACER_H
#define DGR_TRACER_H

#include <cstdint>
#include <deque>
#include <map>
#include <ostream>
#include <set>
#include <vector>

#include "dgr/matcher.h"

namespace dgr {

using PairKey = std::pair<uint32_t, uint32_t>;
using EdgeProbs = std::vector<double>;
using PairProbs = std::map<PairKey, double>;

/// Accumulates per-edge occurrence counts and per-pair co-occurrence counts
/// over decoded matchings. Pair counting is restricted to the graph's
/// candidate correlated-pair set unless full-pair tracking is requested
/// (heatmap reproduction). An optional ring window keeps only the most
/// recent `window` trials counted.
class TraceStore {
  public:
    explicit TraceStore(const DecodingGraph &graph, bool full_pairs = false, uint64_t window = 0);

    const DecodingGraph &graph() const { return *graph_; }
    bool full_pairs() const { return full_pairs_; }
    uint64_t window() const { return window_; }

    /// Trials currently counted (capped at the window size when windowed).
    uint64_t trials() const { return trials_; }
    /// Trials ever recorded, including those evicted from the window.
    uint64_t total_recorded() const { return total_recorded_; }

    const std::vector<uint64_t> &edge_counts() const { return edge_counts_; }
    const std::map<PairKey, uint64_t> &pair_counts() const { return pair_counts_; }

    void record(const Matching &matching);

    /// p-hat(e) = c(e)/T; zero-count edges floored at 1/(2T).
    /// Throws std::runtime_error when T = 0.
    EdgeProbs estimate_edge_probs() const;

    /// Sparse p-hat(e_i,e_j) = c(e_i,e_j)/T; zero entries omitted.
    /// Throws std::runtime_error when T = 0.
    PairProbs estimate_pair_probs() const;

    /// Sums counts and trials. Throws std::invalid_argument on a store over
    /// a different graph or mismatched window/full-pair settings.
    void merge(const TraceStore &other);

    void write_edge_counts_csv(std::ostream &out) const;
    void write_pair_counts_csv(std::ostream &out) const;
    /// `edge_i,edge_j,estimated,truth` rows over the union of observed and
    /// ground-truth-correlated pairs.
    void write_heatmap_csv(std::ostream &out) const;

  private:
    void add_matching(const std::vector<uint32_t> &edges, int64_t sign);

    const DecodingGraph *graph_;
    bool full_pairs_;
    uint64_t window_;
    uint64_t trials_ = 0;
    uint64_t total_recorded_ = 0;
    std::vector<uint64_t> edge_counts_;
    std::map<PairKey, uint64_t> pair_counts_;
    std::set<PairKey> candidate_;
    /// Ring of recent matchings' edge sets, kept only when windowed.
    std::deque<std::vector<uint32_t>> ring_;
};

}  // namespace dgr

#endif
