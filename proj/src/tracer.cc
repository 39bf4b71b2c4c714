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

#include <algorithm>

namespace dgr {

TraceStore::TraceStore(const DecodingGraph &graph, bool full_pairs, uint64_t window)
    : graph_(&graph), full_pairs_(full_pairs), window_(window), edge_counts_(graph.edges.size(), 0) {
    if (!full_pairs_) {
        candidate_.insert(graph.candidate_pairs.begin(), graph.candidate_pairs.end());
    }
}

void TraceStore::add_matching(const std::vector<uint32_t> &edges, int64_t sign) {
    for (uint32_t e : edges) {
        edge_counts_[e] += sign;
    }
    for (size_t a = 0; a < edges.size(); ++a) {
        for (size_t b = a + 1; b < edges.size(); ++b) {
            PairKey key{std::min(edges[a], edges[b]), std::max(edges[a], edges[b])};
            if (!full_pairs_ && !candidate_.count(key)) continue;
            if (sign > 0) {
                ++pair_counts_[key];
            } else {
                auto it = pair_counts_.find(key);
                if (--it->second == 0) pair_counts_.erase(it);
            }
        }
    }
}

void TraceStore::record(const Matching &matching) {
    for (uint32_t e : matching.edges) {
        if (e >= edge_counts_.size()) {
            throw std::invalid_argument("matching references an edge outside the store's graph");
        }
    }
    add_matching(matching.edges, +1);
    ++trials_;
    ++total_recorded_;
    if (window_ > 0) {
        ring_.push_back(matching.edges);
        if (trials_ > window_) {
            add_matching(ring_.front(), -1);
            ring_.pop_front();
            --trials_;
        }
    }
}

EdgeProbs TraceStore::estimate_edge_probs() const {
    if (trials_ == 0) throw std::runtime_error("trace store has no recorded trials");
    EdgeProbs probs(edge_counts_.size());
    double floor = 1.0 / (2.0 * static_cast<double>(trials_));
    for (size_t e = 0; e < edge_counts_.size(); ++e) {
        probs[e] = edge_counts_[e] == 0
                       ? floor
                       : static_cast<double>(edge_counts_[e]) / static_cast<double>(trials_);
    }
    return probs;
}

PairProbs TraceStore::estimate_pair_probs() const {
    if (trials_ == 0) throw std::runtime_error("trace store has no recorded trials");
    PairProbs probs;
    for (const auto &[key, count] : pair_counts_) {
        probs[key] = static_cast<double>(count) / static_cast<double>(trials_);
    }
    return probs;
}

void TraceStore::merge(const TraceStore &other) {
    if (other.graph_->edges.size() != graph_->edges.size() ||
        other.graph_->num_detectors != graph_->num_detectors) {
        throw std::invalid_argument("cannot merge trace stores over different graphs");
    }
    if (other.full_pairs_ != full_pairs_ || other.window_ != window_) {
        throw std::invalid_argument("cannot merge trace stores with different settings");
    }
    if (window_ > 0) {
        // Windowed merge replays the other ring so eviction order stays
        // well defined.
        for (const auto &edges : other.ring_) {
            Matching m;
            m.edges = edges;
            record(m);
        }
        total_recorded_ += other.total_recorded_ - other.ring_.size();
        return;
    }
    trials_ += other.trials_;
    total_recorded_ += other.total_recorded_;
    for (size_t e = 0; e < edge_counts_.size(); ++e) edge_counts_[e] += other.edge_counts_[e];
    for (const auto &[key, count] : other.pair_counts_) pair_counts_[key] += count;
}

void TraceStore::write_edge_counts_csv(std::ostream &out) const {
    out << "edge_id,count\n";
    for (size_t e = 0; e < edge_counts_.size(); ++e) {
        out << e << "," << edge_counts_[e] << "\n";
    }
}

void TraceStore::write_pair_counts_csv(std::ostream &out) const {
    out << "edge_i,edge_j,count\n";
    for (const auto &[key, count] : pair_counts_) {
        out << key.first << "," << key.second << "," << count << "\n";
    }
}

void TraceStore::write_heatmap_csv(std::ostream &out) const {
    out << "edge_i,edge_j,estimated,truth\n";
    std::set<PairKey> keys;
    for (const auto &[key, count] : pair_counts_) keys.insert(key);
    for (const auto &[key, p] : graph_->corr_truth) keys.insert(key);
    double t = trials_ ? static_cast<double>(trials_) : 1.0;
    for (const PairKey &key : keys) {
        auto it = pair_counts_.find(key);
        double est = it == pair_counts_.end() ? 0.0 : static_cast<double>(it->second) / t;
        auto tr = graph_->corr_truth.find(key);
        double truth = tr == graph_->corr_truth.end() ? 0.0 : tr->second;
        out << key.first << "," << key.second << "," << est << "," << truth << "\n";
    }
}

}  // namespace dgr
