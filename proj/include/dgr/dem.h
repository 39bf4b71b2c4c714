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

#ifndef DGR_DEM_H
#define DGR_DEM_H

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dgr {

/// Thrown by parse_dem on malformed input. Carries a 1-based source location.
struct ParseError : std::runtime_error {
    ParseError(const std::string &msg, size_t line, size_t column)
        : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line(line),
          column(column) {}
    size_t line;
    size_t column;
};

/// One detector-flip event of a mechanism: a detector set of size 1 or 2
/// plus a logical-observable mask.
struct Component {
    std::vector<uint32_t> detectors;
    uint64_t observables = 0;

    bool operator==(const Component &other) const = default;
};

/// A probabilistic error mechanism. Mechanisms with two or more components
/// are decomposed hyperedges (e.g. a Y error split into an X-graph part and
/// a Z-graph part).
struct Mechanism {
    double probability = 0;
    std::vector<Component> components;

    bool operator==(const Mechanism &other) const = default;
};

/// A set of mutually exclusive mechanisms; at most one fires per shot.
/// A standalone `error(...)` line is represented as a singleton channel.
/// `data_row` is the generator's data-qubit row annotation (-1 when absent),
/// consumed by the worst-case mismatch transform.
struct ExclusiveChannel {
    std::vector<Mechanism> mechanisms;
    int32_t data_row = -1;

    bool operator==(const ExclusiveChannel &other) const = default;
};

struct DetectorCoord {
    double x = 0;
    double y = 0;
    double t = 0;

    bool operator==(const DetectorCoord &other) const = default;
};

struct DetectorErrorModel {
    uint32_t num_detectors = 0;
    uint32_t num_observables = 0;
    std::vector<ExclusiveChannel> channels;

    /// Either empty or one coordinate per detector.
    std::vector<DetectorCoord> detector_coords;

    /// Edge spatial-signature -> type id, used to keep type ids identical
    /// across spatial translates. Populated by the generator; extended
    /// deterministically by build_decoding_graph for unseen signatures.
    std::map<std::string, uint32_t> edge_type_table;

    bool has_coords() const { return !detector_coords.empty(); }

    /// Throws std::invalid_argument if any structural invariant is violated.
    void validate() const;

    bool operator==(const DetectorErrorModel &other) const = default;
};

struct Edge {
    uint32_t id = 0;
    /// Endpoints; `v == num_detectors` marks a boundary edge.
    uint32_t u = 0;
    uint32_t v = 0;
    double probability = 0;
    double weight = 0;
    uint32_t type_id = 0;
    uint64_t observables = 0;
    /// Midpoint coordinate (detector coordinate for boundary edges);
    /// meaningful only when the model carries coordinates.
    DetectorCoord center{};
};

struct DecodingGraph {
    uint32_t num_detectors = 0;
    uint32_t num_observables = 0;
    bool has_coords = false;
    std::vector<Edge> edges;

    /// Edge ids incident to each node, boundary included (index num_detectors).
    std::vector<std::vector<uint32_t>> incident;

    /// Ground-truth correlated edge pairs (id_a < id_b) with joint
    /// probability, from multi-component mechanisms.
    std::map<std::pair<uint32_t, uint32_t>, double> corr_truth;

    /// Edge pairs tracked by the correlation tracer: pairs within node
    /// distance <= 2 (boundary excluded from hops) plus all corr_truth pairs.
    std::vector<std::pair<uint32_t, uint32_t>> candidate_pairs;

    uint32_t boundary() const { return num_detectors; }
    size_t num_nodes() const { return size_t{num_detectors} + 1; }

    /// Edge id for endpoint pair, or -1 when absent. `v` may be boundary().
    int64_t find_edge(uint32_t u, uint32_t v) const;
};

/// w = -ln(p / (1 - p)). Throws std::domain_error outside (0, 1).
double weight_from_prob(double p);

/// Inverse of weight_from_prob: p = 1 / (1 + e^w).
double prob_from_weight(double w);

/// XOR combination of two independent mechanisms on the same edge.
double merge_probs(double p1, double p2);

DetectorErrorModel parse_dem(const std::string &text);
std::string serialize_dem(const DetectorErrorModel &model);

DetectorErrorModel read_dem_file(const std::string &path);
void write_dem_file(const DetectorErrorModel &model, const std::string &path);

DecodingGraph build_decoding_graph(const DetectorErrorModel &model);

/// Edge spatial-signature -> type id for a model with coordinates, ids
/// assigned 0.. in sorted signature order. Generators freeze this into
/// DetectorErrorModel::edge_type_table.
std::map<std::string, uint32_t> derive_edge_type_table(const DetectorErrorModel &model);

}  // namespace dgr

#endif
