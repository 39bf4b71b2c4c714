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

#include "dgr/surfgen.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace dgr {

void SurfaceCodeSpec::validate() const {
    if (distance < 3 || distance % 2 == 0) {
        throw std::invalid_argument("distance must be an odd integer >= 3");
    }
    if (rounds < 0) {
        throw std::invalid_argument("rounds must be >= 1");
    }
    if (!(p > 0 && p < 1)) {
        throw std::invalid_argument("physical error rate must be in (0, 1)");
    }
    if (p_meas >= 1 || (p_meas >= 0 && p_meas == 0)) {
        throw std::invalid_argument("measurement error rate must be in (0, 1)");
    }
    if (!(y_bias > 0)) {
        throw std::invalid_argument("y_bias must be positive");
    }
}

namespace {

// Plaquette lattice for the rotated code. Data qubits live at integer (row,
// col) in [0, d)^2. Plaquette (i, j) covers data {i, i+1} x {j, j+1}; it is a
// Z check when (i + j) is odd. Weight-2 checks survive on the top/bottom
// rows for Z and the left/right columns for X, so X-error chains run
// horizontally and the logical-Z support is data column 0.
struct Lattice {
    int d;
    // check index by plaquette position, -1 if absent
    std::map<std::pair<int, int>, int> checks;
    std::vector<std::pair<int, int>> check_pos;  // index -> (i, j)
    std::vector<bool> check_is_z;

    // adjacency: per data qubit, the Z checks and X checks it touches
    std::vector<std::vector<int>> z_adj, x_adj;

    explicit Lattice(int d) : d(d), z_adj(d * d), x_adj(d * d) {
        for (int i = -1; i < d; ++i) {
            for (int j = -1; j < d; ++j) {
                int support = 0;
                for (int a = i; a <= i + 1; ++a) {
                    for (int b = j; b <= j + 1; ++b) {
                        if (a >= 0 && a < d && b >= 0 && b < d) ++support;
                    }
                }
                bool is_z = ((i + j) % 2 + 2) % 2 == 1;
                bool keep = false;
                if (support == 4) {
                    keep = true;
                } else if (support == 2) {
                    bool vertical_side = (i == -1 || i == d - 1);
                    keep = vertical_side ? is_z : !is_z;
                }
                if (keep) {
                    int idx = static_cast<int>(check_pos.size());
                    checks[{i, j}] = idx;
                    check_pos.push_back({i, j});
                    check_is_z.push_back(is_z);
                }
            }
        }
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                for (int i = a - 1; i <= a; ++i) {
                    for (int j = b - 1; j <= b; ++j) {
                        auto it = checks.find({i, j});
                        if (it == checks.end()) continue;
                        auto &dest = check_is_z[it->second] ? z_adj[a * d + b] : x_adj[a * d + b];
                        dest.push_back(it->second);
                    }
                }
            }
        }
    }
};

Component make_component(const std::vector<int> &adj, int layer, int num_checks, uint64_t obs) {
    Component comp;
    for (int c : adj) comp.detectors.push_back(static_cast<uint32_t>(layer * num_checks + c));
    comp.observables = obs;
    return comp;
}

double clamp_prob(double p) {
    return std::min(p, 0.5);
}

void normalize_channel(ExclusiveChannel &channel) {
    double total = 0;
    for (const auto &mech : channel.mechanisms) total += mech.probability;
    if (total > 1) {
        for (auto &mech : channel.mechanisms) mech.probability *= (1 - 1e-9) / total;
    }
}

}  // namespace

DetectorErrorModel generate_surface_pheno(const SurfaceCodeSpec &spec) {
    spec.validate();
    const int d = spec.distance;
    const int rounds = spec.effective_rounds();
    const double p_meas = spec.effective_p_meas();
    const double eta = spec.y_bias;
    const double p_x = spec.p / (2 + eta);
    const double p_z = p_x;
    const double p_y = eta * spec.p / (2 + eta);

    Lattice lat(d);
    const int num_checks = static_cast<int>(lat.check_pos.size());

    DetectorErrorModel model;
    model.num_detectors = static_cast<uint32_t>(num_checks * rounds);
    model.num_observables = 1;
    model.detector_coords.resize(model.num_detectors);
    for (int t = 0; t < rounds; ++t) {
        for (int c = 0; c < num_checks; ++c) {
            auto [i, j] = lat.check_pos[c];
            model.detector_coords[t * num_checks + c] = {i + 1.0, j + 1.0, static_cast<double>(t)};
        }
    }

    for (int t = 0; t < rounds; ++t) {
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                const auto &z_adj = lat.z_adj[a * d + b];
                const auto &x_adj = lat.x_adj[a * d + b];
                uint64_t obs = (b == 0) ? 1 : 0;

                ExclusiveChannel channel;
                // Row index for the worst-case transform: counted along the
                // logical-Z support direction so the scaled/unscaled boundary
                // cuts across correction chains.
                channel.data_row = b;
                Mechanism x_arm{p_x, {make_component(z_adj, t, num_checks, obs)}};
                Mechanism y_arm{p_y,
                                {make_component(z_adj, t, num_checks, obs), make_component(x_adj, t, num_checks, 0)}};
                Mechanism z_arm{p_z, {make_component(x_adj, t, num_checks, 0)}};
                channel.mechanisms = {std::move(x_arm), std::move(y_arm), std::move(z_arm)};
                model.channels.push_back(std::move(channel));
            }
        }
    }
    for (int t = 0; t + 1 < rounds; ++t) {
        for (int c = 0; c < num_checks; ++c) {
            Component comp;
            comp.detectors = {static_cast<uint32_t>(t * num_checks + c),
                              static_cast<uint32_t>((t + 1) * num_checks + c)};
            ExclusiveChannel channel;
            channel.mechanisms.push_back({p_meas, {comp}});
            model.channels.push_back(std::move(channel));
        }
    }

    // Freeze edge-type ids so they survive serialization round-trips.
    model.edge_type_table = derive_edge_type_table(model);
    return model;
}

DetectorErrorModel apply_random_mismatch(const DetectorErrorModel &model, double strength, uint64_t seed,
                                         bool mutate_measurement) {
    if (!(strength > 1)) {
        throw std::invalid_argument("mismatch strength must be > 1");
    }
    DetectorErrorModel out = model;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const double ln_n = std::log(strength);
    for (auto &channel : out.channels) {
        for (auto &mech : channel.mechanisms) {
            double factor = std::exp(uniform(rng) * ln_n);
            if (!mutate_measurement && channel.data_row < 0) continue;
            mech.probability = clamp_prob(mech.probability * factor);
        }
        normalize_channel(channel);
    }
    return out;
}

DetectorErrorModel apply_worstcase_mismatch(const DetectorErrorModel &model, double strength) {
    if (!(strength >= 1)) {
        throw std::invalid_argument("mismatch strength must be >= 1");
    }
    int32_t max_row = -1;
    for (const auto &channel : model.channels) max_row = std::max(max_row, channel.data_row);
    if (max_row < 0) {
        throw std::invalid_argument("model carries no data-qubit row metadata; cannot apply worst-case mismatch");
    }
    const int32_t d = max_row + 1;
    DetectorErrorModel out = model;
    for (auto &channel : out.channels) {
        if (channel.data_row < 0) continue;
        double factor = (channel.data_row < (d - 1) / 2) ? strength : 1.0 / strength;
        for (auto &mech : channel.mechanisms) {
            mech.probability = clamp_prob(mech.probability * factor);
        }
        normalize_channel(channel);
    }
    return out;
}

}  // namespace dgr
