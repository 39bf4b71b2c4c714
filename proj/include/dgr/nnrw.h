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

#ifndef DGR_NNRW_H
#define DGR_NNRW_H

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dgr/tracer.h"

namespace dgr {

struct FeatureSchema {
    uint32_t num_types = 0;
    /// Maximum correlated-partner count over all edges.
    uint32_t k_max = 0;

    uint32_t dim() const { return num_types + 2 * k_max; }
    bool operator==(const FeatureSchema &other) const = default;
};

/// Per-edge feature layout: one-hot edge type, then per correlated partner
/// in canonical spatial order a (matched-in-M0 flag, co-occurrence
/// probability) pair, zero-padded to k_max. Partner sets come from the
/// graph's ground-truth correlated pairs; ordering is by the partner's
/// spatial offset from the edge, so translated edges get identical layouts.
class FeatureExtractor {
  public:
    explicit FeatureExtractor(const DecodingGraph &graph);

    const FeatureSchema &schema() const { return schema_; }
    const std::vector<std::vector<uint32_t>> &partners() const { return partners_; }

    /// Writes schema().dim() values to `out`.
    void extract(uint32_t edge, const std::vector<uint8_t> &in_m0, const PairProbs &pair_probs,
                 double *out) const;

    /// Row-major |edges| x dim() feature matrix.
    std::vector<double> extract_all(const std::vector<uint8_t> &in_m0, const PairProbs &pair_probs) const;

  private:
    const DecodingGraph *graph_;
    FeatureSchema schema_;
    /// Canonically ordered correlated partner edge ids, per edge.
    std::vector<std::vector<uint32_t>> partners_;
};

/// input -> hidden -> hidden -> 1 MLP with tanh hidden activations and a
/// 3*tanh output, so predictions stay in [-3, 3].
struct MlpParams {
    FeatureSchema schema;
    uint32_t input_dim = 0;
    uint32_t hidden = 64;
    std::vector<double> w1, b1;  // hidden x input_dim
    std::vector<double> w2, b2;  // hidden x hidden
    std::vector<double> w3, b3;  // 1 x hidden

    size_t num_params() const { return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size(); }
};

/// Gradient/optimizer-state buffers matching an MlpParams layout.
struct MlpGrads {
    std::vector<double> w1, b1, w2, b2, w3, b3;

    explicit MlpGrads(const MlpParams &p)
        : w1(p.w1.size(), 0), b1(p.b1.size(), 0), w2(p.w2.size(), 0), b2(p.b2.size(), 0),
          w3(p.w3.size(), 0), b3(p.b3.size(), 0) {}
    void zero();
};

/// Fan-in-scaled symmetric uniform initialization, seed-controlled.
MlpParams init_mlp(const FeatureSchema &schema, uint32_t hidden, uint64_t seed);

double mlp_forward(const MlpParams &params, const double *x);

/// Accumulates upstream * d(output)/d(param) into `grads`.
void mlp_backward(const MlpParams &params, const double *x, double upstream, MlpGrads &grads);

/// Normalized symmetric difference |predicted XOR truth| / (|truth| + 1).
/// Both edge-id sets must be sorted.
double matching_loss(const std::vector<uint32_t> &predicted, const std::vector<uint32_t> &truth);

/// Symmetric zeroth-order gradient estimate of `loss` at `w`:
///   (1/(2 Q sigma^2)) * sum_i (L(w + d_i) - L(w - d_i)) d_i,  d_i ~ N(0, sigma^2 I).
std::vector<double> spsa_gradient(const std::function<double(const std::vector<double> &)> &loss,
                                  const std::vector<double> &w, uint32_t q, double sigma,
                                  std::mt19937_64 &rng);

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    uint32_t batch_size = 128;
    uint32_t epochs = 100;
    uint32_t spsa_q = 8;
    double spsa_sigma = 0.1;
    uint32_t hidden = 64;
};

struct TrainSample {
    std::vector<uint32_t> flipped;
    /// Decoding-graph edges implied by fired mechanisms, XOR-reduced, sorted.
    std::vector<uint32_t> truth_edges;
};

struct TrainResult {
    MlpParams params;
    /// Mean matching loss per mini-batch, in step order.
    std::vector<double> loss_curve;
};

/// Alg.-1 hybrid training: per sample, features from the first-pass
/// matching feed the MLP; SPSA estimates the loss gradient through the
/// matcher; the chain rule maps it onto the MLP parameters; Adam with
/// decoupled weight decay updates. Deterministic given the seed.
TrainResult train_nn(const Decoder &decoder, const PairProbs &pair_probs,
                     const std::vector<TrainSample> &dataset, const TrainConfig &config, uint64_t seed);

/// w~_e = max(w_e + prediction_e, 0), predictions batched over all edges.
std::vector<double> nn_corr_reweight(const DecodingGraph &graph, const std::vector<double> &weights,
                                     const Matching &m0, const PairProbs &pair_probs,
                                     const MlpParams &params);

void write_mlp_file(const MlpParams &params, const std::string &path);
MlpParams read_mlp_file(const std::string &path);

}  // namespace dgr

#endif
