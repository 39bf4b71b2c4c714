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

#include "dgr/nnrw.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace dgr {

namespace {

inline double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

FeatureExtractor::FeatureExtractor(const DecodingGraph &graph) : graph_(&graph) {
    uint32_t num_types = 0;
    for (const Edge &e : graph.edges) num_types = std::max(num_types, e.type_id + 1);
    schema_.num_types = num_types;

    partners_.resize(graph.edges.size());
    for (const auto &[key, p] : graph.corr_truth) {
        partners_[key.first].push_back(key.second);
        partners_[key.second].push_back(key.first);
    }
    for (uint32_t e = 0; e < partners_.size(); ++e) {
        auto &list = partners_[e];
        if (graph.has_coords) {
            // Sort by spatial offset from this edge so translated edges
            // enumerate partners in the same order.
            const DetectorCoord &c = graph.edges[e].center;
            std::sort(list.begin(), list.end(), [&](uint32_t a, uint32_t b) {
                const DetectorCoord &ca = graph.edges[a].center;
                const DetectorCoord &cb = graph.edges[b].center;
                auto ka = std::make_tuple(round3(ca.x - c.x), round3(ca.y - c.y), round3(ca.t - c.t), a);
                auto kb = std::make_tuple(round3(cb.x - c.x), round3(cb.y - c.y), round3(cb.t - c.t), b);
                return ka < kb;
            });
        } else {
            std::sort(list.begin(), list.end());
        }
        schema_.k_max = std::max(schema_.k_max, static_cast<uint32_t>(list.size()));
    }
}

void FeatureExtractor::extract(uint32_t edge, const std::vector<uint8_t> &in_m0, const PairProbs &pair_probs,
                               double *out) const {
    std::fill(out, out + schema_.dim(), 0.0);
    out[graph_->edges[edge].type_id] = 1.0;
    const auto &list = partners_[edge];
    for (uint32_t i = 0; i < list.size(); ++i) {
        uint32_t p = list[i];
        out[schema_.num_types + 2 * i] = in_m0[p] ? 1.0 : 0.0;
        PairKey key{std::min(edge, p), std::max(edge, p)};
        auto it = pair_probs.find(key);
        out[schema_.num_types + 2 * i + 1] = it == pair_probs.end() ? 0.0 : it->second;
    }
}

std::vector<double> FeatureExtractor::extract_all(const std::vector<uint8_t> &in_m0,
                                                  const PairProbs &pair_probs) const {
    std::vector<double> rows(graph_->edges.size() * schema_.dim());
    for (uint32_t e = 0; e < graph_->edges.size(); ++e) {
        extract(e, in_m0, pair_probs, rows.data() + static_cast<size_t>(e) * schema_.dim());
    }
    return rows;
}

void MlpGrads::zero() {
    auto clear = [](std::vector<double> &v) { std::fill(v.begin(), v.end(), 0.0); };
    clear(w1);
    clear(b1);
    clear(w2);
    clear(b2);
    clear(w3);
    clear(b3);
}

MlpParams init_mlp(const FeatureSchema &schema, uint32_t hidden, uint64_t seed) {
    MlpParams p;
    p.schema = schema;
    p.input_dim = schema.dim();
    p.hidden = hidden;
    p.w1.resize(static_cast<size_t>(hidden) * p.input_dim);
    p.b1.resize(hidden);
    p.w2.resize(static_cast<size_t>(hidden) * hidden);
    p.b2.resize(hidden);
    p.w3.resize(hidden);
    p.b3.resize(1);

    std::mt19937_64 rng(seed);
    auto fill = [&](std::vector<double> &v, uint32_t fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double &x : v) x = dist(rng);
    };
    fill(p.w1, p.input_dim);
    fill(p.b1, p.input_dim);
    fill(p.w2, hidden);
    fill(p.b2, hidden);
    fill(p.w3, hidden);
    fill(p.b3, hidden);
    return p;
}

namespace {

struct ForwardState {
    std::vector<double> h1, h2;
    double z = 0;
};

ForwardState forward_states(const MlpParams &p, const double *x) {
    ForwardState s;
    s.h1.resize(p.hidden);
    s.h2.resize(p.hidden);
    for (uint32_t i = 0; i < p.hidden; ++i) {
        double a = p.b1[i];
        const double *row = p.w1.data() + static_cast<size_t>(i) * p.input_dim;
        for (uint32_t j = 0; j < p.input_dim; ++j) a += row[j] * x[j];
        s.h1[i] = std::tanh(a);
    }
    for (uint32_t i = 0; i < p.hidden; ++i) {
        double a = p.b2[i];
        const double *row = p.w2.data() + static_cast<size_t>(i) * p.hidden;
        for (uint32_t j = 0; j < p.hidden; ++j) a += row[j] * s.h1[j];
        s.h2[i] = std::tanh(a);
    }
    s.z = p.b3[0];
    for (uint32_t j = 0; j < p.hidden; ++j) s.z += p.w3[j] * s.h2[j];
    return s;
}

}  // namespace

double mlp_forward(const MlpParams &params, const double *x) {
    return 3.0 * std::tanh(forward_states(params, x).z);
}

void mlp_backward(const MlpParams &p, const double *x, double upstream, MlpGrads &g) {
    ForwardState s = forward_states(p, x);
    double tz = std::tanh(s.z);
    double dz = upstream * 3.0 * (1.0 - tz * tz);

    g.b3[0] += dz;
    std::vector<double> dh2(p.hidden);
    for (uint32_t j = 0; j < p.hidden; ++j) {
        g.w3[j] += dz * s.h2[j];
        dh2[j] = dz * p.w3[j];
    }
    std::vector<double> da2(p.hidden), dh1(p.hidden, 0.0);
    for (uint32_t i = 0; i < p.hidden; ++i) {
        da2[i] = dh2[i] * (1.0 - s.h2[i] * s.h2[i]);
        g.b2[i] += da2[i];
        double *row = g.w2.data() + static_cast<size_t>(i) * p.hidden;
        const double *wrow = p.w2.data() + static_cast<size_t>(i) * p.hidden;
        for (uint32_t j = 0; j < p.hidden; ++j) {
            row[j] += da2[i] * s.h1[j];
            dh1[j] += da2[i] * wrow[j];
        }
    }
    for (uint32_t i = 0; i < p.hidden; ++i) {
        double da1 = dh1[i] * (1.0 - s.h1[i] * s.h1[i]);
        g.b1[i] += da1;
        double *row = g.w1.data() + static_cast<size_t>(i) * p.input_dim;
        for (uint32_t j = 0; j < p.input_dim; ++j) row[j] += da1 * x[j];
    }
}

double matching_loss(const std::vector<uint32_t> &predicted, const std::vector<uint32_t> &truth) {
    std::vector<uint32_t> diff;
    std::set_symmetric_difference(predicted.begin(), predicted.end(), truth.begin(), truth.end(),
                                  std::back_inserter(diff));
    return static_cast<double>(diff.size()) / (static_cast<double>(truth.size()) + 1.0);
}

std::vector<double> spsa_gradient(const std::function<double(const std::vector<double> &)> &loss,
                                  const std::vector<double> &w, uint32_t q, double sigma,
                                  std::mt19937_64 &rng) {
    if (q < 1 || sigma <= 0) throw std::invalid_argument("spsa requires Q >= 1 and sigma > 0");
    std::vector<double> grad(w.size(), 0.0);
    std::vector<double> delta(w.size()), probe(w.size());
    std::normal_distribution<double> dist(0.0, sigma);
    for (uint32_t i = 0; i < q; ++i) {
        for (double &d : delta) d = dist(rng);
        for (size_t j = 0; j < w.size(); ++j) probe[j] = w[j] + delta[j];
        double lp = loss(probe);
        for (size_t j = 0; j < w.size(); ++j) probe[j] = w[j] - delta[j];
        double lm = loss(probe);
        double diff = lp - lm;
        for (size_t j = 0; j < w.size(); ++j) grad[j] += diff * delta[j];
    }
    double norm = 1.0 / (2.0 * static_cast<double>(q) * sigma * sigma);
    for (double &g : grad) g *= norm;
    return grad;
}

namespace {

struct Adam {
    double lr, wd;
    uint64_t t = 0;
    MlpGrads m, v;

    Adam(const MlpParams &p, double lr, double wd) : lr(lr), wd(wd), m(p), v(p) {}

    void step(MlpParams &p, const MlpGrads &g) {
        ++t;
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        auto upd = [&](std::vector<double> &w, std::vector<double> &mm, std::vector<double> &vv,
                       const std::vector<double> &gg) {
            for (size_t i = 0; i < w.size(); ++i) {
                mm[i] = b1 * mm[i] + (1.0 - b1) * gg[i];
                vv[i] = b2 * vv[i] + (1.0 - b2) * gg[i] * gg[i];
                double mhat = mm[i] / c1;
                double vhat = vv[i] / c2;
                w[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + wd * w[i]);
            }
        };
        upd(p.w1, m.w1, v.w1, g.w1);
        upd(p.b1, m.b1, v.b1, g.b1);
        upd(p.w2, m.w2, v.w2, g.w2);
        upd(p.b2, m.b2, v.b2, g.b2);
        upd(p.w3, m.w3, v.w3, g.w3);
        upd(p.b3, m.b3, v.b3, g.b3);
    }
};

std::vector<double> clamp_nonneg(const std::vector<double> &w) {
    std::vector<double> out(w.size());
    for (size_t i = 0; i < w.size(); ++i) out[i] = std::max(w[i], 0.0);
    return out;
}

}  // namespace

TrainResult train_nn(const Decoder &decoder, const PairProbs &pair_probs,
                     const std::vector<TrainSample> &dataset, const TrainConfig &config, uint64_t seed) {
    if (dataset.empty()) throw std::invalid_argument("training dataset is empty");
    const DecodingGraph &graph = decoder.graph();
    FeatureExtractor fx(graph);
    const uint32_t dim = fx.schema().dim();

    TrainResult result;
    result.params = init_mlp(fx.schema(), config.hidden, seed);
    MlpParams &params = result.params;
    MlpGrads grads(params);
    Adam adam(params, config.learning_rate, config.weight_decay);
    std::mt19937_64 rng(seed ^ 0x5350534154524eULL);

    std::vector<size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t start = 0; start < order.size(); start += config.batch_size) {
            size_t end = std::min(order.size(), start + config.batch_size);
            grads.zero();
            double batch_loss = 0;
            for (size_t k = start; k < end; ++k) {
                const TrainSample &sample = dataset[order[k]];
                Matching m0 = decoder.decode(sample.flipped);
                std::vector<uint8_t> in_m0(graph.edges.size(), 0);
                for (uint32_t e : m0.edges) in_m0[e] = 1;
                std::vector<double> feats = fx.extract_all(in_m0, pair_probs);

                std::vector<double> wt(graph.edges.size());
                for (uint32_t e = 0; e < wt.size(); ++e) {
                    wt[e] = decoder.weights()[e] +
                            mlp_forward(params, feats.data() + static_cast<size_t>(e) * dim);
                }
                auto loss_fn = [&](const std::vector<double> &w) {
                    Matching m = decode_with_weights(graph, clamp_nonneg(w), sample.flipped);
                    return matching_loss(m.edges, sample.truth_edges);
                };
                batch_loss += loss_fn(wt);
                std::vector<double> gw = spsa_gradient(loss_fn, wt, config.spsa_q, config.spsa_sigma, rng);
                for (uint32_t e = 0; e < gw.size(); ++e) {
                    if (gw[e] != 0.0) {
                        mlp_backward(params, feats.data() + static_cast<size_t>(e) * dim, gw[e], grads);
                    }
                }
            }
            double inv = 1.0 / static_cast<double>(end - start);
            auto scale = [&](std::vector<double> &v) {
                for (double &x : v) x *= inv;
            };
            scale(grads.w1);
            scale(grads.b1);
            scale(grads.w2);
            scale(grads.b2);
            scale(grads.w3);
            scale(grads.b3);
            adam.step(params, grads);
            result.loss_curve.push_back(batch_loss * inv);
        }
    }
    return result;
}

std::vector<double> nn_corr_reweight(const DecodingGraph &graph, const std::vector<double> &weights,
                                     const Matching &m0, const PairProbs &pair_probs,
                                     const MlpParams &params) {
    FeatureExtractor fx(graph);
    if (!(fx.schema() == params.schema)) {
        throw std::invalid_argument("MLP parameters were trained for a different feature schema");
    }
    std::vector<uint8_t> in_m0(graph.edges.size(), 0);
    for (uint32_t e : m0.edges) in_m0[e] = 1;
    std::vector<double> feats = fx.extract_all(in_m0, pair_probs);
    std::vector<double> out(weights.size());
    const uint32_t dim = fx.schema().dim();
    for (uint32_t e = 0; e < out.size(); ++e) {
        double delta = mlp_forward(params, feats.data() + static_cast<size_t>(e) * dim);
        out[e] = std::max(weights[e] + delta, 0.0);
    }
    return out;
}

namespace {

void write_matrix(std::ostream &out, const char *name, const std::vector<double> &v) {
    out << name << " " << v.size();
    out << std::setprecision(17);
    for (double x : v) out << " " << x;
    out << "\n";
}

std::vector<double> read_matrix(std::istream &in, const char *name) {
    std::string word;
    size_t count = 0;
    if (!(in >> word >> count) || word != name) {
        throw std::runtime_error("malformed MLP parameter file");
    }
    std::vector<double> v(count);
    for (double &x : v) {
        if (!(in >> x)) throw std::runtime_error("malformed MLP parameter file");
    }
    return v;
}

}  // namespace

void write_mlp_file(const MlpParams &params, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "mlp v1 types " << params.schema.num_types << " kmax " << params.schema.k_max << " hidden "
        << params.hidden << "\n";
    write_matrix(out, "w1", params.w1);
    write_matrix(out, "b1", params.b1);
    write_matrix(out, "w2", params.w2);
    write_matrix(out, "b2", params.b2);
    write_matrix(out, "w3", params.w3);
    write_matrix(out, "b3", params.b3);
    if (!out) throw std::runtime_error("failed writing " + path);
}

MlpParams read_mlp_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string word;
    MlpParams p;
    std::string version;
    if (!(in >> word >> version) || word != "mlp" || version != "v1") {
        throw std::runtime_error("unrecognized MLP parameter file header in " + path);
    }
    if (!(in >> word >> p.schema.num_types) || word != "types" || !(in >> word >> p.schema.k_max) ||
        word != "kmax" || !(in >> word >> p.hidden) || word != "hidden") {
        throw std::runtime_error("unrecognized MLP parameter file header in " + path);
    }
    p.input_dim = p.schema.dim();
    p.w1 = read_matrix(in, "w1");
    p.b1 = read_matrix(in, "b1");
    p.w2 = read_matrix(in, "w2");
    p.b2 = read_matrix(in, "b2");
    p.w3 = read_matrix(in, "w3");
    p.b3 = read_matrix(in, "b3");
    if (p.w1.size() != static_cast<size_t>(p.hidden) * p.input_dim || p.b1.size() != p.hidden ||
        p.w2.size() != static_cast<size_t>(p.hidden) * p.hidden || p.b2.size() != p.hidden ||
        p.w3.size() != p.hidden || p.b3.size() != 1) {
        throw std::runtime_error("MLP parameter file shapes are inconsistent: " + path);
    }
    return p;
}

}  // namespace dgr
