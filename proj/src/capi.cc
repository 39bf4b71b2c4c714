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

#include "dgr/dgr.h"

#include <cstring>
#include <filesystem>
#include <optional>
#include <fstream>
#include <sstream>

#include "dgr/harness.h"
#include "dgr/matcher.h"

namespace {

thread_local std::string g_last_error = "no error";

int fail(int code, const std::string &msg) {
    g_last_error = msg;
    return code;
}

template <typename F>
int guarded(F &&f) {
    try {
        return f();
    } catch (const dgr::ParseError &e) {
        return fail(DGR_ERR_PARSE, e.what());
    } catch (const dgr::ConfigError &e) {
        return fail(DGR_ERR_CONFIG, e.what());
    } catch (const std::invalid_argument &e) {
        return fail(DGR_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::domain_error &e) {
        return fail(DGR_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception &e) {
        return fail(DGR_ERR_RUNTIME, e.what());
    }
}

char *copy_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int require(bool ok, const char *what) {
    if (!ok) return fail(DGR_ERR_INVALID_ARGUMENT, std::string("null argument: ") + what);
    return DGR_OK;
}

namespace fs = std::filesystem;

}  // namespace

struct dgr_model {
    dgr::DetectorErrorModel model;
};

struct dgr_graph {
    dgr::DecodingGraph graph;
};

struct dgr_decoder {
    dgr::Decoder decoder;
};

struct dgr_config {
    dgr::ExperimentConfig config;
};

extern "C" {

const char *dgr_last_error(void) { return g_last_error.c_str(); }

void dgr_string_free(char *s) { std::free(s); }
void dgr_buffer_free(void *p) { std::free(p); }

int dgr_model_from_text(const char *text, dgr_model **out) {
    if (int rc = require(text && out, "text/out")) return rc;
    return guarded([&] {
        auto *m = new dgr_model{dgr::parse_dem(text)};
        *out = m;
        return DGR_OK;
    });
}

int dgr_model_from_file(const char *path, dgr_model **out) {
    if (int rc = require(path && out, "path/out")) return rc;
    if (!std::ifstream(path)) return fail(DGR_ERR_IO, std::string("cannot open ") + path);
    return guarded([&] {
        *out = new dgr_model{dgr::read_dem_file(path)};
        return DGR_OK;
    });
}

int dgr_model_generate(int distance, int rounds, double p, double p_meas, double y_bias, dgr_model **out) {
    if (int rc = require(out != nullptr, "out")) return rc;
    return guarded([&] {
        dgr::SurfaceCodeSpec spec;
        spec.distance = distance;
        spec.rounds = rounds > 0 ? rounds : 0;
        spec.p = p;
        spec.p_meas = p_meas;
        spec.y_bias = y_bias;
        spec.validate();
        *out = new dgr_model{dgr::generate_surface_pheno(spec)};
        return DGR_OK;
    });
}

int dgr_model_mismatch_random(const dgr_model *model, double strength, uint64_t seed, dgr_model **out) {
    if (int rc = require(model && out, "model/out")) return rc;
    return guarded([&] {
        *out = new dgr_model{dgr::apply_random_mismatch(model->model, strength, seed)};
        return DGR_OK;
    });
}

int dgr_model_mismatch_worstcase(const dgr_model *model, double strength, dgr_model **out) {
    if (int rc = require(model && out, "model/out")) return rc;
    return guarded([&] {
        *out = new dgr_model{dgr::apply_worstcase_mismatch(model->model, strength)};
        return DGR_OK;
    });
}

int dgr_model_serialize(const dgr_model *model, char **text_out) {
    if (int rc = require(model && text_out, "model/text_out")) return rc;
    return guarded([&] {
        *text_out = copy_string(dgr::serialize_dem(model->model));
        return DGR_OK;
    });
}

int dgr_model_write_file(const dgr_model *model, const char *path) {
    if (int rc = require(model && path, "model/path")) return rc;
    return guarded([&] {
        dgr::write_dem_file(model->model, path);
        return DGR_OK;
    });
}

uint32_t dgr_model_num_detectors(const dgr_model *model) { return model ? model->model.num_detectors : 0; }
uint32_t dgr_model_num_observables(const dgr_model *model) { return model ? model->model.num_observables : 0; }

void dgr_model_free(dgr_model *model) { delete model; }

int dgr_model_sample_to_file(const dgr_model *model, uint64_t count, uint64_t seed, const char *path) {
    if (int rc = require(model && path, "model/path")) return rc;
    return guarded([&] {
        std::ofstream out(path);
        if (!out) throw std::runtime_error(std::string("cannot open ") + path + " for writing");
        dgr::Sampler sampler(model->model);
        for (uint64_t i = 0; i < count; ++i) {
            dgr::Shot shot = sampler.sample(seed, i);
            dgr::write_shot_line(out, i, shot, model->model.num_detectors, model->model.num_observables);
        }
        if (!out) throw std::runtime_error(std::string("failed writing ") + path);
        return DGR_OK;
    });
}

int dgr_graph_build(const dgr_model *model, dgr_graph **out) {
    if (int rc = require(model && out, "model/out")) return rc;
    return guarded([&] {
        *out = new dgr_graph{dgr::build_decoding_graph(model->model)};
        return DGR_OK;
    });
}

size_t dgr_graph_num_edges(const dgr_graph *graph) { return graph ? graph->graph.edges.size() : 0; }

int dgr_graph_weights(const dgr_graph *graph, double *weights_out) {
    if (int rc = require(graph && weights_out, "graph/weights_out")) return rc;
    for (size_t i = 0; i < graph->graph.edges.size(); ++i) weights_out[i] = graph->graph.edges[i].weight;
    return DGR_OK;
}

void dgr_graph_free(dgr_graph *graph) { delete graph; }

int dgr_decoder_new(const dgr_graph *graph, const double *weights, size_t num_weights, dgr_decoder **out) {
    if (int rc = require(graph && out, "graph/out")) return rc;
    return guarded([&] {
        if (weights) {
            *out = new dgr_decoder{dgr::Decoder(graph->graph, std::vector<double>(weights, weights + num_weights))};
        } else {
            *out = new dgr_decoder{dgr::Decoder(graph->graph)};
        }
        return DGR_OK;
    });
}

int dgr_decoder_decode(const dgr_decoder *decoder, const uint32_t *flipped, size_t num_flipped,
                       uint64_t *observables_out) {
    if (int rc = require(decoder && observables_out && (flipped || num_flipped == 0), "decoder/flipped/out")) {
        return rc;
    }
    return guarded([&] {
        std::vector<uint32_t> f(flipped, flipped + num_flipped);
        dgr::Matching m = decoder->decoder.decode(f);
        *observables_out = dgr::predict_observables(decoder->decoder.graph(), m);
        return DGR_OK;
    });
}

int dgr_decoder_decode_edges(const dgr_decoder *decoder, const uint32_t *flipped, size_t num_flipped,
                             uint32_t **edges_out, size_t *num_edges_out) {
    if (int rc = require(decoder && edges_out && num_edges_out && (flipped || num_flipped == 0),
                         "decoder/flipped/out")) {
        return rc;
    }
    return guarded([&] {
        std::vector<uint32_t> f(flipped, flipped + num_flipped);
        dgr::Matching m = decoder->decoder.decode(f);
        auto *buf = static_cast<uint32_t *>(std::malloc(sizeof(uint32_t) * std::max<size_t>(m.edges.size(), 1)));
        std::memcpy(buf, m.edges.data(), sizeof(uint32_t) * m.edges.size());
        *edges_out = buf;
        *num_edges_out = m.edges.size();
        return DGR_OK;
    });
}

void dgr_decoder_free(dgr_decoder *decoder) { delete decoder; }

int dgr_decoder_decode_file(const dgr_decoder *decoder, const char *shots_path, const char *out_path) {
    if (int rc = require(decoder && shots_path && out_path, "decoder/paths")) return rc;
    if (!std::ifstream(shots_path)) return fail(DGR_ERR_IO, std::string("cannot open ") + shots_path);
    return guarded([&] {
        std::ifstream in(shots_path);
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error(std::string("cannot open ") + out_path + " for writing");
        const dgr::DecodingGraph &graph = decoder->decoder.graph();
        std::string line;
        uint64_t errors = 0, shots = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            uint64_t index = 0;
            dgr::Shot shot = dgr::parse_shot_line(line, graph.num_detectors, &index);
            dgr::Matching m = decoder->decoder.decode(shot.flipped);
            uint64_t predicted = dgr::predict_observables(graph, m);
            bool ok = predicted == shot.observables;
            out << "shot " << index << " P:" << std::hex << predicted << std::dec << (ok ? " ok" : " err")
                << "\n";
            ++shots;
            if (!ok) ++errors;
        }
        out << "errors " << errors << " shots " << shots << "\n";
        if (!out) throw std::runtime_error(std::string("failed writing ") + out_path);
        return DGR_OK;
    });
}

int dgr_config_from_file(const char *path, dgr_config **out) {
    if (int rc = require(path && out, "path/out")) return rc;
    if (!std::ifstream(path)) return fail(DGR_ERR_CONFIG, std::string("cannot open config file: ") + path);
    return guarded([&] {
        *out = new dgr_config{dgr::read_config_file(path)};
        return DGR_OK;
    });
}

int dgr_config_from_text(const char *text, dgr_config **out) {
    if (int rc = require(text && out, "text/out")) return rc;
    return guarded([&] {
        *out = new dgr_config{dgr::parse_config(text)};
        return DGR_OK;
    });
}

int dgr_config_set(dgr_config *config, const char *section, const char *key, const char *value) {
    if (int rc = require(config && section && key && value, "config/section/key/value")) return rc;
    return guarded([&] {
        dgr::apply_config_value(config->config, section, key, value);
        return DGR_OK;
    });
}

void dgr_config_free(dgr_config *config) { delete config; }

int dgr_run_experiment(const dgr_config *config, const char *out_dir, char **report_json_out) {
    if (int rc = require(config != nullptr, "config")) return rc;
    return guarded([&] {
        dgr::RunArtifacts artifacts;
        dgr::MetricsReport report = dgr::run_experiment(config->config, &artifacts);
        std::ostringstream json;
        dgr::write_report_json(report, config->config, json);
        if (out_dir) {
            fs::create_directories(out_dir);
            {
                std::ofstream out(fs::path(out_dir) / "metrics.csv");
                dgr::write_metrics_csv(report, out);
            }
            {
                std::ofstream out(fs::path(out_dir) / "report.json");
                out << json.str();
            }
            if (!artifacts.heatmap_csv.empty()) {
                std::ofstream out(fs::path(out_dir) / "heatmap.csv");
                out << artifacts.heatmap_csv;
            }
            if (!artifacts.nn_loss_curve.empty()) {
                std::ofstream out(fs::path(out_dir) / "loss_curve.csv");
                out << "batch,loss\n";
                for (size_t i = 0; i < artifacts.nn_loss_curve.size(); ++i) {
                    out << i << "," << artifacts.nn_loss_curve[i] << "\n";
                }
            }
        }
        if (report_json_out) *report_json_out = copy_string(json.str());
        return DGR_OK;
    });
}

int dgr_run_sweep(const dgr_config *config, const char *axis, const double *values, size_t num_values,
                  char **csv_out) {
    if (int rc = require(config && axis && csv_out && (values || num_values == 0), "config/axis/values/out")) {
        return rc;
    }
    return guarded([&] {
        auto rows = dgr::sweep(config->config, axis, std::vector<double>(values, values + num_values));
        std::ostringstream csv;
        dgr::write_sweep_csv(axis, rows, csv);
        *csv_out = copy_string(csv.str());
        return DGR_OK;
    });
}

int dgr_run_threshold(const dgr_config *config, const uint32_t *distances, size_t num_distances,
                      const double *ps, size_t num_ps, char **csv_out) {
    if (int rc = require(config && distances && ps && csv_out, "config/distances/ps/out")) return rc;
    return guarded([&] {
        auto est = dgr::estimate_threshold(config->config,
                                           std::vector<uint32_t>(distances, distances + num_distances),
                                           std::vector<double>(ps, ps + num_ps));
        std::ostringstream csv;
        csv << "arm,threshold\n";
        csv.precision(12);
        for (const auto &[name, p] : est.crossing) csv << name << "," << p << "\n";
        *csv_out = copy_string(csv.str());
        return DGR_OK;
    });
}

int dgr_train_nn(const dgr_config *config, const char *params_path, char **loss_csv_out) {
    if (int rc = require(config && params_path, "config/params_path")) return rc;
    return guarded([&] {
        const dgr::ExperimentConfig &cfg = config->config;
        dgr::DetectorErrorModel base =
            cfg.dem_path.empty() ? dgr::generate_surface_pheno(cfg.code) : dgr::read_dem_file(cfg.dem_path);
        dgr::DetectorErrorModel true_model = base;
        if (cfg.mismatch.kind == dgr::MismatchKind::kRandom) {
            true_model = dgr::apply_random_mismatch(base, cfg.mismatch.strength, cfg.mismatch.seed);
        } else if (cfg.mismatch.kind == dgr::MismatchKind::kWorstCase) {
            true_model = dgr::apply_worstcase_mismatch(base, cfg.mismatch.strength);
        }
        dgr::DecodingGraph graph = dgr::build_decoding_graph(true_model);
        dgr::Sampler sampler(true_model);

        // Trace with the base-model weights, as the experiment arms do.
        dgr::DecodingGraph graph_base = dgr::build_decoding_graph(base);
        std::vector<double> w_mismatch;
        for (const dgr::Edge &e : graph_base.edges) w_mismatch.push_back(e.weight);
        dgr::Decoder mismatched(graph, w_mismatch);
        std::optional<dgr::Decoder> aligned;
        dgr::PairProbs pair_probs;
        const dgr::Decoder *tracer = &mismatched;
        for (uint64_t iter = 0; iter < cfg.policy.align_iters; ++iter) {
            dgr::TraceStore store(graph, false, cfg.policy.window);
            uint64_t trace_seed = cfg.seed ^ 0x545241434552ULL ^ (iter * 0x6974657261ULL);
            for (uint64_t i = 0; i < cfg.t_trace; ++i) {
                store.record(tracer->decode(sampler.sample(trace_seed, i).flipped));
            }
            pair_probs = store.estimate_pair_probs();
            aligned.emplace(graph, dgr::alignment_reweight(graph, store.estimate_edge_probs()));
            tracer = &*aligned;
        }

        uint32_t tau = cfg.policy.tau;
        if (tau == 0) tau = dgr::calibrate_tau(sampler, 2000, cfg.seed ^ 0x43414c4942ULL);
        auto dataset = dgr::build_training_set(sampler, graph, true_model, cfg.train_dataset, tau,
                                               cfg.seed ^ 0x545241494eULL);
        dgr::TrainResult tr = dgr::train_nn(*aligned, pair_probs, dataset, cfg.train, cfg.seed);
        dgr::write_mlp_file(tr.params, params_path);
        if (loss_csv_out) {
            std::ostringstream csv;
            csv << "batch,loss\n";
            for (size_t i = 0; i < tr.loss_curve.size(); ++i) csv << i << "," << tr.loss_curve[i] << "\n";
            *loss_csv_out = copy_string(csv.str());
        }
        return DGR_OK;
    });
}

}  // extern "C"
