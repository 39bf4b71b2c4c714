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

// Command-line front end for the DGR workbench, built on the C API only.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dgr/dgr.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(int rc) {
    switch (rc) {
        case DGR_OK:
            return kExitOk;
        case DGR_ERR_CONFIG:
        case DGR_ERR_PARSE:
        case DGR_ERR_INVALID_ARGUMENT:
            return kExitConfig;
        default:
            return kExitRuntime;
    }
}

[[nodiscard]] int check(int rc) {
    if (rc != DGR_OK) {
        std::cerr << "error: " << dgr_last_error() << "\n";
    }
    return exit_code_for(rc);
}

struct ModelDeleter {
    void operator()(dgr_model *m) const { dgr_model_free(m); }
};
struct GraphDeleter {
    void operator()(dgr_graph *g) const { dgr_graph_free(g); }
};
struct DecoderDeleter {
    void operator()(dgr_decoder *d) const { dgr_decoder_free(d); }
};
struct ConfigDeleter {
    void operator()(dgr_config *c) const { dgr_config_free(c); }
};
using ModelPtr = std::unique_ptr<dgr_model, ModelDeleter>;
using GraphPtr = std::unique_ptr<dgr_graph, GraphDeleter>;
using DecoderPtr = std::unique_ptr<dgr_decoder, DecoderDeleter>;
using ConfigPtr = std::unique_ptr<dgr_config, ConfigDeleter>;

struct StringOut {
    char *s = nullptr;
    ~StringOut() { dgr_string_free(s); }
};

int load_config(const std::string &path, uint64_t *seed, const std::string &arms, ConfigPtr &out) {
    dgr_config *cfg = nullptr;
    if (int rc = dgr_config_from_file(path.c_str(), &cfg); rc != DGR_OK) return rc;
    out.reset(cfg);
    if (seed) {
        if (int rc = dgr_config_set(cfg, "run", "seed", std::to_string(*seed).c_str()); rc != DGR_OK) {
            return rc;
        }
    }
    if (!arms.empty()) {
        if (int rc = dgr_config_set(cfg, "run", "arms", arms.c_str()); rc != DGR_OK) return rc;
    }
    return DGR_OK;
}

int write_text_file(const std::string &path, const char *text) {
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot open " << path << " for writing\n";
        return kExitRuntime;
    }
    out << text;
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"DGR decoding workbench: surface-code model generation, sampling, MWPM decoding, and "
                 "decoding-graph re-weighting experiments"};
    app.require_subcommand(1);
    int jobs = 1;
    app.add_option("--jobs", jobs, "Worker count (reserved; execution is currently serial)");

    // gen -----------------------------------------------------------------
    auto *gen = app.add_subcommand("gen", "Generate a surface-code detector error model");
    int distance = 3, rounds = 0;
    double p = 0.001, p_meas = -1, y_bias = 1.0;
    std::string mismatch_kind = "none";
    double strength = 1.0;
    uint64_t mismatch_seed = 0;
    std::string gen_out = "-";
    gen->add_option("-d,--distance", distance, "Code distance (odd, >= 3)");
    gen->add_option("-r,--rounds", rounds, "Measurement rounds (0 = distance)");
    gen->add_option("-p,--p", p, "Physical error rate");
    gen->add_option("--p-meas", p_meas, "Measurement flip rate (< 0 = p)");
    gen->add_option("--y-bias", y_bias, "Y-bias eta");
    gen->add_option("--mismatch", mismatch_kind, "Mismatch kind: none|random|worstcase");
    gen->add_option("--strength", strength, "Mismatch strength N");
    gen->add_option("--mismatch-seed", mismatch_seed, "Random-mismatch seed");
    gen->add_option("-o,--out", gen_out, "Output DEM path (- = stdout)");

    // sample --------------------------------------------------------------
    auto *sample = app.add_subcommand("sample", "Sample syndrome shots from a model");
    std::string sample_dem, sample_out = "shots.txt";
    uint64_t shots = 1000, seed = 0;
    sample->add_option("--dem", sample_dem, "Input DEM path")->required();
    sample->add_option("-n,--shots", shots, "Shot count");
    sample->add_option("--seed", seed, "Sampler seed");
    sample->add_option("-o,--out", sample_out, "Output shot-dump path");

    // decode --------------------------------------------------------------
    auto *decode = app.add_subcommand("decode", "Decode a shot dump with MWPM");
    std::string decode_dem, decode_shots, decode_out = "predictions.txt", weights_dem;
    decode->add_option("--dem", decode_dem, "DEM path (graph + weights)")->required();
    decode->add_option("--shots", decode_shots, "Shot-dump path")->required();
    decode->add_option("--weights-dem", weights_dem,
                       "Optional second DEM supplying decode weights (same topology)");
    decode->add_option("-o,--out", decode_out, "Output predictions path");

    // bench ---------------------------------------------------------------
    auto *bench = app.add_subcommand("bench", "Run a configured experiment (all arms, paired shots)");
    std::string bench_config, bench_out, bench_arms;
    uint64_t bench_seed = 0;
    bool bench_seed_set = false;
    bench->add_option("-c,--config", bench_config, "Experiment config path")->required();
    bench->add_option("--seed", bench_seed, "Override run seed")->each([&](const std::string &) {
        bench_seed_set = true;
    });
    bench->add_option("--arms", bench_arms, "Override arm list (comma separated)");
    bench->add_option("-o,--out", bench_out, "Output directory for metrics/report files");

    // sweep ---------------------------------------------------------------
    auto *sweep_cmd = app.add_subcommand("sweep", "Sweep one axis of an experiment");
    std::string sweep_config, sweep_axis, sweep_out, sweep_arms;
    std::vector<double> sweep_values;
    uint64_t sweep_seed = 0;
    bool sweep_seed_set = false;
    sweep_cmd->add_option("-c,--config", sweep_config, "Experiment config path")->required();
    sweep_cmd->add_option("--axis", sweep_axis, "Axis: p|d|N|t_trace")->required();
    sweep_cmd->add_option("--values", sweep_values, "Axis values")->required()->delimiter(',');
    sweep_cmd->add_option("--seed", sweep_seed, "Override run seed")->each([&](const std::string &) {
        sweep_seed_set = true;
    });
    sweep_cmd->add_option("--arms", sweep_arms, "Override arm list (comma separated)");
    sweep_cmd->add_option("-o,--out", sweep_out, "Output CSV path (default stdout)");

    // train-nn ------------------------------------------------------------
    auto *train = app.add_subcommand("train-nn", "Train the NN re-weighter for a config");
    std::string train_config, train_params = "nn_params.txt", train_loss;
    uint64_t train_seed = 0;
    bool train_seed_set = false;
    train->add_option("-c,--config", train_config, "Experiment config path")->required();
    train->add_option("--seed", train_seed, "Override run seed")->each([&](const std::string &) {
        train_seed_set = true;
    });
    train->add_option("-o,--out", train_params, "Output parameter file");
    train->add_option("--loss-out", train_loss, "Loss-curve CSV path");

    // threshold -----------------------------------------------------------
    auto *thresh = app.add_subcommand("threshold", "Estimate per-arm threshold crossings");
    std::string thresh_config, thresh_out, thresh_arms;
    std::vector<uint32_t> thresh_ds;
    std::vector<double> thresh_ps;
    uint64_t thresh_seed = 0;
    bool thresh_seed_set = false;
    thresh->add_option("-c,--config", thresh_config, "Experiment config path")->required();
    thresh->add_option("--distances", thresh_ds, "Code distances")->required()->delimiter(',');
    thresh->add_option("--ps", thresh_ps, "Physical error rates bracketing the crossing")
        ->required()
        ->delimiter(',');
    thresh->add_option("--seed", thresh_seed, "Override run seed")->each([&](const std::string &) {
        thresh_seed_set = true;
    });
    thresh->add_option("--arms", thresh_arms, "Override arm list (comma separated)");
    thresh->add_option("-o,--out", thresh_out, "Output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (gen->parsed()) {
        dgr_model *raw = nullptr;
        if (int rc = dgr_model_generate(distance, rounds, p, p_meas, y_bias, &raw); rc != DGR_OK) {
            return check(rc);
        }
        ModelPtr model(raw);
        if (mismatch_kind == "random") {
            dgr_model *mutated = nullptr;
            if (int rc = dgr_model_mismatch_random(model.get(), strength, mismatch_seed, &mutated);
                rc != DGR_OK) {
                return check(rc);
            }
            model.reset(mutated);
        } else if (mismatch_kind == "worstcase") {
            dgr_model *mutated = nullptr;
            if (int rc = dgr_model_mismatch_worstcase(model.get(), strength, &mutated); rc != DGR_OK) {
                return check(rc);
            }
            model.reset(mutated);
        } else if (mismatch_kind != "none") {
            std::cerr << "error: unknown mismatch kind: " << mismatch_kind << "\n";
            return kExitConfig;
        }
        if (gen_out == "-") {
            StringOut text;
            if (int rc = dgr_model_serialize(model.get(), &text.s); rc != DGR_OK) return check(rc);
            std::cout << text.s;
            return kExitOk;
        }
        return check(dgr_model_write_file(model.get(), gen_out.c_str()));
    }

    if (sample->parsed()) {
        dgr_model *raw = nullptr;
        if (int rc = dgr_model_from_file(sample_dem.c_str(), &raw); rc != DGR_OK) return check(rc);
        ModelPtr model(raw);
        return check(dgr_model_sample_to_file(model.get(), shots, seed, sample_out.c_str()));
    }

    if (decode->parsed()) {
        dgr_model *raw = nullptr;
        if (int rc = dgr_model_from_file(decode_dem.c_str(), &raw); rc != DGR_OK) return check(rc);
        ModelPtr model(raw);
        dgr_graph *graw = nullptr;
        if (int rc = dgr_graph_build(model.get(), &graw); rc != DGR_OK) return check(rc);
        GraphPtr graph(graw);

        std::vector<double> weights;
        if (!weights_dem.empty()) {
            dgr_model *wraw = nullptr;
            if (int rc = dgr_model_from_file(weights_dem.c_str(), &wraw); rc != DGR_OK) return check(rc);
            ModelPtr wmodel(wraw);
            dgr_graph *wgraw = nullptr;
            if (int rc = dgr_graph_build(wmodel.get(), &wgraw); rc != DGR_OK) return check(rc);
            GraphPtr wgraph(wgraw);
            weights.resize(dgr_graph_num_edges(wgraph.get()));
            if (int rc = dgr_graph_weights(wgraph.get(), weights.data()); rc != DGR_OK) return check(rc);
        }
        dgr_decoder *draw = nullptr;
        if (int rc = dgr_decoder_new(graph.get(), weights.empty() ? nullptr : weights.data(), weights.size(),
                                     &draw);
            rc != DGR_OK) {
            return check(rc);
        }
        DecoderPtr dec(draw);
        return check(dgr_decoder_decode_file(dec.get(), decode_shots.c_str(), decode_out.c_str()));
    }

    if (bench->parsed()) {
        ConfigPtr cfg;
        if (int rc = load_config(bench_config, bench_seed_set ? &bench_seed : nullptr, bench_arms, cfg);
            rc != DGR_OK) {
            return check(rc);
        }
        StringOut report;
        if (int rc = dgr_run_experiment(cfg.get(), bench_out.empty() ? nullptr : bench_out.c_str(), &report.s);
            rc != DGR_OK) {
            return check(rc);
        }
        std::cout << report.s;
        return kExitOk;
    }

    if (sweep_cmd->parsed()) {
        ConfigPtr cfg;
        if (int rc = load_config(sweep_config, sweep_seed_set ? &sweep_seed : nullptr, sweep_arms, cfg);
            rc != DGR_OK) {
            return check(rc);
        }
        StringOut csv;
        if (int rc = dgr_run_sweep(cfg.get(), sweep_axis.c_str(), sweep_values.data(), sweep_values.size(),
                                   &csv.s);
            rc != DGR_OK) {
            return check(rc);
        }
        if (sweep_out.empty()) {
            std::cout << csv.s;
            return kExitOk;
        }
        return write_text_file(sweep_out, csv.s);
    }

    if (train->parsed()) {
        ConfigPtr cfg;
        if (int rc = load_config(train_config, train_seed_set ? &train_seed : nullptr, "", cfg);
            rc != DGR_OK) {
            return check(rc);
        }
        StringOut loss;
        if (int rc = dgr_train_nn(cfg.get(), train_params.c_str(), train_loss.empty() ? nullptr : &loss.s);
            rc != DGR_OK) {
            return check(rc);
        }
        if (!train_loss.empty()) return write_text_file(train_loss, loss.s);
        return kExitOk;
    }

    if (thresh->parsed()) {
        ConfigPtr cfg;
        if (int rc = load_config(thresh_config, thresh_seed_set ? &thresh_seed : nullptr, thresh_arms, cfg);
            rc != DGR_OK) {
            return check(rc);
        }
        StringOut csv;
        if (int rc = dgr_run_threshold(cfg.get(), thresh_ds.data(), thresh_ds.size(), thresh_ps.data(),
                                       thresh_ps.size(), &csv.s);
            rc != DGR_OK) {
            return check(rc);
        }
        if (thresh_out.empty()) {
            std::cout << csv.s;
            return kExitOk;
        }
        return write_text_file(thresh_out, csv.s);
    }

    return kExitConfig;
}
