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
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

namespace {

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

TEST(CapiModel, TextRoundTripAndErrors) {
    dgr_model *model = nullptr;
    ASSERT_EQ(dgr_model_from_text("dem v1 detectors 2 observables 1\nerror(0.1) D0 D1 L0\n", &model),
              DGR_OK);
    EXPECT_EQ(dgr_model_num_detectors(model), 2u);
    EXPECT_EQ(dgr_model_num_observables(model), 1u);

    char *text = nullptr;
    ASSERT_EQ(dgr_model_serialize(model, &text), DGR_OK);
    dgr_model *back = nullptr;
    ASSERT_EQ(dgr_model_from_text(text, &back), DGR_OK);
    char *text2 = nullptr;
    ASSERT_EQ(dgr_model_serialize(back, &text2), DGR_OK);
    EXPECT_STREQ(text, text2);
    dgr_string_free(text);
    dgr_string_free(text2);
    dgr_model_free(back);
    dgr_model_free(model);

    dgr_model *bad = nullptr;
    EXPECT_EQ(dgr_model_from_text("dem v1 detectors 2 observables 0\nerror(1.5) D0\n", &bad),
              DGR_ERR_PARSE);
    EXPECT_EQ(bad, nullptr);
    EXPECT_GT(std::strlen(dgr_last_error()), 0u);
    EXPECT_EQ(dgr_model_from_text(nullptr, &bad), DGR_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(dgr_model_from_file("/nonexistent/model.dem", &bad), DGR_ERR_IO);
}

TEST(CapiModel, GenerateAndMismatch) {
    dgr_model *model = nullptr;
    ASSERT_EQ(dgr_model_generate(3, 0, 0.01, -1, 1, &model), DGR_OK);
    EXPECT_EQ(dgr_model_num_detectors(model), 24u);

    dgr_model *rnd = nullptr;
    ASSERT_EQ(dgr_model_mismatch_random(model, 10, 7, &rnd), DGR_OK);
    EXPECT_EQ(dgr_model_num_detectors(rnd), 24u);
    dgr_model *worst = nullptr;
    ASSERT_EQ(dgr_model_mismatch_worstcase(model, 10, &worst), DGR_OK);
    EXPECT_EQ(dgr_model_num_detectors(worst), 24u);
    dgr_model_free(rnd);
    dgr_model_free(worst);

    dgr_model *bad = nullptr;
    EXPECT_EQ(dgr_model_generate(2, 0, 0.01, -1, 1, &bad), DGR_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(dgr_model_mismatch_random(model, 0.5, 7, &bad), DGR_ERR_INVALID_ARGUMENT);
    dgr_model_free(model);
}

TEST(CapiModel, FileRoundTripAndShotDump) {
    std::string dir = testing::TempDir();
    std::string dem_path = dir + "capi_model.dem";
    std::string shots_path = dir + "capi_shots.txt";
    std::string decode_path = dir + "capi_decoded.txt";

    dgr_model *model = nullptr;
    ASSERT_EQ(dgr_model_generate(3, 0, 0.02, -1, 1, &model), DGR_OK);
    ASSERT_EQ(dgr_model_write_file(model, dem_path.c_str()), DGR_OK);
    dgr_model *back = nullptr;
    ASSERT_EQ(dgr_model_from_file(dem_path.c_str(), &back), DGR_OK);
    EXPECT_EQ(dgr_model_num_detectors(back), 24u);

    ASSERT_EQ(dgr_model_sample_to_file(model, 50, 9, shots_path.c_str()), DGR_OK);
    std::string shots = read_file(shots_path);
    EXPECT_NE(shots.find("shot 0 D:"), std::string::npos);

    dgr_graph *graph = nullptr;
    ASSERT_EQ(dgr_graph_build(model, &graph), DGR_OK);
    dgr_decoder *decoder = nullptr;
    ASSERT_EQ(dgr_decoder_new(graph, nullptr, 0, &decoder), DGR_OK);
    ASSERT_EQ(dgr_decoder_decode_file(decoder, shots_path.c_str(), decode_path.c_str()), DGR_OK);
    std::string decoded = read_file(decode_path);
    EXPECT_NE(decoded.find("shot 0 P:"), std::string::npos);
    EXPECT_NE(decoded.find("shots 50"), std::string::npos);
    EXPECT_EQ(dgr_decoder_decode_file(decoder, "/nonexistent/shots.txt", decode_path.c_str()),
              DGR_ERR_IO);

    dgr_decoder_free(decoder);
    dgr_graph_free(graph);
    dgr_model_free(back);
    dgr_model_free(model);
    std::filesystem::remove(dem_path);
    std::filesystem::remove(shots_path);
    std::filesystem::remove(decode_path);
}

TEST(CapiDecoder, GraphAndDecode) {
    dgr_model *model = nullptr;
    ASSERT_EQ(dgr_model_from_text(
                  "dem v1 detectors 2 observables 1\nerror(0.1) D0 D1 L0\nerror(0.2) D0\nerror(0.2) D1\n",
                  &model),
              DGR_OK);
    dgr_graph *graph = nullptr;
    ASSERT_EQ(dgr_graph_build(model, &graph), DGR_OK);
    ASSERT_EQ(dgr_graph_num_edges(graph), 3u);
    double weights[3];
    ASSERT_EQ(dgr_graph_weights(graph, weights), DGR_OK);
    for (double w : weights) EXPECT_GT(w, 0.0);

    dgr_decoder *decoder = nullptr;
    ASSERT_EQ(dgr_decoder_new(graph, nullptr, 0, &decoder), DGR_OK);
    uint64_t obs = 1;
    uint32_t none[1] = {0};
    ASSERT_EQ(dgr_decoder_decode(decoder, none, 0, &obs), DGR_OK);
    EXPECT_EQ(obs, 0u);
    uint32_t both[2] = {0, 1};
    ASSERT_EQ(dgr_decoder_decode(decoder, both, 2, &obs), DGR_OK);
    EXPECT_EQ(obs, 1u);  // direct edge is cheaper than two boundary hops

    uint32_t *edges = nullptr;
    size_t num_edges = 0;
    ASSERT_EQ(dgr_decoder_decode_edges(decoder, both, 2, &edges, &num_edges), DGR_OK);
    ASSERT_EQ(num_edges, 1u);
    dgr_buffer_free(edges);

    uint32_t out_of_range[1] = {99};
    EXPECT_EQ(dgr_decoder_decode(decoder, out_of_range, 1, &obs), DGR_ERR_INVALID_ARGUMENT);
    dgr_decoder_free(decoder);

    dgr_decoder *bad = nullptr;
    double short_weights[1] = {1.0};
    EXPECT_EQ(dgr_decoder_new(graph, short_weights, 1, &bad), DGR_ERR_INVALID_ARGUMENT);
    dgr_graph_free(graph);
    dgr_model_free(model);
}

const char *kSmallConfig =
    "[code]\n"
    "distance = 3\n"
    "p = 0.02\n"
    "[mismatch]\n"
    "kind = random\n"
    "strength = 6\n"
    "seed = 3\n"
    "[shots]\n"
    "trace = 4000\n"
    "eval = 4000\n"
    "[run]\n"
    "seed = 5\n"
    "arms = oracle, mismatched, aligned\n";

TEST(CapiConfig, ParseSetAndErrors) {
    dgr_config *cfg = nullptr;
    ASSERT_EQ(dgr_config_from_text(kSmallConfig, &cfg), DGR_OK);
    EXPECT_EQ(dgr_config_set(cfg, "shots", "eval", "2000"), DGR_OK);
    EXPECT_EQ(dgr_config_set(cfg, "shots", "bogus", "1"), DGR_ERR_CONFIG);
    dgr_config_free(cfg);

    dgr_config *bad = nullptr;
    EXPECT_EQ(dgr_config_from_text("[run]\narms = bogus\n", &bad), DGR_ERR_CONFIG);
    EXPECT_EQ(dgr_config_from_file("/nonexistent/cfg.ini", &bad), DGR_ERR_CONFIG);
}

TEST(CapiRun, ExperimentWritesArtifacts) {
    dgr_config *cfg = nullptr;
    ASSERT_EQ(dgr_config_from_text(kSmallConfig, &cfg), DGR_OK);
    std::string out_dir = testing::TempDir() + "capi_run";
    char *report = nullptr;
    ASSERT_EQ(dgr_run_experiment(cfg, out_dir.c_str(), &report), DGR_OK);
    ASSERT_NE(report, nullptr);
    EXPECT_NE(std::string(report).find("\"arms\""), std::string::npos);
    dgr_string_free(report);

    EXPECT_TRUE(std::filesystem::exists(out_dir + "/metrics.csv"));
    EXPECT_TRUE(std::filesystem::exists(out_dir + "/report.json"));
    EXPECT_TRUE(std::filesystem::exists(out_dir + "/heatmap.csv"));
    std::string csv = read_file(out_dir + "/metrics.csv");
    EXPECT_NE(csv.find("oracle,4000,"), std::string::npos);
    EXPECT_NE(csv.find("aligned,4000,"), std::string::npos);
    dgr_config_free(cfg);
    std::filesystem::remove_all(out_dir);
}

TEST(CapiRun, SweepAndThreshold) {
    dgr_config *cfg = nullptr;
    ASSERT_EQ(dgr_config_from_text("[code]\ndistance = 3\np = 0.02\n[shots]\neval = 2000\n"
                                   "[run]\nseed = 1\narms = oracle\n",
                                   &cfg),
              DGR_OK);
    double ps[2] = {0.005, 0.02};
    char *csv = nullptr;
    ASSERT_EQ(dgr_run_sweep(cfg, "p", ps, 2, &csv), DGR_OK);
    EXPECT_NE(std::string(csv).find("p,arm,"), std::string::npos);
    dgr_string_free(csv);
    EXPECT_EQ(dgr_run_sweep(cfg, "bogus", ps, 2, &csv), DGR_ERR_CONFIG);

    uint32_t distances[2] = {3, 5};
    double grid[3] = {0.005, 0.02, 0.06};
    char *th = nullptr;
    ASSERT_EQ(dgr_run_threshold(cfg, distances, 2, grid, 3, &th), DGR_OK);
    EXPECT_NE(std::string(th).find("arm,threshold"), std::string::npos);
    EXPECT_NE(std::string(th).find("oracle,"), std::string::npos);
    dgr_string_free(th);
    dgr_config_free(cfg);
}

TEST(CapiRun, TrainNnWritesParams) {
    dgr_config *cfg = nullptr;
    ASSERT_EQ(dgr_config_from_text("[code]\ndistance = 3\np = 0.03\ny_bias = 10\n"
                                   "[shots]\ntrace = 2000\neval = 100\n"
                                   "[policy]\ntau = 3\n"
                                   "[train]\ndataset = 32\nepochs = 1\nbatch = 16\nhidden = 8\nspsa_q = 2\n"
                                   "[run]\nseed = 2\narms = aligned+nn\n",
                                   &cfg),
              DGR_OK);
    std::string params = testing::TempDir() + "capi_params.mlp";
    char *loss = nullptr;
    ASSERT_EQ(dgr_train_nn(cfg, params.c_str(), &loss), DGR_OK);
    ASSERT_NE(loss, nullptr);
    EXPECT_NE(std::string(loss).find("batch,loss"), std::string::npos);
    dgr_string_free(loss);
    std::string header = read_file(params);
    EXPECT_EQ(header.rfind("mlp v1 types ", 0), 0u);
    dgr_config_free(cfg);
    std::filesystem::remove(params);
}

}  // namespace
