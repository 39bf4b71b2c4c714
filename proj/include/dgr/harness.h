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

#ifndef DGR_HARNESS_H
#define DGR_HARNESS_H

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dgr/nnrw.h"
#include "dgr/reweight.h"
#include "dgr/sampler.h"
#include "dgr/surfgen.h"

namespace dgr {

/// Thrown for malformed configs; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WilsonInterval {
    double lower = 0;
    double upper = 0;
};

/// Wilson score interval for a binomial proportion (z defaults to 95%).
WilsonInterval wilson_interval(uint64_t errors, uint64_t shots, double z = 1.959963984540054);

enum class MismatchKind { kNone, kRandom, kWorstCase };

struct MismatchSpec {
    MismatchKind kind = MismatchKind::kNone;
    double strength = 1.0;
    uint64_t seed = 0;
};

struct ExperimentConfig {
    SurfaceCodeSpec code;
    /// When set, the base model is read from this DEM file instead of the
    /// generator.
    std::string dem_path;
    MismatchSpec mismatch;
    uint64_t t_trace = 1000000;
    uint64_t t_eval = 100000;
    ReweightPolicy policy;
    /// tau == 0 requests automatic calibration to a 10-20% trigger rate.
    TrainConfig train;
    uint64_t train_dataset = 2000;
    /// Optional pre-trained parameter file for the NN arm.
    std::string nn_params_path;
    uint64_t seed = 0;
    std::vector<std::string> arms = {"oracle", "mismatched", "aligned"};
    std::string out_dir;
};

ExperimentConfig parse_config(const std::string &text);
/// Applies one `section.key = value` setting; throws ConfigError on unknown
/// keys or bad values.
void apply_config_value(ExperimentConfig &cfg, const std::string &section, const std::string &key,
                        const std::string &value);
ExperimentConfig read_config_file(const std::string &path);
/// Canonical round-trippable text form; hashed into reports.
std::string serialize_config(const ExperimentConfig &config);

struct ArmResult {
    std::string name;
    uint64_t shots = 0;
    uint64_t errors = 0;
    double ler = 0;
    WilsonInterval ci;
    double trigger_rate = 0;
    uint64_t trace_trials = 0;
};

struct MetricsReport {
    std::vector<ArmResult> arms;
    uint64_t seed = 0;
    uint64_t config_hash = 0;
    uint32_t tau = 0;
};

struct LerResult {
    uint64_t errors = 0;
    uint64_t shots = 0;
    double ler = 0;
    WilsonInterval ci;
};

/// Monte Carlo logical-error rate of one decoder arm: a shot errs when the
/// predicted observable mask differs from the sampled one.
LerResult estimate_ler(const Sampler &sampler, const Decoder &decoder, uint64_t shots, uint64_t seed);

/// Smallest syndrome-count threshold whose empirical trigger rate is
/// closest to 15%, estimated from `shots` samples.
uint32_t calibrate_tau(const Sampler &sampler, uint64_t shots, uint64_t seed);

/// Ground-truth edge set for a sampled shot: each fired mechanism
/// component maps to its decoding-graph edge, XOR-reduced. Requires the
/// shot to have been sampled with fired-mechanism retention.
std::vector<uint32_t> truth_edges_from_fired(const DecodingGraph &graph, const DetectorErrorModel &model,
                                             const Shot &shot);

/// Triggered-only training set drawn from the true model.
std::vector<TrainSample> build_training_set(const Sampler &sampler, const DecodingGraph &graph,
                                            const DetectorErrorModel &model, uint64_t count,
                                            uint32_t min_syndromes, uint64_t seed);

/// Optional side outputs of run_experiment for figure-data export.
struct RunArtifacts {
    std::string heatmap_csv;
    std::vector<double> nn_loss_curve;
};

/// Runs the configured arms over a shared evaluation shot stream (paired
/// comparison). Aligned arms first trace t_trace shots decoded with
/// mismatched weights.
MetricsReport run_experiment(const ExperimentConfig &config, RunArtifacts *artifacts = nullptr);

void write_metrics_csv(const MetricsReport &report, std::ostream &out);
void write_report_json(const MetricsReport &report, const ExperimentConfig &config, std::ostream &out);

/// One report per axis value; axis is one of "p", "d", "N", "t_trace".
std::vector<std::pair<double, MetricsReport>> sweep(const ExperimentConfig &base, const std::string &axis,
                                                    const std::vector<double> &values);
void write_sweep_csv(const std::string &axis, const std::vector<std::pair<double, MetricsReport>> &rows,
                     std::ostream &out);

struct ThresholdEstimate {
    /// Arm name -> physical error rate where LER(d_min) = LER(d_max),
    /// log-linear interpolation over the p grid.
    std::map<std::string, double> crossing;
};

ThresholdEstimate estimate_threshold(const ExperimentConfig &base, const std::vector<uint32_t> &distances,
                                     const std::vector<double> &ps);

/// Crossing of LER ratios on a precomputed grid; exposed for fixture tests.
double interpolate_crossing(const std::vector<double> &ps, const std::vector<double> &ratio);

}  // namespace dgr

#endif
