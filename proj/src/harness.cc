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

#include "dgr/harness.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace dgr {

WilsonInterval wilson_interval(uint64_t errors, uint64_t shots, double z) {
    if (shots == 0) throw std::invalid_argument("wilson interval requires at least one shot");
    double n = static_cast<double>(shots);
    double phat = static_cast<double>(errors) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = (z / denom) * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    // Exact endpoints at the degenerate counts (center - half is 0/1 only up
    // to rounding there).
    double lower = errors == 0 ? 0.0 : std::max(0.0, center - half);
    double upper = errors == shots ? 1.0 : std::min(1.0, center + half);
    return {lower, upper};
}

// ---------------------------------------------------------------------------
// Config file handling.
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string &s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string &v, const std::string &key) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception &) {
        throw ConfigError("invalid numeric value for " + key + ": " + v);
    }
}

uint64_t parse_u64(const std::string &v, const std::string &key) {
    try {
        if (v.empty() || v[0] == '-' || v[0] == '+') throw std::invalid_argument(v);
        size_t pos = 0;
        uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception &) {
        throw ConfigError("invalid integer value for " + key + ": " + v);
    }
}

const std::vector<std::string> kArmNames = {"oracle", "mismatched", "aligned", "aligned+heuristic",
                                            "aligned+nn"};

void validate_arms(const std::vector<std::string> &arms) {
    if (arms.empty()) throw ConfigError("arm list is empty");
    for (const auto &a : arms) {
        if (std::find(kArmNames.begin(), kArmNames.end(), a) == kArmNames.end()) {
            throw ConfigError("unknown arm: " + a);
        }
    }
}

}  // namespace

void apply_config_value(ExperimentConfig &cfg, const std::string &section, const std::string &key,
                        const std::string &value) {
    std::string qual = section.empty() ? key : section + "." + key;

    if (qual == "code.distance") {
            cfg.code.distance = static_cast<int>(parse_u64(value, qual));
        } else if (qual == "code.rounds") {
            cfg.code.rounds = static_cast<int>(parse_u64(value, qual));
        } else if (qual == "code.p") {
            cfg.code.p = parse_double(value, qual);
        } else if (qual == "code.p_meas") {
            cfg.code.p_meas = parse_double(value, qual);
        } else if (qual == "code.y_bias") {
            cfg.code.y_bias = parse_double(value, qual);
        } else if (qual == "code.dem") {
            cfg.dem_path = value;
        } else if (qual == "mismatch.kind") {
            if (value == "none") {
                cfg.mismatch.kind = MismatchKind::kNone;
            } else if (value == "random") {
                cfg.mismatch.kind = MismatchKind::kRandom;
            } else if (value == "worstcase") {
                cfg.mismatch.kind = MismatchKind::kWorstCase;
            } else {
                throw ConfigError("unknown mismatch kind: " + value);
            }
        } else if (qual == "mismatch.strength") {
            cfg.mismatch.strength = parse_double(value, qual);
        } else if (qual == "mismatch.seed") {
            cfg.mismatch.seed = parse_u64(value, qual);
        } else if (qual == "shots.trace") {
            cfg.t_trace = parse_u64(value, qual);
        } else if (qual == "shots.eval") {
            cfg.t_eval = parse_u64(value, qual);
        } else if (qual == "policy.window") {
            cfg.policy.window = parse_u64(value, qual);
        } else if (qual == "policy.min_trials") {
            cfg.policy.min_trials = parse_u64(value, qual);
        } else if (qual == "policy.align_iters") {
            cfg.policy.align_iters = parse_u64(value, qual);
            if (cfg.policy.align_iters < 1) throw ConfigError("policy.align_iters must be >= 1");
        } else if (qual == "policy.mode") {
            if (value == "off") {
                cfg.policy.mode = CorrMode::kOff;
            } else if (value == "heuristic") {
                cfg.policy.mode = CorrMode::kHeuristic;
            } else if (value == "nn") {
                cfg.policy.mode = CorrMode::kNn;
            } else {
                throw ConfigError("unknown correlation mode: " + value);
            }
        } else if (qual == "policy.tau") {
            cfg.policy.tau = static_cast<uint32_t>(parse_u64(value, qual));
        } else if (qual == "policy.epsilon") {
            cfg.policy.epsilon = parse_double(value, qual);
        } else if (qual == "policy.scale") {
            cfg.policy.scale = parse_double(value, qual);
        } else if (qual == "train.lr") {
            cfg.train.learning_rate = parse_double(value, qual);
        } else if (qual == "train.weight_decay") {
            cfg.train.weight_decay = parse_double(value, qual);
        } else if (qual == "train.batch") {
            cfg.train.batch_size = static_cast<uint32_t>(parse_u64(value, qual));
        } else if (qual == "train.epochs") {
            cfg.train.epochs = static_cast<uint32_t>(parse_u64(value, qual));
        } else if (qual == "train.dataset") {
            cfg.train_dataset = parse_u64(value, qual);
        } else if (qual == "train.spsa_q") {
            cfg.train.spsa_q = static_cast<uint32_t>(parse_u64(value, qual));
        } else if (qual == "train.spsa_sigma") {
            cfg.train.spsa_sigma = parse_double(value, qual);
        } else if (qual == "train.hidden") {
            cfg.train.hidden = static_cast<uint32_t>(parse_u64(value, qual));
        } else if (qual == "train.params") {
            cfg.nn_params_path = value;
        } else if (qual == "run.seed") {
            cfg.seed = parse_u64(value, qual);
        } else if (qual == "run.out") {
            cfg.out_dir = value;
        } else if (qual == "run.arms") {
            cfg.arms.clear();
            std::istringstream arms(value);
            std::string arm;
            while (std::getline(arms, arm, ',')) {
                arm = trim(arm);
                if (!arm.empty()) cfg.arms.push_back(arm);
            }
        } else {
            throw ConfigError("unknown key " + qual);
        }
}

ExperimentConfig parse_config(const std::string &text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_config_value(cfg, section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        } catch (const ConfigError &e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    validate_arms(cfg.arms);
    if (cfg.t_eval < 1) throw ConfigError("shots.eval must be >= 1");
    if (!cfg.dem_path.empty()) {
        std::ifstream f(cfg.dem_path);
        if (!f) throw ConfigError("referenced DEM file does not exist: " + cfg.dem_path);
    }
    if (!cfg.nn_params_path.empty()) {
        std::ifstream f(cfg.nn_params_path);
        if (!f) throw ConfigError("referenced params file does not exist: " + cfg.nn_params_path);
    }
    return cfg;
}

ExperimentConfig read_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig &cfg) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "[code]\n";
    out << "distance = " << cfg.code.distance << "\n";
    out << "rounds = " << cfg.code.rounds << "\n";
    out << "p = " << cfg.code.p << "\n";
    out << "p_meas = " << cfg.code.p_meas << "\n";
    out << "y_bias = " << cfg.code.y_bias << "\n";
    if (!cfg.dem_path.empty()) out << "dem = " << cfg.dem_path << "\n";
    out << "[mismatch]\n";
    out << "kind = "
        << (cfg.mismatch.kind == MismatchKind::kNone
                ? "none"
                : cfg.mismatch.kind == MismatchKind::kRandom ? "random" : "worstcase")
        << "\n";
    out << "strength = " << cfg.mismatch.strength << "\n";
    out << "seed = " << cfg.mismatch.seed << "\n";
    out << "[shots]\n";
    out << "trace = " << cfg.t_trace << "\n";
    out << "eval = " << cfg.t_eval << "\n";
    out << "[policy]\n";
    out << "window = " << cfg.policy.window << "\n";
    out << "min_trials = " << cfg.policy.min_trials << "\n";
    out << "align_iters = " << cfg.policy.align_iters << "\n";
    out << "mode = "
        << (cfg.policy.mode == CorrMode::kOff ? "off"
                                              : cfg.policy.mode == CorrMode::kHeuristic ? "heuristic" : "nn")
        << "\n";
    out << "tau = " << cfg.policy.tau << "\n";
    out << "epsilon = " << cfg.policy.epsilon << "\n";
    out << "scale = " << cfg.policy.scale << "\n";
    out << "[train]\n";
    out << "lr = " << cfg.train.learning_rate << "\n";
    out << "weight_decay = " << cfg.train.weight_decay << "\n";
    out << "batch = " << cfg.train.batch_size << "\n";
    out << "epochs = " << cfg.train.epochs << "\n";
    out << "dataset = " << cfg.train_dataset << "\n";
    out << "spsa_q = " << cfg.train.spsa_q << "\n";
    out << "spsa_sigma = " << cfg.train.spsa_sigma << "\n";
    out << "hidden = " << cfg.train.hidden << "\n";
    if (!cfg.nn_params_path.empty()) out << "params = " << cfg.nn_params_path << "\n";
    out << "[run]\n";
    out << "seed = " << cfg.seed << "\n";
    std::string arms;
    for (const auto &a : cfg.arms) {
        if (!arms.empty()) arms += ",";
        arms += a;
    }
    out << "arms = " << arms << "\n";
    if (!cfg.out_dir.empty()) out << "out = " << cfg.out_dir << "\n";
    return out.str();
}

namespace {

uint64_t fnv1a(const std::string &s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment plumbing.
// ---------------------------------------------------------------------------

LerResult estimate_ler(const Sampler &sampler, const Decoder &decoder, uint64_t shots, uint64_t seed) {
    if (shots == 0) throw std::invalid_argument("shot count must be >= 1");
    LerResult r;
    r.shots = shots;
    for (uint64_t i = 0; i < shots; ++i) {
        Shot shot = sampler.sample(seed, i);
        Matching m = decoder.decode(shot.flipped);
        if (predict_observables(decoder.graph(), m) != shot.observables) ++r.errors;
    }
    r.ler = static_cast<double>(r.errors) / static_cast<double>(shots);
    r.ci = wilson_interval(r.errors, shots);
    return r;
}

uint32_t calibrate_tau(const Sampler &sampler, uint64_t shots, uint64_t seed) {
    std::vector<uint32_t> counts;
    counts.reserve(shots);
    uint32_t max_count = 0;
    for (uint64_t i = 0; i < shots; ++i) {
        auto c = static_cast<uint32_t>(sampler.sample(seed, i).flipped.size());
        counts.push_back(c);
        max_count = std::max(max_count, c);
    }
    uint32_t best_tau = 1;
    double best_gap = 2.0;
    for (uint32_t tau = 1; tau <= max_count + 1; ++tau) {
        uint64_t hits = 0;
        for (uint32_t c : counts) {
            if (c >= tau) ++hits;
        }
        double rate = static_cast<double>(hits) / static_cast<double>(shots);
        double gap = std::abs(rate - 0.15);
        if (gap < best_gap) {
            best_gap = gap;
            best_tau = tau;
        }
    }
    return best_tau;
}

std::vector<uint32_t> truth_edges_from_fired(const DecodingGraph &graph, const DetectorErrorModel &model,
                                             const Shot &shot) {
    std::vector<uint32_t> edges;
    for (auto [ci, ai] : shot.fired) {
        const Mechanism &mech = model.channels[ci].mechanisms[ai];
        for (const Component &comp : mech.components) {
            uint32_t u, v;
            if (comp.detectors.size() == 1) {
                u = comp.detectors[0];
                v = graph.boundary();
            } else {
                u = comp.detectors[0];
                v = comp.detectors[1];
            }
            int64_t id = graph.find_edge(u, v);
            if (id < 0) throw std::runtime_error("fired mechanism component has no decoding-graph edge");
            auto e = static_cast<uint32_t>(id);
            auto it = std::lower_bound(edges.begin(), edges.end(), e);
            if (it != edges.end() && *it == e) {
                edges.erase(it);
            } else {
                edges.insert(it, e);
            }
        }
    }
    return edges;
}

std::vector<TrainSample> build_training_set(const Sampler &sampler, const DecodingGraph &graph,
                                            const DetectorErrorModel &model, uint64_t count,
                                            uint32_t min_syndromes, uint64_t seed) {
    std::vector<TrainSample> out;
    out.reserve(count);
    uint64_t limit = count * 10000 + 10000;
    for (uint64_t i = 0; i < limit && out.size() < count; ++i) {
        Shot shot = sampler.sample(seed, i, /*keep_fired=*/true);
        if (shot.flipped.empty() || shot.flipped.size() < min_syndromes) continue;
        TrainSample sample;
        sample.flipped = shot.flipped;
        sample.truth_edges = truth_edges_from_fired(graph, model, shot);
        out.push_back(std::move(sample));
    }
    if (out.size() < count) {
        throw std::runtime_error("could not collect enough triggered training samples");
    }
    return out;
}

namespace {

bool wants(const std::vector<std::string> &arms, const std::string &name) {
    return std::find(arms.begin(), arms.end(), name) != arms.end();
}

DetectorErrorModel load_base_model(const ExperimentConfig &cfg) {
    if (!cfg.dem_path.empty()) return read_dem_file(cfg.dem_path);
    cfg.code.validate();
    return generate_surface_pheno(cfg.code);
}

DetectorErrorModel apply_mismatch(const DetectorErrorModel &base, const MismatchSpec &spec) {
    switch (spec.kind) {
        case MismatchKind::kNone:
            return base;
        case MismatchKind::kRandom:
            return apply_random_mismatch(base, spec.strength, spec.seed);
        case MismatchKind::kWorstCase:
            return apply_worstcase_mismatch(base, spec.strength);
    }
    throw std::logic_error("unreachable");
}

constexpr uint64_t kTraceSeedSalt = 0x545241434552ULL;
constexpr uint64_t kTauSeedSalt = 0x43414c4942ULL;
constexpr uint64_t kTrainSeedSalt = 0x545241494eULL;

}  // namespace

MetricsReport run_experiment(const ExperimentConfig &config, RunArtifacts *artifacts) {
    validate_arms(config.arms);
    DetectorErrorModel base = load_base_model(config);
    DetectorErrorModel true_model = apply_mismatch(base, config.mismatch);
    DecodingGraph graph = build_decoding_graph(true_model);
    DecodingGraph graph_base = build_decoding_graph(base);
    if (graph_base.edges.size() != graph.edges.size()) {
        throw std::runtime_error("mismatch transform changed the graph topology");
    }
    Sampler sampler(true_model);

    bool need_aligned = wants(config.arms, "aligned") || wants(config.arms, "aligned+heuristic") ||
                        wants(config.arms, "aligned+nn");
    bool need_corr = wants(config.arms, "aligned+heuristic") || wants(config.arms, "aligned+nn");

    MetricsReport report;
    report.seed = config.seed;
    report.config_hash = fnv1a(serialize_config(config));

    ReweightPolicy policy = config.policy;
    if (need_corr && policy.tau == 0) {
        uint64_t tau_shots = std::min<uint64_t>(20000, std::max<uint64_t>(2000, config.t_eval));
        policy.tau = calibrate_tau(sampler, tau_shots, config.seed ^ kTauSeedSalt);
    }
    if (policy.epsilon <= 0) {
        policy.epsilon = 10.0 / (2.0 * static_cast<double>(std::max<uint64_t>(config.t_trace, 1)));
    }
    report.tau = policy.tau;

    std::vector<double> w_mismatch;
    w_mismatch.reserve(graph_base.edges.size());
    for (const Edge &e : graph_base.edges) w_mismatch.push_back(e.weight);

    std::optional<Decoder> oracle, mismatched, aligned;
    if (wants(config.arms, "oracle")) oracle.emplace(graph);
    if (wants(config.arms, "mismatched") || need_aligned) mismatched.emplace(graph, w_mismatch);

    EdgeProbs edge_probs;
    PairProbs pair_probs;
    uint64_t trace_trials = 0;
    if (need_aligned) {
        if (config.t_trace < policy.min_trials) {
            throw ConfigError("shots.trace is below policy.min_trials");
        }
        const Decoder *tracer_decoder = &*mismatched;
        for (uint64_t iter = 0; iter < policy.align_iters; ++iter) {
            TraceStore store(graph, /*full_pairs=*/false, policy.window);
            uint64_t trace_seed = config.seed ^ kTraceSeedSalt ^ (iter * 0x6974657261ULL);
            for (uint64_t i = 0; i < config.t_trace; ++i) {
                Shot shot = sampler.sample(trace_seed, i);
                store.record(tracer_decoder->decode(shot.flipped));
            }
            trace_trials += store.trials();
            edge_probs = store.estimate_edge_probs();
            pair_probs = store.estimate_pair_probs();
            aligned.emplace(graph, alignment_reweight(graph, edge_probs));
            tracer_decoder = &*aligned;
            if (artifacts) {
                std::ostringstream heat;
                store.write_heatmap_csv(heat);
                artifacts->heatmap_csv = heat.str();
            }
        }
    }

    std::optional<MlpParams> nn_params;
    if (wants(config.arms, "aligned+nn")) {
        if (!config.nn_params_path.empty()) {
            nn_params = read_mlp_file(config.nn_params_path);
        } else {
            auto dataset = build_training_set(sampler, graph, true_model, config.train_dataset, policy.tau,
                                              config.seed ^ kTrainSeedSalt);
            TrainResult tr = train_nn(*aligned, pair_probs, dataset, config.train, config.seed);
            nn_params = std::move(tr.params);
            if (artifacts) artifacts->nn_loss_curve = std::move(tr.loss_curve);
        }
    }

    struct ArmState {
        std::string name;
        uint64_t errors = 0;
        uint64_t triggered = 0;
        bool corr = false;
        CorrMode mode = CorrMode::kOff;
        const Decoder *decoder = nullptr;
    };
    std::vector<ArmState> states;
    for (const std::string &name : kArmNames) {
        if (!wants(config.arms, name)) continue;
        ArmState s;
        s.name = name;
        if (name == "oracle") {
            s.decoder = &*oracle;
        } else if (name == "mismatched") {
            s.decoder = &*mismatched;
        } else {
            s.decoder = &*aligned;
            if (name == "aligned+heuristic") {
                s.corr = true;
                s.mode = CorrMode::kHeuristic;
            } else if (name == "aligned+nn") {
                s.corr = true;
                s.mode = CorrMode::kNn;
            }
        }
        states.push_back(s);
    }

    for (uint64_t i = 0; i < config.t_eval; ++i) {
        Shot shot = sampler.sample(config.seed, i);
        for (ArmState &s : states) {
            Matching m;
            if (s.corr) {
                ReweightPolicy p = policy;
                p.mode = s.mode;
                bool fired = false;
                m = two_pass_decode(*s.decoder, shot.flipped, p, pair_probs, edge_probs,
                                    nn_params ? &*nn_params : nullptr, &fired);
                if (fired) ++s.triggered;
            } else {
                m = s.decoder->decode(shot.flipped);
            }
            if (predict_observables(graph, m) != shot.observables) ++s.errors;
        }
    }

    for (const ArmState &s : states) {
        ArmResult r;
        r.name = s.name;
        r.shots = config.t_eval;
        r.errors = s.errors;
        r.ler = static_cast<double>(s.errors) / static_cast<double>(config.t_eval);
        r.ci = wilson_interval(s.errors, config.t_eval);
        r.trigger_rate = s.corr ? static_cast<double>(s.triggered) / static_cast<double>(config.t_eval) : 0;
        r.trace_trials = (s.name != "oracle" && s.name != "mismatched") ? trace_trials : 0;
        report.arms.push_back(r);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Reporting.
// ---------------------------------------------------------------------------

void write_metrics_csv(const MetricsReport &report, std::ostream &out) {
    out << std::setprecision(12);
    out << "arm,shots,errors,ler,ci_lower,ci_upper,trigger_rate,trace_trials\n";
    for (const ArmResult &r : report.arms) {
        out << r.name << "," << r.shots << "," << r.errors << "," << r.ler << "," << r.ci.lower << ","
            << r.ci.upper << "," << r.trigger_rate << "," << r.trace_trials << "\n";
    }
}

void write_report_json(const MetricsReport &report, const ExperimentConfig &config, std::ostream &out) {
    nlohmann::ordered_json j;
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    j["tau"] = report.tau;
    j["config"] = serialize_config(config);
    j["arms"] = nlohmann::ordered_json::array();
    for (const ArmResult &r : report.arms) {
        nlohmann::ordered_json a;
        a["name"] = r.name;
        a["shots"] = r.shots;
        a["errors"] = r.errors;
        a["ler"] = r.ler;
        a["ci_lower"] = r.ci.lower;
        a["ci_upper"] = r.ci.upper;
        a["trigger_rate"] = r.trigger_rate;
        a["trace_trials"] = r.trace_trials;
        j["arms"].push_back(a);
    }
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Sweeps and threshold estimation.
// ---------------------------------------------------------------------------

std::vector<std::pair<double, MetricsReport>> sweep(const ExperimentConfig &base, const std::string &axis,
                                                    const std::vector<double> &values) {
    if (values.empty()) throw ConfigError("sweep axis value list is empty");
    std::vector<std::pair<double, MetricsReport>> rows;
    for (double v : values) {
        ExperimentConfig cfg = base;
        if (axis == "p") {
            cfg.code.p = v;
        } else if (axis == "d") {
            cfg.code.distance = static_cast<int>(v);
        } else if (axis == "N") {
            cfg.mismatch.strength = v;
        } else if (axis == "t_trace") {
            cfg.t_trace = static_cast<uint64_t>(v);
        } else {
            throw ConfigError("unknown sweep axis: " + axis);
        }
        rows.emplace_back(v, run_experiment(cfg));
    }
    return rows;
}

void write_sweep_csv(const std::string &axis, const std::vector<std::pair<double, MetricsReport>> &rows,
                     std::ostream &out) {
    out << std::setprecision(12);
    out << axis << ",arm,shots,errors,ler,ci_lower,ci_upper,trigger_rate\n";
    for (const auto &[value, report] : rows) {
        for (const ArmResult &r : report.arms) {
            out << value << "," << r.name << "," << r.shots << "," << r.errors << "," << r.ler << ","
                << r.ci.lower << "," << r.ci.upper << "," << r.trigger_rate << "\n";
        }
    }
}

double interpolate_crossing(const std::vector<double> &ps, const std::vector<double> &ratio) {
    if (ps.size() != ratio.size() || ps.size() < 2) {
        throw std::invalid_argument("crossing interpolation needs matched lists of >= 2 points");
    }
    for (size_t i = 0; i + 1 < ps.size(); ++i) {
        double y0 = std::log(ratio[i]);
        double y1 = std::log(ratio[i + 1]);
        if (y0 == 0) return ps[i];
        if (y1 == 0) return ps[i + 1];
        if ((y0 < 0) != (y1 < 0)) {
            double x0 = std::log(ps[i]);
            double x1 = std::log(ps[i + 1]);
            return std::exp(x0 + (0.0 - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    throw std::runtime_error("no LER-ratio crossing bracketed by the p grid");
}

ThresholdEstimate estimate_threshold(const ExperimentConfig &base, const std::vector<uint32_t> &distances,
                                     const std::vector<double> &ps) {
    if (distances.size() < 2) throw ConfigError("threshold estimation needs at least two distances");
    if (ps.size() < 3) throw ConfigError("threshold estimation needs at least three p values");
    uint32_t d_small = *std::min_element(distances.begin(), distances.end());
    uint32_t d_large = *std::max_element(distances.begin(), distances.end());

    std::map<std::string, std::vector<double>> ratios;
    for (double p : ps) {
        std::map<std::string, double> ler_small, ler_large;
        for (uint32_t d : {d_small, d_large}) {
            ExperimentConfig cfg = base;
            cfg.code.distance = static_cast<int>(d);
            cfg.code.p = p;
            MetricsReport rep = run_experiment(cfg);
            for (const ArmResult &r : rep.arms) {
                // Zero-error arms get a half-count floor so the log-ratio
                // stays finite.
                double ler = r.errors == 0 ? 0.5 / static_cast<double>(r.shots) : r.ler;
                (d == d_small ? ler_small : ler_large)[r.name] = ler;
            }
        }
        for (const auto &[name, ls] : ler_small) {
            ratios[name].push_back(ls / ler_large[name]);
        }
    }
    ThresholdEstimate est;
    for (const auto &[name, r] : ratios) {
        est.crossing[name] = interpolate_crossing(ps, r);
    }
    return est;
}

}  // namespace dgr
