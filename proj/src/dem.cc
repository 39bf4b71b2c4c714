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

#include "dgr/dem.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace dgr {

double weight_from_prob(double p) {
    if (!(p > 0 && p < 1)) {
        throw std::domain_error("probability must be in (0, 1), got " + std::to_string(p));
    }
    return -std::log(p / (1 - p));
}

double prob_from_weight(double w) {
    return 1.0 / (1.0 + std::exp(w));
}

double merge_probs(double p1, double p2) {
    return p1 * (1 - p2) + p2 * (1 - p1);
}

void DetectorErrorModel::validate() const {
    if (!detector_coords.empty() && detector_coords.size() != num_detectors) {
        throw std::invalid_argument("detector_coords must be empty or one per detector");
    }
    for (const auto &channel : channels) {
        if (channel.mechanisms.empty()) {
            throw std::invalid_argument("exclusive channel must be nonempty");
        }
        double total = 0;
        for (const auto &mech : channel.mechanisms) {
            if (!(mech.probability > 0 && mech.probability < 1)) {
                throw std::invalid_argument("mechanism probability must be in (0, 1)");
            }
            total += mech.probability;
            if (mech.components.empty()) {
                throw std::invalid_argument("mechanism must have at least one component");
            }
            std::set<uint32_t> seen;
            for (const auto &comp : mech.components) {
                if (comp.detectors.empty() || comp.detectors.size() > 2) {
                    throw std::invalid_argument("component detector set must have size 1 or 2");
                }
                for (uint32_t d : comp.detectors) {
                    if (d >= num_detectors) {
                        throw std::invalid_argument("detector index " + std::to_string(d) + " out of range");
                    }
                    if (!seen.insert(d).second) {
                        throw std::invalid_argument("component detector sets within a mechanism must be disjoint");
                    }
                }
                if (num_observables < 64 && (comp.observables >> num_observables) != 0) {
                    throw std::invalid_argument("observable index out of range");
                }
            }
        }
        if (total > 1 + 1e-12) {
            throw std::invalid_argument("channel mechanism probabilities sum to more than 1");
        }
    }
}

namespace {

struct Token {
    std::string text;
    size_t line;
    size_t column;
};

std::vector<Token> tokenize(const std::string &text) {
    std::vector<Token> tokens;
    size_t line = 1, col = 1;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++col;
            ++i;
        } else {
            size_t start = i, start_col = col;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '#') {
                ++i;
                ++col;
            }
            tokens.push_back({text.substr(start, i - start), line, start_col});
        }
    }
    return tokens;
}

class DemParser {
  public:
    explicit DemParser(const std::string &text) : tokens_(tokenize(text)) {}

    DetectorErrorModel parse() {
        expect("dem");
        expect("v1");
        expect("detectors");
        model_.num_detectors = parse_count();
        expect("observables");
        model_.num_observables = parse_count();

        while (!done()) {
            const Token &tok = peek();
            if (tok.text == "coord") {
                parse_coord();
            } else if (tok.text == "etype") {
                parse_etype();
            } else if (tok.text == "channel") {
                parse_channel();
            } else if (tok.text.rfind("error(", 0) == 0) {
                ExclusiveChannel channel;
                channel.mechanisms.push_back(parse_mechanism());
                model_.channels.push_back(std::move(channel));
            } else {
                fail(tok, "unexpected token '" + tok.text + "'");
            }
        }
        try {
            model_.validate();
        } catch (const std::invalid_argument &e) {
            throw ParseError(e.what(), 1, 1);
        }
        return std::move(model_);
    }

  private:
    bool done() const { return pos_ >= tokens_.size(); }

    const Token &peek() const {
        if (done()) {
            static Token eof{"<eof>", 0, 0};
            throw ParseError("unexpected end of input", tokens_.empty() ? 1 : tokens_.back().line, 1);
        }
        return tokens_[pos_];
    }

    Token next() {
        const Token &t = peek();
        ++pos_;
        return t;
    }

    [[noreturn]] static void fail(const Token &tok, const std::string &msg) {
        throw ParseError(msg, tok.line, tok.column);
    }

    void expect(const std::string &word) {
        Token tok = next();
        if (tok.text != word) {
            fail(tok, "expected '" + word + "', got '" + tok.text + "'");
        }
    }

    uint32_t parse_count() {
        Token tok = next();
        uint32_t value = 0;
        auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
        if (ec != std::errc() || p != tok.text.data() + tok.text.size()) {
            fail(tok, "expected a nonnegative integer, got '" + tok.text + "'");
        }
        return value;
    }

    double parse_double(const Token &tok, const std::string &text) {
        const char *begin = text.c_str();
        char *end = nullptr;
        double value = std::strtod(begin, &end);
        if (end != begin + text.size() || text.empty()) {
            fail(tok, "expected a number, got '" + text + "'");
        }
        return value;
    }

    uint32_t parse_indexed(const Token &tok, char prefix, uint32_t limit, const char *what) {
        if (tok.text.size() < 2 || tok.text[0] != prefix) {
            fail(tok, std::string("expected ") + what + " token, got '" + tok.text + "'");
        }
        uint32_t value = 0;
        auto [p, ec] = std::from_chars(tok.text.data() + 1, tok.text.data() + tok.text.size(), value);
        if (ec != std::errc() || p != tok.text.data() + tok.text.size()) {
            fail(tok, std::string("malformed ") + what + " token '" + tok.text + "'");
        }
        if (value >= limit) {
            fail(tok, std::string(what) + " index " + std::to_string(value) + " exceeds declared count " +
                          std::to_string(limit));
        }
        return value;
    }

    Mechanism parse_mechanism() {
        Token head = next();
        if (head.text.rfind("error(", 0) != 0 || head.text.back() != ')') {
            fail(head, "expected 'error(<p>)', got '" + head.text + "'");
        }
        Mechanism mech;
        mech.probability = parse_double(head, head.text.substr(6, head.text.size() - 7));
        if (!(mech.probability > 0 && mech.probability < 1)) {
            fail(head, "probability out of range (0, 1): " + head.text);
        }
        Component comp;
        bool saw_target = false;
        while (!done()) {
            const Token &tok = peek();
            if (tok.text == "^") {
                next();
                if (comp.detectors.empty()) {
                    fail(tok, "empty component before '^'");
                }
                mech.components.push_back(std::move(comp));
                comp = Component{};
            } else if (tok.text[0] == 'D') {
                comp.detectors.push_back(parse_indexed(next(), 'D', model_.num_detectors, "detector"));
                saw_target = true;
            } else if (tok.text[0] == 'L') {
                comp.observables |= uint64_t{1} << parse_indexed(next(), 'L', model_.num_observables, "observable");
                saw_target = true;
            } else {
                break;
            }
        }
        if (!saw_target || comp.detectors.empty()) {
            fail(head, "error instruction has an empty detector set");
        }
        mech.components.push_back(std::move(comp));
        return mech;
    }

    void parse_channel() {
        next();  // channel
        ExclusiveChannel channel;
        if (peek().text == "row") {
            next();
            channel.data_row = static_cast<int32_t>(parse_count());
        }
        expect("{");
        while (peek().text != "}") {
            if (peek().text.rfind("error(", 0) != 0) {
                fail(peek(), "expected 'error(...)' or '}' inside channel block");
            }
            channel.mechanisms.push_back(parse_mechanism());
        }
        next();  // }
        if (channel.mechanisms.empty()) {
            throw ParseError("empty channel block", tokens_[pos_ - 1].line, tokens_[pos_ - 1].column);
        }
        model_.channels.push_back(std::move(channel));
    }

    void parse_coord() {
        next();  // coord
        Token det = next();
        uint32_t d = parse_indexed(det, 'D', model_.num_detectors, "detector");
        if (model_.detector_coords.empty()) {
            model_.detector_coords.resize(model_.num_detectors);
        }
        DetectorCoord c;
        Token tx = next();
        c.x = parse_double(tx, tx.text);
        Token ty = next();
        c.y = parse_double(ty, ty.text);
        Token tt = next();
        c.t = parse_double(tt, tt.text);
        model_.detector_coords[d] = c;
    }

    void parse_etype() {
        next();  // etype
        Token sig = next();
        uint32_t id = parse_count();
        model_.edge_type_table[sig.text] = id;
    }

    DetectorErrorModel model_;
    std::vector<Token> tokens_;
    size_t pos_ = 0;
};

std::string format_double(double value) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, p);
}

void serialize_mechanism(std::ostream &out, const Mechanism &mech) {
    out << "error(" << format_double(mech.probability) << ")";
    bool first_comp = true;
    for (const auto &comp : mech.components) {
        if (!first_comp) out << " ^";
        first_comp = false;
        for (uint32_t d : comp.detectors) out << " D" << d;
        for (uint32_t k = 0; k < 64; ++k) {
            if (comp.observables & (uint64_t{1} << k)) out << " L" << k;
        }
    }
    out << "\n";
}

}  // namespace

DetectorErrorModel parse_dem(const std::string &text) {
    return DemParser(text).parse();
}

std::string serialize_dem(const DetectorErrorModel &model) {
    std::ostringstream out;
    out << "dem v1 detectors " << model.num_detectors << " observables " << model.num_observables << "\n";
    if (!model.detector_coords.empty()) {
        for (uint32_t d = 0; d < model.num_detectors; ++d) {
            const auto &c = model.detector_coords[d];
            out << "coord D" << d << " " << format_double(c.x) << " " << format_double(c.y) << " "
                << format_double(c.t) << "\n";
        }
    }
    for (const auto &[sig, id] : model.edge_type_table) {
        out << "etype " << sig << " " << id << "\n";
    }
    for (const auto &channel : model.channels) {
        if (channel.mechanisms.size() == 1 && channel.data_row < 0) {
            serialize_mechanism(out, channel.mechanisms[0]);
        } else {
            out << "channel";
            if (channel.data_row >= 0) out << " row " << channel.data_row;
            out << " {\n";
            for (const auto &mech : channel.mechanisms) {
                out << "  ";
                serialize_mechanism(out, mech);
            }
            out << "}\n";
        }
    }
    return out.str();
}

DetectorErrorModel read_dem_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dem(buf.str());
}

void write_dem_file(const DetectorErrorModel &model, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << serialize_dem(model);
}

int64_t DecodingGraph::find_edge(uint32_t u, uint32_t v) const {
    if (u > v) std::swap(u, v);
    for (uint32_t eid : incident[u]) {
        const Edge &e = edges[eid];
        if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) return eid;
    }
    return -1;
}

namespace {

std::string edge_signature(const DecodingGraph &graph, const Edge &e,
                           const std::vector<DetectorCoord> &coords) {
    auto fmt = [](double v) {
        // Deltas are halves of small integers in the generated models; round
        // to kill float noise before keying.
        double r = std::round(v * 1000.0) / 1000.0;
        if (r == 0) r = 0;  // normalize -0
        return format_double(r);
    };
    auto parity_of = [](const DetectorCoord &c) {
        return static_cast<int>(std::llround(c.x + c.y)) & 1;
    };
    if (e.v == graph.boundary()) {
        const DetectorCoord &c = coords[e.u];
        return "b:" + std::to_string(parity_of(c));
    }
    DetectorCoord a = coords[e.u], b = coords[e.v];
    double dx = b.x - a.x, dy = b.y - a.y, dt = b.t - a.t;
    bool flip = dx < 0 || (dx == 0 && (dy < 0 || (dy == 0 && dt < 0)));
    if (flip) {
        dx = -dx;
        dy = -dy;
        dt = -dt;
        std::swap(a, b);
    }
    return "e:" + std::to_string(parity_of(a)) + ":" + fmt(dx) + "," + fmt(dy) + "," + fmt(dt);
}

}  // namespace

std::map<std::string, uint32_t> derive_edge_type_table(const DetectorErrorModel &model) {
    if (!model.has_coords()) {
        throw std::invalid_argument("edge-type table requires detector coordinates");
    }
    DetectorErrorModel bare = model;
    bare.edge_type_table.clear();
    DecodingGraph graph = build_decoding_graph(bare);
    std::set<std::string> sigs;
    for (const Edge &e : graph.edges) {
        sigs.insert(edge_signature(graph, e, model.detector_coords));
    }
    std::map<std::string, uint32_t> table;
    uint32_t next_id = 0;
    for (const auto &sig : sigs) table[sig] = next_id++;
    return table;
}

DecodingGraph build_decoding_graph(const DetectorErrorModel &model) {
    model.validate();

    DecodingGraph graph;
    graph.num_detectors = model.num_detectors;
    graph.num_observables = model.num_observables;
    graph.has_coords = model.has_coords();

    const uint32_t boundary = model.num_detectors;
    using Key = std::pair<uint32_t, uint32_t>;
    auto key_of = [boundary](const Component &comp) -> Key {
        if (comp.detectors.size() == 1) return {comp.detectors[0], boundary};
        uint32_t a = comp.detectors[0], b = comp.detectors[1];
        if (a > b) std::swap(a, b);
        return {a, b};
    };

    // Per-channel arms are exclusive: their probabilities on a shared edge
    // add. Independent channels XOR-combine.
    std::map<Key, double> merged;
    std::map<Key, uint64_t> masks;
    for (const auto &channel : model.channels) {
        std::map<Key, double> in_channel;
        for (const auto &mech : channel.mechanisms) {
            for (const auto &comp : mech.components) {
                Key k = key_of(comp);
                in_channel[k] += mech.probability;
                auto [it, inserted] = masks.emplace(k, comp.observables);
                if (!inserted && it->second != comp.observables) {
                    throw std::invalid_argument("conflicting observable masks on one decoding-graph edge");
                }
            }
        }
        for (const auto &[k, p] : in_channel) {
            auto [it, inserted] = merged.emplace(k, p);
            if (!inserted) it->second = merge_probs(it->second, p);
        }
    }

    std::map<Key, uint32_t> edge_index;
    for (const auto &[k, p] : merged) {
        Edge e;
        e.id = static_cast<uint32_t>(graph.edges.size());
        e.u = k.first;
        e.v = k.second;
        e.probability = p;
        e.weight = weight_from_prob(p);
        e.observables = masks[k];
        if (graph.has_coords) {
            const auto &cu = model.detector_coords[e.u];
            if (e.v == boundary) {
                e.center = cu;
            } else {
                const auto &cv = model.detector_coords[e.v];
                e.center = {(cu.x + cv.x) / 2, (cu.y + cv.y) / 2, (cu.t + cv.t) / 2};
            }
        }
        edge_index[k] = e.id;
        graph.edges.push_back(e);
    }

    graph.incident.assign(graph.num_nodes(), {});
    for (const Edge &e : graph.edges) {
        graph.incident[e.u].push_back(e.id);
        graph.incident[e.v].push_back(e.id);
    }

    // Type ids: known signatures from the model table, new ones assigned in
    // deterministic (sorted) order above the table's maximum.
    if (graph.has_coords) {
        std::map<std::string, uint32_t> table = model.edge_type_table;
        std::vector<std::string> sigs(graph.edges.size());
        std::set<std::string> unknown;
        for (const Edge &e : graph.edges) {
            sigs[e.id] = edge_signature(graph, e, model.detector_coords);
            if (!table.count(sigs[e.id])) unknown.insert(sigs[e.id]);
        }
        uint32_t next_id = 0;
        for (const auto &[sig, id] : table) next_id = std::max(next_id, id + 1);
        for (const auto &sig : unknown) table[sig] = next_id++;
        for (Edge &e : graph.edges) e.type_id = table[sigs[e.id]];
    }

    // Ground-truth correlated pairs from multi-component mechanisms.
    for (const auto &channel : model.channels) {
        for (const auto &mech : channel.mechanisms) {
            if (mech.components.size() < 2) continue;
            std::vector<uint32_t> ids;
            for (const auto &comp : mech.components) ids.push_back(edge_index.at(key_of(comp)));
            for (size_t i = 0; i < ids.size(); ++i) {
                for (size_t j = i + 1; j < ids.size(); ++j) {
                    uint32_t a = std::min(ids[i], ids[j]), b = std::max(ids[i], ids[j]);
                    graph.corr_truth[{a, b}] += mech.probability;
                }
            }
        }
    }
    for (auto &[pair, p] : graph.corr_truth) {
        p = std::min({p, graph.edges[pair.first].probability, graph.edges[pair.second].probability});
    }

    // Candidate pair set: edges whose endpoint sets are within 2 hops, the
    // boundary node neither counting as an endpoint nor traversable.
    std::vector<std::vector<uint32_t>> adj(graph.num_detectors);
    for (const Edge &e : graph.edges) {
        if (e.v == boundary) continue;
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::set<std::pair<uint32_t, uint32_t>> pairs;
    std::vector<int> mark(graph.num_detectors, -1);
    for (const Edge &e : graph.edges) {
        // Ball of radius 2 around e's detector endpoints.
        std::vector<uint32_t> frontier;
        auto touch = [&](uint32_t n) {
            if (n < graph.num_detectors && mark[n] != static_cast<int>(e.id)) {
                mark[n] = static_cast<int>(e.id);
                frontier.push_back(n);
            }
        };
        touch(e.u);
        if (e.v != boundary) touch(e.v);
        size_t layer_start = 0;
        for (int hop = 0; hop < 2; ++hop) {
            size_t layer_end = frontier.size();
            for (size_t i = layer_start; i < layer_end; ++i) {
                for (uint32_t n : adj[frontier[i]]) touch(n);
            }
            layer_start = layer_end;
        }
        for (uint32_t n : frontier) {
            for (uint32_t fid : graph.incident[n]) {
                if (fid > e.id) pairs.insert({e.id, fid});
            }
        }
    }
    for (const auto &[pair, p] : graph.corr_truth) pairs.insert(pair);
    graph.candidate_pairs.assign(pairs.begin(), pairs.end());

    return graph;
}

}  // namespace dgr
