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

#include "dgr/blossom.h"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace dgr {
namespace detail {

namespace {

// Primal-dual matching state. The formulation follows the classic
// augmenting-path / blossom-contraction scheme with vertex and blossom dual
// variables; vertices are 0..n-1, contracted blossoms n..2n-1. Edge weights
// are doubled on entry so all duals stay integral.
class MatchingSolver {
  public:
    MatchingSolver(int n, const std::vector<std::array<int64_t, 3>> &input_edges) : n_(n) {
        for (const auto &e : input_edges) {
            if (e[0] == e[1]) continue;
            edges_.push_back({e[0], e[1], 2 * e[2]});
        }
        m_ = static_cast<int>(edges_.size());
        endpoint_.resize(2 * m_);
        for (int k = 0; k < m_; ++k) {
            endpoint_[2 * k] = static_cast<int>(edges_[k][0]);
            endpoint_[2 * k + 1] = static_cast<int>(edges_[k][1]);
        }
        neighbend_.assign(n_, {});
        for (int k = 0; k < m_; ++k) {
            neighbend_[edges_[k][0]].push_back(2 * k + 1);
            neighbend_[edges_[k][1]].push_back(2 * k);
        }
        int64_t maxweight = 0;
        for (const auto &e : edges_) maxweight = std::max(maxweight, e[2]);

        mate_.assign(n_, -1);
        label_.assign(2 * n_, 0);
        labelend_.assign(2 * n_, -1);
        inblossom_.resize(n_);
        for (int v = 0; v < n_; ++v) inblossom_[v] = v;
        blossomparent_.assign(2 * n_, -1);
        blossomchilds_.assign(2 * n_, {});
        blossombase_.assign(2 * n_, -1);
        for (int v = 0; v < n_; ++v) blossombase_[v] = v;
        blossomendps_.assign(2 * n_, {});
        bestedge_.assign(2 * n_, -1);
        blossombestedges_.assign(2 * n_, {});
        has_bestedges_.assign(2 * n_, false);
        for (int b = 2 * n_ - 1; b >= n_; --b) unusedblossoms_.push_back(b);
        dualvar_.assign(2 * n_, 0);
        for (int v = 0; v < n_; ++v) dualvar_[v] = maxweight;
        allowedge_.assign(m_, false);
    }

    std::vector<int> solve() {
        for (int t = 0; t < n_; ++t) {
            std::fill(label_.begin(), label_.end(), 0);
            std::fill(bestedge_.begin(), bestedge_.end(), -1);
            for (int b = n_; b < 2 * n_; ++b) has_bestedges_[b] = false;
            std::fill(allowedge_.begin(), allowedge_.end(), false);
            queue_.clear();

            for (int v = 0; v < n_; ++v) {
                if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
            }

            bool augmented = false;
            while (true) {
                while (!queue_.empty() && !augmented) {
                    int v = queue_.back();
                    queue_.pop_back();
                    assert(label_[inblossom_[v]] == 1);
                    for (int p : neighbend_[v]) {
                        int k = p / 2;
                        int w = endpoint_[p];
                        if (inblossom_[v] == inblossom_[w]) continue;
                        int64_t kslack = 0;
                        if (!allowedge_[k]) {
                            kslack = slack(k);
                            if (kslack <= 0) allowedge_[k] = true;
                        }
                        if (allowedge_[k]) {
                            if (label_[inblossom_[w]] == 0) {
                                assign_label(w, 2, p ^ 1);
                            } else if (label_[inblossom_[w]] == 1) {
                                int base = scan_blossom(v, w);
                                if (base >= 0) {
                                    add_blossom(base, k);
                                } else {
                                    augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if (label_[w] == 0) {
                                label_[w] = 2;
                                labelend_[w] = p ^ 1;
                            }
                        } else if (label_[inblossom_[w]] == 1) {
                            int b = inblossom_[v];
                            if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                        } else if (label_[w] == 0) {
                            if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                        }
                    }
                }
                if (augmented) break;

                // no augmenting path: adjust duals
                int deltatype = -1;
                int64_t delta = 0;
                int deltaedge = -1, deltablossom = -1;
                for (int v = 0; v < n_; ++v) {
                    if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                        int64_t d = slack(bestedge_[v]);
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 2;
                            deltaedge = bestedge_[v];
                        }
                    }
                }
                for (int b = 0; b < 2 * n_; ++b) {
                    if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                        int64_t d = slack(bestedge_[b]) / 2;
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 3;
                            deltaedge = bestedge_[b];
                        }
                    }
                }
                for (int b = n_; b < 2 * n_; ++b) {
                    if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
                        (deltatype == -1 || dualvar_[b] < delta)) {
                        delta = dualvar_[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if (deltatype == -1) {
                    // max-cardinality mode: clamp and stop this phase
                    deltatype = 1;
                    int64_t minv = dualvar_[0];
                    for (int v = 1; v < n_; ++v) minv = std::min(minv, dualvar_[v]);
                    delta = std::max<int64_t>(0, minv);
                }

                for (int v = 0; v < n_; ++v) {
                    int lbl = label_[inblossom_[v]];
                    if (lbl == 1) {
                        dualvar_[v] -= delta;
                    } else if (lbl == 2) {
                        dualvar_[v] += delta;
                    }
                }
                for (int b = n_; b < 2 * n_; ++b) {
                    if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
                        if (label_[b] == 1) {
                            dualvar_[b] += delta;
                        } else if (label_[b] == 2) {
                            dualvar_[b] -= delta;
                        }
                    }
                }

                if (deltatype == 1) {
                    break;
                } else if (deltatype == 2) {
                    allowedge_[deltaedge] = true;
                    int i = static_cast<int>(edges_[deltaedge][0]);
                    int j = static_cast<int>(edges_[deltaedge][1]);
                    if (label_[inblossom_[i]] == 0) std::swap(i, j);
                    assert(label_[inblossom_[i]] == 1);
                    queue_.push_back(i);
                } else if (deltatype == 3) {
                    allowedge_[deltaedge] = true;
                    int i = static_cast<int>(edges_[deltaedge][0]);
                    assert(label_[inblossom_[i]] == 1);
                    queue_.push_back(i);
                } else {
                    expand_blossom(deltablossom, false);
                }
            }

            if (!augmented) break;

            for (int b = n_; b < 2 * n_; ++b) {
                if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0) {
                    expand_blossom(b, true);
                }
            }
        }

        std::vector<int> result(n_, -1);
        for (int v = 0; v < n_; ++v) {
            if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
        }
        return result;
    }

  private:
    int64_t slack(int k) const {
        return dualvar_[edges_[k][0]] + dualvar_[edges_[k][1]] - 2 * edges_[k][2];
    }

    void blossom_leaves(int b, std::vector<int> &out) const {
        if (b < n_) {
            out.push_back(b);
        } else {
            for (int child : blossomchilds_[b]) blossom_leaves(child, out);
        }
    }

    void assign_label(int w, int t, int p) {
        int b = inblossom_[w];
        assert(label_[w] == 0 && label_[b] == 0);
        label_[w] = label_[b] = t;
        labelend_[w] = labelend_[b] = p;
        bestedge_[w] = bestedge_[b] = -1;
        if (t == 1) {
            std::vector<int> leaves;
            blossom_leaves(b, leaves);
            for (int leaf : leaves) queue_.push_back(leaf);
        } else {
            int base = blossombase_[b];
            assert(mate_[base] >= 0);
            assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
        }
    }

    int scan_blossom(int v, int w) {
        std::vector<int> path;
        int base = -1;
        while (v != -1 || w != -1) {
            int b = inblossom_[v];
            if (label_[b] & 4) {
                base = blossombase_[b];
                break;
            }
            assert(label_[b] == 1);
            path.push_back(b);
            label_[b] |= 4;
            if (labelend_[b] == -1) {
                v = -1;
            } else {
                v = endpoint_[labelend_[b]];
                b = inblossom_[v];
                assert(label_[b] == 2);
                assert(labelend_[b] >= 0);
                v = endpoint_[labelend_[b]];
            }
            if (w != -1) std::swap(v, w);
        }
        for (int b : path) label_[b] = 1;
        return base;
    }

    void add_blossom(int base, int k) {
        int v = static_cast<int>(edges_[k][0]);
        int w = static_cast<int>(edges_[k][1]);
        int bb = inblossom_[base];
        int bv = inblossom_[v];
        int bw = inblossom_[w];

        int b = unusedblossoms_.back();
        unusedblossoms_.pop_back();
        blossombase_[b] = base;
        blossomparent_[b] = -1;
        blossomparent_[bb] = b;

        std::vector<int> path;
        std::vector<int> endps;
        while (bv != bb) {
            blossomparent_[bv] = b;
            path.push_back(bv);
            endps.push_back(labelend_[bv]);
            assert(labelend_[bv] >= 0);
            v = endpoint_[labelend_[bv]];
            bv = inblossom_[v];
        }
        path.push_back(bb);
        std::reverse(path.begin(), path.end());
        std::reverse(endps.begin(), endps.end());
        endps.push_back(2 * k);
        while (bw != bb) {
            blossomparent_[bw] = b;
            path.push_back(bw);
            endps.push_back(labelend_[bw] ^ 1);
            assert(labelend_[bw] >= 0);
            w = endpoint_[labelend_[bw]];
            bw = inblossom_[w];
        }

        blossomchilds_[b] = std::move(path);
        blossomendps_[b] = std::move(endps);
        assert(label_[bb] == 1);
        label_[b] = 1;
        labelend_[b] = labelend_[bb];
        dualvar_[b] = 0;

        std::vector<int> leaves;
        blossom_leaves(b, leaves);
        for (int leaf : leaves) {
            if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
            inblossom_[leaf] = b;
        }

        // recompute best-edge lists for the new blossom
        std::vector<int> bestedgeto(2 * n_, -1);
        for (int child : blossomchilds_[b]) {
            std::vector<std::vector<int>> nblists;
            if (!has_bestedges_[child]) {
                std::vector<int> child_leaves;
                blossom_leaves(child, child_leaves);
                for (int leaf : child_leaves) {
                    std::vector<int> lst;
                    lst.reserve(neighbend_[leaf].size());
                    for (int p : neighbend_[leaf]) lst.push_back(p / 2);
                    nblists.push_back(std::move(lst));
                }
            } else {
                nblists.push_back(blossombestedges_[child]);
            }
            for (const auto &nblist : nblists) {
                for (int ek : nblist) {
                    int i = static_cast<int>(edges_[ek][0]);
                    int j = static_cast<int>(edges_[ek][1]);
                    if (inblossom_[j] == b) std::swap(i, j);
                    int bj = inblossom_[j];
                    if (bj != b && label_[bj] == 1 &&
                        (bestedgeto[bj] == -1 || slack(ek) < slack(bestedgeto[bj]))) {
                        bestedgeto[bj] = ek;
                    }
                }
            }
            blossombestedges_[child].clear();
            has_bestedges_[child] = false;
            bestedge_[child] = -1;
        }
        blossombestedges_[b].clear();
        for (int ek : bestedgeto) {
            if (ek != -1) blossombestedges_[b].push_back(ek);
        }
        has_bestedges_[b] = true;
        bestedge_[b] = -1;
        for (int ek : blossombestedges_[b]) {
            if (bestedge_[b] == -1 || slack(ek) < slack(bestedge_[b])) bestedge_[b] = ek;
        }
    }

    void expand_blossom(int b, bool endstage) {
        for (size_t ci = 0; ci < blossomchilds_[b].size(); ++ci) {
            int s = blossomchilds_[b][ci];
            blossomparent_[s] = -1;
            if (s < n_) {
                inblossom_[s] = s;
            } else if (endstage && dualvar_[s] == 0) {
                expand_blossom(s, endstage);
            } else {
                std::vector<int> leaves;
                blossom_leaves(s, leaves);
                for (int leaf : leaves) inblossom_[leaf] = s;
            }
        }

        if (!endstage && label_[b] == 2) {
            assert(labelend_[b] >= 0);
            int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
            int len = static_cast<int>(blossomchilds_[b].size());
            auto child_at = [&](int j) { return blossomchilds_[b][((j % len) + len) % len]; };
            auto endp_at = [&](int j) { return blossomendps_[b][((j % len) + len) % len]; };
            int j = 0;
            while (blossomchilds_[b][j] != entrychild) ++j;
            int jstep, endptrick;
            if (j & 1) {
                j -= len;
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            int p = labelend_[b];
            while (j != 0) {
                label_[endpoint_[p ^ 1]] = 0;
                label_[endpoint_[endp_at(j - endptrick) ^ endptrick ^ 1]] = 0;
                assign_label(endpoint_[p ^ 1], 2, p);
                allowedge_[endp_at(j - endptrick) / 2] = true;
                j += jstep;
                p = endp_at(j - endptrick) ^ endptrick;
                allowedge_[p / 2] = true;
                j += jstep;
            }
            int bv = child_at(j);
            label_[endpoint_[p ^ 1]] = 2;
            label_[bv] = 2;
            labelend_[endpoint_[p ^ 1]] = p;
            labelend_[bv] = p;
            bestedge_[bv] = -1;
            j += jstep;
            while (child_at(j) != entrychild) {
                bv = child_at(j);
                if (label_[bv] == 1) {
                    j += jstep;
                    continue;
                }
                std::vector<int> leaves;
                blossom_leaves(bv, leaves);
                int labeled = -1;
                for (int leaf : leaves) {
                    if (label_[leaf] != 0) {
                        labeled = leaf;
                        break;
                    }
                }
                if (labeled >= 0) {
                    assert(label_[labeled] == 2);
                    assert(inblossom_[labeled] == bv);
                    label_[labeled] = 0;
                    label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
                    assign_label(labeled, 2, labelend_[labeled]);
                }
                j += jstep;
            }
        }

        label_[b] = -1;
        labelend_[b] = -1;
        blossomchilds_[b].clear();
        blossomendps_[b].clear();
        blossombase_[b] = -1;
        blossombestedges_[b].clear();
        has_bestedges_[b] = false;
        bestedge_[b] = -1;
        unusedblossoms_.push_back(b);
    }

    void augment_blossom(int b, int v) {
        int t = v;
        while (blossomparent_[t] != b) t = blossomparent_[t];
        if (t >= n_) augment_blossom(t, v);
        int len = static_cast<int>(blossomchilds_[b].size());
        auto child_at = [&](int j) { return blossomchilds_[b][((j % len) + len) % len]; };
        auto endp_at = [&](int j) { return blossomendps_[b][((j % len) + len) % len]; };
        int i = 0;
        while (blossomchilds_[b][i] != t) ++i;
        int j = i;
        int jstep, endptrick;
        if (i & 1) {
            j -= len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while (j != 0) {
            j += jstep;
            t = child_at(j);
            int p = endp_at(j - endptrick) ^ endptrick;
            if (t >= n_) augment_blossom(t, endpoint_[p]);
            j += jstep;
            t = child_at(j);
            if (t >= n_) augment_blossom(t, endpoint_[p ^ 1]);
            mate_[endpoint_[p]] = p ^ 1;
            mate_[endpoint_[p ^ 1]] = p;
        }
        std::rotate(blossomchilds_[b].begin(), blossomchilds_[b].begin() + i, blossomchilds_[b].end());
        std::rotate(blossomendps_[b].begin(), blossomendps_[b].begin() + i, blossomendps_[b].end());
        blossombase_[b] = blossombase_[blossomchilds_[b][0]];
        assert(blossombase_[b] == v);
    }

    void augment_matching(int k) {
        int v = static_cast<int>(edges_[k][0]);
        int w = static_cast<int>(edges_[k][1]);
        for (auto [s, p] : {std::pair<int, int>{v, 2 * k + 1}, std::pair<int, int>{w, 2 * k}}) {
            while (true) {
                int bs = inblossom_[s];
                assert(label_[bs] == 1);
                assert(labelend_[bs] == mate_[blossombase_[bs]]);
                if (bs >= n_) augment_blossom(bs, s);
                mate_[s] = p;
                if (labelend_[bs] == -1) break;
                int t = endpoint_[labelend_[bs]];
                int bt = inblossom_[t];
                assert(label_[bt] == 2);
                assert(labelend_[bt] >= 0);
                s = endpoint_[labelend_[bt]];
                int j = endpoint_[labelend_[bt] ^ 1];
                assert(blossombase_[bt] == t);
                if (bt >= n_) augment_blossom(bt, j);
                mate_[j] = labelend_[bt];
                p = labelend_[bt] ^ 1;
            }
        }
    }

    int n_;
    int m_ = 0;
    std::vector<std::array<int64_t, 3>> edges_;
    std::vector<int> endpoint_;
    std::vector<std::vector<int>> neighbend_;
    std::vector<int> mate_;
    std::vector<int> label_;
    std::vector<int> labelend_;
    std::vector<int> inblossom_;
    std::vector<int> blossomparent_;
    std::vector<std::vector<int>> blossomchilds_;
    std::vector<int> blossombase_;
    std::vector<std::vector<int>> blossomendps_;
    std::vector<int> bestedge_;
    std::vector<std::vector<int>> blossombestedges_;
    std::vector<bool> has_bestedges_;
    std::vector<int> unusedblossoms_;
    std::vector<int64_t> dualvar_;
    std::vector<bool> allowedge_;
    std::vector<int> queue_;
};

}  // namespace

std::vector<int> max_weight_matching(int num_nodes, const std::vector<std::array<int64_t, 3>> &edges) {
    if (num_nodes == 0) return {};
    return MatchingSolver(num_nodes, edges).solve();
}

}  // namespace detail

std::vector<int> blossom_mwpm(int num_nodes, const std::vector<WeightedEdge> &edges) {
    if (num_nodes % 2 != 0) {
        throw std::invalid_argument("perfect matching requires an even node count");
    }
    if (num_nodes == 0) return {};

    double max_abs = 1.0;
    for (const auto &e : edges) {
        if (!std::isfinite(e.weight)) throw std::invalid_argument("edge weights must be finite");
        max_abs = std::max(max_abs, std::abs(e.weight));
    }
    const double scale = static_cast<double>(int64_t{1} << 40) / max_abs;

    int64_t max_q = 0;
    std::vector<std::array<int64_t, 3>> q_edges;
    q_edges.reserve(edges.size());
    for (const auto &e : edges) {
        if (e.u < 0 || e.u >= num_nodes || e.v < 0 || e.v >= num_nodes) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        int64_t q = llround(e.weight * scale);
        max_q = std::max(max_q, q);
        q_edges.push_back({e.u, e.v, q});
    }
    // minimize sum(w) == maximize sum(max_q - w) at maximum cardinality
    for (auto &e : q_edges) e[2] = max_q - e[2];

    std::vector<int> mate = detail::max_weight_matching(num_nodes, q_edges);
    for (int v = 0; v < num_nodes; ++v) {
        if (mate[v] < 0) {
            throw std::runtime_error("graph admits no perfect matching");
        }
    }
    return mate;
}

}  // namespace dgr
