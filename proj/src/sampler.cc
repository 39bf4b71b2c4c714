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

#include "dgr/sampler.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace dgr {

namespace {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double channel_uniform(uint64_t seed, uint64_t shot_index, uint64_t channel_index) {
    uint64_t key = splitmix64(splitmix64(splitmix64(seed) ^ shot_index) ^ channel_index);
    return static_cast<double>(key >> 11) * 0x1.0p-53;
}

void toggle(std::vector<uint32_t> &flips, const std::vector<uint32_t> &detectors) {
    for (uint32_t d : detectors) {
        auto it = std::lower_bound(flips.begin(), flips.end(), d);
        if (it != flips.end() && *it == d) {
            flips.erase(it);
        } else {
            flips.insert(it, d);
        }
    }
}

}  // namespace

Sampler::Sampler(const DetectorErrorModel &model) : num_detectors_(model.num_detectors) {
    model.validate();
    channels_.reserve(model.channels.size());
    for (const auto &channel : model.channels) {
        Channel compiled;
        double cumulative = 0;
        for (const auto &mech : channel.mechanisms) {
            cumulative += mech.probability;
            Arm arm;
            arm.cumulative = cumulative;
            arm.observables = 0;
            for (const auto &comp : mech.components) {
                arm.detectors.insert(arm.detectors.end(), comp.detectors.begin(), comp.detectors.end());
                arm.observables ^= comp.observables;
            }
            compiled.arms.push_back(std::move(arm));
        }
        channels_.push_back(std::move(compiled));
    }
}

Shot Sampler::sample(uint64_t seed, uint64_t shot_index, bool keep_fired) const {
    Shot shot;
    for (uint32_t ci = 0; ci < channels_.size(); ++ci) {
        const Channel &channel = channels_[ci];
        double u = channel_uniform(seed, shot_index, ci);
        if (u >= channel.arms.back().cumulative) continue;
        uint32_t arm_index = 0;
        while (u >= channel.arms[arm_index].cumulative) ++arm_index;
        const Arm &arm = channel.arms[arm_index];
        toggle(shot.flipped, arm.detectors);
        shot.observables ^= arm.observables;
        if (keep_fired) shot.fired.push_back({ci, arm_index});
    }
    return shot;
}

Shot sample_shot(const DetectorErrorModel &model, uint64_t shot_index, uint64_t seed) {
    return Sampler(model).sample(seed, shot_index);
}

void sample_batch(const DetectorErrorModel &model, uint64_t count, uint64_t seed,
                  const std::function<void(uint64_t, const Shot &)> &sink) {
    Sampler sampler(model);
    for (uint64_t i = 0; i < count; ++i) {
        sink(i, sampler.sample(seed, i));
    }
}

namespace {

std::string to_hex_bitset(const std::vector<uint32_t> &bits, uint32_t size) {
    if (size == 0) return "0";
    size_t digits = (size + 3) / 4;
    std::string out(digits, '0');
    for (uint32_t b : bits) {
        size_t digit = digits - 1 - b / 4;
        int nibble = out[digit] >= 'a' ? out[digit] - 'a' + 10 : out[digit] - '0';
        nibble ^= 1 << (b % 4);
        out[digit] = nibble < 10 ? static_cast<char>('0' + nibble) : static_cast<char>('a' + nibble - 10);
    }
    return out;
}

std::string obs_to_hex(uint64_t mask) {
    std::ostringstream out;
    out << std::hex << mask;
    return out.str();
}

}  // namespace

void write_shot_line(std::ostream &out, uint64_t index, const Shot &shot, uint32_t num_detectors,
                     uint32_t /*num_observables*/) {
    out << "shot " << index << " D:" << to_hex_bitset(shot.flipped, num_detectors) << " L:"
        << obs_to_hex(shot.observables) << "\n";
}

Shot parse_shot_line(const std::string &line, uint32_t num_detectors, uint64_t *index_out) {
    std::istringstream in(line);
    std::string word, dfield, lfield;
    uint64_t index;
    if (!(in >> word >> index >> dfield >> lfield) || word != "shot" || dfield.rfind("D:", 0) != 0 ||
        lfield.rfind("L:", 0) != 0) {
        throw std::runtime_error("malformed shot line: " + line);
    }
    if (index_out) *index_out = index;
    Shot shot;
    std::string hex = dfield.substr(2);
    for (size_t i = 0; i < hex.size(); ++i) {
        char c = hex[hex.size() - 1 - i];
        int nibble = (c >= 'a') ? c - 'a' + 10 : (c >= 'A') ? c - 'A' + 10 : c - '0';
        for (int b = 0; b < 4; ++b) {
            if (nibble & (1 << b)) {
                uint32_t det = static_cast<uint32_t>(i * 4 + b);
                if (det >= num_detectors) {
                    throw std::runtime_error("shot line flips detector beyond model size: " + line);
                }
                shot.flipped.push_back(det);
            }
        }
    }
    shot.observables = std::stoull(lfield.substr(2), nullptr, 16);
    return shot;
}

}  // namespace dgr
