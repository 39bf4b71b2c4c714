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

#ifndef DGR_SAMPLER_H
#define DGR_SAMPLER_H

#include <functional>
#include <iosfwd>
#include <vector>

#include "dgr/dem.h"

namespace dgr {

struct Shot {
    /// Sorted flipped-detector ids (sparse bitset).
    std::vector<uint32_t> flipped;
    uint64_t observables = 0;
    /// Fired mechanisms as (channel index, arm index); populated only when
    /// requested (training-data ground truth).
    std::vector<std::pair<uint32_t, uint32_t>> fired;
};

/// Monte Carlo sampler over a detector error model. Randomness is a pure
/// function of (seed, shot_index, channel index): identical shots regardless
/// of execution order or parallel split.
class Sampler {
  public:
    explicit Sampler(const DetectorErrorModel &model);

    Shot sample(uint64_t seed, uint64_t shot_index, bool keep_fired = false) const;

    uint32_t num_detectors() const { return num_detectors_; }

  private:
    struct Arm {
        double cumulative;  // cumulative probability within the channel
        std::vector<uint32_t> detectors;
        uint64_t observables;
    };
    struct Channel {
        std::vector<Arm> arms;
    };
    std::vector<Channel> channels_;
    uint32_t num_detectors_ = 0;
};

Shot sample_shot(const DetectorErrorModel &model, uint64_t shot_index, uint64_t seed);

/// Streams shots 0..count-1 to `sink`.
void sample_batch(const DetectorErrorModel &model, uint64_t count, uint64_t seed,
                  const std::function<void(uint64_t, const Shot &)> &sink);

/// Shot dump lines: `shot <index> D:<hex bitset> L:<hex bitset>`.
void write_shot_line(std::ostream &out, uint64_t index, const Shot &shot, uint32_t num_detectors,
                     uint32_t num_observables);
Shot parse_shot_line(const std::string &line, uint32_t num_detectors, uint64_t *index_out = nullptr);

}  // namespace dgr

#endif
