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

#ifndef DGR_SURFGEN_H
#define DGR_SURFGEN_H

#include <cstdint>

#include "dgr/dem.h"

namespace dgr {

/// Rotated surface code, memory-Z experiment, phenomenological noise.
struct SurfaceCodeSpec {
    int distance = 3;        // odd, >= 3
    int rounds = 0;          // 0 -> distance
    double p = 0.001;        // physical error rate
    double p_meas = -1;      // measurement flip rate; <0 -> p
    double y_bias = 1.0;     // eta: pX = pZ = p/(2+eta), pY = eta*p/(2+eta)

    int effective_rounds() const { return rounds > 0 ? rounds : distance; }
    double effective_p_meas() const { return p_meas >= 0 ? p_meas : p; }
    void validate() const;
};

/// Generates the detector error model for `spec`: per data qubit per round
/// one exclusive X/Y/Z depolarizing channel (the Y arm decomposed into an
/// X-graph and a Z-graph component), plus per syndrome measurement per round
/// one flip mechanism (the final readout round is noiseless). Populates
/// detector coordinates, the edge-type table, and per-channel data rows.
DetectorErrorModel generate_surface_pheno(const SurfaceCodeSpec &spec);

/// Multiplies every mechanism probability by an independent factor sampled
/// log-uniformly from [1/N, N]; results clamped to (0, 0.5]. When
/// `mutate_measurement` is false, channels without a data-row annotation
/// keep their probabilities.
DetectorErrorModel apply_random_mismatch(const DetectorErrorModel &model, double strength, uint64_t seed,
                                         bool mutate_measurement = true);

/// Row-structured mismatch: data channels in rows 0..(d-1)/2-1 scaled by N,
/// the remaining rows by 1/N, measurement mechanisms untouched; clamped to
/// (0, 0.5]. Requires data-row metadata.
DetectorErrorModel apply_worstcase_mismatch(const DetectorErrorModel &model, double strength);

}  // namespace dgr

#endif
