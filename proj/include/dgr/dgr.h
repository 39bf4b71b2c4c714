/* Copyright 2026 DGR Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the DGR decoding workbench. All functions return a status
 * code (DGR_OK on success); on failure, dgr_last_error() describes the most
 * recent failure on the calling thread. Out-parameters are untouched on
 * failure. Objects are opaque handles freed with their matching *_free. */

#ifndef DGR_DGR_H
#define DGR_DGR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define DGR_OK 0
#define DGR_ERR_INVALID_ARGUMENT 1
#define DGR_ERR_PARSE 2
#define DGR_ERR_IO 3
#define DGR_ERR_CONFIG 4
#define DGR_ERR_RUNTIME 5

typedef struct dgr_model dgr_model;
typedef struct dgr_graph dgr_graph;
typedef struct dgr_decoder dgr_decoder;
typedef struct dgr_config dgr_config;

/* Thread-local message for the last failed call; never NULL. */
const char *dgr_last_error(void);

void dgr_string_free(char *s);
void dgr_buffer_free(void *p);

/* -- Detector error models ---------------------------------------------- */

int dgr_model_from_text(const char *text, dgr_model **out);
int dgr_model_from_file(const char *path, dgr_model **out);
/* Rotated surface code, memory Z, phenomenological noise. rounds <= 0 means
 * `distance`; p_meas < 0 means `p`. */
int dgr_model_generate(int distance, int rounds, double p, double p_meas, double y_bias, dgr_model **out);
int dgr_model_mismatch_random(const dgr_model *model, double strength, uint64_t seed, dgr_model **out);
int dgr_model_mismatch_worstcase(const dgr_model *model, double strength, dgr_model **out);
int dgr_model_serialize(const dgr_model *model, char **text_out);
int dgr_model_write_file(const dgr_model *model, const char *path);
uint32_t dgr_model_num_detectors(const dgr_model *model);
uint32_t dgr_model_num_observables(const dgr_model *model);
void dgr_model_free(dgr_model *model);

/* Writes `count` shot-dump lines (`shot <i> D:<hex> L:<hex>`) to `path`. */
int dgr_model_sample_to_file(const dgr_model *model, uint64_t count, uint64_t seed, const char *path);

/* -- Decoding graphs and decoders --------------------------------------- */

int dgr_graph_build(const dgr_model *model, dgr_graph **out);
size_t dgr_graph_num_edges(const dgr_graph *graph);
/* Fills `weights_out` (length = num edges) with the graph's weights. */
int dgr_graph_weights(const dgr_graph *graph, double *weights_out);
void dgr_graph_free(dgr_graph *graph);

/* `weights` may be NULL to use the graph's own weights; otherwise it must
 * have `num_weights` == edge count. The decoder keeps a reference to the
 * graph, which must outlive it. */
int dgr_decoder_new(const dgr_graph *graph, const double *weights, size_t num_weights, dgr_decoder **out);
/* Predicted observable mask for a sorted flipped-detector list. */
int dgr_decoder_decode(const dgr_decoder *decoder, const uint32_t *flipped, size_t num_flipped,
                       uint64_t *observables_out);
/* Matched edge ids; free with dgr_buffer_free. */
int dgr_decoder_decode_edges(const dgr_decoder *decoder, const uint32_t *flipped, size_t num_flipped,
                             uint32_t **edges_out, size_t *num_edges_out);
void dgr_decoder_free(dgr_decoder *decoder);

/* Decodes every line of a shot dump, writing `shot <i> P:<hex> ok|err`
 * per line plus a trailing summary line. */
int dgr_decoder_decode_file(const dgr_decoder *decoder, const char *shots_path, const char *out_path);

/* -- Experiments --------------------------------------------------------- */

int dgr_config_from_file(const char *path, dgr_config **out);
int dgr_config_from_text(const char *text, dgr_config **out);
int dgr_config_set(dgr_config *config, const char *section, const char *key, const char *value);
void dgr_config_free(dgr_config *config);

/* Runs the configured arms. When out_dir is non-NULL, writes metrics.csv,
 * report.json and, when produced, heatmap.csv / loss_curve.csv there.
 * report_json_out (optional) receives the report. */
int dgr_run_experiment(const dgr_config *config, const char *out_dir, char **report_json_out);

/* axis is one of "p", "d", "N", "t_trace". csv_out receives the curve. */
int dgr_run_sweep(const dgr_config *config, const char *axis, const double *values, size_t num_values,
                  char **csv_out);

/* Per-arm threshold crossings as CSV `arm,threshold`. */
int dgr_run_threshold(const dgr_config *config, const uint32_t *distances, size_t num_distances,
                      const double *ps, size_t num_ps, char **csv_out);

/* Trains the NN re-weighter per the config, writes the parameter file, and
 * optionally returns the loss curve as CSV. */
int dgr_train_nn(const dgr_config *config, const char *params_path, char **loss_csv_out);

#ifdef __cplusplus
}
#endif

#endif
