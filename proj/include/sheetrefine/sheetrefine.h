/*
 * sheetrefine C API.
 *
 * Every object is an opaque handle owned by the caller and released with the
 * matching *_free function. Functions that can fail return sr_status; on
 * failure sr_last_error() describes the problem for the calling thread until
 * the next failing call on that thread. Strings returned through char** are
 * released with sr_string_free().
 */
#ifndef SHEETREFINE_H
#define SHEETREFINE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SHEETREFINE_BUILDING)
#    define SR_API __declspec(dllexport)
#  else
#    define SR_API __declspec(dllimport)
#  endif
#else
#  define SR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sr_status {
  SR_OK = 0,
  SR_INVALID_ARGUMENT = 1,
  SR_FILE_NOT_FOUND = 2,
  SR_IO_ERROR = 3,
  SR_DECODE_ERROR = 4, /* corrupt or unsupported image / payload */
  SR_PARSE_ERROR = 5,  /* malformed JSON input */
  SR_NETWORK_ERROR = 6,
  SR_SERVICE_ERROR = 7, /* generation service answered with non-2xx */
  SR_INTERNAL_ERROR = 8 /* invariant violation inside the library */
} sr_status;

SR_API const char* sr_last_error(void);
SR_API const char* sr_version(void);
SR_API const char* sr_status_name(sr_status status);
SR_API void sr_string_free(char* s);

/* ---- images -------------------------------------------------------------- */

typedef struct sr_image sr_image;

SR_API sr_status sr_image_load(const char* path, sr_image** out);
/* rgb holds width * height packed RGB triples, row-major. */
SR_API sr_status sr_image_create(int width, int height, const uint8_t* rgb, sr_image** out);
SR_API sr_status sr_image_save_png(const sr_image* img, const char* path);
SR_API int sr_image_width(const sr_image* img);
SR_API int sr_image_height(const sr_image* img);
SR_API const uint8_t* sr_image_pixels(const sr_image* img);
SR_API void sr_image_free(sr_image* img);

/* ---- slicing ------------------------------------------------------------- */

typedef struct sr_crop_spec sr_crop_spec;
typedef struct sr_partset sr_partset;

typedef struct sr_rect {
  int x;
  int y;
  int width;
  int height;
} sr_rect;

SR_API sr_status sr_crop_spec_load(const char* path, sr_crop_spec** out);
SR_API sr_status sr_crop_spec_parse(const char* json, sr_crop_spec** out);
SR_API sr_status sr_crop_spec_grid(int rows, int cols, sr_crop_spec** out);
SR_API void sr_crop_spec_free(sr_crop_spec* spec);

SR_API sr_status sr_slice(const sr_image* img, const sr_crop_spec* spec, sr_partset** out);
SR_API size_t sr_partset_count(const sr_partset* set);
/* Borrowed; valid until the part set is freed. NULL when out of range. */
SR_API const sr_image* sr_partset_image(const sr_partset* set, size_t index);
SR_API sr_status sr_partset_rect(const sr_partset* set, size_t index, sr_rect* out);
/* NULL when the part has no label. */
SR_API const char* sr_partset_label(const sr_partset* set, size_t index);
SR_API void sr_partset_free(sr_partset* set);

/* ---- mutual information and refinement ----------------------------------- */

typedef struct sr_analysis_config {
  int bins;       /* 2..256, default 64 */
  int resolution; /* square side, default 256 */
} sr_analysis_config;

typedef struct sr_refine_config {
  double strictness;     /* default 1.0 */
  int include_self_pairs; /* default 0 */
  int iterative;         /* default 0 */
  int min_kept;          /* default 2 */
  sr_analysis_config analysis;
} sr_refine_config;

SR_API void sr_analysis_config_init(sr_analysis_config* cfg);
SR_API void sr_refine_config_init(sr_refine_config* cfg);

/* MI in bits between two images after grayscale, resize and quantization. */
SR_API sr_status sr_mi_between(const sr_image* a, const sr_image* b,
                               const sr_analysis_config* cfg, double* out);

typedef struct sr_refine_report sr_refine_report;

/* threads == 0 uses the available hardware parallelism. */
SR_API sr_status sr_refine(const sr_image* const* parts, size_t count,
                           const sr_refine_config* cfg, unsigned threads,
                           sr_refine_report** out);
SR_API size_t sr_refine_report_part_count(const sr_refine_report* r);
SR_API double sr_refine_report_score(const sr_refine_report* r, size_t index);
SR_API double sr_refine_report_mean(const sr_refine_report* r);
SR_API double sr_refine_report_stddev(const sr_refine_report* r);
SR_API double sr_refine_report_threshold(const sr_refine_report* r);
SR_API size_t sr_refine_report_rounds(const sr_refine_report* r);
SR_API double sr_refine_report_mi(const sr_refine_report* r, size_t i, size_t j);
/* Copy up to cap indices into out; returns the total number available. */
SR_API size_t sr_refine_report_kept(const sr_refine_report* r, size_t* out, size_t cap);
SR_API size_t sr_refine_report_removed(const sr_refine_report* r, size_t* out, size_t cap);
SR_API sr_status sr_refine_report_json(const sr_refine_report* r, char** out);
SR_API void sr_refine_report_free(sr_refine_report* r);

/* ---- generation ---------------------------------------------------------- */

/* phrase may be NULL for the default "from multiple angles". */
SR_API sr_status sr_grid_prompt(const char* character, const char* style, const char* phrase,
                                char** out);

typedef struct sr_gen_request {
  const char* prompt;
  int64_t seed;
  int width;       /* default 1024 */
  int height;      /* default 1024 */
  int steps;       /* default 30 */
  double guidance; /* default 7.5 */
  int retries;     /* extra attempts after a network failure, default 1 */
} sr_gen_request;

SR_API void sr_gen_request_init(sr_gen_request* req);
SR_API sr_status sr_request_grid(const char* endpoint, const sr_gen_request* req, sr_image** out);

typedef struct sr_synth_spec {
  uint64_t seed;
  int rows;
  int cols;
  const int* outlier_positions;
  size_t outlier_count;
  int noise_amplitude; /* default 10 */
  int jitter;          /* default 2 */
  int cell_width;      /* default 128 */
  int cell_height;     /* default 128 */
} sr_synth_spec;

SR_API void sr_synth_spec_init(sr_synth_spec* spec);
/* flags receives rows * cols outlier flags (0/1) when flags_cap is large enough. */
SR_API sr_status sr_synth_sheet(const sr_synth_spec* spec, sr_image** out, uint8_t* flags,
                                size_t flags_cap);

/* ---- evaluation metrics -------------------------------------------------- */

typedef struct sr_embeddings sr_embeddings;

typedef struct sr_eval_report {
  double prompt_similarity;
  double identity_consistency;
  size_t n_images;
  size_t n_pairs;
} sr_eval_report;

SR_API sr_status sr_embeddings_load(const char* path, sr_embeddings** out);
SR_API sr_status sr_embeddings_parse(const char* json, sr_embeddings** out);
SR_API size_t sr_embeddings_count(const sr_embeddings* e);
SR_API void sr_embeddings_free(sr_embeddings* e);

SR_API sr_status sr_cosine_similarity(const double* a, const double* b, size_t dim, double* out);
/* text must hold exactly one embedding. */
SR_API sr_status sr_evaluate(const sr_embeddings* images, const sr_embeddings* text,
                             sr_eval_report* out);
SR_API sr_status sr_eval_report_json(const sr_eval_report* report, char** out);

#ifdef __cplusplus
}
#endif

#endif /* SHEETREFINE_H */
