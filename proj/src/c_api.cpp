#include "sheetrefine/sheetrefine.h"

#include <cstring>
#include <new>
#include <string>

#include "error.hpp"
#include "eval_metrics.hpp"
#include "generation.hpp"
#include "grid_slicer.hpp"
#include "image_core.hpp"
#include "refine.hpp"
#include "report_json.hpp"

#ifndef SHEETREFINE_VERSION
#define SHEETREFINE_VERSION "0.0.0"
#endif

using namespace sheetrefine;

struct sr_image {
  Image image;
};

struct sr_crop_spec {
  CropSpec spec;
};

struct sr_partset {
  PartSet set;
  std::vector<sr_image> images;
};

struct sr_refine_report {
  RefineReport report;
};

struct sr_embeddings {
  std::vector<EmbeddingVector> vectors;
};

namespace {

thread_local std::string g_last_error;

sr_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return SR_INVALID_ARGUMENT;
    case ErrorCode::FileNotFound: return SR_FILE_NOT_FOUND;
    case ErrorCode::Io: return SR_IO_ERROR;
    case ErrorCode::Decode: return SR_DECODE_ERROR;
    case ErrorCode::Parse: return SR_PARSE_ERROR;
    case ErrorCode::Network: return SR_NETWORK_ERROR;
    case ErrorCode::Service: return SR_SERVICE_ERROR;
    case ErrorCode::Internal: return SR_INTERNAL_ERROR;
  }
  return SR_INTERNAL_ERROR;
}

sr_status set_error(sr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
sr_status guarded(Fn&& fn) {
  try {
    fn();
    return SR_OK;
  } catch (const Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SR_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SR_INTERNAL_ERROR, e.what());
  } catch (...) {
    return set_error(SR_INTERNAL_ERROR, "unknown error");
  }
}

sr_status null_arg(const char* name) {
  return set_error(SR_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

AnalysisConfig from_c(const sr_analysis_config& c) { return {c.bins, c.resolution}; }

RefineConfig from_c(const sr_refine_config& c) {
  return {c.strictness, c.include_self_pairs != 0, c.iterative != 0, c.min_kept,
          from_c(c.analysis)};
}

size_t copy_indices(const std::vector<std::size_t>& src, size_t* out, size_t cap) {
  if (out) {
    for (size_t i = 0; i < src.size() && i < cap; ++i) out[i] = src[i];
  }
  return src.size();
}

}  // namespace

extern "C" {

const char* sr_last_error(void) { return g_last_error.c_str(); }

const char* sr_version(void) { return SHEETREFINE_VERSION; }

const char* sr_status_name(sr_status status) {
  switch (status) {
    case SR_OK: return "ok";
    case SR_INVALID_ARGUMENT: return "invalid argument";
    case SR_FILE_NOT_FOUND: return "file not found";
    case SR_IO_ERROR: return "i/o error";
    case SR_DECODE_ERROR: return "decode error";
    case SR_PARSE_ERROR: return "parse error";
    case SR_NETWORK_ERROR: return "network error";
    case SR_SERVICE_ERROR: return "service error";
    case SR_INTERNAL_ERROR: return "internal error";
  }
  return "unknown";
}

void sr_string_free(char* s) { delete[] s; }

sr_status sr_image_load(const char* path, sr_image** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new sr_image{load_image(path)}; });
}

sr_status sr_image_create(int width, int height, const uint8_t* rgb, sr_image** out) {
  if (!rgb) return null_arg("rgb");
  if (!out) return null_arg("out");
  return guarded([&] {
    if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<Rgb> px(n);
    std::memcpy(px.data(), rgb, n * 3);
    *out = new sr_image{Image(width, height, std::move(px), "memory")};
  });
}

sr_status sr_image_save_png(const sr_image* img, const char* path) {
  if (!img) return null_arg("img");
  if (!path) return null_arg("path");
  return guarded([&] { save_png(img->image, path); });
}

int sr_image_width(const sr_image* img) { return img ? img->image.width() : 0; }
int sr_image_height(const sr_image* img) { return img ? img->image.height() : 0; }

const uint8_t* sr_image_pixels(const sr_image* img) {
  return img ? reinterpret_cast<const uint8_t*>(img->image.pixels().data()) : nullptr;
}

void sr_image_free(sr_image* img) { delete img; }

sr_status sr_crop_spec_load(const char* path, sr_crop_spec** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new sr_crop_spec{parse_crop_spec(path)}; });
}

sr_status sr_crop_spec_parse(const char* json, sr_crop_spec** out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new sr_crop_spec{parse_crop_spec_json(json)}; });
}

sr_status sr_crop_spec_grid(int rows, int cols, sr_crop_spec** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    if (rows < 1 || cols < 1) fail(ErrorCode::InvalidArgument, "grid must have rows >= 1 and cols >= 1");
    *out = new sr_crop_spec{UniformGrid{rows, cols}};
  });
}

void sr_crop_spec_free(sr_crop_spec* spec) { delete spec; }

sr_status sr_slice(const sr_image* img, const sr_crop_spec* spec, sr_partset** out) {
  if (!img) return null_arg("img");
  if (!spec) return null_arg("spec");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto* ps = new sr_partset{slice(img->image, spec->spec), {}};
    ps->images.reserve(ps->set.parts.size());
    for (const auto& p : ps->set.parts) ps->images.push_back({p.image});
    *out = ps;
  });
}

size_t sr_partset_count(const sr_partset* set) { return set ? set->images.size() : 0; }

const sr_image* sr_partset_image(const sr_partset* set, size_t index) {
  if (!set || index >= set->images.size()) return nullptr;
  return &set->images[index];
}

sr_status sr_partset_rect(const sr_partset* set, size_t index, sr_rect* out) {
  if (!set) return null_arg("set");
  if (!out) return null_arg("out");
  if (index >= set->set.parts.size()) return set_error(SR_INVALID_ARGUMENT, "part index out of range");
  const auto& r = set->set.parts[index].rect;
  *out = {r.x, r.y, r.width, r.height};
  return SR_OK;
}

const char* sr_partset_label(const sr_partset* set, size_t index) {
  if (!set || index >= set->set.parts.size() || !set->set.parts[index].label) return nullptr;
  return set->set.parts[index].label->c_str();
}

void sr_partset_free(sr_partset* set) { delete set; }

void sr_analysis_config_init(sr_analysis_config* cfg) {
  if (!cfg) return;
  const AnalysisConfig d;
  *cfg = {d.bins, d.resolution};
}

void sr_refine_config_init(sr_refine_config* cfg) {
  if (!cfg) return;
  const RefineConfig d;
  cfg->strictness = d.strictness;
  cfg->include_self_pairs = d.include_self_pairs ? 1 : 0;
  cfg->iterative = d.iterative ? 1 : 0;
  cfg->min_kept = d.min_kept;
  sr_analysis_config_init(&cfg->analysis);
}

sr_status sr_mi_between(const sr_image* a, const sr_image* b, const sr_analysis_config* cfg,
                        double* out) {
  if (!a) return null_arg("a");
  if (!b) return null_arg("b");
  if (!out) return null_arg("out");
  return guarded([&] {
    const AnalysisConfig c = cfg ? from_c(*cfg) : AnalysisConfig{};
    *out = mi_between_images(to_grayscale(a->image), to_grayscale(b->image), c);
  });
}

sr_status sr_refine(const sr_image* const* parts, size_t count, const sr_refine_config* cfg,
                    unsigned threads, sr_refine_report** out) {
  if (!parts) return null_arg("parts");
  if (!out) return null_arg("out");
  return guarded([&] {
    std::vector<GrayImage> gray;
    gray.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      if (!parts[i]) fail(ErrorCode::InvalidArgument, "part " + std::to_string(i) + " is NULL");
      gray.push_back(to_grayscale(parts[i]->image));
    }
    const RefineConfig c = cfg ? from_c(*cfg) : RefineConfig{};
    *out = new sr_refine_report{refine_set(gray, c, threads)};
  });
}

size_t sr_refine_report_part_count(const sr_refine_report* r) { return r ? r->report.scores.size() : 0; }

double sr_refine_report_score(const sr_refine_report* r, size_t index) {
  if (!r || index >= r->report.scores.size()) return 0.0;
  return r->report.scores[index];
}

double sr_refine_report_mean(const sr_refine_report* r) { return r ? r->report.mean : 0.0; }
double sr_refine_report_stddev(const sr_refine_report* r) { return r ? r->report.stddev : 0.0; }
double sr_refine_report_threshold(const sr_refine_report* r) { return r ? r->report.threshold : 0.0; }
size_t sr_refine_report_rounds(const sr_refine_report* r) { return r ? r->report.rounds() : 0; }

double sr_refine_report_mi(const sr_refine_report* r, size_t i, size_t j) {
  if (!r || i >= r->report.mi.size() || j >= r->report.mi.size()) return 0.0;
  return r->report.mi.at(i, j);
}

size_t sr_refine_report_kept(const sr_refine_report* r, size_t* out, size_t cap) {
  return r ? copy_indices(r->report.kept, out, cap) : 0;
}

size_t sr_refine_report_removed(const sr_refine_report* r, size_t* out, size_t cap) {
  return r ? copy_indices(r->report.removed, out, cap) : 0;
}

sr_status sr_refine_report_json(const sr_refine_report* r, char** out) {
  if (!r) return null_arg("report");
  if (!out) return null_arg("out");
  return guarded([&] { *out = dup_string(to_json(r->report).dump(2)); });
}

void sr_refine_report_free(sr_refine_report* r) { delete r; }

sr_status sr_grid_prompt(const char* character, const char* style, const char* phrase, char** out) {
  if (!character) return null_arg("character");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto p = build_grid_prompt(character, style ? style : "", phrase ? phrase : kDefaultGridPhrase);
    *out = dup_string(p.rendered);
  });
}

void sr_gen_request_init(sr_gen_request* req) {
  if (!req) return;
  const GenRequest d;
  const GenClientOptions o;
  *req = {nullptr, d.seed, d.width, d.height, d.steps, d.guidance, o.retries};
}

sr_status sr_request_grid(const char* endpoint, const sr_gen_request* req, sr_image** out) {
  if (!endpoint) return null_arg("endpoint");
  if (!req) return null_arg("req");
  if (!out) return null_arg("out");
  return guarded([&] {
    GenRequest r{req->prompt ? req->prompt : "", req->seed, req->width, req->height, req->steps,
                 req->guidance};
    GenClientOptions o;
    o.retries = req->retries;
    *out = new sr_image{request_grid(endpoint, r, o)};
  });
}

void sr_synth_spec_init(sr_synth_spec* spec) {
  if (!spec) return;
  const SynthSheetSpec d;
  *spec = {d.seed, d.rows, d.cols, nullptr, 0, d.noise_amplitude, d.jitter, d.cell_width, d.cell_height};
}

sr_status sr_synth_sheet(const sr_synth_spec* spec, sr_image** out, uint8_t* flags, size_t flags_cap) {
  if (!spec) return null_arg("spec");
  if (!out) return null_arg("out");
  if (spec->outlier_count > 0 && !spec->outlier_positions) return null_arg("outlier_positions");
  return guarded([&] {
    SynthSheetSpec s;
    s.seed = spec->seed;
    s.rows = spec->rows;
    s.cols = spec->cols;
    for (size_t i = 0; i < spec->outlier_count; ++i) s.outlier_positions.insert(spec->outlier_positions[i]);
    s.noise_amplitude = spec->noise_amplitude;
    s.jitter = spec->jitter;
    s.cell_width = spec->cell_width;
    s.cell_height = spec->cell_height;
    auto sheet = synth_sheet(s);
    if (flags && flags_cap >= sheet.is_outlier.size()) {
      for (size_t i = 0; i < sheet.is_outlier.size(); ++i) flags[i] = sheet.is_outlier[i] ? 1 : 0;
    }
    *out = new sr_image{std::move(sheet.image)};
  });
}

sr_status sr_embeddings_load(const char* path, sr_embeddings** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new sr_embeddings{load_embeddings(path)}; });
}

sr_status sr_embeddings_parse(const char* json, sr_embeddings** out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new sr_embeddings{parse_embeddings_json(json)}; });
}

size_t sr_embeddings_count(const sr_embeddings* e) { return e ? e->vectors.size() : 0; }

void sr_embeddings_free(sr_embeddings* e) { delete e; }

sr_status sr_cosine_similarity(const double* a, const double* b, size_t dim, double* out) {
  if (!a) return null_arg("a");
  if (!b) return null_arg("b");
  if (!out) return null_arg("out");
  return guarded([&] {
    EmbeddingVector va{"a", std::vector<double>(a, a + dim)};
    EmbeddingVector vb{"b", std::vector<double>(b, b + dim)};
    *out = cosine_similarity(va, vb);
  });
}

sr_status sr_evaluate(const sr_embeddings* images, const sr_embeddings* text, sr_eval_report* out) {
  if (!images) return null_arg("images");
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  return guarded([&] {
    if (text->vectors.size() != 1) {
      fail(ErrorCode::InvalidArgument, "text embedding file must hold exactly one embedding, got " +
                                           std::to_string(text->vectors.size()));
    }
    const auto r = evaluate(images->vectors, text->vectors.front());
    *out = {r.prompt_similarity, r.identity_consistency, r.n_images, r.n_pairs};
  });
}

sr_status sr_eval_report_json(const sr_eval_report* report, char** out) {
  if (!report) return null_arg("report");
  if (!out) return null_arg("out");
  return guarded([&] {
    const EvalReport r{report->prompt_similarity, report->identity_consistency, report->n_images,
                       report->n_pairs};
    *out = dup_string(to_json(r).dump(2));
  });
}

}  // extern "C"
