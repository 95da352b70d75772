#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sheetrefine {

struct EmbeddingVector {
  std::string id;
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
};

struct EvalReport {
  double prompt_similarity = 0.0;
  double identity_consistency = 0.0;
  std::size_t n_images = 0;
  std::size_t n_pairs = 0;
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Mean cosine of each image embedding against the text embedding.
double prompt_similarity(std::span<const EmbeddingVector> images, const EmbeddingVector& text);

// Mean cosine over unordered pairs i < j.
double identity_consistency(std::span<const EmbeddingVector> images);

EvalReport evaluate(std::span<const EmbeddingVector> images, const EmbeddingVector& text);

// JSON array of {"id": string, "values": [number, ...]}. A single object is
// accepted as a one-element list.
std::vector<EmbeddingVector> parse_embeddings_json(const std::string& text);
std::vector<EmbeddingVector> load_embeddings(const std::string& path);

}  // namespace sheetrefine
