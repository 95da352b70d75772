#include "eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace sheetrefine {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::InvalidArgument, "embedding dimension mismatch: " + std::to_string(a.dim()) +
                                         " (" + a.id + ") vs " + std::to_string(b.dim()) + " (" +
                                         b.id + ")");
  }
  if (a.dim() == 0) fail(ErrorCode::InvalidArgument, "embedding must have dim >= 1");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorCode::InvalidArgument, "zero-norm embedding (" + (na == 0.0 ? a.id : b.id) + ")");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double prompt_similarity(std::span<const EmbeddingVector> images, const EmbeddingVector& text) {
  if (images.empty()) fail(ErrorCode::InvalidArgument, "prompt similarity needs at least one image embedding");
  double sum = 0.0;
  for (const auto& img : images) sum += cosine_similarity(img, text);
  return sum / static_cast<double>(images.size());
}

double identity_consistency(std::span<const EmbeddingVector> images) {
  if (images.size() < 2) {
    fail(ErrorCode::InvalidArgument, "identity consistency needs at least 2 image embeddings");
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      sum += cosine_similarity(images[i], images[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

EvalReport evaluate(std::span<const EmbeddingVector> images, const EmbeddingVector& text) {
  const std::size_t n = images.size();
  return {prompt_similarity(images, text), identity_consistency(images), n, n * (n - 1) / 2};
}

std::vector<EmbeddingVector> parse_embeddings_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("embeddings: malformed JSON: ") + e.what());
  }
  if (doc.is_object()) doc = json::array({doc});
  if (!doc.is_array()) fail(ErrorCode::Parse, "embeddings: top level must be an array");

  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const std::string where = "embeddings: entry " + std::to_string(i);
    if (!e.is_object()) fail(ErrorCode::Parse, where + " must be an object");
    EmbeddingVector v;
    if (auto id = e.find("id"); id != e.end()) {
      if (!id->is_string()) fail(ErrorCode::Parse, where + " field \"id\" must be a string");
      v.id = id->get<std::string>();
    } else {
      fail(ErrorCode::Parse, where + " missing field \"id\"");
    }
    auto values = e.find("values");
    if (values == e.end() || !values->is_array() || values->empty()) {
      fail(ErrorCode::Parse, where + " needs a non-empty array \"values\"");
    }
    for (const auto& x : *values) {
      if (!x.is_number()) fail(ErrorCode::Parse, where + " has a non-numeric value");
      v.values.push_back(x.get<double>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> load_embeddings(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) fail(ErrorCode::FileNotFound, path + ": file not found");
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_embeddings_json(ss.str());
}

}  // namespace sheetrefine
