#pragma once

// RAII ownership for sheetrefine C API handles, plus the error type the CLI
// uses to carry an exit code.

#include <memory>
#include <stdexcept>
#include <string>

#include "sheetrefine/sheetrefine.h"

namespace sheetrefine::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& message)
      : std::runtime_error(message), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

inline void check(sr_status status, const std::string& context = {}) {
  if (status == SR_OK) return;
  const int code = status == SR_INTERNAL_ERROR ? kExitInternal : kExitUser;
  std::string msg = sr_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw CliError(code, msg);
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const noexcept { Free(p); }
};

using ImagePtr = std::unique_ptr<sr_image, Deleter<sr_image, sr_image_free>>;
using CropSpecPtr = std::unique_ptr<sr_crop_spec, Deleter<sr_crop_spec, sr_crop_spec_free>>;
using PartSetPtr = std::unique_ptr<sr_partset, Deleter<sr_partset, sr_partset_free>>;
using ReportPtr = std::unique_ptr<sr_refine_report, Deleter<sr_refine_report, sr_refine_report_free>>;
using EmbeddingsPtr = std::unique_ptr<sr_embeddings, Deleter<sr_embeddings, sr_embeddings_free>>;
using CStringPtr = std::unique_ptr<char, Deleter<char, sr_string_free>>;

inline std::string take_string(char* raw) {
  CStringPtr owned(raw);
  return owned ? std::string(owned.get()) : std::string();
}

}  // namespace sheetrefine::cli
