#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "image_core.hpp"

namespace sheetrefine {

inline constexpr const char* kDefaultGridPhrase = "from multiple angles";

struct GridPrompt {
  std::string character_description;
  std::string style_description;
  std::string grid_phrase;
  std::string rendered;
};

// "<character>, <grid phrase>, <style>"; an empty style drops its separator.
GridPrompt build_grid_prompt(const std::string& character, const std::string& style,
                             const std::string& grid_phrase = kDefaultGridPhrase);

struct GenRequest {
  std::string prompt;
  std::int64_t seed = 0;
  int width = 1024;
  int height = 1024;
  int steps = 30;
  double guidance = 7.5;
};

void validate(const GenRequest& req);

struct GenClientOptions {
  int retries = 1;  // extra attempts after a network failure
  int connect_timeout_s = 5;
  int read_timeout_s = 300;
};

// POSTs the request as JSON to `endpoint` (http://host[:port][/path]). Accepts
// a raw PNG/JPEG body or JSON {"image_b64": "..."}. Failures surface as
// ErrorCode::Network, ErrorCode::Service (non-2xx) or ErrorCode::Decode.
Image request_grid(const std::string& endpoint, const GenRequest& req,
                   const GenClientOptions& options = {});

// xorshift64* (Vigna, 2014) seeded through one splitmix64 step. Output is
// identical on every platform for a given seed.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed);

  std::uint64_t next() noexcept;
  // Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept;
  // Uniform integer in [lo, hi].
  int range(int lo, int hi) noexcept;

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct SynthSheetSpec {
  std::uint64_t seed = 0;
  int rows = 2;
  int cols = 3;
  std::set<int> outlier_positions;
  int noise_amplitude = 10;  // intensity units, [0, 128]
  int jitter = 2;            // max translation in pixels
  int cell_width = 128;
  int cell_height = 128;
};

void validate(const SynthSheetSpec& spec);

struct SynthSheet {
  Image image;
  std::vector<bool> is_outlier;  // per cell, row-major
};

// A base pattern (seeded gradient plus filled shapes) is rendered once; each
// inlier cell is the base shifted by up to `jitter` pixels with uniform noise
// in [-amplitude, amplitude] per channel. Outlier cells use patterns from
// seeds derived from the cell index.
SynthSheet synth_sheet(const SynthSheetSpec& spec);

// Pattern renderer used by synth_sheet, exposed for tests.
Image synth_pattern(std::uint64_t seed, int width, int height);

}  // namespace sheetrefine
