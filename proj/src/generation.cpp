#include "generation.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <httplib.h>
#include <json.hpp>

#include "error.hpp"

namespace sheetrefine {

GridPrompt build_grid_prompt(const std::string& character, const std::string& style,
                             const std::string& grid_phrase) {
  if (character.empty()) fail(ErrorCode::InvalidArgument, "character description must not be empty");
  GridPrompt p{character, style, grid_phrase, character};
  if (!grid_phrase.empty()) p.rendered += ", " + grid_phrase;
  if (!style.empty()) p.rendered += ", " + style;
  return p;
}

void validate(const GenRequest& req) {
  if (req.width < 64 || req.height < 64) {
    fail(ErrorCode::InvalidArgument, "generation size must be at least 64x64");
  }
  if (req.steps < 1) fail(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (!(req.guidance >= 1.0)) fail(ErrorCode::InvalidArgument, "guidance must be >= 1");
}

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
    fail(ErrorCode::InvalidArgument, "endpoint must be an http:// URL, got \"" + url + "\"");
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  if (clean.empty() || clean.size() % 4 != 0) fail(ErrorCode::Decode, "image_b64 is not valid base64");
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) fail(ErrorCode::Decode, "image_b64 is not valid base64");
  // EVP_DecodeBlock counts padding as zero bytes.
  std::size_t pad = 0;
  if (clean.back() == '=') ++pad;
  if (clean.size() >= 2 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

Image request_grid(const std::string& endpoint, const GenRequest& req,
                   const GenClientOptions& options) {
  validate(req);
  const auto ep = split_endpoint(endpoint);

  httplib::Client client(ep.base);
  client.set_connection_timeout(options.connect_timeout_s, 0);
  client.set_read_timeout(options.read_timeout_s, 0);

  const nlohmann::json body = {{"prompt", req.prompt}, {"seed", req.seed},
                               {"width", req.width},   {"height", req.height},
                               {"steps", req.steps},   {"guidance", req.guidance}};
  const std::string payload = body.dump();

  httplib::Result res;
  for (int attempt = 0; attempt <= std::max(0, options.retries); ++attempt) {
    res = client.Post(ep.path, payload, "application/json");
    if (res) break;
  }
  if (!res) {
    fail(ErrorCode::Network, "generation request to " + endpoint + " failed: " +
                                 httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    fail(ErrorCode::Service, "generation service returned status " + std::to_string(res->status) +
                                 ": " + excerpt(res->body));
  }

  const std::string source = "generated:" + std::to_string(req.seed);
  const auto content_type = res->get_header_value("Content-Type");
  if (content_type.find("application/json") != std::string::npos ||
      (!res->body.empty() && res->body.front() == '{')) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      fail(ErrorCode::Decode, "generation response is not valid JSON: " + excerpt(res->body));
    }
    if (!doc.is_object() || !doc.contains("image_b64") || !doc["image_b64"].is_string()) {
      fail(ErrorCode::Decode, "generation response JSON lacks string field \"image_b64\"");
    }
    const auto bytes = base64_decode(doc["image_b64"].get<std::string>());
    return decode_image(bytes, source);
  }
  const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(res->body.data()),
                                            res->body.size());
  return decode_image(bytes, source);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

XorShift64Star::XorShift64Star(std::uint64_t seed) : state_(splitmix64(seed)) {
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t XorShift64Star::next() noexcept {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

double XorShift64Star::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

int XorShift64Star::range(int lo, int hi) noexcept {
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
  return lo + static_cast<int>(next() % span);
}

void validate(const SynthSheetSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) fail(ErrorCode::InvalidArgument, "synth sheet needs rows, cols >= 1");
  if (spec.cell_width < 1 || spec.cell_height < 1) {
    fail(ErrorCode::InvalidArgument, "synth sheet cell size must be >= 1");
  }
  if (spec.noise_amplitude < 0 || spec.noise_amplitude > 128) {
    fail(ErrorCode::InvalidArgument, "noise amplitude must be in [0, 128]");
  }
  if (spec.jitter < 0) fail(ErrorCode::InvalidArgument, "jitter must be >= 0");
  for (int p : spec.outlier_positions) {
    if (p < 0 || p >= spec.rows * spec.cols) {
      fail(ErrorCode::InvalidArgument, "outlier position " + std::to_string(p) + " is not a valid cell");
    }
  }
}

namespace {

Rgb random_color(XorShift64Star& rng) {
  return {static_cast<std::uint8_t>(rng.range(0, 255)), static_cast<std::uint8_t>(rng.range(0, 255)),
          static_cast<std::uint8_t>(rng.range(0, 255))};
}

std::uint8_t lerp(std::uint8_t a, std::uint8_t b, double t) {
  return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
}

// Derived seeds for independent streams within one sheet.
std::uint64_t derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ (stream * 0xD1B54A32D192ED03ULL)) + index);
}

constexpr std::uint64_t kBaseStream = 1;
constexpr std::uint64_t kOutlierStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

}  // namespace

Image synth_pattern(std::uint64_t seed, int width, int height) {
  XorShift64Star rng(seed);
  const Rgb c0 = random_color(rng);
  const Rgb c1 = random_color(rng);
  const double angle = rng.uniform() * 2.0 * std::numbers::pi;
  const double ux = std::cos(angle);
  const double uy = std::sin(angle);
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  const double half_extent = std::max(1.0, (std::abs(ux) * width + std::abs(uy) * height) / 2.0);

  Image img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = std::clamp(((x - cx) * ux + (y - cy) * uy) / (2.0 * half_extent) + 0.5, 0.0, 1.0);
      img.at(x, y) = {lerp(c0.r, c1.r, t), lerp(c0.g, c1.g, t), lerp(c0.b, c1.b, t)};
    }
  }

  const int side = std::min(width, height);
  const int shapes = rng.range(6, 10);
  for (int s = 0; s < shapes; ++s) {
    const int kind = rng.range(0, 2);  // 0 disc, 1 rectangle, 2 ring
    const Rgb color = random_color(rng);
    const double px = rng.uniform() * width;
    const double py = rng.uniform() * height;
    const double r = std::max(1.0, side * (0.08 + 0.22 * rng.uniform()));
    const double r2 = std::max(1.0, side * (0.08 + 0.22 * rng.uniform()));
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = x - px;
        const double dy = y - py;
        bool inside = false;
        if (kind == 0) {
          inside = dx * dx + dy * dy <= r * r;
        } else if (kind == 1) {
          inside = std::abs(dx) <= r && std::abs(dy) <= r2;
        } else {
          const double d = std::sqrt(dx * dx + dy * dy);
          inside = d <= r && d >= r * 0.6;
        }
        if (inside) img.at(x, y) = color;
      }
    }
  }
  return img;
}

SynthSheet synth_sheet(const SynthSheetSpec& spec) {
  validate(spec);
  const int cw = spec.cell_width;
  const int ch = spec.cell_height;
  const Image base = synth_pattern(derive(spec.seed, kBaseStream, 0), cw, ch);

  SynthSheet sheet{Image(cw * spec.cols, ch * spec.rows), {}};
  sheet.image.set_source_id("synth:" + std::to_string(spec.seed));
  const int cells = spec.rows * spec.cols;
  sheet.is_outlier.assign(static_cast<std::size_t>(cells), false);

  for (int cell = 0; cell < cells; ++cell) {
    const bool outlier = spec.outlier_positions.contains(cell);
    sheet.is_outlier[static_cast<std::size_t>(cell)] = outlier;
    const Image pattern =
        outlier ? synth_pattern(derive(spec.seed, kOutlierStream, static_cast<std::uint64_t>(cell)), cw, ch)
                : base;

    XorShift64Star rng(derive(spec.seed, kNoiseStream, static_cast<std::uint64_t>(cell)));
    const int shift_x = spec.jitter > 0 ? rng.range(-spec.jitter, spec.jitter) : 0;
    const int shift_y = spec.jitter > 0 ? rng.range(-spec.jitter, spec.jitter) : 0;
    const int ox = (cell % spec.cols) * cw;
    const int oy = (cell / spec.cols) * ch;
    const int a = spec.noise_amplitude;

    auto noisy = [&](std::uint8_t v) {
      if (a == 0) return v;
      return static_cast<std::uint8_t>(std::clamp(v + rng.range(-a, a), 0, 255));
    };
    for (int y = 0; y < ch; ++y) {
      for (int x = 0; x < cw; ++x) {
        const Rgb src = pattern.at(std::clamp(x - shift_x, 0, cw - 1), std::clamp(y - shift_y, 0, ch - 1));
        sheet.image.at(ox + x, oy + y) = {noisy(src.r), noisy(src.g), noisy(src.b)};
      }
    }
  }
  return sheet;
}

}  // namespace sheetrefine
