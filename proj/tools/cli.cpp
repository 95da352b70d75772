#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <regex>

#include <CLI11.hpp>
#include <json.hpp>

#include "handles.hpp"

namespace sheetrefine::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEndpointEnv = "SHEETREFINE_GEN_ENDPOINT";

struct GlobalOptions {
  unsigned threads = 0;
  std::string out;
  bool verbose = false;
};

struct RefineFlags {
  int bins = 64;
  int resolution = 256;
  double strictness = 1.0;
  bool include_self = false;
  bool iterative = false;
  int min_kept = 2;

  sr_refine_config to_c() const {
    sr_refine_config cfg;
    sr_refine_config_init(&cfg);
    cfg.strictness = strictness;
    cfg.include_self_pairs = include_self ? 1 : 0;
    cfg.iterative = iterative ? 1 : 0;
    cfg.min_kept = min_kept;
    cfg.analysis.bins = bins;
    cfg.analysis.resolution = resolution;
    return cfg;
  }
};

void add_refine_flags(CLI::App* cmd, RefineFlags& f) {
  cmd->add_option("--bins", f.bins, "Histogram bins (2-256)")->capture_default_str();
  cmd->add_option("--resolution", f.resolution, "Square analysis resolution in pixels")->capture_default_str();
  cmd->add_option("--strictness", f.strictness, "Strictness k; threshold is mean - k * stddev")
      ->capture_default_str();
  cmd->add_flag("--include-self", f.include_self, "Average over self pairs as well");
  cmd->add_flag("--iterative", f.iterative, "Repeat the filter until nothing is removed");
  cmd->add_option("--min-kept", f.min_kept, "Never keep fewer than this many parts")->capture_default_str();
}

std::string require_out(const GlobalOptions& g) {
  if (g.out.empty()) throw CliError(kExitUser, "--out is required");
  return g.out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CliError(kExitUser, path.string() + ": cannot open for writing");
  f << text;
  if (!f) throw CliError(kExitUser, path.string() + ": write failed");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError(kExitUser, dir.string() + ": cannot create directory: " + ec.message());
}

std::pair<int, int> parse_grid(const std::string& text) {
  static const std::regex re(R"((\d+)[xX](\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) {
    throw CliError(kExitUser, "--grid expects ROWSxCOLS, got \"" + text + "\"");
  }
  return {std::stoi(m[1]), std::stoi(m[2])};
}

CropSpecPtr crop_spec_from(const std::string& spec_path, const std::string& grid) {
  sr_crop_spec* raw = nullptr;
  if (!spec_path.empty() && !grid.empty()) throw CliError(kExitUser, "use either --spec or --grid, not both");
  if (!spec_path.empty()) {
    check(sr_crop_spec_load(spec_path.c_str(), &raw));
  } else if (!grid.empty()) {
    const auto [rows, cols] = parse_grid(grid);
    check(sr_crop_spec_grid(rows, cols, &raw));
  } else {
    throw CliError(kExitUser, "one of --spec or --grid is required");
  }
  return CropSpecPtr(raw);
}

std::string part_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "part_%03zu.png", index);
  return buf;
}

// Writes part PNGs and parts.json into dir. Removes everything it wrote if
// any write fails. Returns file names relative to dir.
std::vector<std::string> write_parts(const sr_partset* parts, const fs::path& dir,
                                     const std::string& source) {
  std::vector<fs::path> written;
  try {
    make_dirs(dir);
    std::vector<std::string> names;
    json entries = json::array();
    for (std::size_t i = 0; i < sr_partset_count(parts); ++i) {
      const auto name = part_name(i);
      const auto path = dir / name;
      check(sr_image_save_png(sr_partset_image(parts, i), path.string().c_str()));
      written.push_back(path);
      sr_rect r;
      check(sr_partset_rect(parts, i, &r));
      json e = {{"index", i}, {"file", name}, {"x", r.x}, {"y", r.y}, {"w", r.width}, {"h", r.height}};
      if (const char* label = sr_partset_label(parts, i)) e["label"] = label;
      entries.push_back(std::move(e));
      names.push_back(name);
    }
    const auto index_path = dir / "parts.json";
    write_json(index_path, {{"source", source}, {"parts", std::move(entries)}});
    written.push_back(index_path);
    return names;
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

struct RefineOutcome {
  json report;
  std::vector<std::size_t> kept;
};

// Runs refinement over loaded images, writes refine_report.json and copies the
// kept inputs into out/kept/.
RefineOutcome refine_and_write(const std::vector<ImagePtr>& images,
                               const std::vector<std::string>& inputs,
                               const std::vector<fs::path>& input_paths, const RefineFlags& flags,
                               unsigned threads, const fs::path& out_dir) {
  std::vector<const sr_image*> raw;
  for (const auto& img : images) raw.push_back(img.get());
  const auto cfg = flags.to_c();
  sr_refine_report* rep_raw = nullptr;
  check(sr_refine(raw.data(), raw.size(), &cfg, threads, &rep_raw), "refine");
  ReportPtr report(rep_raw);

  RefineOutcome outcome;
  outcome.report = json::parse(take_string([&] {
    char* s = nullptr;
    check(sr_refine_report_json(report.get(), &s));
    return s;
  }()));
  outcome.report["inputs"] = inputs;
  outcome.kept.resize(sr_refine_report_kept(report.get(), nullptr, 0));
  sr_refine_report_kept(report.get(), outcome.kept.data(), outcome.kept.size());

  make_dirs(out_dir);
  write_json(out_dir / "refine_report.json", outcome.report);
  const auto kept_dir = out_dir / "kept";
  std::error_code ec;
  fs::remove_all(kept_dir, ec);
  make_dirs(kept_dir);
  for (auto k : outcome.kept) {
    const auto& src = input_paths[k];
    fs::copy_file(src, kept_dir / src.filename(), fs::copy_options::overwrite_existing, ec);
    if (ec) throw CliError(kExitUser, src.string() + ": cannot copy to kept/: " + ec.message());
  }
  return outcome;
}

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    std::error_code ec;
    if (fs::is_directory(in, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  return files;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- subcommands -----------------------------------------------------------

struct SliceArgs {
  std::string image;
  std::string spec;
  std::string grid;
};

int cmd_slice(const GlobalOptions& g, const SliceArgs& a, std::ostream& out) {
  const fs::path dir = require_out(g);
  auto spec = crop_spec_from(a.spec, a.grid);
  sr_image* raw = nullptr;
  check(sr_image_load(a.image.c_str(), &raw));
  ImagePtr img(raw);
  sr_partset* ps_raw = nullptr;
  check(sr_slice(img.get(), spec.get(), &ps_raw), "slice");
  PartSetPtr parts(ps_raw);
  const auto names = write_parts(parts.get(), dir, a.image);
  out << "wrote " << names.size() << " parts to " << dir.string() << "\n";
  return kExitOk;
}

struct RefineArgs {
  std::vector<std::string> inputs;
  RefineFlags flags;
};

int cmd_refine(const GlobalOptions& g, const RefineArgs& a, std::ostream& out) {
  const fs::path dir = require_out(g);
  const auto files = collect_inputs(a.inputs);
  if (files.size() < 2) {
    throw CliError(kExitUser, "refine needs at least 2 part images, got " + std::to_string(files.size()));
  }
  std::vector<ImagePtr> images;
  std::vector<std::string> names;
  for (const auto& f : files) {
    sr_image* raw = nullptr;
    check(sr_image_load(f.string().c_str(), &raw));
    images.emplace_back(raw);
    names.push_back(f.string());
  }
  const auto outcome = refine_and_write(images, names, files, a.flags, g.threads, dir);
  out << "kept " << outcome.kept.size() << " of " << files.size() << " parts\n";
  return kExitOk;
}

struct PipelineArgs {
  std::string character;
  std::string style;
  std::string grid_phrase = "from multiple angles";
  std::string endpoint;
  std::string sheet;
  std::string spec;
  std::string grid;
  std::int64_t seed = 0;
  int width = 1024;
  int height = 1024;
  int steps = 30;
  double guidance = 7.5;
  int retries = 1;
  bool no_timestamp = false;
  RefineFlags flags;
};

// Rethrows a phase failure with the phase named in the message.
template <class Fn>
auto phase(const char* label, Fn&& fn) {
  try {
    return fn();
  } catch (const CliError& e) {
    throw CliError(e.exit_code(), std::string(label) + ": " + e.what());
  }
}

int cmd_pipeline(const GlobalOptions& g, const PipelineArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dir = require_out(g);
  std::string prompt;
  if (!a.character.empty()) {
    char* raw = nullptr;
    check(sr_grid_prompt(a.character.c_str(), a.style.c_str(), a.grid_phrase.c_str(), &raw));
    prompt = take_string(raw);
  } else if (a.sheet.empty()) {
    throw CliError(kExitUser, "--character is required unless --sheet is given");
  }
  // Validate slicing flags before any work is done.
  auto spec = crop_spec_from(a.spec, a.grid.empty() && a.spec.empty() ? "2x3" : a.grid);

  ImagePtr sheet = phase("phase 1 (generate)", [&] {
    sr_image* raw = nullptr;
    if (!a.sheet.empty()) {
      check(sr_image_load(a.sheet.c_str(), &raw));
    } else {
      std::string endpoint = a.endpoint;
      if (endpoint.empty()) {
        if (const char* env = std::getenv(kEndpointEnv)) endpoint = env;
      }
      if (endpoint.empty()) {
        throw CliError(kExitUser, std::string("no generation endpoint; pass --gen-endpoint or set ") +
                                      kEndpointEnv + ", or supply --sheet");
      }
      sr_gen_request req;
      sr_gen_request_init(&req);
      req.prompt = prompt.c_str();
      req.seed = a.seed;
      req.width = a.width;
      req.height = a.height;
      req.steps = a.steps;
      req.guidance = a.guidance;
      req.retries = a.retries;
      if (g.verbose) err << "requesting sheet from " << endpoint << ": " << prompt << "\n";
      check(sr_request_grid(endpoint.c_str(), &req, &raw));
    }
    ImagePtr img(raw);
    make_dirs(dir);
    check(sr_image_save_png(img.get(), (dir / "sheet.png").string().c_str()));
    return img;
  });

  const fs::path parts_dir = dir / "parts";
  auto [parts, names] = phase("phase 2 (slice)", [&] {
    sr_partset* raw = nullptr;
    check(sr_slice(sheet.get(), spec.get(), &raw));
    PartSetPtr ps(raw);
    auto written = write_parts(ps.get(), parts_dir, "sheet.png");
    return std::make_pair(std::move(ps), std::move(written));
  });
  if (g.verbose) err << "sliced " << names.size() << " parts\n";

  const auto outcome = phase("phase 3 (refine)", [&] {
    std::vector<ImagePtr> images;
    std::vector<std::string> inputs;
    std::vector<fs::path> paths;
    for (std::size_t i = 0; i < names.size(); ++i) {
      sr_image* raw = nullptr;
      check(sr_image_load((parts_dir / names[i]).string().c_str(), &raw));
      images.emplace_back(raw);
      inputs.push_back("parts/" + names[i]);
      paths.push_back(parts_dir / names[i]);
    }
    return refine_and_write(images, inputs, paths, a.flags, g.threads, dir);
  });

  json images = json::array();
  for (auto k : outcome.kept) {
    images.push_back({{"file", "parts/" + names[k]}, {"part_index", k}, {"score", outcome.report["scores"][k]}});
  }
  json manifest = {{"tool_version", sr_version()},
                   {"character_prompt", a.character},
                   {"style", a.style},
                   {"prompt", prompt},
                   {"refine_report_path", "refine_report.json"},
                   {"created_at", a.no_timestamp ? json(nullptr) : json(timestamp_utc())},
                   {"images", std::move(images)}};
  write_json(dir / "manifest.json", manifest);
  out << "kept " << outcome.kept.size() << " of " << names.size() << " parts; manifest at "
      << (dir / "manifest.json").string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string images;
  std::string text;
};

int cmd_eval(const GlobalOptions& g, const EvalArgs& a, std::ostream& out) {
  const fs::path path = require_out(g);
  sr_embeddings* raw = nullptr;
  check(sr_embeddings_load(a.images.c_str(), &raw));
  EmbeddingsPtr images(raw);
  check(sr_embeddings_load(a.text.c_str(), &raw));
  EmbeddingsPtr text(raw);
  sr_eval_report report;
  check(sr_evaluate(images.get(), text.get(), &report), "eval");
  char* json_raw = nullptr;
  check(sr_eval_report_json(&report, &json_raw));
  if (path.has_parent_path()) make_dirs(path.parent_path());
  write_text(path, take_string(json_raw) + "\n");
  out << "prompt_similarity " << report.prompt_similarity << ", identity_consistency "
      << report.identity_consistency << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::uint64_t seed = 0;
  int rows = 2;
  int cols = 3;
  std::vector<int> outliers;
  int amplitude = 10;
  int jitter = 2;
  int cell_width = 128;
  int cell_height = 128;
};

int cmd_synth(const GlobalOptions& g, const SynthArgs& a, std::ostream& out) {
  const fs::path dir = require_out(g);
  sr_synth_spec spec;
  sr_synth_spec_init(&spec);
  spec.seed = a.seed;
  spec.rows = a.rows;
  spec.cols = a.cols;
  spec.outlier_positions = a.outliers.data();
  spec.outlier_count = a.outliers.size();
  spec.noise_amplitude = a.amplitude;
  spec.jitter = a.jitter;
  spec.cell_width = a.cell_width;
  spec.cell_height = a.cell_height;
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(std::max(0, a.rows * a.cols)));
  sr_image* raw = nullptr;
  check(sr_synth_sheet(&spec, &raw, flags.data(), flags.size()), "synth");
  ImagePtr sheet(raw);
  make_dirs(dir);
  check(sr_image_save_png(sheet.get(), (dir / "sheet.png").string().c_str()));
  json truth = {{"seed", a.seed},        {"rows", a.rows},          {"cols", a.cols},
                {"amplitude", a.amplitude}, {"jitter", a.jitter},
                {"cell_width", a.cell_width}, {"cell_height", a.cell_height},
                {"is_outlier", json::array()}};
  for (auto f : flags) truth["is_outlier"].push_back(f != 0);
  write_json(dir / "truth.json", truth);
  out << "wrote " << (dir / "sheet.png").string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Refine character-sheet candidates by mutual-information consistency", "sheetrefine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sr_version()));

  GlobalOptions g;
  app.add_option("--threads", g.threads, "Worker threads for MI (0 = all cores)")->capture_default_str();
  app.add_option("--out", g.out, "Output directory (file path for eval)");
  app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");

  SliceArgs slice;
  auto* slice_cmd = app.add_subcommand("slice", "Cut a sheet into part images");
  slice_cmd->fallthrough();
  slice_cmd->add_option("image", slice.image, "Sheet image (PNG or JPEG)")->required();
  slice_cmd->add_option("--spec", slice.spec, "Crop-spec JSON file");
  slice_cmd->add_option("--grid", slice.grid, "Uniform grid, ROWSxCOLS");

  RefineArgs refine;
  auto* refine_cmd = app.add_subcommand("refine", "Score parts by average pairwise MI and drop outliers");
  refine_cmd->fallthrough();
  refine_cmd->add_option("inputs", refine.inputs, "Part images or a directory of them")->required();
  add_refine_flags(refine_cmd, refine.flags);

  PipelineArgs pipe;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Generate, slice and refine; write a training manifest");
  pipe_cmd->fallthrough();
  pipe_cmd->add_option("--character", pipe.character, "Character description");
  pipe_cmd->add_option("--style", pipe.style, "Style description");
  pipe_cmd->add_option("--grid-phrase", pipe.grid_phrase, "Grid phrase")->capture_default_str();
  pipe_cmd->add_option("--gen-endpoint", pipe.endpoint, std::string("Generation URL (default $") + kEndpointEnv + ")");
  pipe_cmd->add_option("--sheet", pipe.sheet, "Use an existing sheet instead of generating one");
  pipe_cmd->add_option("--spec", pipe.spec, "Crop-spec JSON file");
  pipe_cmd->add_option("--grid", pipe.grid, "Uniform grid, ROWSxCOLS (default 2x3)");
  pipe_cmd->add_option("--seed", pipe.seed)->capture_default_str();
  pipe_cmd->add_option("--width", pipe.width)->capture_default_str();
  pipe_cmd->add_option("--height", pipe.height)->capture_default_str();
  pipe_cmd->add_option("--steps", pipe.steps)->capture_default_str();
  pipe_cmd->add_option("--guidance", pipe.guidance)->capture_default_str();
  pipe_cmd->add_option("--retries", pipe.retries, "Extra attempts after a network failure")->capture_default_str();
  pipe_cmd->add_flag("--no-timestamp", pipe.no_timestamp, "Write created_at as null");
  add_refine_flags(pipe_cmd, pipe.flags);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Prompt similarity and identity consistency from embeddings");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--images", eval.images, "Image embeddings JSON")->required();
  eval_cmd->add_option("--text", eval.text, "Prompt text embedding JSON")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a deterministic synthetic sheet with known outliers");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--rows", synth.rows)->capture_default_str();
  synth_cmd->add_option("--cols", synth.cols)->capture_default_str();
  synth_cmd->add_option("--outlier", synth.outliers, "Outlier cell index (repeatable)");
  synth_cmd->add_option("--amplitude", synth.amplitude, "Noise amplitude")->capture_default_str();
  synth_cmd->add_option("--jitter", synth.jitter, "Max translation in pixels")->capture_default_str();
  synth_cmd->add_option("--cell-width", synth.cell_width)->capture_default_str();
  synth_cmd->add_option("--cell-height", synth.cell_height)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << sr_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUser;
  }

  try {
    if (*slice_cmd) return cmd_slice(g, slice, out);
    if (*refine_cmd) return cmd_refine(g, refine, out);
    if (*pipe_cmd) return cmd_pipeline(g, pipe, out, err);
    if (*eval_cmd) return cmd_eval(g, eval, out);
    if (*synth_cmd) return cmd_synth(g, synth, out);
  } catch (const CliError& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUser;
}

}  // namespace sheetrefine::cli
