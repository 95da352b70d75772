#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

// jpeglib.h expects size_t and FILE to be declared first.
#include <jpeglib.h>

#include "error.hpp"
#include "image_core.hpp"

namespace sheetrefine {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

[[noreturn]] void corrupt(const std::string& source_id, const std::string& detail) {
  fail(ErrorCode::Decode, source_id + ": corrupt or unsupported image (" + detail + ")");
}

Image decode_png(std::span<const std::uint8_t> bytes, const std::string& source_id) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    corrupt(source_id, image.message);
  }
  // Alpha is dropped by compositing onto black.
  image.format = PNG_FORMAT_RGB;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<Rgb> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  static_assert(sizeof(Rgb) == 3);
  const png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    corrupt(source_id, msg);
  }
  return Image(width, height, std::move(pixels), source_id);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Image decode_jpeg(std::span<const std::uint8_t> bytes, const std::string& source_id) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;

  // Declared before setjmp so longjmp does not skip a destructor.
  std::vector<Rgb> pixels;
  int width = 0;
  int height = 0;

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    corrupt(source_id, err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  while (cinfo.output_scanline < cinfo.output_height) {
    auto* row = reinterpret_cast<JSAMPROW>(
        pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width);
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return Image(width, height, std::move(pixels), source_id);
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes, const std::string& source_id) {
  if (is_png(bytes)) return decode_png(bytes, source_id);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, source_id);
  corrupt(source_id, "unrecognised signature");
}

Image load_image(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(ErrorCode::FileNotFound, path + ": file not found");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, path + ": cannot open for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_image(bytes, path);
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, img.pixels().data(), 0, nullptr)) {
    fail(ErrorCode::Internal, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels().data(), 0,
                                 nullptr)) {
    fail(ErrorCode::Internal, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

void save_png(const Image& img, const std::string& path) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, path + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, path + ": write failed");
}

}  // namespace sheetrefine
