#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>
// jpeglib.h needs size_t and FILE declared first.
#include <jpeglib.h>

#include "aiart/error.hpp"
#include "aiart/imaging.hpp"
#include "aiart/textio.hpp"

namespace aiart {

namespace {

bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), signature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

RasterImage decode_png(std::span<const std::uint8_t> bytes, const std::string& origin) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw DecodeError(origin + ": " + image.message);
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw DecodeError(origin + ": " + message);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  std::vector<Rgb> pixels(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const std::uint8_t* p = &rgba[i * 4];
    const int alpha = p[3];
    // Composite over white.
    auto over = [alpha](int c) {
      return static_cast<std::uint8_t>((c * alpha + 255 * (255 - alpha) + 127) / 255);
    };
    pixels[i] = {over(p[0]), over(p[1]), over(p[2])};
  }
  return RasterImage(w, h, std::move(pixels));
}

struct JpegError {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

struct JpegPixels {
  int width = 0;
  int height = 0;
  int components = 0;
  std::vector<std::uint8_t> data;
};

// Only trivially destructible locals live between setjmp and longjmp.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, JpegPixels& out, char* message) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_silence;
  if (setjmp(err.jump)) {
    std::memcpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space != JCS_GRAYSCALE) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.components = cinfo.output_components;
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.components;
  out.data.resize(stride * out.height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

RasterImage decode_jpeg(std::span<const std::uint8_t> bytes, const std::string& origin) {
  JpegPixels raw;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg_raw(bytes, raw, message)) throw DecodeError(origin + ": " + message);
  if (raw.width <= 0 || raw.height <= 0) throw DecodeError(origin + ": empty JPEG");
  std::vector<Rgb> pixels(static_cast<std::size_t>(raw.width) * raw.height);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (raw.components == 1) {
      const auto v = raw.data[i];
      pixels[i] = {v, v, v};
    } else {
      const std::uint8_t* p = &raw.data[i * 3];
      pixels[i] = {p[0], p[1], p[2]};
    }
  }
  return RasterImage(raw.width, raw.height, std::move(pixels));
}

bool encode_jpeg_raw(const RasterImage& image, int quality, bool grayscale, unsigned char** buffer,
                     unsigned long* size, std::vector<std::uint8_t>& scratch) {
  jpeg_compress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, buffer, size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width());
  cinfo.image_height = static_cast<JDIMENSION>(image.height());
  cinfo.input_components = grayscale ? 1 : 3;
  cinfo.in_color_space = grayscale ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(image.width()) * cinfo.input_components;
  scratch.resize(stride);
  while (cinfo.next_scanline < cinfo.image_height) {
    const int y = static_cast<int>(cinfo.next_scanline);
    for (int x = 0; x < image.width(); ++x) {
      const Rgb& p = image.at(x, y);
      if (grayscale) {
        scratch[static_cast<std::size_t>(x)] = p.r;
      } else {
        scratch[static_cast<std::size_t>(x) * 3] = p.r;
        scratch[static_cast<std::size_t>(x) * 3 + 1] = p.g;
        scratch[static_cast<std::size_t>(x) * 3 + 2] = p.b;
      }
    }
    JSAMPROW row = scratch.data();
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace

RasterImage decode(std::span<const std::uint8_t> bytes, const std::string& origin) {
  if (is_png(bytes)) return decode_png(bytes, origin);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, origin);
  throw DecodeError(origin + ": not a PNG or JPEG stream");
}

RasterImage decode_file(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const IOError& e) {
    throw DecodeError(e.what());
  }
  return decode(bytes, path.string());
}

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
  png_image info;
  std::memset(&info, 0, sizeof(info));
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(image.width());
  info.height = static_cast<png_uint_32>(image.height());
  info.format = PNG_FORMAT_RGB;
  static_assert(sizeof(Rgb) == 3);
  const auto* pixels = reinterpret_cast<const std::uint8_t*>(image.pixels().data());
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&info, nullptr, &size, 0, pixels, 0, nullptr))
    throw IOError(std::string("PNG encode failed: ") + info.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&info, out.data(), &size, 0, pixels, 0, nullptr))
    throw IOError(std::string("PNG encode failed: ") + info.message);
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_jpeg(const RasterImage& image, int quality, bool grayscale) {
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  std::vector<std::uint8_t> scratch;
  const bool ok = encode_jpeg_raw(image, quality, grayscale, &buffer, &size, scratch);
  std::vector<std::uint8_t> out;
  if (ok) out.assign(buffer, buffer + size);
  std::free(buffer);
  if (!ok) throw IOError("JPEG encode failed");
  return out;
}

bool has_image_extension(const std::filesystem::path& path) {
  const auto ext = to_lower(path.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace aiart
