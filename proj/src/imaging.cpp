#include "featpipe/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

#include "featpipe/error.hpp"

namespace featpipe {

namespace fs = std::filesystem;

Raster::Raster(std::size_t w, std::size_t h, std::uint8_t fill)
    : width(w), height(h), pixels(w * h * 3, fill) {}

namespace {

bool is_png(std::span<const std::byte> b) {
  return b.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(b.data()), 0, 8) == 0;
}

bool is_jpeg(std::span<const std::byte> b) {
  return b.size() >= 3 && b[0] == std::byte{0xff} && b[1] == std::byte{0xd8} &&
         b[2] == std::byte{0xff};
}

Raster decode_png(std::span<const std::byte> bytes, const std::string& origin) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DataError("cannot decode PNG " + origin + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw DataError("cannot decode PNG " + origin + ": " + message);
  }
  Raster r(image.width, image.height);
  for (std::size_t i = 0, n = r.width * r.height; i < n; ++i) {
    std::memcpy(&r.pixels[i * 3], &rgba[i * 4], 3);
  }
  return r;
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

// Warnings (e.g. premature end of data) are promoted to errors so that a
// truncated stream is reported rather than padded with gray.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);
}

// The setjmp frames below hold only C state; C++ objects live in the
// callers so that a longjmp never skips a destructor or leaves one reading
// an indeterminate local.
bool decode_jpeg_into(const unsigned char* data, unsigned long size, Raster* out, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_emit_message;
  if (setjmp(err.jump)) {
    std::memcpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, size);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out->width = cinfo.output_width;
  out->height = cinfo.output_height;
  out->pixels.resize(out->width * out->height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out->pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * out->width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Raster decode_jpeg(std::span<const std::byte> bytes, const std::string& origin) {
  Raster r;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg_into(reinterpret_cast<const unsigned char*>(bytes.data()),
                        static_cast<unsigned long>(bytes.size()), &r, message)) {
    throw DataError("cannot decode JPEG " + origin + ": " + message);
  }
  return r;
}

struct JpegEncodeJob {
  const std::uint8_t* pixels;
  std::size_t width, height;
  int components;
  int quality;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  char message[JMSG_LENGTH_MAX] = {};
};

bool encode_jpeg_into(JpegEncodeJob* job) {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::memcpy(job->message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &job->buffer, &job->size);
  cinfo.image_width = static_cast<JDIMENSION>(job->width);
  cinfo.image_height = static_cast<JDIMENSION>(job->height);
  cinfo.input_components = job->components;
  cinfo.in_color_space = job->components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, job->quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = job->width * static_cast<std::size_t>(job->components);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(job->pixels + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace

Raster decode_image(std::span<const std::byte> bytes, const std::string& origin) {
  if (is_png(bytes)) return decode_png(bytes, origin);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, origin);
  throw DataError("unsupported or corrupt image format: " + origin);
}

Raster read_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_image(std::as_bytes(std::span(raw)), path.string());
}

std::vector<std::byte> encode_png(const Raster& raster) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.pixels.data(), 0, nullptr)) {
    throw DataError(std::string("PNG encoding failed: ") + image.message);
  }
  std::vector<std::byte> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.pixels.data(), 0, nullptr)) {
    throw DataError(std::string("PNG encoding failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

void write_png(const Raster& raster, const fs::path& path) {
  const auto bytes = encode_png(raster);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

std::vector<std::byte> encode_jpeg(const Raster& raster, int quality, bool grayscale) {
  std::vector<std::uint8_t> gray;
  if (grayscale) {
    gray.resize(raster.width * raster.height);
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = raster.pixels[i * 3];
  }
  JpegEncodeJob job{grayscale ? gray.data() : raster.pixels.data(), raster.width, raster.height,
                    grayscale ? 1 : 3, quality};
  const bool ok = encode_jpeg_into(&job);
  std::vector<std::byte> out;
  if (ok) {
    out.assign(reinterpret_cast<std::byte*>(job.buffer),
               reinterpret_cast<std::byte*>(job.buffer) + job.size);
  }
  std::free(job.buffer);
  if (!ok) throw DataError(std::string("JPEG encoding failed: ") + job.message);
  return out;
}

Raster resize_bilinear(const Raster& src, std::size_t out_width, std::size_t out_height) {
  if (out_width == 0 || out_height == 0 || src.width == 0 || src.height == 0) {
    throw DataError("resize_bilinear needs non-empty source and target sizes");
  }
  if (src.width == out_width && src.height == out_height) return src;

  // Sample positions are exact rationals: source coordinate of output
  // index i is ((2i + 1) * in - out) / (2 * out). Working in integers
  // keeps exact halves rounding up on every platform.
  struct Tap {
    std::size_t lo, hi;
    std::int64_t frac;  // numerator over 2 * out
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const auto den = static_cast<std::int64_t>(2 * out);
    for (std::size_t i = 0; i < out; ++i) {
      const auto num = static_cast<std::int64_t>((2 * i + 1) * in) - static_cast<std::int64_t>(out);
      if (num <= 0) {
        t[i] = {0, std::min<std::size_t>(1, in - 1), 0};
        continue;
      }
      auto lo = static_cast<std::size_t>(num / den);
      std::int64_t frac = num % den;
      if (lo >= in - 1) {
        lo = in - 1;
        frac = 0;
      }
      t[i] = {lo, std::min(lo + 1, in - 1), frac};
    }
    return t;
  };
  const auto xs = taps(src.width, out_width);
  const auto ys = taps(src.height, out_height);
  const auto dx = static_cast<std::int64_t>(2 * out_width);
  const auto dy = static_cast<std::int64_t>(2 * out_height);
  const std::int64_t denom = dx * dy;

  Raster out(out_width, out_height);
  for (std::size_t y = 0; y < out_height; ++y) {
    const Tap& ty = ys[y];
    for (std::size_t x = 0; x < out_width; ++x) {
      const Tap& tx = xs[x];
      for (std::size_t c = 0; c < 3; ++c) {
        const std::int64_t top = (dx - tx.frac) * src.at(tx.lo, ty.lo, c) + tx.frac * src.at(tx.hi, ty.lo, c);
        const std::int64_t bottom = (dx - tx.frac) * src.at(tx.lo, ty.hi, c) + tx.frac * src.at(tx.hi, ty.hi, c);
        const std::int64_t v = (dy - ty.frac) * top + ty.frac * bottom;
        out.at(x, y, c) = static_cast<std::uint8_t>((2 * v + denom) / (2 * denom));
      }
    }
  }
  return out;
}

Tensor to_input_tensor(const Raster& raster, const ChannelMeans& means) {
  if (raster.width != kNetworkInputSide || raster.height != kNetworkInputSide) {
    throw DataError("network input must be 227x227, got " + std::to_string(raster.width) + "x" +
                    std::to_string(raster.height));
  }
  const std::size_t side = kNetworkInputSide;
  Tensor t({3, side, side});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        t.at(c, y, x) = static_cast<float>(raster.at(x, y, c)) - means[c];
      }
    }
  }
  return t;
}

Tensor prepare_network_input(const Raster& raster, const ChannelMeans& means) {
  return to_input_tensor(resize_bilinear(raster, kNetworkInputSide, kNetworkInputSide), means);
}

}  // namespace featpipe
