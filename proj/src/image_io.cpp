#include <png.h>
#include <unistd.h>

#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcnvs/errors.hpp"
#include "pcnvs/io.hpp"

namespace pcnvs::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into place at '" + path.string() + "'");
  }
}

std::uint8_t to_byte(float v) {
  const double scaled = std::floor(static_cast<double>(v) * 255.0 + 0.5);
  if (!(scaled > 0.0)) return 0;
  if (scaled >= 255.0) return 255;
  return static_cast<std::uint8_t>(scaled);
}

// ---------------------------------------------------------------------------
// PNG via the libpng simplified API.
// ---------------------------------------------------------------------------

Image decode_png(std::string_view bytes) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw InputError(std::string("png: ") + img.message);
  }
  if (img.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&img);
    throw InputError("png: unsupported bit depth (only 8-bit images are supported)");
  }
  img.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw InputError("png: " + msg);
  }
  const int w = static_cast<int>(img.width);
  const int h = static_cast<int>(img.height);
  Image out(w, h, 3);
  for (std::size_t i = 0, n = out.pixel_count(); i < n; ++i) {
    for (int c = 0; c < 3; ++c) out[i * 3 + c] = static_cast<float>(buffer[i * 4 + c]) / 255.0f;
  }
  return out;
}

namespace {

std::string encode_png_raw(const std::vector<std::uint8_t>& pixels, int width, int height,
                           png_uint_32 format) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("png encode: ") + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("png encode: ") + img.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

std::string encode_png(const Image& image) {
  if (image.channels() != 3) throw InputError("png: only RGB images can be saved");
  if (image.width() <= 0 || image.height() <= 0) throw InputError("png: empty image");
  std::vector<std::uint8_t> pixels(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) pixels[i] = to_byte(image[i]);
  return encode_png_raw(pixels, image.width(), image.height(), PNG_FORMAT_RGB);
}

std::string encode_mask_png(const std::vector<std::uint8_t>& mask, int width, int height) {
  if (mask.size() != static_cast<std::size_t>(width) * height || width <= 0 || height <= 0) {
    throw InputError("png: mask size does not match its dimensions");
  }
  std::vector<std::uint8_t> pixels(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) pixels[i] = mask[i] ? 255 : 0;
  return encode_png_raw(pixels, width, height, PNG_FORMAT_GRAY);
}

Image load_image(const std::filesystem::path& path) {
  try {
    return decode_png(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void save_image(const Image& image, const std::filesystem::path& path) {
  write_file_atomic(path, encode_png(image));
}

void save_mask(const std::vector<std::uint8_t>& mask, int width, int height,
               const std::filesystem::path& path) {
  write_file_atomic(path, encode_mask_png(mask, width, height));
}

// ---------------------------------------------------------------------------
// PFM
// ---------------------------------------------------------------------------

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::string token(const char* what) {
    while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) {
      throw InputError("pfm: truncated header at byte offset " + std::to_string(start) +
                       " (expected " + what + ")");
    }
    return std::string(bytes_.substr(start, pos_ - start));
  }

  /// Consumes the single whitespace byte that ends the header.
  std::size_t end_of_header() {
    if (pos_ >= bytes_.size()) {
      throw InputError("pfm: truncated header at byte offset " + std::to_string(pos_));
    }
    if (!std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw InputError("pfm: malformed header at byte offset " + std::to_string(pos_));
    }
    return pos_ + 1;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

int parse_dimension(const std::string& tok, std::size_t offset) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || v <= 0 || v > (1 << 20)) {
    throw InputError("pfm: malformed dimension '" + tok + "' near byte offset " +
                     std::to_string(offset));
  }
  return static_cast<int>(v);
}

}  // namespace

DepthMap decode_pfm(std::string_view bytes) {
  HeaderReader hdr(bytes);
  const std::string magic = hdr.token("magic");
  if (magic == "PF") throw InputError("pfm: 3-channel PFM given, depth needs a single channel (Pf)");
  if (magic != "Pf") throw InputError("pfm: bad magic '" + magic + "' at byte offset 0");
  const int w = parse_dimension(hdr.token("width"), hdr.pos());
  const int h = parse_dimension(hdr.token("height"), hdr.pos());
  const std::string scale_tok = hdr.token("scale");
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    scale = 0.0;
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw InputError("pfm: malformed scale '" + scale_tok + "' near byte offset " +
                     std::to_string(hdr.pos()));
  }
  const bool little = scale < 0.0;
  const std::size_t data_start = hdr.end_of_header();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const std::size_t need = data_start + n * 4;
  if (bytes.size() < need) {
    throw InputError("pfm: truncated data at byte offset " + std::to_string(bytes.size()) +
                     " (expected " + std::to_string(need) + " bytes)");
  }

  const bool swap = little != (std::endian::native == std::endian::little);
  std::vector<double> values(n);
  for (int row = 0; row < h; ++row) {
    const int y = h - 1 - row;
    for (int x = 0; x < w; ++x) {
      std::uint32_t raw;
      std::memcpy(&raw, bytes.data() + data_start + (static_cast<std::size_t>(row) * w + x) * 4, 4);
      if (swap) raw = __builtin_bswap32(raw);
      values[static_cast<std::size_t>(y) * w + x] = static_cast<double>(std::bit_cast<float>(raw));
    }
  }
  return DepthMap(w, h, std::move(values));
}

std::string encode_pfm(const DepthMap& depth) {
  const int w = depth.width();
  const int h = depth.height();
  if (w <= 0 || h <= 0) throw InputError("pfm: empty depth map");
  std::string out = "Pf\n" + std::to_string(w) + " " + std::to_string(h) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + static_cast<std::size_t>(w) * h * 4);
  const bool swap = std::endian::native != std::endian::little;
  for (int row = 0; row < h; ++row) {
    const int y = h - 1 - row;
    for (int x = 0; x < w; ++x) {
      auto raw = std::bit_cast<std::uint32_t>(static_cast<float>(depth.at(x, y)));
      if (swap) raw = __builtin_bswap32(raw);
      std::memcpy(out.data() + header + (static_cast<std::size_t>(row) * w + x) * 4, &raw, 4);
    }
  }
  return out;
}

DepthMap load_depth(const std::filesystem::path& path) {
  try {
    return decode_pfm(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void save_depth(const DepthMap& depth, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pfm(depth));
}

}  // namespace pcnvs::io
