// SPDX-License-Identifier: Apache-2.0
#include "lskdet/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>

#include "lskdet/coco_io.hpp"
#include "lskdet/error.hpp"

namespace lskdet {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  long next_int(const char* what) {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1L << 24)) throw IoError(std::string("netpbm: ") + what + " too large");
      ++digits;
    }
    if (digits == 0) throw IoError(std::string("netpbm: missing ") + what);
    return v;
  }

  /// Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw IoError("netpbm: header not terminated by whitespace");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

ImageData decode_netpbm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw IoError("netpbm: expected a P5 or P6 file");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader reader(bytes);
  const long width = reader.next_int("width");
  const long height = reader.next_int("height");
  const long maxval = reader.next_int("maxval");
  if (maxval != 255) throw IoError("netpbm: only maxval 255 is supported, got " + std::to_string(maxval));
  const std::size_t start = reader.raster_start();
  ImageData img(static_cast<int>(width), static_cast<int>(height), channels);
  if (bytes.size() - std::min(bytes.size(), start) < img.pixels.size()) throw IoError("netpbm: truncated raster");
  if (!img.pixels.empty()) std::memcpy(img.pixels.data(), bytes.data() + start, img.pixels.size());
  return img;
}

std::string encode_netpbm(const ImageData& img) {
  if (img.channels != 1 && img.channels != 3) throw ShapeError("netpbm needs 1 or 3 channels");
  std::string out = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

ImageData load_netpbm(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  try {
    return decode_netpbm(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_netpbm(const std::filesystem::path& path, const ImageData& img) { write_text_file(path, encode_netpbm(img)); }

}  // namespace lskdet
