#include "tragraph/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "tragraph/error.hpp"

namespace tragraph {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ArgumentError("image dimensions must be non-negative");
  data_.assign(static_cast<std::size_t>(width) * height * 3, fill);
}

void Image::set_pixel(int x, int y, const std::array<double, 3>& rgb) {
  for (int c = 0; c < 3; ++c) at(x, y, c) = rgb[c];
}

std::array<double, 3> Image::pixel(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }

GrayImage to_gray(const Image& image) {
  GrayImage gray;
  gray.width = image.width();
  gray.height = image.height();
  gray.values.resize(image.pixel_count());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      gray.values[static_cast<std::size_t>(y) * image.width() + x] =
          0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
    }
  }
  return gray;
}

bool sample_bilinear(const GrayImage& image, double x, double y, double* value, double* ddx, double* ddy) {
  if (!(x >= 0.0) || !(y >= 0.0) || x > image.width - 1 || y > image.height - 1) return false;
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  // Points on the last row/column use the cell that ends there.
  x0 = std::min(x0, image.width - 2);
  y0 = std::min(y0, image.height - 2);
  if (x0 < 0 || y0 < 0) return false;
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = image.at(x0, y0);
  const double v10 = image.at(x0 + 1, y0);
  const double v01 = image.at(x0, y0 + 1);
  const double v11 = image.at(x0 + 1, y0 + 1);
  const double top = v00 + fx * (v10 - v00);
  const double bottom = v01 + fx * (v11 - v01);
  *value = top + fy * (bottom - top);
  if (ddx) *ddx = (1.0 - fy) * (v10 - v00) + fy * (v11 - v01);
  if (ddy) *ddy = bottom - top;
  return true;
}

Image downsample(const Image& image, int factor) {
  if (factor < 1) throw ArgumentError("downsample factor must be >= 1");
  const int w = image.width() / factor;
  const int h = image.height() / factor;
  Image out(w, h);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) sum += image.at(x * factor + dx, y * factor + dy, c);
        out.at(x, y, c) = sum * inv;
      }
    }
  }
  return out;
}

unsigned char quantize(double value) {
  if (!std::isfinite(value)) value = 0.0;
  const double clamped = std::clamp(value, 0.0, 1.0);
  return static_cast<unsigned char>(std::floor(clamped * 255.0 + 0.5));
}

namespace {

// Reads the next whitespace-delimited header token, skipping `#` comments.
std::string next_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

int parse_header_int(std::istream& in, const std::filesystem::path& path) {
  const std::string token = next_token(in);
  if (token.empty()) throw FormatError(path.string() + ": truncated header");
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) throw FormatError(path.string() + ": bad header field '" + token + "'");
    return value;
  } catch (const std::logic_error&) {
    throw FormatError(path.string() + ": bad header field '" + token + "'");
  }
}

void append_le32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = next_token(in);
  if (magic == "P5" || magic == "P2") throw FormatError(path.string() + ": single-channel images are not supported");
  if (magic != "P6") throw FormatError(path.string() + ": not a binary PPM (P6)");
  const int width = parse_header_int(in, path);
  const int height = parse_header_int(in, path);
  const int maxval = parse_header_int(in, path);
  if (width <= 0 || height <= 0) throw FormatError(path.string() + ": invalid dimensions");
  if (maxval != 255) throw FormatError(path.string() + ": unsupported bit depth (maxval " + std::to_string(maxval) + ")");
  const std::size_t bytes = static_cast<std::size_t>(width) * height * 3;
  std::string raw(bytes, '\0');
  in.read(raw.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) throw FormatError(path.string() + ": truncated pixel data");
  Image image(width, height);
  auto data = image.data();
  for (std::size_t i = 0; i < bytes; ++i) data[i] = static_cast<unsigned char>(raw[i]) / 255.0;
  return image;
}

void write_image(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << image.width() << " " << image.height() << "\n255\n";
  std::string raw;
  raw.reserve(image.data().size());
  for (double v : image.data()) raw.push_back(static_cast<char>(quantize(v)));
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_float_raster(const std::filesystem::path& path, int width, int height, int channels,
                        std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(width) * height * channels)
    throw ArgumentError("float raster size does not match its header");
  std::string bytes = std::to_string(width) + " " + std::to_string(height) + " " + std::to_string(channels) + "\n";
  for (double v : values) append_le32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

FloatRaster read_float_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw FormatError(path.string() + ": missing header");
  std::istringstream hs(header);
  FloatRaster raster;
  if (!(hs >> raster.width >> raster.height >> raster.channels) || raster.width <= 0 || raster.height <= 0 ||
      raster.channels <= 0)
    throw FormatError(path.string() + ": bad header");
  const std::size_t count = static_cast<std::size_t>(raster.width) * raster.height * raster.channels;
  std::string raw(count * 4, '\0');
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw FormatError(path.string() + ": truncated data");
  raster.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[i * 4 + b])) << (8 * b);
    raster.values[i] = std::bit_cast<float>(bits);
  }
  return raster;
}

}  // namespace tragraph
