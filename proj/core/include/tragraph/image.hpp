#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace tragraph {

// Linear RGB raster, row-major, channels interleaved, values nominally in [0,1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  void set_pixel(int x, int y, const std::array<double, 3>& rgb);
  std::array<double, 3> pixel(int x, int y) const;

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3 + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Single-channel real raster used for grayscale intensities.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Luminance 0.299 R + 0.587 G + 0.114 B.
GrayImage to_gray(const Image& image);

// Bilinear lookup with pixel centers at integer coordinates. Returns false when
// the 2x2 footprint leaves the image. Optional outputs receive d/dx and d/dy.
bool sample_bilinear(const GrayImage& image, double x, double y, double* value,
                     double* ddx = nullptr, double* ddy = nullptr);

// Box-filter downsampling by an integer factor; trailing pixels that do not
// fill a whole block are dropped.
Image downsample(const Image& image, int factor);

// Quantization to 8 bits: clamp to [0,1], then floor(v * 255 + 0.5).
unsigned char quantize(double value);

// Binary PPM (P6, maxval 255). Values are clamped to [0,1] on write.
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);

// Raw float sidecar: ASCII header "W H C\n", then little-endian float32
// samples, row-major, channels interleaved.
struct FloatRaster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> values;
};

void write_float_raster(const std::filesystem::path& path, int width, int height, int channels,
                        std::span<const double> values);
FloatRaster read_float_raster(const std::filesystem::path& path);

}  // namespace tragraph
