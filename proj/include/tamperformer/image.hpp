#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tamperformer/tensor.hpp"

namespace tfm {

// Planar-free HWC image with double pixels in [0,1]; c is 1 or 3 in practice.
struct Image {
  int h = 0, w = 0, c = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h_, int w_, int c_) : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, 0.0) {}

  double& at(int y, int x, int ch) { return data[(static_cast<size_t>(y) * w + x) * c + ch]; }
  double at(int y, int x, int ch) const { return data[(static_cast<size_t>(y) * w + x) * c + ch]; }
  size_t size() const { return data.size(); }

  static Image constant(int h, int w, int c, double v) {
    Image img(h, w, c);
    std::fill(img.data.begin(), img.data.end(), v);
    return img;
  }
};

// Binary mask, 0/1 per pixel.
struct Mask {
  int h = 0, w = 0;
  std::vector<uint8_t> data;

  Mask() = default;
  Mask(int h_, int w_) : h(h_), w(w_), data(static_cast<size_t>(h_) * w_, 0) {}

  uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * w + x]; }
  uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * w + x]; }
  int64_t area() const {
    int64_t n = 0;
    for (uint8_t v : data) n += v != 0;
    return n;
  }
};

enum class ResizeFilter { Bilinear, Nearest };

Image load_image(const std::string& path);              // any readable format -> RGB [0,1]
Mask load_mask(const std::string& path);                // grayscale PNG {0,255} -> {0,1}
void save_png(const std::string& path, const Image& img);
void save_mask_png(const std::string& path, const Mask& mask);
// Grayscale PNG from arbitrary doubles, affinely mapped [min,max] -> [0,255];
// constant inputs map to 0.
void save_gray_png(const std::string& path, const Tensor& grid);

Image resize(const Image& img, int out_h, int out_w, ResizeFilter filter);
Mask resize_mask(const Mask& mask, int out_h, int out_w);  // nearest-neighbor
Image gaussian_blur(const Image& img, int ksize, double sigma);
Image jpeg_roundtrip(const Image& img, int quality);

Tensor mask_to_tensor(const Mask& m);

}  // namespace tfm
