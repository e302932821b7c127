#pragma once

#include "tamperformer/image.hpp"
#include "tamperformer/tensor.hpp"

namespace tfm {

// Orthonormal 2-D type-II DCT coefficients of one channel.
struct FrequencyGrid {
  int h = 0, w = 0;
  Tensor coeffs;  // {h, w}
};

// Fraction-of-band cutoff for the low-frequency reject filter.
struct HighPassSpec {
  double alpha = 0.1;
};

// BT.601 luminance, 0.299 R + 0.587 G + 0.114 B.
Tensor to_luminance(const Image& image);

FrequencyGrid dct2(const Tensor& channel);
Tensor idct2(const FrequencyGrid& grid);

// mask[u,v] = 0 where u+v < alpha*(H+W), else 1.
Tensor high_pass_mask(int h, int w, const HighPassSpec& spec);

// X_h = idct2(mask . dct2(luminance(X))), returned as a 1-channel image.
Image extract_high_frequency(const Image& image, const HighPassSpec& spec);

}  // namespace tfm
