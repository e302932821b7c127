#include "tamperformer/frequency.hpp"

#include <cmath>
#include <stdexcept>

namespace tfm {

namespace {

// Orthonormal DCT-II basis: B[k][n] = s_k cos(pi (2n+1) k / (2N)), rows orthonormal.
std::vector<double> dct_basis(int n) {
  std::vector<double> b(static_cast<size_t>(n) * n);
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      b[static_cast<size_t>(k) * n + i] =
          (k == 0 ? s0 : sk) * std::cos(M_PI * (2 * i + 1) * k / (2.0 * n));
  return b;
}

void require_finite(const Tensor& t, const char* what) {
  if (!all_finite(t)) throw std::invalid_argument(std::string(what) + ": non-finite values");
}

}  // namespace

Tensor to_luminance(const Image& image) {
  if (image.c != 3) throw std::invalid_argument("to_luminance: expected 3-channel image");
  Tensor out({image.h, image.w});
  for (int y = 0; y < image.h; ++y)
    for (int x = 0; x < image.w; ++x)
      out.at(y, x) = 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2);
  return out;
}

FrequencyGrid dct2(const Tensor& channel) {
  if (channel.rank() != 2 || channel.shape[0] < 1 || channel.shape[1] < 1)
    throw std::invalid_argument("dct2: expected non-empty 2-D grid");
  require_finite(channel, "dct2");
  const int h = channel.shape[0], w = channel.shape[1];
  const auto bh = dct_basis(h);
  const auto bw = dct_basis(w);
  // rows: tmp = X * Bw^T
  Tensor tmp({h, w});
  for (int y = 0; y < h; ++y)
    for (int v = 0; v < w; ++v) {
      double s = 0.0;
      for (int x = 0; x < w; ++x) s += channel.at(y, x) * bw[static_cast<size_t>(v) * w + x];
      tmp.at(y, v) = s;
    }
  // cols: C = Bh * tmp
  FrequencyGrid grid{h, w, Tensor({h, w})};
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      double s = 0.0;
      for (int y = 0; y < h; ++y) s += bh[static_cast<size_t>(u) * h + y] * tmp.at(y, v);
      grid.coeffs.at(u, v) = s;
    }
  return grid;
}

Tensor idct2(const FrequencyGrid& grid) {
  const Tensor& c = grid.coeffs;
  if (c.rank() != 2 || c.shape[0] != grid.h || c.shape[1] != grid.w)
    throw std::invalid_argument("idct2: coefficient shape mismatch");
  require_finite(c, "idct2");
  const int h = grid.h, w = grid.w;
  const auto bh = dct_basis(h);
  const auto bw = dct_basis(w);
  // The basis is orthonormal, so the inverse is the transpose pair: X = Bh^T * C * Bw.
  Tensor tmp({h, w});
  for (int y = 0; y < h; ++y)
    for (int v = 0; v < w; ++v) {
      double s = 0.0;
      for (int u = 0; u < h; ++u) s += bh[static_cast<size_t>(u) * h + y] * c.at(u, v);
      tmp.at(y, v) = s;
    }
  Tensor out({h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int v = 0; v < w; ++v) s += tmp.at(y, v) * bw[static_cast<size_t>(v) * w + x];
      out.at(y, x) = s;
    }
  return out;
}

Tensor high_pass_mask(int h, int w, const HighPassSpec& spec) {
  if (h < 1 || w < 1) throw std::invalid_argument("high_pass_mask: bad size");
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0))
    throw std::invalid_argument("high_pass_mask: alpha must be in [0,1]");
  const double cutoff = spec.alpha * (h + w);
  Tensor mask({h, w});
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) mask.at(u, v) = (u + v < cutoff) ? 0.0 : 1.0;
  return mask;
}

Image extract_high_frequency(const Image& image, const HighPassSpec& spec) {
  Tensor luma = to_luminance(image);
  FrequencyGrid grid = dct2(luma);
  Tensor mask = high_pass_mask(grid.h, grid.w, spec);
  for (int64_t i = 0; i < grid.coeffs.numel(); ++i) grid.coeffs[i] *= mask[i];
  Tensor xh = idct2(grid);
  Image out(image.h, image.w, 1);
  for (int64_t i = 0; i < xh.numel(); ++i) out.data[static_cast<size_t>(i)] = xh[i];
  return out;
}

}  // namespace tfm
