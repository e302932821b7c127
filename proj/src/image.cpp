#include "tamperformer/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <stdexcept>

namespace tfm {

namespace {

cv::Mat to_mat_u8(const Image& img) {
  if (img.c != 1 && img.c != 3) throw std::invalid_argument("image: expected 1 or 3 channels");
  cv::Mat m(img.h, img.w, img.c == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.h; ++y) {
    uint8_t* row = m.ptr<uint8_t>(y);
    for (int x = 0; x < img.w; ++x) {
      for (int ch = 0; ch < img.c; ++ch) {
        // RGB -> BGR for OpenCV
        const int src_ch = img.c == 3 ? 2 - ch : ch;
        double v = std::clamp(img.at(y, x, src_ch), 0.0, 1.0);
        row[x * img.c + ch] = static_cast<uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return m;
}

Image from_mat_u8(const cv::Mat& m) {
  if (m.empty()) throw std::runtime_error("image: empty matrix");
  cv::Mat src = m;
  if (m.channels() == 4) cv::cvtColor(m, src, cv::COLOR_BGRA2BGR);
  const int c = src.channels();
  if (c != 1 && c != 3) throw std::runtime_error("image: unsupported channel count");
  Image img(src.rows, src.cols, c);
  for (int y = 0; y < src.rows; ++y) {
    const uint8_t* row = src.ptr<uint8_t>(y);
    for (int x = 0; x < src.cols; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        const int dst_ch = c == 3 ? 2 - ch : ch;  // BGR -> RGB
        img.at(y, x, dst_ch) = row[x * c + ch] / 255.0;
      }
    }
  }
  return img;
}

}  // namespace

Image load_image(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
  if (m.empty()) throw std::runtime_error("failed to read image: " + path);
  return from_mat_u8(m);
}

Mask load_mask(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw std::runtime_error("failed to read mask: " + path);
  Mask mask(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const uint8_t* row = m.ptr<uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) mask.at(y, x) = row[x] >= 128 ? 1 : 0;
  }
  return mask;
}

void save_png(const std::string& path, const Image& img) {
  if (!cv::imwrite(path, to_mat_u8(img)))
    throw std::runtime_error("failed to write png: " + path);
}

void save_mask_png(const std::string& path, const Mask& mask) {
  cv::Mat m(mask.h, mask.w, CV_8UC1);
  for (int y = 0; y < mask.h; ++y) {
    uint8_t* row = m.ptr<uint8_t>(y);
    for (int x = 0; x < mask.w; ++x) row[x] = mask.at(y, x) ? 255 : 0;
  }
  if (!cv::imwrite(path, m)) throw std::runtime_error("failed to write mask png: " + path);
}

void save_gray_png(const std::string& path, const Tensor& grid) {
  if (grid.rank() != 2) throw std::invalid_argument("save_gray_png: expected 2-D grid");
  double lo = grid[0], hi = grid[0];
  for (double v : grid.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  cv::Mat m(grid.shape[0], grid.shape[1], CV_8UC1);
  for (int y = 0; y < grid.shape[0]; ++y) {
    uint8_t* row = m.ptr<uint8_t>(y);
    for (int x = 0; x < grid.shape[1]; ++x) {
      double v = span > 0.0 ? (grid.at(y, x) - lo) / span : 0.0;
      row[x] = static_cast<uint8_t>(std::lround(v * 255.0));
    }
  }
  if (!cv::imwrite(path, m)) throw std::runtime_error("failed to write png: " + path);
}

Image resize(const Image& img, int out_h, int out_w, ResizeFilter filter) {
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("resize: bad output size");
  if (out_h == img.h && out_w == img.w) return img;
  // Resize in double precision to keep the pipeline quantization-free.
  cv::Mat m(img.h, img.w, CV_64FC(img.c), const_cast<double*>(img.data.data()));
  cv::Mat out;
  cv::resize(m, out, cv::Size(out_w, out_h), 0, 0,
             filter == ResizeFilter::Bilinear ? cv::INTER_LINEAR : cv::INTER_NEAREST);
  Image res(out_h, out_w, img.c);
  for (int y = 0; y < out_h; ++y) {
    const double* row = out.ptr<double>(y);
    for (int x = 0; x < out_w; ++x)
      for (int ch = 0; ch < img.c; ++ch) res.at(y, x, ch) = std::clamp(row[x * img.c + ch], 0.0, 1.0);
  }
  return res;
}

Mask resize_mask(const Mask& mask, int out_h, int out_w) {
  cv::Mat m(mask.h, mask.w, CV_8UC1, const_cast<uint8_t*>(mask.data.data()));
  cv::Mat out;
  cv::resize(m, out, cv::Size(out_w, out_h), 0, 0, cv::INTER_NEAREST);
  Mask res(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const uint8_t* row = out.ptr<uint8_t>(y);
    for (int x = 0; x < out_w; ++x) res.at(y, x) = row[x] ? 1 : 0;
  }
  return res;
}

Image gaussian_blur(const Image& img, int ksize, double sigma) {
  if (ksize < 1 || ksize % 2 == 0) throw std::invalid_argument("gaussian_blur: kernel must be odd");
  cv::Mat m(img.h, img.w, CV_64FC(img.c), const_cast<double*>(img.data.data()));
  cv::Mat out;
  cv::GaussianBlur(m, out, cv::Size(ksize, ksize), sigma, sigma, cv::BORDER_REPLICATE);
  Image res(img.h, img.w, img.c);
  for (int y = 0; y < img.h; ++y) {
    const double* row = out.ptr<double>(y);
    for (int x = 0; x < img.w; ++x)
      for (int ch = 0; ch < img.c; ++ch) res.at(y, x, ch) = std::clamp(row[x * img.c + ch], 0.0, 1.0);
  }
  return res;
}

Image jpeg_roundtrip(const Image& img, int quality) {
  if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg: quality must be in [1,100]");
  std::vector<uint8_t> buf;
  std::vector<int> params{cv::IMWRITE_JPEG_QUALITY, quality};
  if (!cv::imencode(".jpg", to_mat_u8(img), buf, params))
    throw std::runtime_error("jpeg encode failed");
  cv::Mat decoded = cv::imdecode(buf, img.c == 3 ? cv::IMREAD_COLOR : cv::IMREAD_GRAYSCALE);
  if (decoded.empty()) throw std::runtime_error("jpeg decode failed");
  return from_mat_u8(decoded);
}

Tensor mask_to_tensor(const Mask& m) {
  Tensor t({m.h, m.w});
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = m.data[static_cast<size_t>(i)] ? 1.0 : 0.0;
  return t;
}

}  // namespace tfm
