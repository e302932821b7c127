#include "tamperformer/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace tfm {

namespace {

using json = nlohmann::ordered_json;

bool point_in_polygon(double x, double y, const std::vector<std::pair<double, double>>& poly) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

Mask translate_mask(const Mask& m, int dx, int dy) {
  Mask out(m.h, m.w);
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x)
      if (m.at(y, x)) {
        const int ny = y + dy, nx = x + dx;
        if (ny < 0 || ny >= m.h || nx < 0 || nx >= m.w)
          throw std::invalid_argument("copy_move: destination leaves image bounds");
        out.at(ny, nx) = 1;
      }
  return out;
}

int in_image_degree(int y, int x, int h, int w) {
  int d = 0;
  if (y > 0) ++d;
  if (y + 1 < h) ++d;
  if (x > 0) ++d;
  if (x + 1 < w) ++d;
  return d;
}

// Red-black SOR for the masked Poisson problem, one channel at a time.
// `zero_source` solves the Laplace equation (diffusion fill).
void solve_poisson_channel(std::vector<double>& f, const std::vector<double>& g, const Mask& mask,
                           int h, int w, bool zero_source) {
  auto idx = [w](int y, int x) { return static_cast<size_t>(y) * w + x; };
  auto source_lap = [&](int y, int x) {
    if (zero_source) return 0.0;
    double s = -in_image_degree(y, x, h, w) * g[idx(y, x)];
    if (y > 0) s += g[idx(y - 1, x)];
    if (y + 1 < h) s += g[idx(y + 1, x)];
    if (x > 0) s += g[idx(y, x - 1)];
    if (x + 1 < w) s += g[idx(y, x + 1)];
    return s;
  };
  auto residual_at = [&](int y, int x) {
    double r = -in_image_degree(y, x, h, w) * f[idx(y, x)] - source_lap(y, x);
    if (y > 0) r += f[idx(y - 1, x)];
    if (y + 1 < h) r += f[idx(y + 1, x)];
    if (x > 0) r += f[idx(y, x - 1)];
    if (x + 1 < w) r += f[idx(y, x + 1)];
    return r;
  };

  // Bounding box of the unknowns; SOR factor from its larger side.
  int y0 = h, y1 = -1, x0 = w, x1 = -1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.at(y, x)) {
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
      }
  if (y1 < 0) return;  // empty mask
  const int span = std::max(y1 - y0, x1 - x0) + 2;
  const double omega = 2.0 / (1.0 + std::sin(M_PI / span));

  double r0 = 0.0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (mask.at(y, x)) r0 = std::max(r0, std::fabs(residual_at(y, x)));
  const double tol = std::min(2.5e-4, std::max(1e-4 * r0, 1e-12));
  if (r0 <= tol) return;

  const int max_iters = 10 * (h + w);
  for (int it = 0; it < max_iters; ++it) {
    for (int parity = 0; parity < 2; ++parity)
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          if (!mask.at(y, x) || ((y + x) & 1) != parity) continue;
          const double r = residual_at(y, x);
          f[idx(y, x)] += omega * r / in_image_degree(y, x, h, w);
        }
    double rm = 0.0;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (mask.at(y, x)) rm = std::max(rm, std::fabs(residual_at(y, x)));
    if (rm <= tol) return;
  }
  throw std::runtime_error("poisson solver did not converge within the iteration cap");
}

void require_region_in_bounds(const Mask& region, TamperKind kind) {
  if (region.area() == 0)
    throw std::invalid_argument(std::string(tamper_kind_name(kind)) + ": empty region");
}

std::vector<std::string> degradation_strings(const std::vector<DegradationSpec>& degs) {
  std::vector<std::string> out;
  for (const auto& d : degs) out.push_back(d.to_string());
  return out;
}

}  // namespace

const char* tamper_kind_name(TamperKind k) {
  switch (k) {
    case TamperKind::Pristine: return "pristine";
    case TamperKind::CopyMove: return "copy_move";
    case TamperKind::Splice: return "splice";
    case TamperKind::Removal: return "removal";
  }
  return "?";
}

TamperKind tamper_kind_from_name(const std::string& name) {
  if (name == "pristine") return TamperKind::Pristine;
  if (name == "copy_move") return TamperKind::CopyMove;
  if (name == "splice") return TamperKind::Splice;
  if (name == "removal") return TamperKind::Removal;
  throw std::invalid_argument("unknown tamper kind: " + name);
}

std::string DegradationSpec::to_string() const {
  char buf[64];
  if (kind == Kind::GaussianNoise)
    std::snprintf(buf, sizeof(buf), "gaussian_noise:%g", value);
  else
    std::snprintf(buf, sizeof(buf), "jpeg:%g", value);
  return buf;
}

Mask rasterize_region(const RegionSpec& spec, int h, int w) {
  Mask mask(h, w);
  if (spec.shape == RegionShape::Ellipse) {
    const double ca = std::cos(spec.rotation), sa = std::sin(spec.rotation);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double px = x - spec.cx, py = y - spec.cy;
        const double u = (px * ca + py * sa) / spec.ax;
        const double v = (-px * sa + py * ca) / spec.ay;
        if (u * u + v * v <= 1.0) mask.at(y, x) = 1;
      }
  } else {
    if (spec.vertices.size() < 3) throw std::invalid_argument("polygon needs >= 3 vertices");
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (point_in_polygon(x, y, spec.vertices)) mask.at(y, x) = 1;
  }
  return mask;
}

RegionSpec sample_region(int h, int w, double area_min, double area_max, Rng& rng) {
  if (!(area_min >= 0.01 && area_max <= 0.3 && area_min < area_max))
    throw std::invalid_argument("sample_region: area band must lie within [0.01, 0.3]");
  const double total = static_cast<double>(h) * w;
  for (int attempt = 0; attempt < 256; ++attempt) {
    RegionSpec spec;
    spec.shape = rng.uniform() < 0.5 ? RegionShape::Ellipse : RegionShape::Polygon;
    const double frac = rng.uniform(area_min, area_max);
    // Radius so an average shape lands near the target fraction.
    const double r = std::sqrt(frac * total / M_PI);
    if (spec.shape == RegionShape::Ellipse) {
      const double ratio = rng.uniform(0.6, 1.6);
      spec.ax = r * std::sqrt(ratio);
      spec.ay = r / std::sqrt(ratio);
      spec.rotation = rng.uniform(0.0, M_PI);
      const double margin = std::max(spec.ax, spec.ay) + 2.0;
      if (2 * margin >= std::min(h, w)) continue;
      spec.cx = rng.uniform(margin, w - margin);
      spec.cy = rng.uniform(margin, h - margin);
    } else {
      const double margin = r * 1.1 + 2.0;
      if (2 * margin >= std::min(h, w)) continue;
      spec.cx = rng.uniform(margin, w - margin);
      spec.cy = rng.uniform(margin, h - margin);
      const int nv = 4 + rng.uniform_int(5);
      std::vector<double> angles;
      for (int i = 0; i < nv; ++i)
        angles.push_back(2 * M_PI * (i + rng.uniform(0.0, 0.8)) / nv);
      for (double a : angles) {
        const double rr = r * rng.uniform(0.65, 1.05);
        spec.vertices.emplace_back(spec.cx + rr * std::cos(a), spec.cy + rr * std::sin(a));
      }
    }
    Mask m = rasterize_region(spec, h, w);
    const double frac_real = static_cast<double>(m.area()) / total;
    if (frac_real < 0.01 || frac_real > 0.3) continue;
    // Keep one pixel of clearance from the border.
    bool touches = false;
    for (int x = 0; x < w && !touches; ++x) touches = m.at(0, x) || m.at(h - 1, x);
    for (int y = 0; y < h && !touches; ++y) touches = touches || m.at(y, 0) || m.at(y, w - 1);
    if (touches) continue;
    return spec;
  }
  throw std::runtime_error("sample_region: could not place a region after 256 attempts");
}

TamperSample copy_move(const Image& image, const RegionSpec& region, int dx, int dy,
                       uint64_t seed) {
  (void)seed;  // deterministic given arguments; kept for interface symmetry
  Mask src = rasterize_region(region, image.h, image.w);
  require_region_in_bounds(src, TamperKind::CopyMove);
  Mask dst = translate_mask(src, dx, dy);
  for (int64_t i = 0; i < static_cast<int64_t>(src.data.size()); ++i)
    if (src.data[static_cast<size_t>(i)] && dst.data[static_cast<size_t>(i)])
      throw std::invalid_argument("copy_move: source and destination overlap");
  TamperSample out;
  out.image = image;
  out.kind = TamperKind::CopyMove;
  out.label = 1;
  out.mask = dst;
  for (int y = 0; y < image.h; ++y)
    for (int x = 0; x < image.w; ++x)
      if (dst.at(y, x))
        for (int ch = 0; ch < image.c; ++ch) out.image.at(y, x, ch) = image.at(y - dy, x - dx, ch);
  return out;
}

TamperSample splice(const Image& src, const Image& dst, const RegionSpec& region, bool blend,
                    uint64_t seed) {
  (void)seed;
  if (src.h != dst.h || src.w != dst.w || src.c != dst.c)
    throw std::invalid_argument("splice: source and destination sizes differ");
  Mask m = rasterize_region(region, dst.h, dst.w);
  require_region_in_bounds(m, TamperKind::Splice);
  TamperSample out;
  out.kind = TamperKind::Splice;
  out.label = 1;
  out.mask = m;
  if (blend) {
    out.image = poisson_blend(src, dst, m);
  } else {
    out.image = dst;
    for (int y = 0; y < dst.h; ++y)
      for (int x = 0; x < dst.w; ++x)
        if (m.at(y, x))
          for (int ch = 0; ch < dst.c; ++ch) out.image.at(y, x, ch) = src.at(y, x, ch);
  }
  return out;
}

Image poisson_blend(const Image& patch, const Image& target, const Mask& mask) {
  if (patch.h != target.h || patch.w != target.w || patch.c != target.c)
    throw std::invalid_argument("poisson_blend: patch and target sizes differ");
  if (mask.h != target.h || mask.w != target.w)
    throw std::invalid_argument("poisson_blend: mask size mismatch");
  Image out = target;
  const size_t plane = static_cast<size_t>(target.h) * target.w;
  std::vector<double> f(plane), g(plane);
  for (int ch = 0; ch < target.c; ++ch) {
    for (size_t i = 0; i < plane; ++i) {
      f[i] = target.data[i * target.c + ch];
      g[i] = patch.data[i * target.c + ch];
    }
    // Seed the unknowns with the patch content for a warmer start.
    for (int y = 0; y < target.h; ++y)
      for (int x = 0; x < target.w; ++x)
        if (mask.at(y, x)) f[static_cast<size_t>(y) * target.w + x] = g[static_cast<size_t>(y) * target.w + x];
    solve_poisson_channel(f, g, mask, target.h, target.w, /*zero_source=*/false);
    for (int y = 0; y < target.h; ++y)
      for (int x = 0; x < target.w; ++x)
        if (mask.at(y, x))
          out.at(y, x, ch) = std::clamp(f[static_cast<size_t>(y) * target.w + x], 0.0, 1.0);
  }
  return out;
}

TamperSample remove_and_inpaint(const Image& image, const RegionSpec& region, uint64_t seed) {
  (void)seed;
  Mask m = rasterize_region(region, image.h, image.w);
  require_region_in_bounds(m, TamperKind::Removal);
  if (m.area() == static_cast<int64_t>(m.data.size()))
    throw std::invalid_argument("remove_and_inpaint: region covers the whole image");
  TamperSample out;
  out.kind = TamperKind::Removal;
  out.label = 1;
  out.mask = m;
  out.image = image;
  const size_t plane = static_cast<size_t>(image.h) * image.w;
  std::vector<double> f(plane);
  for (int ch = 0; ch < image.c; ++ch) {
    for (size_t i = 0; i < plane; ++i) f[i] = image.data[i * image.c + ch];
    // Erase, then diffuse boundary values inward (harmonic fill).
    double boundary_mean = 0.0;
    int64_t nb = 0;
    for (int y = 0; y < image.h; ++y)
      for (int x = 0; x < image.w; ++x)
        if (!m.at(y, x)) {
          boundary_mean += f[static_cast<size_t>(y) * image.w + x];
          ++nb;
        }
    boundary_mean /= std::max<int64_t>(nb, 1);
    for (int y = 0; y < image.h; ++y)
      for (int x = 0; x < image.w; ++x)
        if (m.at(y, x)) f[static_cast<size_t>(y) * image.w + x] = boundary_mean;
    solve_poisson_channel(f, f, m, image.h, image.w, /*zero_source=*/true);
    for (int y = 0; y < image.h; ++y)
      for (int x = 0; x < image.w; ++x)
        if (m.at(y, x))
          out.image.at(y, x, ch) = std::clamp(f[static_cast<size_t>(y) * image.w + x], 0.0, 1.0);
  }
  return out;
}

Image degrade(const Image& image, const DegradationSpec& spec, uint64_t seed) {
  if (spec.kind == DegradationSpec::Kind::GaussianNoise) {
    if (spec.value < 0) throw std::invalid_argument("degrade: sigma must be >= 0");
    if (spec.value == 0) return image;
    Rng rng(Rng::derive(seed, 0xA01));
    Image out = image;
    const double sigma = spec.value / 255.0;
    for (auto& v : out.data) v = std::clamp(v + rng.normal(0.0, sigma), 0.0, 1.0);
    return out;
  }
  const int q = static_cast<int>(spec.value);
  if (q < 1 || q > 100) throw std::invalid_argument("degrade: jpeg quality must be in [1,100]");
  return jpeg_roundtrip(image, q);
}

double poisson_residual(const Image& result, const Image& source_or_zero, const Mask& mask,
                        bool zero_source) {
  double worst = 0.0;
  for (int ch = 0; ch < result.c; ++ch)
    for (int y = 0; y < result.h; ++y)
      for (int x = 0; x < result.w; ++x) {
        if (!mask.at(y, x)) continue;
        auto lap = [&](const Image& img) {
          double s = -in_image_degree(y, x, result.h, result.w) * img.at(y, x, ch);
          if (y > 0) s += img.at(y - 1, x, ch);
          if (y + 1 < result.h) s += img.at(y + 1, x, ch);
          if (x > 0) s += img.at(y, x - 1, ch);
          if (x + 1 < result.w) s += img.at(y, x + 1, ch);
          return s;
        };
        const double r = lap(result) - (zero_source ? 0.0 : lap(source_or_zero));
        worst = std::max(worst, std::fabs(r));
      }
  return worst;
}

Image procedural_source(int h, int w, Rng& rng) {
  Image img(h, w, 3);
  // Smooth multi-frequency background per channel.
  for (int ch = 0; ch < 3; ++ch) {
    const double base = rng.uniform(0.25, 0.75);
    double fx[3], fy[3], ph[3], am[3];
    for (int k = 0; k < 3; ++k) {
      fx[k] = rng.uniform(0.5, 3.0) * M_PI / w;
      fy[k] = rng.uniform(0.5, 3.0) * M_PI / h;
      ph[k] = rng.uniform(0.0, 2 * M_PI);
      am[k] = rng.uniform(0.05, 0.18);
    }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double v = base;
        for (int k = 0; k < 3; ++k) v += am[k] * std::sin(fx[k] * x + fy[k] * y + ph[k]);
        img.at(y, x, ch) = v;
      }
  }
  // A few soft-edged colored blobs acting as objects.
  const int blobs = 3 + rng.uniform_int(4);
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform(0.1, 0.9) * w;
    const double cy = rng.uniform(0.1, 0.9) * h;
    const double rx = rng.uniform(0.05, 0.2) * w;
    const double ry = rng.uniform(0.05, 0.2) * h;
    double color[3] = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double d = std::pow((x - cx) / rx, 2) + std::pow((y - cy) / ry, 2);
        if (d < 1.0) {
          const double a = std::min(1.0, 2.0 * (1.0 - d));
          for (int ch = 0; ch < 3; ++ch)
            img.at(y, x, ch) = (1 - a) * img.at(y, x, ch) + a * color[ch];
        }
      }
  }
  // Mild texture so pristine content carries high-frequency energy.
  for (auto& v : img.data) v = std::clamp(v + rng.uniform(-0.02, 0.02), 0.0, 1.0);
  return img;
}

std::string generate_dataset(const GenConfig& config) {
  if (config.n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  double mix_total = 0.0;
  for (const auto& [kind, frac] : config.mix) {
    tamper_kind_from_name(kind);  // validates the key
    if (frac < 0) throw std::invalid_argument("generate_dataset: negative mix fraction");
    mix_total += frac;
  }
  if (mix_total <= 0) throw std::invalid_argument("generate_dataset: mix sums to zero");

  // Largest-remainder apportionment of kinds, then a seeded interleave.
  std::vector<std::pair<std::string, double>> shares(config.mix.begin(), config.mix.end());
  std::vector<int> counts(shares.size(), 0);
  std::vector<std::pair<double, size_t>> remainders;
  int assigned = 0;
  for (size_t i = 0; i < shares.size(); ++i) {
    const double exact = config.n * shares[i].second / mix_total;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; assigned < config.n; ++i, ++assigned) counts[remainders[static_cast<size_t>(i) % remainders.size()].second]++;
  std::vector<TamperKind> kinds;
  for (size_t i = 0; i < shares.size(); ++i)
    for (int j = 0; j < counts[i]; ++j) kinds.push_back(tamper_kind_from_name(shares[i].first));
  Rng order_rng(Rng::derive(config.seed, 0x0D));
  order_rng.shuffle(kinds);

  // Source pool: directory images (sorted for determinism) or procedural.
  std::vector<std::string> source_files;
  if (!config.source_dir.empty()) {
    if (!fs::is_directory(config.source_dir))
      throw std::runtime_error("source directory not found: " + config.source_dir);
    for (const auto& e : fs::directory_iterator(config.source_dir))
      if (e.is_regular_file()) source_files.push_back(e.path().string());
    std::sort(source_files.begin(), source_files.end());
    if (source_files.empty())
      throw std::runtime_error("source directory has no files: " + config.source_dir);
  }
  auto fetch_source = [&](Rng& rng) -> Image {
    if (source_files.empty()) return procedural_source(config.image_size, config.image_size, rng);
    for (int attempt = 0; attempt < 16; ++attempt) {
      const auto& path = source_files[static_cast<size_t>(rng.uniform_int(static_cast<int>(source_files.size())))];
      try {
        return resize(load_image(path), config.image_size, config.image_size, ResizeFilter::Bilinear);
      } catch (const std::exception& e) {
        std::cerr << "warning: skipping unreadable source " << path << ": " << e.what() << "\n";
      }
    }
    throw std::runtime_error("no readable source images");
  };

  fs::create_directories(fs::path(config.out_dir) / "images");
  fs::create_directories(fs::path(config.out_dir) / "masks");
  const std::string manifest_path = (fs::path(config.out_dir) / "manifest.jsonl").string();
  std::ofstream manifest(manifest_path, std::ios::binary | std::ios::trunc);
  if (!manifest) throw std::runtime_error("cannot write manifest: " + manifest_path);

  int written = 0;
  for (int i = 0; i < config.n; ++i) {
    const uint64_t sample_seed = Rng::derive(config.seed, static_cast<uint64_t>(i) + 1);
    Rng rng(sample_seed);
    TamperSample sample;
    switch (kinds[static_cast<size_t>(i)]) {
      case TamperKind::Pristine: {
        sample.image = fetch_source(rng);
        sample.mask = Mask(config.image_size, config.image_size);
        sample.label = 0;
        sample.kind = TamperKind::Pristine;
        break;
      }
      case TamperKind::CopyMove: {
        Image src = fetch_source(rng);
        for (int attempt = 0;; ++attempt) {
          RegionSpec region = sample_region(config.image_size, config.image_size,
                                            config.area_min, config.area_max, rng);
          const int dx = rng.uniform_int(config.image_size) - config.image_size / 2;
          const int dy = rng.uniform_int(config.image_size) - config.image_size / 2;
          try {
            sample = copy_move(src, region, dx, dy, sample_seed);
            break;
          } catch (const std::invalid_argument&) {
            if (attempt > 256) throw;  // out-of-bounds or overlapping placement: resample
          }
        }
        break;
      }
      case TamperKind::Splice: {
        Image dst = fetch_source(rng);
        Image src = fetch_source(rng);
        RegionSpec region = sample_region(config.image_size, config.image_size, config.area_min,
                                          config.area_max, rng);
        sample = splice(src, dst, region, config.blend, sample_seed);
        break;
      }
      case TamperKind::Removal: {
        Image src = fetch_source(rng);
        RegionSpec region = sample_region(config.image_size, config.image_size, config.area_min,
                                          config.area_max, rng);
        sample = remove_and_inpaint(src, region, sample_seed);
        break;
      }
    }
    if (rng.uniform() < config.degrade_prob) {
      DegradationSpec deg;
      if (rng.uniform() < 0.5) {
        deg.kind = DegradationSpec::Kind::GaussianNoise;
        deg.value = std::round(rng.uniform(3.0, 15.0));
      } else {
        deg.kind = DegradationSpec::Kind::Jpeg;
        deg.value = 50 + rng.uniform_int(46);
      }
      sample.image = degrade(sample.image, deg, sample_seed);
      sample.degradations.push_back(deg);  // masks are never touched by degradations
    }

    char name[32];
    std::snprintf(name, sizeof(name), "%06d.png", i);
    const std::string img_rel = std::string("images/") + name;
    const std::string mask_rel = std::string("masks/") + name;
    save_png((fs::path(config.out_dir) / img_rel).string(), sample.image);
    save_mask_png((fs::path(config.out_dir) / mask_rel).string(), sample.mask);

    json rec{{"image", img_rel},
             {"mask", mask_rel},
             {"label", sample.label},
             {"kind", tamper_kind_name(sample.kind)},
             {"degradations", degradation_strings(sample.degradations)},
             {"seed", sample_seed}};
    manifest << rec.dump() << "\n";
    ++written;
  }
  manifest.close();
  if (written == 0) throw std::runtime_error("generate_dataset: no samples written");
  return manifest_path;
}

std::vector<ManifestRecord> read_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot read manifest: " + manifest_path);
  std::vector<ManifestRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ManifestRecord rec;
    rec.image_path = j.at("image").get<std::string>();
    rec.mask_path = j.at("mask").get<std::string>();
    rec.label = j.at("label").get<int>();
    rec.kind = j.at("kind").get<std::string>();
    rec.degradations = j.at("degradations").get<std::vector<std::string>>();
    rec.seed = j.at("seed").get<uint64_t>();
    records.push_back(std::move(rec));
  }
  return records;
}

std::string manifest_dir(const std::string& manifest_path) {
  return fs::path(manifest_path).parent_path().string();
}

}  // namespace tfm
