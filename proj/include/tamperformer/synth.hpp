#pragma once

#include <map>
#include <string>
#include <vector>

#include "tamperformer/image.hpp"
#include "tamperformer/rng.hpp"

namespace tfm {

enum class TamperKind { Pristine, CopyMove, Splice, Removal };

const char* tamper_kind_name(TamperKind k);
TamperKind tamper_kind_from_name(const std::string& name);

enum class RegionShape { Ellipse, Polygon };

// Parametric object-like region; area fraction must land in [0.01, 0.3] and
// the region must lie fully inside the image.
struct RegionSpec {
  RegionShape shape = RegionShape::Ellipse;
  double cx = 0, cy = 0;      // center, pixels
  double ax = 0, ay = 0;      // ellipse semi-axes, pixels
  double rotation = 0;        // radians
  std::vector<std::pair<double, double>> vertices;  // polygon corners, absolute pixels
};

struct DegradationSpec {
  enum class Kind { GaussianNoise, Jpeg } kind = Kind::GaussianNoise;
  double value = 0.0;  // sigma on the 0-255 scale, or JPEG quality

  std::string to_string() const;
};

struct TamperSample {
  Image image;
  Mask mask;
  int label = 0;
  TamperKind kind = TamperKind::Pristine;
  std::vector<DegradationSpec> degradations;
};

Mask rasterize_region(const RegionSpec& spec, int h, int w);
RegionSpec sample_region(int h, int w, double area_min, double area_max, Rng& rng);

TamperSample copy_move(const Image& image, const RegionSpec& region, int dx, int dy, uint64_t seed);
TamperSample splice(const Image& src, const Image& dst, const RegionSpec& region, bool blend,
                    uint64_t seed);

// Solves sum_n f_n - deg_p f_p = sum_n g_n - deg_p g_p inside the mask with
// Dirichlet boundary from `target`; red-black SOR until the max-abs residual
// falls below 1e-4 of the initial residual.
Image poisson_blend(const Image& patch, const Image& target, const Mask& mask);

TamperSample remove_and_inpaint(const Image& image, const RegionSpec& region, uint64_t seed);

Image degrade(const Image& image, const DegradationSpec& spec, uint64_t seed);

// Max-abs residual of the defining equations over the mask interior; used by
// the solver tests and the dataset consistency scan.
double poisson_residual(const Image& result, const Image& source_or_zero, const Mask& mask,
                        bool zero_source);

// Smooth gradients + colored blobs + mild texture; stands in for natural
// photographs at desk scale.
Image procedural_source(int h, int w, Rng& rng);

struct GenConfig {
  int n = 1000;
  int image_size = 256;
  std::map<std::string, double> mix = {
      {"pristine", 0.25}, {"copy_move", 0.25}, {"splice", 0.25}, {"removal", 0.25}};
  std::string source_dir;  // empty: procedural sources
  double degrade_prob = 0.25;
  bool blend = true;
  double area_min = 0.05;
  double area_max = 0.25;
  uint64_t seed = 42;
  std::string out_dir = "data";
};

struct ManifestRecord {
  std::string image_path;  // relative to the manifest directory
  std::string mask_path;
  int label = 0;
  std::string kind;
  std::vector<std::string> degradations;
  uint64_t seed = 0;
};

// Writes images/, masks/ and manifest.jsonl under out_dir; returns the
// manifest path. Same config + seed reproduces identical bytes.
std::string generate_dataset(const GenConfig& config);

std::vector<ManifestRecord> read_manifest(const std::string& manifest_path);
std::string manifest_dir(const std::string& manifest_path);

}  // namespace tfm
