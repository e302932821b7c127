#include "tamperformer/gradcheck.hpp"

#include <cmath>

#include "tamperformer/synth.hpp"

namespace tfm {

GradCheckReport gradcheck(const ModelConfig& config, uint64_t seed, double step, double tolerance,
                          const std::string& corrupt_group) {
  config.validate();
  Rng rng(Rng::derive(seed, 0x6C));
  ParamStore weights = init_weights(config, rng);

  // A structured sample: textured image, elliptical tamper mask, label 1.
  Image image = procedural_source(config.image_h, config.image_w, rng);
  RegionSpec region = sample_region(config.image_h, config.image_w, 0.05, 0.25, rng);
  Tensor mask = mask_to_tensor(rasterize_region(region, config.image_h, config.image_w));

  ParamStore analytic = weights.zeros_like();
  gradients(image, 1, mask, weights, config, analytic);
  if (!corrupt_group.empty()) {
    Tensor& g = analytic.at(corrupt_group);
    for (auto& v : g.data) v += 1e-2;
  }

  GradCheckReport report;
  for (const auto& name : weights.names()) {
    Tensor& w = weights.at(name);
    const Tensor& a = analytic.at(name);
    GradCheckGroup group;
    group.name = name;
    for (int64_t i = 0; i < w.numel(); ++i) {
      const double keep = w[i];
      w[i] = keep + step;
      const double up = loss_value(image, 1, mask, weights, config).total;
      w[i] = keep - step;
      const double down = loss_value(image, 1, mask, weights, config).total;
      w[i] = keep;
      const double fd = (up - down) / (2.0 * step);
      const double rel =
          std::fabs(a[i] - fd) / std::max({std::fabs(a[i]), std::fabs(fd), 1e-6});
      group.max_rel_err = std::max(group.max_rel_err, rel);
    }
    group.passed = group.max_rel_err < tolerance;
    report.worst = std::max(report.worst, group.max_rel_err);
    report.passed = report.passed && group.passed;
    report.groups.push_back(std::move(group));
  }
  return report;
}

}  // namespace tfm
