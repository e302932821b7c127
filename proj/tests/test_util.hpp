#pragma once

#include <functional>
#include <vector>

#include "tamperformer/graph.hpp"
#include "tamperformer/rng.hpp"
#include "tamperformer/tensor.hpp"

namespace tfm::test {

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Scalar-valued graph builder over a fixed list of inputs.
using ScalarFn = std::function<nn::NodeId(nn::Graph&, const std::vector<nn::NodeId>&)>;

inline double eval_scalar(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
  nn::Graph g;
  std::vector<nn::NodeId> ids;
  for (const auto& t : inputs) ids.push_back(g.input(t, false));
  return g.val(fn(g, ids))[0];
}

// Max relative error between analytic gradients and central finite
// differences over every entry of every input.
inline double max_grad_rel_err(const ScalarFn& fn, std::vector<Tensor> inputs,
                               double step = 1e-6) {
  nn::Graph g;
  std::vector<nn::NodeId> ids;
  for (const auto& t : inputs) ids.push_back(g.input(t, true));
  nn::NodeId root = fn(g, ids);
  g.backward(root);
  std::vector<Tensor> analytic;
  for (auto id : ids) analytic.push_back(g.grad_of(id));

  double worst = 0.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    for (int64_t j = 0; j < inputs[i].numel(); ++j) {
      const double keep = inputs[i][j];
      inputs[i][j] = keep + step;
      const double up = eval_scalar(fn, inputs);
      inputs[i][j] = keep - step;
      const double down = eval_scalar(fn, inputs);
      inputs[i][j] = keep;
      const double fd = (up - down) / (2.0 * step);
      const double a = analytic[i][j];
      const double rel = std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// Weighted sum of all entries; makes the probe sensitive to every output.
inline nn::NodeId weighted_sum(nn::Graph& g, nn::NodeId out, const Tensor& weights) {
  return g.sum_all(g.mul(out, g.input(weights)));
}

}  // namespace tfm::test
