#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tamperformer/graph.hpp"
#include "tamperformer/tensor.hpp"

namespace tfm {

// Ordered name -> tensor map; insertion order is the canonical parameter
// order for serialization, optimizer state, and gradient reports.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  const std::vector<std::string>& names() const { return names_; }
  size_t size() const { return names_.size(); }
  int64_t total_scalars() const;

  // Same names/shapes, all zeros. Used for gradients and optimizer moments.
  ParamStore zeros_like() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, size_t> index_;
};

// Lazily registers parameters as gradient leaves on a graph and remembers the
// node ids so gradients can be pulled out after backward().
class ParamBinder {
 public:
  ParamBinder(nn::Graph& g, const ParamStore& params, bool train)
      : graph_(g), params_(params), train_(train) {}

  nn::NodeId operator()(const std::string& name);
  const std::vector<std::pair<std::string, nn::NodeId>>& bound() const { return bound_; }

 private:
  nn::Graph& graph_;
  const ParamStore& params_;
  bool train_;
  std::unordered_map<std::string, nn::NodeId> cache_;
  std::vector<std::pair<std::string, nn::NodeId>> bound_;
};

}  // namespace tfm
