#include "tamperformer/params.hpp"

#include <stdexcept>

namespace tfm {

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  if (index_.count(name)) throw std::invalid_argument("param already exists: " + name);
  index_[name] = tensors_.size();
  names_.push_back(name);
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown param: " + name);
  return tensors_[it->second];
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown param: " + name);
  return tensors_[it->second];
}

int64_t ParamStore::total_scalars() const {
  int64_t n = 0;
  for (const auto& t : tensors_) n += t.numel();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (size_t i = 0; i < names_.size(); ++i) out.add(names_[i], Tensor::zeros(tensors_[i].shape));
  return out;
}

nn::NodeId ParamBinder::operator()(const std::string& name) {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  nn::NodeId id = graph_.input(params_.at(name), train_);
  cache_[name] = id;
  bound_.emplace_back(name, id);
  return id;
}

}  // namespace tfm
