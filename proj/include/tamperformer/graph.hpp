#pragma once

#include <functional>
#include <vector>

#include "tamperformer/tensor.hpp"

namespace tfm::nn {

using NodeId = int;

// Reverse-mode autodiff over a per-invocation tape. Ops evaluate eagerly and
// register a backward closure only when some parent requires gradients, so
// inference pays no tracking cost. Nodes are created in topological order;
// backward() walks the tape in reverse.
class Graph {
 public:
  NodeId input(Tensor value, bool requires_grad = false);

  const Tensor& val(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
  bool requires_grad(NodeId id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }

  // Gradient of the last backward() root w.r.t. this node. Zero tensor if the
  // node was never touched by the backward sweep.
  Tensor grad_of(NodeId id) const;

  void backward(NodeId root);

  size_t size() const { return nodes_.size(); }

  // --- elementwise / shape ---
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId reshape(NodeId a, std::vector<int> shape);
  NodeId transpose(NodeId a);                    // 2-D
  NodeId slice_rows(NodeId a, int r0, int r1);   // 2-D
  NodeId concat_rows(NodeId a, NodeId b);        // 2-D
  NodeId slice_cols(NodeId a, int c0, int c1);   // 2-D
  NodeId concat_cols(NodeId a, NodeId b);        // 2-D
  NodeId broadcast_row(NodeId v, int rows);      // {1,C} -> {rows,C}
  NodeId add_col_broadcast(NodeId x, NodeId s);  // {R,C} + {R,1}

  // --- nonlinearities ---
  NodeId gelu(NodeId a);     // exact erf formulation
  NodeId sigmoid(NodeId a);
  NodeId softmax_rows(NodeId a);                       // 2-D, rows on simplex
  NodeId layer_norm(NodeId x, NodeId gamma, NodeId beta);  // 2-D, per row

  // --- linear algebra / conv ---
  NodeId matmul(NodeId a, NodeId b);
  NodeId conv2d(NodeId x, NodeId w, NodeId b, int stride, int pad);  // HWC, w: kh kw Cin Cout
  NodeId bilinear_up2(NodeId x);  // HWC -> 2H 2W C, half-pixel centers, edge clamp
  NodeId gap(NodeId x);           // HWC -> {1,C}

  // Mean local cosine similarity over a k x k window with edge replication;
  // x is a {h*w, d} token grid. Zero vectors compare as 0 with zero gradient.
  NodeId local_cos_sim(NodeId x, int h, int w, int k);

  // Mean binary cross-entropy against a constant target, probabilities
  // clamped to [eps, 1-eps].
  NodeId bce_mean(NodeId pred, Tensor target, double eps);

  NodeId sum_all(NodeId a);  // -> {1}

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated on first touch during backward
    bool requires_grad = false;
    std::function<void(Graph&, NodeId)> back;  // null for leaves / no-grad results
  };

  std::vector<Node> nodes_;

  NodeId emplace(Tensor value, bool rg, std::function<void(Graph&, NodeId)> back);
  Tensor& gref(NodeId id);  // grad tensor, allocated as zeros on demand
  bool grad_live(NodeId id) const {
    return !nodes_[static_cast<size_t>(id)].grad.data.empty();
  }

  friend struct GraphTestPeer;
};

double gelu_scalar(double x);
double gelu_grad_scalar(double x);

}  // namespace tfm::nn
