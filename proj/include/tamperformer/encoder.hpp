#pragma once

#include <string>

#include "tamperformer/params.hpp"
#include "tamperformer/rng.hpp"

namespace tfm {

// Per-layer object-to-patch attention weights; every row of every head lies
// on the probability simplex.
struct AffinityMatrix {
  int heads = 0, objects = 0, keys = 0;
  Tensor weights;  // {heads, objects, keys}
};

// Parameter names under "<prefix>.": ln_obj.gamma/.beta, ln_patch.gamma/.beta,
// w_eq, w_ek, w_ev (C x C), w_c (N x N), w_ff1 (C x F), w_ff2 (F x C).
void init_encoder_weights(ParamStore& store, const std::string& prefix, int channels, int objects,
                          int ffn_width, Rng& rng);

struct EncoderOut {
  nn::NodeId objects;                    // {N, C}
  std::vector<nn::NodeId> affinity_heads;  // each {N, 2L}
};

// Full layer on the graph: LN -> affinity -> residual update -> cross-object
// interaction -> feed-forward.
EncoderOut build_encoder_layer(nn::Graph& g, nn::NodeId objects, nn::NodeId patches,
                               ParamBinder& bind, const std::string& prefix, int heads);

// Attention weights over normalized inputs; softmax((LN(o)Wq)(LN(p)Wk)^T / sqrt(C/h)).
AffinityMatrix compute_affinity(const Tensor& objects, const Tensor& patches,
                                const ParamStore& store, const std::string& prefix, int heads);

// o + A . (p W_ev), heads concatenated. Callers pass the already-normalized
// patch sequence when composing the full layer.
Tensor update_objects(const Tensor& objects, const AffinityMatrix& affinity, const Tensor& patches,
                      const ParamStore& store, const std::string& prefix);

// o_hat + W_c^T o_hat, the literal reading of (o_hat^T W_c)^T.
Tensor cross_object_interaction(const Tensor& o_hat, const Tensor& w_c);

// o_tilde + gelu(o_tilde W_ff1) W_ff2
Tensor object_feedforward(const Tensor& o_tilde, const ParamStore& store, const std::string& prefix);

struct EncoderLayerResult {
  Tensor objects;
  AffinityMatrix affinity;
};

EncoderLayerResult encoder_layer(const Tensor& objects, const Tensor& patches,
                                 const ParamStore& store, const std::string& prefix, int heads);

AffinityMatrix collect_affinity(const nn::Graph& g, const std::vector<nn::NodeId>& heads);

}  // namespace tfm
