#pragma once

#include <string>

#include "tamperformer/params.hpp"
#include "tamperformer/rng.hpp"

namespace tfm {

// Mean local cosine similarity of a feature grid; entries lie in [-1, 1].
struct SimilarityMap {
  int h = 0, w = 0;
  int window = 3;
  Tensor values;  // {h, w}
};

// Parameter names under "<prefix>.": ln_patch.gamma/.beta, ln_obj.gamma/.beta,
// w_dq, w_dk, w_dv (C x C), w_mlp1 (C x F), w_mlp2 (F x C).
void init_decoder_weights(ParamStore& store, const std::string& prefix, int channels,
                          int ffn_width, Rng& rng);

// Patch refinement + BCIM on the graph; set window to 0 to bypass BCIM.
nn::NodeId build_decoder_layer(nn::Graph& g, nn::NodeId patches, nn::NodeId objects,
                               ParamBinder& bind, const std::string& prefix, int heads,
                               int window, int grid_h, int grid_w);

// p + softmax(LN(p)Wq (LN(o)Wk)^T / sqrt(C/h)) LN(o)Wv, then + MLP(.).
Tensor refine_patches(const Tensor& patches, const Tensor& objects, const ParamStore& store,
                      const std::string& prefix, int heads);

SimilarityMap local_cosine_similarity(const Tensor& grid_hwd, int window);

// Split the 2L x C sequence into its modality halves, stack them channel-wise
// into an H_s x W_s x 2C grid, add the similarity map, and re-flatten.
Tensor bcim(const Tensor& p_bar, int window, int grid_h, int grid_w);

Tensor decoder_layer(const Tensor& patches, const Tensor& objects, const ParamStore& store,
                     const std::string& prefix, int heads, int window, int grid_h, int grid_w);

}  // namespace tfm
