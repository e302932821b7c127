#include "tamperformer/decoder.hpp"

#include <cmath>
#include <stdexcept>

namespace tfm {

namespace {

Tensor random_matrix(int r, int c, Rng& rng, double stddev = 0.02) {
  Tensor t({r, c});
  for (auto& v : t.data) v = rng.normal(0.0, stddev);
  return t;
}

nn::NodeId build_refine(nn::Graph& g, nn::NodeId patches, nn::NodeId objects, ParamBinder& bind,
                        const std::string& prefix, int heads) {
  const int c = g.val(patches).shape[1];
  if (heads < 1 || c % heads != 0)
    throw std::invalid_argument("refine_patches: heads must divide channels");
  const int hd = c / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  nn::NodeId p_norm = g.layer_norm(patches, bind(prefix + ".ln_patch.gamma"), bind(prefix + ".ln_patch.beta"));
  nn::NodeId o_norm = g.layer_norm(objects, bind(prefix + ".ln_obj.gamma"), bind(prefix + ".ln_obj.beta"));
  nn::NodeId q = g.matmul(p_norm, bind(prefix + ".w_dq"));
  nn::NodeId k = g.matmul(o_norm, bind(prefix + ".w_dk"));
  nn::NodeId v = g.matmul(o_norm, bind(prefix + ".w_dv"));
  nn::NodeId ctx = -1;
  for (int h = 0; h < heads; ++h) {
    nn::NodeId qh = heads == 1 ? q : g.slice_cols(q, h * hd, (h + 1) * hd);
    nn::NodeId kh = heads == 1 ? k : g.slice_cols(k, h * hd, (h + 1) * hd);
    nn::NodeId vh = heads == 1 ? v : g.slice_cols(v, h * hd, (h + 1) * hd);
    nn::NodeId attn = g.softmax_rows(g.scale(g.matmul(qh, g.transpose(kh)), scale));
    nn::NodeId c_h = g.matmul(attn, vh);
    ctx = (h == 0) ? c_h : g.concat_cols(ctx, c_h);
  }
  nn::NodeId p_hat = g.add(patches, ctx);
  nn::NodeId mlp = g.matmul(g.gelu(g.matmul(p_hat, bind(prefix + ".w_mlp1"))), bind(prefix + ".w_mlp2"));
  return g.add(p_hat, mlp);
}

// Sequence halves -> channel-stacked grid tokens {L, 2C}.
nn::NodeId stack_modalities(nn::Graph& g, nn::NodeId p, int l) {
  nn::NodeId rgb = g.slice_rows(p, 0, l);
  nn::NodeId freq = g.slice_rows(p, l, 2 * l);
  return g.concat_cols(rgb, freq);
}

}  // namespace

void init_decoder_weights(ParamStore& store, const std::string& prefix, int channels,
                          int ffn_width, Rng& rng) {
  store.add(prefix + ".ln_patch.gamma", Tensor::full({channels}, 1.0));
  store.add(prefix + ".ln_patch.beta", Tensor({channels}));
  store.add(prefix + ".ln_obj.gamma", Tensor::full({channels}, 1.0));
  store.add(prefix + ".ln_obj.beta", Tensor({channels}));
  store.add(prefix + ".w_dq", random_matrix(channels, channels, rng));
  store.add(prefix + ".w_dk", random_matrix(channels, channels, rng));
  store.add(prefix + ".w_dv", random_matrix(channels, channels, rng));
  store.add(prefix + ".w_mlp1", random_matrix(channels, ffn_width, rng));
  store.add(prefix + ".w_mlp2", random_matrix(ffn_width, channels, rng));
}

nn::NodeId build_decoder_layer(nn::Graph& g, nn::NodeId patches, nn::NodeId objects,
                               ParamBinder& bind, const std::string& prefix, int heads,
                               int window, int grid_h, int grid_w) {
  nn::NodeId p_bar = build_refine(g, patches, objects, bind, prefix, heads);
  if (window <= 0) return p_bar;  // BCIM ablated
  const int l = grid_h * grid_w;
  const int c = g.val(p_bar).shape[1];
  if (g.val(p_bar).shape[0] != 2 * l)
    throw std::invalid_argument("bcim: sequence length does not equal 2*Hs*Ws");
  nn::NodeId stacked = stack_modalities(g, p_bar, l);
  nn::NodeId sim = g.local_cos_sim(stacked, grid_h, grid_w, window);
  nn::NodeId boosted = g.add_col_broadcast(stacked, sim);
  nn::NodeId rgb = g.slice_cols(boosted, 0, c);
  nn::NodeId freq = g.slice_cols(boosted, c, 2 * c);
  return g.concat_rows(rgb, freq);
}

Tensor refine_patches(const Tensor& patches, const Tensor& objects, const ParamStore& store,
                      const std::string& prefix, int heads) {
  nn::Graph g;
  ParamBinder bind(g, store, false);
  nn::NodeId out = build_refine(g, g.input(patches), g.input(objects), bind, prefix, heads);
  return g.val(out);
}

SimilarityMap local_cosine_similarity(const Tensor& grid_hwd, int window) {
  if (grid_hwd.rank() != 3) throw std::invalid_argument("local_cosine_similarity: expected HWD grid");
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("local_cosine_similarity: window must be odd");
  const int h = grid_hwd.shape[0], w = grid_hwd.shape[1], d = grid_hwd.shape[2];
  nn::Graph g;
  Tensor tokens({h * w, d});
  tokens.data = grid_hwd.data;
  nn::NodeId s = g.local_cos_sim(g.input(std::move(tokens)), h, w, window);
  SimilarityMap map;
  map.h = h;
  map.w = w;
  map.window = window;
  map.values = Tensor({h, w});
  map.values.data = g.val(s).data;
  return map;
}

Tensor bcim(const Tensor& p_bar, int window, int grid_h, int grid_w) {
  if (p_bar.rank() != 2 || p_bar.shape[0] != 2 * grid_h * grid_w)
    throw std::invalid_argument("bcim: sequence length does not equal 2*Hs*Ws");
  const int l = grid_h * grid_w;
  const int c = p_bar.shape[1];
  nn::Graph g;
  nn::NodeId p = g.input(p_bar);
  nn::NodeId stacked = stack_modalities(g, p, l);
  nn::NodeId sim = g.local_cos_sim(stacked, grid_h, grid_w, window);
  nn::NodeId boosted = g.add_col_broadcast(stacked, sim);
  nn::NodeId rgb = g.slice_cols(boosted, 0, c);
  nn::NodeId freq = g.slice_cols(boosted, c, 2 * c);
  return g.val(g.concat_rows(rgb, freq));
}

Tensor decoder_layer(const Tensor& patches, const Tensor& objects, const ParamStore& store,
                     const std::string& prefix, int heads, int window, int grid_h, int grid_w) {
  nn::Graph g;
  ParamBinder bind(g, store, false);
  nn::NodeId out = build_decoder_layer(g, g.input(patches), g.input(objects), bind, prefix, heads,
                                       window, grid_h, grid_w);
  return g.val(out);
}

}  // namespace tfm
