#include "tamperformer/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace tfm {

namespace {

Tensor random_matrix(int r, int c, Rng& rng, double stddev = 0.02) {
  Tensor t({r, c});
  for (auto& v : t.data) v = rng.normal(0.0, stddev);
  return t;
}

}  // namespace

void init_encoder_weights(ParamStore& store, const std::string& prefix, int channels, int objects,
                          int ffn_width, Rng& rng) {
  store.add(prefix + ".ln_obj.gamma", Tensor::full({channels}, 1.0));
  store.add(prefix + ".ln_obj.beta", Tensor({channels}));
  store.add(prefix + ".ln_patch.gamma", Tensor::full({channels}, 1.0));
  store.add(prefix + ".ln_patch.beta", Tensor({channels}));
  store.add(prefix + ".w_eq", random_matrix(channels, channels, rng));
  store.add(prefix + ".w_ek", random_matrix(channels, channels, rng));
  store.add(prefix + ".w_ev", random_matrix(channels, channels, rng));
  store.add(prefix + ".w_c", random_matrix(objects, objects, rng));
  store.add(prefix + ".w_ff1", random_matrix(channels, ffn_width, rng));
  store.add(prefix + ".w_ff2", random_matrix(ffn_width, channels, rng));
}

namespace {

// Multi-head cross attention used by both the object encoder and the patch
// decoder: per head, softmax(q_h k_h^T / sqrt(C/h)) v_h, heads concatenated.
struct AttentionOut {
  nn::NodeId context;
  std::vector<nn::NodeId> heads;
};

AttentionOut build_cross_attention(nn::Graph& g, nn::NodeId q_in, nn::NodeId kv_in, nn::NodeId wq,
                                   nn::NodeId wk, nn::NodeId wv, int heads) {
  const int c = g.val(q_in).shape[1];
  if (heads < 1 || c % heads != 0)
    throw std::invalid_argument("attention: head count must divide channel width");
  const int hd = c / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  nn::NodeId q = g.matmul(q_in, wq);
  nn::NodeId k = g.matmul(kv_in, wk);
  nn::NodeId v = g.matmul(kv_in, wv);
  AttentionOut out{-1, {}};
  for (int h = 0; h < heads; ++h) {
    nn::NodeId qh = heads == 1 ? q : g.slice_cols(q, h * hd, (h + 1) * hd);
    nn::NodeId kh = heads == 1 ? k : g.slice_cols(k, h * hd, (h + 1) * hd);
    nn::NodeId vh = heads == 1 ? v : g.slice_cols(v, h * hd, (h + 1) * hd);
    nn::NodeId logits = g.scale(g.matmul(qh, g.transpose(kh)), scale);
    nn::NodeId attn = g.softmax_rows(logits);
    nn::NodeId ctx = g.matmul(attn, vh);
    out.heads.push_back(attn);
    out.context = (h == 0) ? ctx : g.concat_cols(out.context, ctx);
  }
  return out;
}

}  // namespace

EncoderOut build_encoder_layer(nn::Graph& g, nn::NodeId objects, nn::NodeId patches,
                               ParamBinder& bind, const std::string& prefix, int heads) {
  nn::NodeId o_norm = g.layer_norm(objects, bind(prefix + ".ln_obj.gamma"), bind(prefix + ".ln_obj.beta"));
  nn::NodeId p_norm = g.layer_norm(patches, bind(prefix + ".ln_patch.gamma"), bind(prefix + ".ln_patch.beta"));
  AttentionOut attn = build_cross_attention(g, o_norm, p_norm, bind(prefix + ".w_eq"),
                                            bind(prefix + ".w_ek"), bind(prefix + ".w_ev"), heads);
  nn::NodeId o_hat = g.add(objects, attn.context);
  nn::NodeId o_tilde = g.add(o_hat, g.matmul(g.transpose(bind(prefix + ".w_c")), o_hat));
  nn::NodeId ff = g.matmul(g.gelu(g.matmul(o_tilde, bind(prefix + ".w_ff1"))), bind(prefix + ".w_ff2"));
  return EncoderOut{g.add(o_tilde, ff), attn.heads};
}

AffinityMatrix collect_affinity(const nn::Graph& g, const std::vector<nn::NodeId>& heads) {
  AffinityMatrix a;
  a.heads = static_cast<int>(heads.size());
  a.objects = g.val(heads[0]).shape[0];
  a.keys = g.val(heads[0]).shape[1];
  a.weights = Tensor({a.heads, a.objects, a.keys});
  for (int h = 0; h < a.heads; ++h) {
    const Tensor& v = g.val(heads[static_cast<size_t>(h)]);
    std::copy(v.data.begin(), v.data.end(),
              a.weights.data.begin() + static_cast<int64_t>(h) * a.objects * a.keys);
  }
  return a;
}

AffinityMatrix compute_affinity(const Tensor& objects, const Tensor& patches,
                                const ParamStore& store, const std::string& prefix, int heads) {
  nn::Graph g;
  ParamBinder bind(g, store, false);
  nn::NodeId o = g.input(objects);
  nn::NodeId p = g.input(patches);
  nn::NodeId o_norm = g.layer_norm(o, bind(prefix + ".ln_obj.gamma"), bind(prefix + ".ln_obj.beta"));
  nn::NodeId p_norm = g.layer_norm(p, bind(prefix + ".ln_patch.gamma"), bind(prefix + ".ln_patch.beta"));
  AttentionOut attn = build_cross_attention(g, o_norm, p_norm, bind(prefix + ".w_eq"),
                                            bind(prefix + ".w_ek"), bind(prefix + ".w_ev"), heads);
  return collect_affinity(g, attn.heads);
}

Tensor update_objects(const Tensor& objects, const AffinityMatrix& affinity, const Tensor& patches,
                      const ParamStore& store, const std::string& prefix) {
  const int n = objects.shape[0], c = objects.shape[1];
  if (affinity.keys != patches.shape[0] || affinity.objects != n)
    throw std::invalid_argument("update_objects: affinity shape mismatch");
  if (affinity.heads < 1 || c % affinity.heads != 0)
    throw std::invalid_argument("update_objects: heads must divide channels");
  const int hd = c / affinity.heads;
  nn::Graph g;
  nn::NodeId v = g.matmul(g.input(patches), g.input(store.at(prefix + ".w_ev")));
  Tensor out = objects;
  for (int h = 0; h < affinity.heads; ++h)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < hd; ++j) {
        double s = 0.0;
        for (int t = 0; t < affinity.keys; ++t)
          s += affinity.weights[(static_cast<int64_t>(h) * n + i) * affinity.keys + t] *
               g.val(v).at(t, h * hd + j);
        out.at(i, h * hd + j) += s;
      }
  return out;
}

Tensor cross_object_interaction(const Tensor& o_hat, const Tensor& w_c) {
  const int n = o_hat.shape[0];
  if (w_c.rank() != 2 || w_c.shape[0] != n || w_c.shape[1] != n)
    throw std::invalid_argument("cross_object_interaction: W_c must be N x N");
  if (!all_finite(o_hat) || !all_finite(w_c))
    throw std::invalid_argument("cross_object_interaction: non-finite input");
  Tensor out = o_hat;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < o_hat.shape[1]; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += w_c.at(k, i) * o_hat.at(k, j);
      out.at(i, j) += s;
    }
  return out;
}

Tensor object_feedforward(const Tensor& o_tilde, const ParamStore& store, const std::string& prefix) {
  nn::Graph g;
  nn::NodeId x = g.input(o_tilde);
  nn::NodeId ff = g.matmul(g.gelu(g.matmul(x, g.input(store.at(prefix + ".w_ff1")))),
                           g.input(store.at(prefix + ".w_ff2")));
  return g.val(g.add(x, ff));
}

EncoderLayerResult encoder_layer(const Tensor& objects, const Tensor& patches,
                                 const ParamStore& store, const std::string& prefix, int heads) {
  nn::Graph g;
  ParamBinder bind(g, store, false);
  nn::NodeId o = g.input(objects);
  nn::NodeId p = g.input(patches);
  EncoderOut out = build_encoder_layer(g, o, p, bind, prefix, heads);
  return EncoderLayerResult{g.val(out.objects), collect_affinity(g, out.affinity_heads)};
}

}  // namespace tfm
