#include "tamperformer/graph.hpp"

#include <algorithm>
#include <cmath>

namespace tfm::nn {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_2d(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw std::invalid_argument(std::string(op) + ": expected 2-D tensor");
}
}  // namespace

double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad_scalar(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

NodeId Graph::emplace(Tensor value, bool rg, std::function<void(Graph&, NodeId)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = rg;
  n.back = rg ? std::move(back) : nullptr;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::input(Tensor value, bool requires_grad) {
  return emplace(std::move(value), requires_grad, nullptr);
}

Tensor& Graph::gref(NodeId id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
  return n.grad;
}

Tensor Graph::grad_of(NodeId id) const {
  const Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.data.empty()) return Tensor::zeros(n.value.shape);
  return n.grad;
}

void Graph::backward(NodeId root) {
  if (val(root).numel() != 1) throw std::invalid_argument("backward: root must be scalar");
  gref(root)[0] = 1.0;
  for (NodeId id = root; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.back && !n.grad.data.empty()) n.back(*this, id);
  }
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  if (!va.same_shape(vb)) throw std::invalid_argument("add: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] += vb[i];
  bool rg = requires_grad(a) || requires_grad(b);
  return emplace(std::move(out), rg, [a, b](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    if (g.requires_grad(a)) {
      Tensor& ga = g.gref(a);
      for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.gref(b);
      for (int64_t i = 0; i < go.numel(); ++i) gb[i] += go[i];
    }
  });
}

NodeId Graph::sub(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  if (!va.same_shape(vb)) throw std::invalid_argument("sub: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] -= vb[i];
  bool rg = requires_grad(a) || requires_grad(b);
  return emplace(std::move(out), rg, [a, b](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    if (g.requires_grad(a)) {
      Tensor& ga = g.gref(a);
      for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.gref(b);
      for (int64_t i = 0; i < go.numel(); ++i) gb[i] -= go[i];
    }
  });
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  if (!va.same_shape(vb)) throw std::invalid_argument("mul: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= vb[i];
  bool rg = requires_grad(a) || requires_grad(b);
  return emplace(std::move(out), rg, [a, b](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    const Tensor& va = g.val(a);
    const Tensor& vb = g.val(b);
    if (g.requires_grad(a)) {
      Tensor& ga = g.gref(a);
      for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * vb[i];
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.gref(b);
      for (int64_t i = 0; i < go.numel(); ++i) gb[i] += go[i] * va[i];
    }
  });
}

NodeId Graph::scale(NodeId a, double s) {
  Tensor out = val(a);
  for (auto& v : out.data) v *= s;
  return emplace(std::move(out), requires_grad(a), [a, s](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    Tensor& ga = g.gref(a);
    for (int64_t i = 0; i < go.numel(); ++i) ga[i] += s * go[i];
  });
}

NodeId Graph::reshape(NodeId a, std::vector<int> shape) {
  const Tensor& va = val(a);
  if (Tensor::numel_of(shape) != va.numel()) throw std::invalid_argument("reshape: numel mismatch");
  Tensor out(std::move(shape), va.data);
  return emplace(std::move(out), requires_grad(a), [a](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    Tensor& ga = g.gref(a);
    for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
  });
}

NodeId Graph::transpose(NodeId a) {
  const Tensor& va = val(a);
  check_2d(va, "transpose");
  const int r = va.shape[0], c = va.shape[1];
  Tensor out({c, r});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at(j, i) = va.at(i, j);
  return emplace(std::move(out), requires_grad(a), [a, r, c](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    Tensor& ga = g.gref(a);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) ga.at(i, j) += go.at(j, i);
  });
}

NodeId Graph::slice_rows(NodeId a, int r0, int r1) {
  const Tensor& va = val(a);
  check_2d(va, "slice_rows");
  if (r0 < 0 || r1 > va.shape[0] || r0 >= r1) throw std::invalid_argument("slice_rows: bad range");
  const int c = va.shape[1];
  Tensor out({r1 - r0, c});
  std::copy(va.data.begin() + static_cast<int64_t>(r0) * c,
            va.data.begin() + static_cast<int64_t>(r1) * c, out.data.begin());
  return emplace(std::move(out), requires_grad(a), [a, r0, c](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    Tensor& ga = g.gref(a);
    for (int64_t i = 0; i < go.numel(); ++i) ga[static_cast<int64_t>(r0) * c + i] += go[i];
  });
}

NodeId Graph::concat_rows(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  check_2d(va, "concat_rows");
  check_2d(vb, "concat_rows");
  if (va.shape[1] != vb.shape[1]) throw std::invalid_argument("concat_rows: width mismatch");
  Tensor out({va.shape[0] + vb.shape[0], va.shape[1]});
  std::copy(va.data.begin(), va.data.end(), out.data.begin());
  std::copy(vb.data.begin(), vb.data.end(), out.data.begin() + va.numel());
  bool rg = requires_grad(a) || requires_grad(b);
  const int64_t na = va.numel();
  return emplace(std::move(out), rg, [a, b, na](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    if (g.requires_grad(a)) {
      Tensor& ga = g.gref(a);
      for (int64_t i = 0; i < na; ++i) ga[i] += go[i];
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.gref(b);
      for (int64_t i = na; i < go.numel(); ++i) gb[i - na] += go[i];
    }
  });
}

NodeId Graph::slice_cols(NodeId a, int c0, int c1) {
  const Tensor& va = val(a);
  check_2d(va, "slice_cols");
  if (c0 < 0 || c1 > va.shape[1] || c0 >= c1) throw std::invalid_argument("slice_cols: bad range");
  const int r = va.shape[0], w = c1 - c0;
  Tensor out({r, w});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < w; ++j) out.at(i, j) = va.at(i, c0 + j);
  return emplace(std::move(out), requires_grad(a), [a, c0, w, r](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    Tensor& ga = g.gref(a);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j) ga.at(i, c0 + j) += go.at(i, j);
  });
}

NodeId Graph::concat_cols(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  check_2d(va, "concat_cols");
  check_2d(vb, "concat_cols");
  if (va.shape[0] != vb.shape[0]) throw std::invalid_argument("concat_cols: height mismatch");
  const int r = va.shape[0], ca = va.shape[1], cb = vb.shape[1];
  Tensor out({r, ca + cb});
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < ca; ++j) out.at(i, j) = va.at(i, j);
    for (int j = 0; j < cb; ++j) out.at(i, ca + j) = vb.at(i, j);
  }
  bool rg = requires_grad(a) || requires_grad(b);
  return emplace(std::move(out), rg, [a, b, r, ca, cb](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    if (g.requires_grad(a)) {
      Tensor& ga = g.gref(a);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < ca; ++j) ga.at(i, j) += go.at(i, j);
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.gref(b);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < cb; ++j) gb.at(i, j) += go.at(i, ca + j);
    }
  });
}

NodeId Graph::broadcast_row(NodeId v, int rows) {
  const Tensor& vv = val(v);
  check_2d(vv, "broadcast_row");
  if (vv.shape[0] != 1) throw std::invalid_argument("broadcast_row: expected {1,C}");
  const int c = vv.shape[1];
  Tensor out({rows, c});
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < c; ++j) out.at(i, j) = vv.at(0, j);
  return emplace(std::move(out), requires_grad(v), [v, rows, c](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    Tensor& gv = g.gref(v);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < c; ++j) gv.at(0, j) += go.at(i, j);
  });
}

NodeId Graph::add_col_broadcast(NodeId x, NodeId s) {
  const Tensor& vx = val(x);
  const Tensor& vs = val(s);
  check_2d(vx, "add_col_broadcast");
  check_2d(vs, "add_col_broadcast");
  if (vs.shape[0] != vx.shape[0] || vs.shape[1] != 1)
    throw std::invalid_argument("add_col_broadcast: expected {R,1} addend");
  const int r = vx.shape[0], c = vx.shape[1];
  Tensor out = vx;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at(i, j) += vs.at(i, 0);
  bool rg = requires_grad(x) || requires_grad(s);
  return emplace(std::move(out), rg, [x, s, r, c](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    if (g.requires_grad(x)) {
      Tensor& gx = g.gref(x);
      for (int64_t i = 0; i < go.numel(); ++i) gx[i] += go[i];
    }
    if (g.requires_grad(s)) {
      Tensor& gs = g.gref(s);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) gs.at(i, 0) += go.at(i, j);
    }
  });
}

NodeId Graph::gelu(NodeId a) {
  Tensor out = val(a);
  for (auto& v : out.data) v = gelu_scalar(v);
  return emplace(std::move(out), requires_grad(a), [a](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    const Tensor& va = g.val(a);
    Tensor& ga = g.gref(a);
    for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * gelu_grad_scalar(va[i]);
  });
}

NodeId Graph::sigmoid(NodeId a) {
  Tensor out = val(a);
  for (auto& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return emplace(std::move(out), requires_grad(a), [a](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    const Tensor& y = g.val(self);
    Tensor& ga = g.gref(a);
    for (int64_t i = 0; i < go.numel(); ++i) ga[i] += go[i] * y[i] * (1.0 - y[i]);
  });
}

NodeId Graph::softmax_rows(NodeId a) {
  const Tensor& va = val(a);
  check_2d(va, "softmax_rows");
  const int r = va.shape[0], c = va.shape[1];
  Tensor out({r, c});
  for (int i = 0; i < r; ++i) {
    double m = va.at(i, 0);
    for (int j = 1; j < c; ++j) m = std::max(m, va.at(i, j));
    double z = 0.0;
    for (int j = 0; j < c; ++j) {
      double e = std::exp(va.at(i, j) - m);
      out.at(i, j) = e;
      z += e;
    }
    for (int j = 0; j < c; ++j) out.at(i, j) /= z;
  }
  return emplace(std::move(out), requires_grad(a), [a, r, c](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    const Tensor& y = g.val(self);
    Tensor& ga = g.gref(a);
    for (int i = 0; i < r; ++i) {
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += go.at(i, j) * y.at(i, j);
      for (int j = 0; j < c; ++j) ga.at(i, j) += y.at(i, j) * (go.at(i, j) - dot);
    }
  });
}

NodeId Graph::layer_norm(NodeId x, NodeId gamma, NodeId beta) {
  constexpr double kEps = 1e-5;
  const Tensor& vx = val(x);
  check_2d(vx, "layer_norm");
  const int r = vx.shape[0], c = vx.shape[1];
  const Tensor& vg = val(gamma);
  const Tensor& vb = val(beta);
  if (vg.numel() != c || vb.numel() != c) throw std::invalid_argument("layer_norm: param width mismatch");
  Tensor out({r, c});
  Tensor xhat({r, c});
  std::vector<double> inv_std(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) {
    double mu = 0.0;
    for (int j = 0; j < c; ++j) mu += vx.at(i, j);
    mu /= c;
    double var = 0.0;
    for (int j = 0; j < c; ++j) {
      double d = vx.at(i, j) - mu;
      var += d * d;
    }
    var /= c;
    double is = 1.0 / std::sqrt(var + kEps);
    inv_std[static_cast<size_t>(i)] = is;
    for (int j = 0; j < c; ++j) {
      double xh = (vx.at(i, j) - mu) * is;
      xhat.at(i, j) = xh;
      out.at(i, j) = vg[j] * xh + vb[j];
    }
  }
  bool rg = requires_grad(x) || requires_grad(gamma) || requires_grad(beta);
  return emplace(std::move(out), rg,
                 [x, gamma, beta, r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                     Graph& g, NodeId self) {
                   const Tensor& go = g.gref(self);
                   const Tensor& vg = g.val(gamma);
                   if (g.requires_grad(gamma)) {
                     Tensor& gg = g.gref(gamma);
                     for (int i = 0; i < r; ++i)
                       for (int j = 0; j < c; ++j) gg[j] += go.at(i, j) * xhat.at(i, j);
                   }
                   if (g.requires_grad(beta)) {
                     Tensor& gb = g.gref(beta);
                     for (int i = 0; i < r; ++i)
                       for (int j = 0; j < c; ++j) gb[j] += go.at(i, j);
                   }
                   if (g.requires_grad(x)) {
                     Tensor& gx = g.gref(x);
                     for (int i = 0; i < r; ++i) {
                       double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                       for (int j = 0; j < c; ++j) {
                         double dxh = go.at(i, j) * vg[j];
                         mean_dxh += dxh;
                         mean_dxh_xh += dxh * xhat.at(i, j);
                       }
                       mean_dxh /= c;
                       mean_dxh_xh /= c;
                       for (int j = 0; j < c; ++j) {
                         double dxh = go.at(i, j) * vg[j];
                         gx.at(i, j) += inv_std[static_cast<size_t>(i)] *
                                        (dxh - mean_dxh - xhat.at(i, j) * mean_dxh_xh);
                       }
                     }
                   }
                 });
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  check_2d(va, "matmul");
  check_2d(vb, "matmul");
  if (va.shape[1] != vb.shape[0]) throw std::invalid_argument("matmul: inner dim mismatch");
  const int m = va.shape[0], k = va.shape[1], n = vb.shape[1];
  Tensor out({m, n});
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const double aik = va.at(i, kk);
      if (aik == 0.0) continue;
      const double* brow = &vb.data[static_cast<size_t>(kk) * n];
      double* orow = &out.data[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
  bool rg = requires_grad(a) || requires_grad(b);
  return emplace(std::move(out), rg, [a, b, m, k, n](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    const Tensor& va = g.val(a);
    const Tensor& vb = g.val(b);
    if (g.requires_grad(a)) {  // dA = dC * B^T
      Tensor& ga = g.gref(a);
      for (int i = 0; i < m; ++i)
        for (int kk = 0; kk < k; ++kk) {
          double s = 0.0;
          const double* grow = &go.data[static_cast<size_t>(i) * n];
          const double* brow = &vb.data[static_cast<size_t>(kk) * n];
          for (int j = 0; j < n; ++j) s += grow[j] * brow[j];
          ga.at(i, kk) += s;
        }
    }
    if (g.requires_grad(b)) {  // dB = A^T * dC
      Tensor& gb = g.gref(b);
      for (int i = 0; i < m; ++i) {
        const double* grow = &go.data[static_cast<size_t>(i) * n];
        for (int kk = 0; kk < k; ++kk) {
          const double aik = va.at(i, kk);
          if (aik == 0.0) continue;
          double* brow = &gb.data[static_cast<size_t>(kk) * n];
          for (int j = 0; j < n; ++j) brow[j] += aik * grow[j];
        }
      }
    }
  });
}

NodeId Graph::conv2d(NodeId x, NodeId w, NodeId b, int stride, int pad) {
  const Tensor& vx = val(x);
  const Tensor& vw = val(w);
  const Tensor& vb = val(b);
  if (vx.rank() != 3 || vw.rank() != 4) throw std::invalid_argument("conv2d: expected HWC input, khkwCiCo weight");
  const int h = vx.shape[0], wd = vx.shape[1], ci = vx.shape[2];
  const int kh = vw.shape[0], kw = vw.shape[1], co = vw.shape[3];
  if (vw.shape[2] != ci) throw std::invalid_argument("conv2d: channel mismatch between input and weights");
  if (vb.numel() != co) throw std::invalid_argument("conv2d: bias size mismatch");
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (wd + 2 * pad - kw) / stride + 1;
  if (oh < 1 || ow < 1) throw std::invalid_argument("conv2d: output would be empty");
  Tensor out({oh, ow, co});
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      double* op = &out.data[(static_cast<size_t>(oy) * ow + ox) * co];
      for (int c = 0; c < co; ++c) op[c] = vb[c];
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = oy * stride - pad + ky;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ox * stride - pad + kx;
          if (ix < 0 || ix >= wd) continue;
          const double* xp = &vx.data[(static_cast<size_t>(iy) * wd + ix) * ci];
          const double* wp = &vw.data[((static_cast<size_t>(ky) * kw + kx) * ci) * co];
          for (int c = 0; c < ci; ++c) {
            const double xv = xp[c];
            if (xv == 0.0) continue;
            const double* wrow = wp + static_cast<size_t>(c) * co;
            for (int o = 0; o < co; ++o) op[o] += xv * wrow[o];
          }
        }
      }
    }
  }
  bool rg = requires_grad(x) || requires_grad(w) || requires_grad(b);
  return emplace(std::move(out), rg, [=](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    const Tensor& vx = g.val(x);
    const Tensor& vw = g.val(w);
    const bool need_x = g.requires_grad(x);
    const bool need_w = g.requires_grad(w);
    const bool need_b = g.requires_grad(b);
    Tensor* gx = need_x ? &g.gref(x) : nullptr;
    Tensor* gw = need_w ? &g.gref(w) : nullptr;
    Tensor* gb = need_b ? &g.gref(b) : nullptr;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const double* gp = &go.data[(static_cast<size_t>(oy) * ow + ox) * co];
        if (need_b)
          for (int o = 0; o < co; ++o) (*gb)[o] += gp[o];
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= wd) continue;
            const size_t xoff = (static_cast<size_t>(iy) * wd + ix) * ci;
            const size_t woff = (static_cast<size_t>(ky) * kw + kx) * ci * co;
            for (int c = 0; c < ci; ++c) {
              double gxa = 0.0;
              const double xv = vx.data[xoff + c];
              const double* wrow = &vw.data[woff + static_cast<size_t>(c) * co];
              for (int o = 0; o < co; ++o) {
                const double gov = gp[o];
                if (need_w) gw->data[woff + static_cast<size_t>(c) * co + o] += xv * gov;
                gxa += wrow[o] * gov;
              }
              if (need_x) gx->data[xoff + c] += gxa;
            }
          }
        }
      }
    }
  });
}

namespace {
// Half-pixel source mapping with clamped taps: out[o] samples in[(o+0.5)/2-0.5].
inline void up2_taps(int o, int n, int& i0, int& i1, double& w1) {
  const double src = (o + 0.5) * 0.5 - 0.5;
  const int f = static_cast<int>(std::floor(src));
  w1 = src - f;
  i0 = std::clamp(f, 0, n - 1);
  i1 = std::clamp(f + 1, 0, n - 1);
}
}  // namespace

NodeId Graph::bilinear_up2(NodeId x) {
  const Tensor& vx = val(x);
  if (vx.rank() != 3) throw std::invalid_argument("bilinear_up2: expected HWC");
  const int h = vx.shape[0], w = vx.shape[1], c = vx.shape[2];
  const int oh = 2 * h, ow = 2 * w;
  Tensor out({oh, ow, c});
  for (int oy = 0; oy < oh; ++oy) {
    int y0, y1;
    double wy;
    up2_taps(oy, h, y0, y1, wy);
    for (int ox = 0; ox < ow; ++ox) {
      int x0, x1;
      double wx;
      up2_taps(ox, w, x0, x1, wx);
      for (int ch = 0; ch < c; ++ch) {
        out.at(oy, ox, ch) = (1 - wy) * ((1 - wx) * vx.at(y0, x0, ch) + wx * vx.at(y0, x1, ch)) +
                             wy * ((1 - wx) * vx.at(y1, x0, ch) + wx * vx.at(y1, x1, ch));
      }
    }
  }
  return emplace(std::move(out), requires_grad(x), [x, h, w, c, oh, ow](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    Tensor& gx = g.gref(x);
    for (int oy = 0; oy < oh; ++oy) {
      int y0, y1;
      double wy;
      up2_taps(oy, h, y0, y1, wy);
      for (int ox = 0; ox < ow; ++ox) {
        int x0, x1;
        double wx;
        up2_taps(ox, w, x0, x1, wx);
        for (int ch = 0; ch < c; ++ch) {
          const double gv = go.at(oy, ox, ch);
          gx.at(y0, x0, ch) += (1 - wy) * (1 - wx) * gv;
          gx.at(y0, x1, ch) += (1 - wy) * wx * gv;
          gx.at(y1, x0, ch) += wy * (1 - wx) * gv;
          gx.at(y1, x1, ch) += wy * wx * gv;
        }
      }
    }
  });
}

NodeId Graph::gap(NodeId x) {
  const Tensor& vx = val(x);
  if (vx.rank() != 3) throw std::invalid_argument("gap: expected HWC");
  const int h = vx.shape[0], w = vx.shape[1], c = vx.shape[2];
  const double inv = 1.0 / (static_cast<double>(h) * w);
  Tensor out({1, c});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int ch = 0; ch < c; ++ch) out.at(0, ch) += vx.at(i, j, ch) * inv;
  return emplace(std::move(out), requires_grad(x), [x, h, w, c, inv](Graph& g, NodeId self) {
    const Tensor& go = g.gref(self);
    Tensor& gx = g.gref(x);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        for (int ch = 0; ch < c; ++ch) gx.at(i, j, ch) += go.at(0, ch) * inv;
  });
}

NodeId Graph::local_cos_sim(NodeId x, int h, int w, int k) {
  const Tensor& vx = val(x);
  check_2d(vx, "local_cos_sim");
  if (vx.shape[0] != h * w) throw std::invalid_argument("local_cos_sim: token count != h*w");
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("local_cos_sim: window must be odd and >= 1");
  const int d = vx.shape[1];
  const int rad = k / 2;
  const double inv_k2 = 1.0 / (static_cast<double>(k) * k);

  std::vector<double> norms(static_cast<size_t>(h) * w);
  for (int t = 0; t < h * w; ++t) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += vx.at(t, j) * vx.at(t, j);
    norms[static_cast<size_t>(t)] = std::sqrt(s);
  }

  auto clamp_idx = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };

  Tensor out({h * w, 1});
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int t = r * w + c;
      if (norms[static_cast<size_t>(t)] == 0.0) continue;  // cos with zero vector is 0
      double acc = 0.0;
      for (int dy = -rad; dy <= rad; ++dy) {
        const int nr = clamp_idx(r + dy, h);
        for (int dx = -rad; dx <= rad; ++dx) {
          const int nc = clamp_idx(c + dx, w);
          const int n = nr * w + nc;
          const double nn = norms[static_cast<size_t>(n)];
          if (nn == 0.0) continue;
          double dot = 0.0;
          for (int j = 0; j < d; ++j) dot += vx.at(t, j) * vx.at(n, j);
          acc += dot / (norms[static_cast<size_t>(t)] * nn);
        }
      }
      out.at(t, 0) = acc * inv_k2;
    }
  }
  return emplace(std::move(out), requires_grad(x),
                 [x, h, w, k, d, rad, inv_k2, norms = std::move(norms)](Graph& g, NodeId self) {
                   const Tensor& go = g.gref(self);
                   const Tensor& vx = g.val(x);
                   Tensor& gx = g.gref(x);
                   auto clamp_idx = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
                   (void)k;
                   for (int r = 0; r < h; ++r) {
                     for (int c = 0; c < w; ++c) {
                       const int t = r * w + c;
                       const double gs = go.at(t, 0) * inv_k2;
                       if (gs == 0.0) continue;
                       const double nt = norms[static_cast<size_t>(t)];
                       if (nt == 0.0) continue;
                       for (int dy = -rad; dy <= rad; ++dy) {
                         const int nr = clamp_idx(r + dy, h);
                         for (int dx = -rad; dx <= rad; ++dx) {
                           const int nc = clamp_idx(c + dx, w);
                           const int n = nr * w + nc;
                           const double nn = norms[static_cast<size_t>(n)];
                           if (nn == 0.0) continue;
                           double dot = 0.0;
                           for (int j = 0; j < d; ++j) dot += vx.at(t, j) * vx.at(n, j);
                           const double inv_tn = 1.0 / (nt * nn);
                           const double ct = dot * inv_tn;
                           // d cos / d center and d cos / d neighbor
                           for (int j = 0; j < d; ++j) {
                             gx.at(t, j) += gs * (vx.at(n, j) * inv_tn - ct * vx.at(t, j) / (nt * nt));
                             gx.at(n, j) += gs * (vx.at(t, j) * inv_tn - ct * vx.at(n, j) / (nn * nn));
                           }
                         }
                       }
                     }
                   }
                 });
}

NodeId Graph::bce_mean(NodeId pred, Tensor target, double eps) {
  const Tensor& vp = val(pred);
  if (vp.numel() != target.numel()) throw std::invalid_argument("bce_mean: target size mismatch");
  const int64_t n = vp.numel();
  const double inv_n = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double p = std::clamp(vp[i], eps, 1.0 - eps);
    const double t = target[i];
    acc += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
  }
  Tensor out({1});
  out[0] = acc * inv_n;
  return emplace(std::move(out), requires_grad(pred),
                 [pred, target = std::move(target), eps, n, inv_n](Graph& g, NodeId self) {
                   const double gs = g.gref(self)[0] * inv_n;
                   const Tensor& vp = g.val(pred);
                   Tensor& gp = g.gref(pred);
                   for (int64_t i = 0; i < n; ++i) {
                     if (vp[i] <= eps || vp[i] >= 1.0 - eps) continue;  // clamped: zero slope
                     const double p = vp[i];
                     gp[i] += gs * (p - target[i]) / (p * (1.0 - p));
                   }
                 });
}

NodeId Graph::sum_all(NodeId a) {
  const Tensor& va = val(a);
  Tensor out({1});
  for (double v : va.data) out[0] += v;
  return emplace(std::move(out), requires_grad(a), [a](Graph& g, NodeId self) {
    const double gs = g.gref(self)[0];
    Tensor& ga = g.gref(a);
    for (auto& v : ga.data) v += gs;
  });
}

}  // namespace tfm::nn
