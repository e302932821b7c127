#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"

using namespace tfm;
using namespace tfm::test;

namespace {
constexpr double kGradTol = 1e-5;
}

TEST_CASE("gelu matches the exact erf formulation") {
  CHECK(nn::gelu_scalar(0.0) == 0.0);
  // 1 + GELU(1) with GELU(x) = x * Phi(x)
  CHECK(1.0 + nn::gelu_scalar(1.0) == doctest::Approx(1.8413447461).epsilon(1e-9));
  CHECK(nn::gelu_scalar(-10.0) == doctest::Approx(0.0).epsilon(1e-9));
  // derivative at 0 is Phi(0) = 0.5
  CHECK(nn::gelu_grad_scalar(0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax of zero logits is uniform; rows sum to one") {
  nn::Graph g;
  nn::NodeId s = g.softmax_rows(g.input(Tensor({3, 4})));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) CHECK(g.val(s).at(i, j) == doctest::Approx(0.25));

  Rng rng(7);
  nn::Graph g2;
  Tensor logits = random_tensor({5, 9}, rng, -4, 4);
  nn::NodeId s2 = g2.softmax_rows(g2.input(logits));
  for (int i = 0; i < 5; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 9; ++j) {
      CHECK(g2.val(s2).at(i, j) >= 0.0);
      sum += g2.val(s2).at(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scalar softmax example: logits (0, ln 3) give (0.25, 0.75)") {
  nn::Graph g;
  Tensor logits({1, 2});
  logits.at(0, 1) = std::log(3.0);
  nn::NodeId s = g.softmax_rows(g.input(logits));
  CHECK(g.val(s).at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(g.val(s).at(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("bilinear 2x upsample of a 2x2 grid matches the hand interpolation") {
  // Half-pixel mapping with clamped taps: rows come out as
  // [x0, 0.75 x0 + 0.25 x1, 0.25 x0 + 0.75 x1, x1].
  Tensor x({2, 2, 1});
  x.at(0, 0, 0) = 1.0;
  x.at(0, 1, 0) = 2.0;
  x.at(1, 0, 0) = 3.0;
  x.at(1, 1, 0) = 4.0;
  nn::Graph g;
  const Tensor& up = g.val(g.bilinear_up2(g.input(x)));
  const double w[4][2] = {{1.0, 0.0}, {0.75, 0.25}, {0.25, 0.75}, {0.0, 1.0}};
  for (int oy = 0; oy < 4; ++oy)
    for (int ox = 0; ox < 4; ++ox) {
      double expect = 0.0;
      for (int iy = 0; iy < 2; ++iy)
        for (int ix = 0; ix < 2; ++ix) expect += w[oy][iy] * w[ox][ix] * x.at(iy, ix, 0);
      CHECK(up.at(oy, ox, 0) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("conv2d with a 1x1 identity kernel is the identity") {
  Rng rng(3);
  Tensor x = random_tensor({5, 4, 3}, rng);
  Tensor w({1, 1, 3, 3});
  for (int c = 0; c < 3; ++c) w.data[static_cast<size_t>(c) * 3 + c] = 1.0;
  nn::Graph g;
  const Tensor& y = g.val(g.conv2d(g.input(x), g.input(w), g.input(Tensor({3})), 1, 0));
  CHECK(max_abs_diff(x, y) == doctest::Approx(0.0));
}

TEST_CASE("local cosine similarity: uniform grid gives 1, orthogonal 1x2 gives 1/3") {
  nn::Graph g;
  Tensor uniform = Tensor::full({6 * 5, 3}, 0.7);
  nn::NodeId s = g.local_cos_sim(g.input(uniform), 6, 5, 3);
  for (int64_t i = 0; i < g.val(s).numel(); ++i)
    CHECK(g.val(s)[i] == doctest::Approx(1.0).epsilon(1e-12));

  // Two orthogonal unit vectors on a 1x2 grid, k=3 with edge replication:
  // row offsets clamp to row 0 and the outer column clamps to the edge, so
  // each window holds 6 copies of self and 3 of the neighbor.
  nn::Graph g2;
  Tensor grid({2, 2});
  grid.at(0, 0) = 1.0;
  grid.at(1, 1) = 1.0;
  nn::NodeId s2 = g2.local_cos_sim(g2.input(grid), 1, 2, 3);
  CHECK(g2.val(s2)[0] == doctest::Approx((6.0 * 1.0 + 3.0 * 0.0) / 9.0).epsilon(1e-12));
  CHECK(g2.val(s2)[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Zero vectors compare as 0: an all-zero grid produces an all-zero map.
  nn::Graph g3;
  nn::NodeId s3 = g3.local_cos_sim(g3.input(Tensor({4, 2})), 2, 2, 3);
  for (int64_t i = 0; i < g3.val(s3).numel(); ++i) CHECK(g3.val(s3)[i] == 0.0);
}

TEST_CASE("elementwise and shape ops match finite differences") {
  Rng rng(11);
  auto check = [&](const char* name, ScalarFn fn, std::vector<Tensor> inputs) {
    INFO(name);
    CHECK(max_grad_rel_err(fn, std::move(inputs)) < kGradTol);
  };

  Tensor w34 = random_tensor({3, 4}, rng);
  check("add", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.add(in[0], in[1]), w34);
  }, {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)});

  check("sub+mul+scale", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.scale(g.mul(g.sub(in[0], in[1]), in[2]), -1.7), w34);
  }, {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)});

  Tensor w26 = random_tensor({2, 6}, rng);
  check("reshape+transpose", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.reshape(g.transpose(in[0]), {2, 6}), w26);
  }, {random_tensor({3, 4}, rng)});

  Tensor w24 = random_tensor({2, 4}, rng);
  check("slice_rows", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.slice_rows(in[0], 1, 3), w24);
  }, {random_tensor({5, 4}, rng)});

  Tensor w54 = random_tensor({5, 4}, rng);
  check("concat_rows", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.concat_rows(in[0], in[1]), w54);
  }, {random_tensor({2, 4}, rng), random_tensor({3, 4}, rng)});

  Tensor w32 = random_tensor({3, 2}, rng);
  check("slice_cols", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.slice_cols(in[0], 1, 3), w32);
  }, {random_tensor({3, 4}, rng)});

  Tensor w35 = random_tensor({3, 5}, rng);
  check("concat_cols", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.concat_cols(in[0], in[1]), w35);
  }, {random_tensor({3, 2}, rng), random_tensor({3, 3}, rng)});

  Tensor w63 = random_tensor({6, 3}, rng);
  check("broadcast_row", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.broadcast_row(in[0], 6), w63);
  }, {random_tensor({1, 3}, rng)});

  check("add_col_broadcast", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.add_col_broadcast(in[0], in[1]), w34);
  }, {random_tensor({3, 4}, rng), random_tensor({3, 1}, rng)});
}

TEST_CASE("nonlinearities and reductions match finite differences") {
  Rng rng(12);
  auto check = [&](const char* name, ScalarFn fn, std::vector<Tensor> inputs) {
    INFO(name);
    CHECK(max_grad_rel_err(fn, std::move(inputs)) < kGradTol);
  };

  Tensor w34 = random_tensor({3, 4}, rng);
  check("gelu", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.gelu(in[0]), w34);
  }, {random_tensor({3, 4}, rng, -2, 2)});

  check("sigmoid", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.sigmoid(in[0]), w34);
  }, {random_tensor({3, 4}, rng, -3, 3)});

  check("softmax_rows", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.softmax_rows(in[0]), w34);
  }, {random_tensor({3, 4}, rng, -2, 2)});

  Tensor w45 = random_tensor({4, 5}, rng);
  check("layer_norm", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.layer_norm(in[0], in[1], in[2]), w45);
  }, {random_tensor({4, 5}, rng), random_tensor({5}, rng, 0.5, 1.5), random_tensor({5}, rng)});

  Tensor w35 = random_tensor({3, 5}, rng);
  check("matmul", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.matmul(in[0], in[1]), w35);
  }, {random_tensor({3, 4}, rng), random_tensor({4, 5}, rng)});

  Tensor w13 = random_tensor({1, 3}, rng);
  check("gap", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.gap(in[0]), w13);
  }, {random_tensor({4, 5, 3}, rng)});

  check("sum_all", [&](nn::Graph& g, const auto& in) {
    return g.sum_all(in[0]);
  }, {random_tensor({3, 4}, rng)});

  check("bce_mean", [&](nn::Graph& g, const auto& in) {
    Tensor target({2, 3});
    target.at(0, 0) = 1.0;
    target.at(1, 2) = 1.0;
    return g.bce_mean(in[0], target, 1e-7);
  }, {random_tensor({2, 3}, rng, 0.05, 0.95)});
}

TEST_CASE("conv, upsample, and cosine window match finite differences") {
  Rng rng(13);
  auto check = [&](const char* name, ScalarFn fn, std::vector<Tensor> inputs) {
    INFO(name);
    CHECK(max_grad_rel_err(fn, std::move(inputs)) < kGradTol);
  };

  Tensor w332 = random_tensor({3, 3, 2}, rng);
  check("conv2d stride1 pad1", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.conv2d(in[0], in[1], in[2], 1, 1), w332);
  }, {random_tensor({3, 3, 3}, rng), random_tensor({3, 3, 3, 2}, rng), random_tensor({2}, rng)});

  Tensor w222 = random_tensor({2, 2, 2}, rng);
  check("conv2d stride2", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.conv2d(in[0], in[1], in[2], 2, 1), w222);
  }, {random_tensor({4, 4, 3}, rng), random_tensor({3, 3, 3, 2}, rng), random_tensor({2}, rng)});

  Tensor w662 = random_tensor({6, 6, 2}, rng);
  check("bilinear_up2", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.bilinear_up2(in[0]), w662);
  }, {random_tensor({3, 3, 2}, rng)});

  Tensor w121 = random_tensor({12, 1}, rng);
  check("local_cos_sim", [&](nn::Graph& g, const auto& in) {
    return weighted_sum(g, g.local_cos_sim(in[0], 3, 4, 3), w121);
  }, {random_tensor({12, 5}, rng, 0.2, 1.0)});
}

TEST_CASE("backward only reaches nodes that require gradients") {
  nn::Graph g;
  Rng rng(5);
  Tensor a = random_tensor({2, 2}, rng);
  nn::NodeId x = g.input(a, true);
  nn::NodeId c = g.input(a, false);
  nn::NodeId out = g.sum_all(g.mul(x, c));
  g.backward(out);
  CHECK(g.grad_of(x).numel() == 4);
  double zero = 0.0;
  for (double v : g.grad_of(c).data) zero += std::fabs(v);
  CHECK(zero == 0.0);
}
