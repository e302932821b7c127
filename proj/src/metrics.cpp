#include "tamperformer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace tfm {

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<int>& labels,
                  int64_t& n_pos, int64_t& n_neg) {
  if (scores.size() != labels.size()) throw std::invalid_argument("metrics: size mismatch");
  n_pos = n_neg = 0;
  for (int l : labels) {
    if (l == 1)
      ++n_pos;
    else if (l == 0)
      ++n_neg;
    else
      throw std::invalid_argument("metrics: labels must be 0 or 1");
  }
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  int64_t n_pos, n_neg;
  check_inputs(scores, labels, n_pos, n_neg);
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auc: undefined, both classes must be present");

  std::vector<size_t> order(scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Walk tie groups, counting (pos > neg) wins and ties as integers.
  uint64_t wins2 = 0;  // 2 * wins + ties, accumulated exactly
  int64_t negs_below = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    int64_t pos_here = 0, neg_here = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1)
        ++pos_here;
      else
        ++neg_here;
      ++j;
    }
    wins2 += 2 * static_cast<uint64_t>(pos_here) * static_cast<uint64_t>(negs_below) +
             static_cast<uint64_t>(pos_here) * static_cast<uint64_t>(neg_here);
    negs_below += neg_here;
    i = j;
  }
  return static_cast<double>(wins2) /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double eer_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
  int64_t n_pos, n_neg;
  check_inputs(scores, labels, n_pos, n_neg);
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("eer_threshold: both classes must be present");

  std::vector<size_t> order(scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Unique scores with per-group class counts, ascending.
  std::vector<double> uniq;
  std::vector<int64_t> pos_in_group, neg_in_group;
  for (size_t i = 0; i < order.size(); ++i) {
    const double s = scores[order[i]];
    if (uniq.empty() || s != uniq.back()) {
      uniq.push_back(s);
      pos_in_group.push_back(0);
      neg_in_group.push_back(0);
    }
    (labels[order[i]] == 1 ? pos_in_group.back() : neg_in_group.back())++;
  }

  // Sweep candidates in ascending order; a candidate after group g classifies
  // everything up to g as negative. Sentinels sit below and above the range.
  double best_t = uniq.front() - 1.0;
  double best_gap = std::numeric_limits<double>::infinity();
  int64_t pos_below = 0, neg_below = 0;
  auto consider = [&](double t, int64_t fn, int64_t fp) {
    const double gap = std::fabs(static_cast<double>(fp) / static_cast<double>(n_neg) -
                                 static_cast<double>(fn) / static_cast<double>(n_pos));
    if (gap < best_gap || (gap == best_gap && t < best_t)) {
      best_gap = gap;
      best_t = t;
    }
  };
  consider(uniq.front() - 1.0, 0, n_neg);  // everything predicted positive
  for (size_t g = 0; g + 1 < uniq.size(); ++g) {
    pos_below += pos_in_group[g];
    neg_below += neg_in_group[g];
    consider(0.5 * (uniq[g] + uniq[g + 1]), pos_below, n_neg - neg_below);
  }
  consider(uniq.back() + 1.0, n_pos, 0);  // everything predicted negative
  return best_t;
}

double f1_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                       double t) {
  int64_t n_pos, n_neg;
  check_inputs(scores, labels, n_pos, n_neg);
  int64_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] > t;
    if (pred && labels[i] == 1) ++tp;
    if (pred && labels[i] == 0) ++fp;
    if (!pred && labels[i] == 1) ++fn;
  }
  const int64_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace tfm
