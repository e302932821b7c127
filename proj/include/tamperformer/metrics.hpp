#pragma once

#include <vector>

namespace tfm {

// ROC AUC as the normalized Mann-Whitney U statistic, ties counted 0.5.
// Computed with integer pair counts so it matches exhaustive pair
// enumeration exactly. Throws if only one class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Threshold minimizing |FPR - FNR| over midpoints of adjacent sorted unique
// scores plus finite sentinels below/above the score range. Ties break toward
// the smaller gap, then the smaller threshold. Positives are scores > t.
double eer_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

// F1 = 2TP / (2TP + FP + FN) with positives = scores > t; 0 when the
// denominator vanishes.
double f1_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels, double t);

}  // namespace tfm
