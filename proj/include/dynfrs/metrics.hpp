#pragma once

#include <span>
#include <string_view>

#include "dynfrs/data.hpp"

namespace dynfrs {

// Fraction of samples where (score >= threshold) matches the label.
double accuracy(std::span<const double> scores, std::span<const Label> labels,
                double threshold = 0.5);

// Area under the ROC curve as the Mann-Whitney statistic, ties counted half
// (midranks). 0.5 when either class is absent.
double auc_roc(std::span<const double> scores, std::span<const Label> labels);

// "accuracy" when fewer than 21% of samples are positive, "auc" otherwise.
std::string_view headline_metric(double positive_rate);

}  // namespace dynfrs
