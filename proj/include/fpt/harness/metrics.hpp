#pragma once

#include <string>
#include <vector>

namespace fpt::harness {

/// Exact-match fraction; lengths must agree and be non-zero.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population (divides by n)
};

MeanStd mean_std(const std::vector<double>& values);

/// Accuracy fractions rendered as percentages, "46.24(5.62)".
std::string format_cell(const MeanStd& m);

}  // namespace fpt::harness
