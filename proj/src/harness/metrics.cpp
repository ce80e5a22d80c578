#include "fpt/harness/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "fpt/error.hpp"

namespace fpt::harness {

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw DataError("accuracy: no labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw DataError("mean_std: no values");
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

std::string format_cell(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f(%.2f)", 100.0 * m.mean, 100.0 * m.stddev);
  return buf;
}

}  // namespace fpt::harness
