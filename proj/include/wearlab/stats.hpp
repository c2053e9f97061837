#ifndef WEARLAB_STATS_HPP
#define WEARLAB_STATS_HPP

#include "wearlab/types.hpp"

#include <vector>

namespace wearlab {

// Pearson product-moment correlation, two-pass (means first). Requires equal
// lengths, n >= 2 and non-constant inputs; result is clamped to [-1, 1].
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct Histogram {
    std::vector<double> edges;   // bins + 1 uniform edges over [min, max]
    std::vector<std::int64_t> counts;  // size bins, sums to n
};

struct ScatterPair {
    int i = 0;
    int j = 0;  // i < j, column indices
};

// Pairwise correlation structure of a feature matrix: the data behind a
// scatter-plot matrix with histograms on the diagonal.
struct CorrelationReport {
    std::vector<std::string> variables;
    Eigen::MatrixXd r;                  // d x d, symmetric, diag == 1
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> defined;
    std::vector<Histogram> histograms;  // one per variable
    std::vector<ScatterPair> pairs;     // all off-diagonal pairs, i < j
    std::vector<int> constant_columns;
};

// Builds the full report. Entries involving constant columns are NaN with
// defined == false; the diagonal is exactly 1 regardless. Requires n >= 2,
// d >= 2, bins >= 1.
CorrelationReport correlation_report(const FeatureMatrix& m, int bins);

}  // namespace wearlab

#endif  // WEARLAB_STATS_HPP
