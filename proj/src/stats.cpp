#include "wearlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wearlab {

namespace {

struct ColumnMoments {
    double mean = 0.0;
    double dev_ss = 0.0;  // sum of squared deviations
};

ColumnMoments moments(const Eigen::Ref<const Eigen::VectorXd>& col) {
    ColumnMoments m;
    m.mean = col.mean();
    m.dev_ss = (col.array() - m.mean).square().sum();
    return m;
}

double pearson_from_columns(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const ColumnMoments& mx,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            const ColumnMoments& my) {
    const double cov = ((x.array() - mx.mean) * (y.array() - my.mean)).sum();
    const double r = cov / std::sqrt(mx.dev_ss * my.dev_ss);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw DataError("pearson: length mismatch (" + std::to_string(x.size()) +
                        " vs " + std::to_string(y.size()) + ")");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    if (n < 2) throw DataError("pearson: need at least 2 observations");

    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    const ColumnMoments mx = moments(xv);
    const ColumnMoments my = moments(yv);
    if (mx.dev_ss == 0.0 || my.dev_ss == 0.0) {
        throw DataError("pearson: correlation undefined for constant input");
    }
    return pearson_from_columns(xv, mx, yv, my);
}

CorrelationReport correlation_report(const FeatureMatrix& m, int bins) {
    const Eigen::Index n = m.rows();
    const Eigen::Index d = m.cols();
    if (n < 2) throw DataError("correlation_report: need at least 2 rows");
    if (d < 2) throw DataError("correlation_report: need at least 2 columns");
    if (bins < 1) throw DataError("correlation_report: bins must be >= 1");

    CorrelationReport report;
    report.variables = m.column_names;
    report.r = Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
    report.defined.setConstant(d, d, true);

    std::vector<ColumnMoments> mom(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        mom[j] = moments(m.values.col(j));
        if (mom[j].dev_ss == 0.0) {
            report.constant_columns.push_back(static_cast<int>(j));
        }
    }

    for (Eigen::Index i = 0; i < d; ++i) {
        report.r(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < d; ++j) {
            if (mom[i].dev_ss == 0.0 || mom[j].dev_ss == 0.0) {
                report.defined(i, j) = report.defined(j, i) = false;
                continue;
            }
            const double r =
                pearson_from_columns(m.values.col(i), mom[i], m.values.col(j), mom[j]);
            report.r(i, j) = report.r(j, i) = r;
        }
    }

    for (Eigen::Index j = 0; j < d; ++j) {
        Histogram h;
        const double lo = m.values.col(j).minCoeff();
        double hi = m.values.col(j).maxCoeff();
        if (hi == lo) hi = lo + 1.0;  // degenerate span, all mass in bin 0
        h.edges.resize(bins + 1);
        for (int b = 0; b <= bins; ++b) {
            h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
        }
        h.counts.assign(bins, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = m.values(i, j);
            int b = static_cast<int>((v - lo) / (hi - lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            ++h.counts[b];
        }
        report.histograms.push_back(std::move(h));
    }

    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            report.pairs.push_back({i, j});
        }
    }
    return report;
}

}  // namespace wearlab
