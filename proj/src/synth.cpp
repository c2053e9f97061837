#include "wearlab/synth.hpp"

#include "wearlab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace wearlab {

void MixtureSpec::validate() const {
    if (components.empty()) throw DataError("mixture spec: no components");
    if (n < 1) throw DataError("mixture spec: n must be >= 1");
    const Eigen::Index d = components.front().mean.size();
    double total = 0.0;
    for (const auto& c : components) {
        if (c.weight <= 0.0) throw DataError("mixture spec: weights must be positive");
        if (c.mean.size() != d || c.covariance.rows() != d || c.covariance.cols() != d) {
            throw DataError("mixture spec: dimension mismatch across components");
        }
        if (!c.covariance.isApprox(c.covariance.transpose(), 1e-12)) {
            throw DataError("mixture spec: covariance must be symmetric");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw DataError("mixture spec: weights must sum to 1");
    }
}

LabeledMatrix gen_mixture(const MixtureSpec& spec) {
    spec.validate();
    const Eigen::Index d = spec.components.front().mean.size();
    const std::size_t k = spec.components.size();

    // PSD square roots via eigendecomposition (zero covariance is allowed).
    std::vector<Eigen::MatrixXd> roots;
    std::vector<double> weights;
    roots.reserve(k);
    for (const auto& c : spec.components) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.covariance);
        if (eig.eigenvalues().minCoeff() < -1e-9) {
            throw DataError("mixture spec: covariance is not positive semi-definite");
        }
        roots.push_back(eig.eigenvectors() *
                        eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal());
        weights.push_back(c.weight);
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

    Rng rng(spec.seed);
    LabeledMatrix out;
    out.matrix.values.resize(spec.n, d);
    out.labels.resize(spec.n);
    for (Eigen::Index j = 0; j < d; ++j) {
        out.matrix.column_names.push_back("f" + std::to_string(j));
    }
    Eigen::VectorXd z(d);
    for (int i = 0; i < spec.n; ++i) {
        const auto comp = rng.weighted_index(weights, total);
        for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
        out.matrix.values.row(i) =
            (spec.components[comp].mean + roots[comp] * z).transpose();
        out.labels[i] = static_cast<int>(comp);
        out.matrix.row_keys.push_back({"synthetic", i});
    }
    return out;
}

MixtureSpec spherical_blobs(int k, int dims, double sigma, double separation,
                            int points_per_blob, std::uint64_t seed) {
    if (k < 1 || dims < 1) throw DataError("spherical_blobs: bad shape");
    MixtureSpec spec;
    spec.n = k * points_per_blob;
    spec.seed = seed;
    for (int j = 0; j < k; ++j) {
        MixtureComponent c;
        c.weight = 1.0 / k;
        c.mean = Eigen::VectorXd::Zero(dims);
        if (j > 0) {
            const int axis = (j - 1) % dims;
            const int step = (j - 1) / dims + 1;
            c.mean(axis) = separation * sigma * step;
        }
        c.covariance = sigma * sigma * Eigen::MatrixXd::Identity(dims, dims);
        spec.components.push_back(std::move(c));
    }
    return spec;
}

const RegimeParams& ActivitySchedule::params(ActivityRegime regime) const {
    switch (regime) {
        case ActivityRegime::Rest: return rest;
        case ActivityRegime::Walk: return walk;
        case ActivityRegime::Run: return run;
    }
    throw DataError("unknown activity regime");
}

std::int64_t ActivitySchedule::total_seconds() const {
    std::int64_t total = 0;
    for (const auto& seg : segments) total += seg.duration_s;
    return total;
}

void ActivitySchedule::validate() const {
    if (segments.empty()) throw DataError("activity schedule: no segments");
    for (const auto& seg : segments) {
        if (seg.duration_s <= 0) {
            throw DataError("activity schedule: segment durations must be > 0");
        }
    }
    for (const RegimeParams* p : {&rest, &walk, &run}) {
        if (p->hr_mean_bpm < 30.0 || p->hr_mean_bpm > 220.0) {
            throw DataError("activity schedule: HR mean outside [30, 220] bpm");
        }
        if (p->hr_stddev_bpm < 0.0 || p->accel_stddev_g < 0.0) {
            throw DataError("activity schedule: negative stddev");
        }
    }
}

std::vector<SensorStream> gen_sensor_streams(const ActivitySchedule& schedule,
                                             std::uint64_t seed) {
    schedule.validate();
    Rng rng(seed);

    SensorStream hr{modality(ModalityKind::HeartRate), {}};
    SensorStream accel{modality(ModalityKind::Accelerometer), {}};
    SensorStream gsr{modality(ModalityKind::Gsr), {}};
    SensorStream light{modality(ModalityKind::AmbientLight), {}};

    const double c = schedule.coupling;
    const double residual = std::sqrt(std::max(0.0, 1.0 - c * c));
    const Eigen::Vector3d base_dir = Eigen::Vector3d(0.70, 0.55, 0.25).normalized();

    std::int64_t second = 0;
    for (const auto& seg : schedule.segments) {
        const RegimeParams& p = schedule.params(seg.regime);
        double gsr_base = 2.0;
        if (seg.regime == ActivityRegime::Walk) gsr_base = 4.0;
        if (seg.regime == ActivityRegime::Run) gsr_base = 8.0;

        for (std::int64_t s = 0; s < seg.duration_s; ++s, ++second) {
            const std::int64_t t0 = schedule.start_ms + second * 1000;
            // Shared per-second driver couples accel magnitude into HR.
            const double z = rng.normal();
            const double w = rng.normal();
            const double accel_level =
                std::max(0.001, p.accel_mean_g + p.accel_stddev_g * z);
            const double hr_value = std::max(
                1.0, p.hr_mean_bpm + p.hr_stddev_bpm * (c * z + residual * w));

            hr.samples.push_back({t0, {hr_value}});
            for (int i = 0; i < 8; ++i) {
                Eigen::Vector3d dir = base_dir;
                for (int a = 0; a < 3; ++a) dir(a) += 0.15 * rng.normal();
                dir.normalize();
                const double mag = std::max(
                    0.0, accel_level + 0.05 * p.accel_stddev_g * rng.normal());
                const Eigen::Vector3d v = mag * dir;
                accel.samples.push_back({t0 + i * 125, {v.x(), v.y(), v.z()}});
            }
            for (int i = 0; i < 5; ++i) {
                gsr.samples.push_back(
                    {t0 + i * 200, {std::max(0.0, gsr_base + 0.05 * rng.normal())}});
            }
            for (int i = 0; i < 2; ++i) {
                light.samples.push_back(
                    {t0 + i * 500, {std::max(0.0, 300.0 + 30.0 * rng.normal())}});
            }
        }
    }
    return {std::move(hr), std::move(accel), std::move(gsr), std::move(light)};
}

namespace {

double partition_objective(const Eigen::MatrixXd& values,
                           const std::vector<int>& labels, int k) {
    const Eigen::Index d = values.cols();
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, d);
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        means.row(labels[i]) += values.row(i);
        ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) means.row(c) /= static_cast<double>(counts[c]);
    double j = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        j += (values.row(i) - means.row(labels[i])).squaredNorm();
    }
    return j;
}

void enumerate_partitions(const Eigen::MatrixXd& values, int k, int i,
                          int blocks_used, std::vector<int>& labels,
                          BruteForceResult& best, bool& found) {
    const int n = static_cast<int>(values.rows());
    if (i == n) {
        if (blocks_used != k) return;
        const double j = partition_objective(values, labels, k);
        if (!found || j < best.objective) {
            best.objective = j;
            best.labels = labels;
            found = true;
        }
        return;
    }
    // Prune branches that can no longer open k blocks.
    if (blocks_used + (n - i) < k) return;
    const int limit = std::min(blocks_used, k - 1);
    for (int b = 0; b <= limit; ++b) {
        labels[i] = b;
        enumerate_partitions(values, k, i + 1, std::max(blocks_used, b + 1),
                             labels, best, found);
    }
}

}  // namespace

BruteForceResult bruteforce_kmeans(const FeatureMatrix& m, int k) {
    const int n = static_cast<int>(m.rows());
    if (n > 10) throw DataError("bruteforce_kmeans: enumeration bound is n <= 10");
    if (k < 1 || k > n) throw DataError("bruteforce_kmeans: need 1 <= k <= n");

    BruteForceResult best;
    bool found = false;
    std::vector<int> labels(n, 0);
    enumerate_partitions(m.values, k, 0, 0, labels, best, found);
    return best;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw DataError("adjusted_rand_index: length mismatch");
    const double n = static_cast<double>(a.size());

    std::map<std::pair<int, int>, double> cells;
    std::map<int, double> row_sums;
    std::map<int, double> col_sums;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1.0;
        row_sums[a[i]] += 1.0;
        col_sums[b[i]] += 1.0;
    }
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };

    double index = 0.0;
    for (const auto& [_, count] : cells) index += choose2(count);
    double row_pairs = 0.0;
    for (const auto& [_, count] : row_sums) row_pairs += choose2(count);
    double col_pairs = 0.0;
    for (const auto& [_, count] : col_sums) col_pairs += choose2(count);

    const double total_pairs = choose2(n);
    if (total_pairs == 0.0) return 1.0;
    const double expected = row_pairs * col_pairs / total_pairs;
    const double max_index = 0.5 * (row_pairs + col_pairs);
    const double denom = max_index - expected;
    if (denom == 0.0) return 1.0;  // degenerate: both partitions trivial
    return (index - expected) / denom;
}

}  // namespace wearlab
