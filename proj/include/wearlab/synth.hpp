#ifndef WEARLAB_SYNTH_HPP
#define WEARLAB_SYNTH_HPP

#include "wearlab/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Synthetic data generators and brute-force oracles used by tests and the
// acceptance suite.

namespace wearlab {

struct MixtureComponent {
    double weight = 1.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // symmetric positive semi-definite
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    int n = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LabeledMatrix {
    FeatureMatrix matrix;
    std::vector<int> labels;  // generating component per row
};

// Samples n points from the mixture; deterministic given the seed.
LabeledMatrix gen_mixture(const MixtureSpec& spec);

// Convenience: k spherical Gaussian blobs with equal weights, means spaced
// `separation * sigma` apart along coordinate axes.
MixtureSpec spherical_blobs(int k, int dims, double sigma, double separation,
                            int points_per_blob, std::uint64_t seed);

enum class ActivityRegime { Rest, Walk, Run };

struct ActivitySegment {
    std::int64_t duration_s = 0;
    ActivityRegime regime = ActivityRegime::Rest;
};

// Per-regime signal levels. HR means must stay within [30, 220] bpm.
struct RegimeParams {
    double hr_mean_bpm = 70.0;
    double hr_stddev_bpm = 3.0;
    double accel_mean_g = 0.05;
    double accel_stddev_g = 0.02;
};

struct ActivitySchedule {
    std::vector<ActivitySegment> segments;
    RegimeParams rest{70.0, 3.0, 0.05, 0.02};
    RegimeParams walk{95.0, 5.0, 0.6, 0.15};
    RegimeParams run{150.0, 8.0, 1.8, 0.35};
    // Correlation between the per-second HR and accel-magnitude drivers;
    // 0 decouples them, positive values couple them positively.
    double coupling = 0.7;
    std::int64_t start_ms = 0;

    const RegimeParams& params(ActivityRegime regime) const;
    std::int64_t total_seconds() const;
    void validate() const;
};

// Simulates all four device modalities at their nominal rates (HR 1 Hz,
// accel 8 Hz x 3 channels, GSR 5 Hz, light 2 Hz). The same per-second
// standard-normal driver feeds accel magnitude and, scaled by `coupling`,
// HR, so aligned HR/accel features correlate positively when coupling > 0.
std::vector<SensorStream> gen_sensor_streams(const ActivitySchedule& schedule,
                                             std::uint64_t seed);

struct BruteForceResult {
    double objective = 0.0;
    std::vector<int> labels;  // canonical: first occurrences in 0,1,2,... order
};

// Exact k-means minimizer: enumerates every partition of the n rows into k
// non-empty groups (restricted-growth strings) and scores squared-Euclidean
// J against group means. Enumeration bound n <= 10.
BruteForceResult bruteforce_kmeans(const FeatureMatrix& m, int k);

// Adjusted Rand index from the pair-counting contingency table. 1.0 for
// identical partitions; 1.0 by convention when the index is degenerate
// (zero denominator).
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace wearlab

#endif  // WEARLAB_SYNTH_HPP
