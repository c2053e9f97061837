#ifndef WEARLAB_KMEANS_HPP
#define WEARLAB_KMEANS_HPP

#include "wearlab/rng.hpp"
#include "wearlab/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wearlab {

enum class KMeansDistance { SquaredEuclidean, Cosine };
enum class KMeansInit { KMeansPP, PreliminarySubsample, Explicit };

KMeansDistance kmeans_distance_by_name(const std::string& name);
std::string kmeans_distance_name(KMeansDistance d);

struct KMeansConfig {
    int k = 3;
    KMeansDistance distance = KMeansDistance::SquaredEuclidean;
    int replicates = 5;
    int max_iter = 100;
    double tol = 1e-9;  // relative J improvement
    KMeansInit init = KMeansInit::KMeansPP;
    double subsample_fraction = 0.10;
    std::uint64_t seed = 0;
    Eigen::MatrixXd explicit_centroids;  // used when init == Explicit

    void validate() const;  // throws DataError on invalid settings
};

struct KMeansModel {
    Eigen::MatrixXd centroids;      // K x d
    std::vector<int> assignments;   // size n, training assignments
    double objective = 0.0;         // J at the final assignment
    int iterations = 0;
    int replicate_chosen = 0;
    KMeansDistance distance = KMeansDistance::SquaredEuclidean;
    std::vector<double> objective_history;  // J after each assignment step
};

// Dissimilarity used for both assignment and the objective J. For
// SquaredEuclidean this is |x - c|^2; for Cosine it is 1 - cos(x, c).
double kmeans_point_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& c,
                             KMeansDistance distance);

// Seeding heuristic: first centroid uniform over rows, each further centroid
// sampled with probability proportional to its distance (under `distance`)
// to the nearest centroid already chosen. Requires k <= distinct row count.
Eigen::MatrixXd kmeanspp_init(const FeatureMatrix& m, int k, Rng& rng,
                              KMeansDistance distance = KMeansDistance::SquaredEuclidean);

// Full k-means fit on a uniform subsample of ceil(fraction * n) rows; the
// resulting centroids seed the main fit. Requires the subsample to hold at
// least k rows.
Eigen::MatrixXd preliminary_phase(const FeatureMatrix& m, const KMeansConfig& cfg,
                                  Rng& rng);

// Alternates nearest-centroid assignment (ties to the lowest index) and
// centroid update (mean; normalized mean under cosine) until the relative J
// improvement drops below cfg.tol or cfg.max_iter is hit. Empty clusters are
// repaired by seizing the point currently farthest from its centroid.
KMeansModel lloyd(const FeatureMatrix& m, const Eigen::MatrixXd& init,
                  const KMeansConfig& cfg);

// Runs cfg.replicates independent seeded initializations (replicate r uses
// seed cfg.seed + r) and keeps the model with minimal J.
KMeansModel kmeans_fit(const FeatureMatrix& m, const KMeansConfig& cfg);

// Maps each row to its nearest centroid under the model's distance.
Assignment kmeans_predict(const KMeansModel& model, const FeatureMatrix& m);

}  // namespace wearlab

#endif  // WEARLAB_KMEANS_HPP
