#ifndef WEARLAB_GMM_HPP
#define WEARLAB_GMM_HPP

#include "wearlab/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wearlab {

enum class CovarianceShape { Diagonal, Full };
enum class CovarianceSharing { Shared, Unshared };

CovarianceShape covariance_shape_by_name(const std::string& name);
std::string covariance_shape_name(CovarianceShape s);
CovarianceSharing covariance_sharing_by_name(const std::string& name);
std::string covariance_sharing_name(CovarianceSharing s);

struct GmmConfig {
    int k = 2;
    CovarianceShape shape = CovarianceShape::Full;
    CovarianceSharing sharing = CovarianceSharing::Unshared;
    double tol = 1e-6;          // relative log-likelihood improvement
    int max_iter = 1000;
    double regularization = 1e-6;  // ridge added to covariance diagonals
    int replicates = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GmmModel {
    Eigen::VectorXd weights;               // K, nonnegative, sums to 1
    Eigen::MatrixXd means;                 // K x d
    std::vector<Eigen::MatrixXd> covariances;  // K symmetric d x d
    double log_likelihood = 0.0;
    int iterations = 0;
    int replicate_chosen = 0;
    CovarianceShape shape = CovarianceShape::Full;
    CovarianceSharing sharing = CovarianceSharing::Unshared;
    std::vector<double> log_likelihood_history;  // one entry per E-step
};

// n x K posterior probabilities, rows summing to 1.
using Responsibilities = Eigen::MatrixXd;

// log N(x; mean, cov) via Cholesky factorization; the non-log density is
// never materialized. Throws NumericError if cov is not positive definite.
double gaussian_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov);

// Posterior responsibilities and the total log-likelihood
// sum_i log sum_j w_j N(x_i; mu_j, Sigma_j), normalized per row with
// log-sum-exp.
std::pair<Responsibilities, double> e_step(const GmmModel& model,
                                           const FeatureMatrix& m);

// Maximization update: responsibility-weighted weights, means and scatter,
// then shaped (off-diagonals zeroed for Diagonal), pooled across components
// for Shared, and ridge-regularized. Throws NumericError when a component's
// total responsibility collapses to ~0.
GmmModel m_step(const FeatureMatrix& m, const Responsibilities& r,
                const GmmConfig& cfg);

// EM fit: means seeded by kmeans++, uniform weights, global covariance
// (shaped per config); best of cfg.replicates by final log-likelihood
// (replicate r uses seed cfg.seed + r). A collapsed component is re-seeded
// at a random data row once; a second collapse raises NumericError.
GmmModel gmm_fit(const FeatureMatrix& m, const GmmConfig& cfg);

// Hard assignment by maximum posterior (ties to the lowest index); the full
// responsibilities ride along in the result.
Assignment gmm_cluster(const GmmModel& model, const FeatureMatrix& m);

}  // namespace wearlab

#endif  // WEARLAB_GMM_HPP
