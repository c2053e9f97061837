#include "wearlab/gmm.hpp"

#include "wearlab/kmeans.hpp"
#include "wearlab/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace wearlab {

namespace {

// Cholesky factor plus log-determinant; built once per component per E-step.
struct ComponentFactor {
    Eigen::MatrixXd L;
    double log_det = 0.0;
};

ComponentFactor factorize(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericError("gaussian covariance is not positive definite");
    }
    ComponentFactor f;
    f.L = llt.matrixL();
    f.log_det = 2.0 * f.L.diagonal().array().log().sum();
    return f;
}

double log_pdf_with_factor(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                           const ComponentFactor& f) {
    const Eigen::VectorXd y =
        f.L.triangularView<Eigen::Lower>().solve(x - mean);
    const double quad = y.squaredNorm();
    const double d = static_cast<double>(x.size());
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + f.log_det + quad);
}

Eigen::MatrixXd shape_covariance(Eigen::MatrixXd cov, CovarianceShape shape,
                                 double regularization) {
    cov = (0.5 * (cov + cov.transpose())).eval();
    if (shape == CovarianceShape::Diagonal) {
        cov = Eigen::MatrixXd(cov.diagonal().asDiagonal());
    }
    cov.diagonal().array() += regularization;
    return cov;
}

// Mean-centered MLE covariance (divisor n) of the whole data set.
Eigen::MatrixXd global_covariance(const Eigen::MatrixXd& values) {
    const Eigen::RowVectorXd mean = values.colwise().mean();
    const Eigen::MatrixXd centered = values.rowwise() - mean;
    return centered.transpose() * centered / static_cast<double>(values.rows());
}

std::vector<int> collapsed_components(const Responsibilities& r) {
    const double floor = std::numeric_limits<double>::epsilon() *
                         static_cast<double>(r.rows());
    std::vector<int> out;
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        if (r.col(j).sum() <= floor) out.push_back(static_cast<int>(j));
    }
    return out;
}

}  // namespace

CovarianceShape covariance_shape_by_name(const std::string& name) {
    if (name == "diagonal") return CovarianceShape::Diagonal;
    if (name == "full") return CovarianceShape::Full;
    throw DataError("unknown covariance shape: '" + name + "'");
}

std::string covariance_shape_name(CovarianceShape s) {
    return s == CovarianceShape::Diagonal ? "diagonal" : "full";
}

CovarianceSharing covariance_sharing_by_name(const std::string& name) {
    if (name == "shared") return CovarianceSharing::Shared;
    if (name == "unshared") return CovarianceSharing::Unshared;
    throw DataError("unknown covariance sharing: '" + name + "'");
}

std::string covariance_sharing_name(CovarianceSharing s) {
    return s == CovarianceSharing::Shared ? "shared" : "unshared";
}

void GmmConfig::validate() const {
    if (k < 1) throw DataError("gmm: k must be >= 1");
    if (tol < 0.0) throw DataError("gmm: tol must be >= 0");
    if (max_iter < 1) throw DataError("gmm: max_iter must be >= 1");
    if (regularization < 0.0) throw DataError("gmm: regularization must be >= 0");
    if (replicates < 1) throw DataError("gmm: replicates must be >= 1");
}

double gaussian_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov) {
    if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size()) {
        throw DataError("gaussian_log_pdf: dimension mismatch");
    }
    return log_pdf_with_factor(x, mean, factorize(cov));
}

std::pair<Responsibilities, double> e_step(const GmmModel& model,
                                           const FeatureMatrix& m) {
    const Eigen::Index n = m.rows();
    const Eigen::Index k = model.means.rows();
    if (model.means.cols() != m.cols()) {
        throw DataError("e_step: feature dimension mismatch");
    }

    std::vector<ComponentFactor> factors;
    factors.reserve(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        factors.push_back(factorize(model.covariances[j]));
    }
    Eigen::VectorXd log_weights(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        log_weights(j) = model.weights(j) > 0.0
                             ? std::log(model.weights(j))
                             : -std::numeric_limits<double>::infinity();
    }

    Responsibilities r(n, k);
    double total_ll = 0.0;
    Eigen::VectorXd logp(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd x = m.values.row(i);
        for (Eigen::Index j = 0; j < k; ++j) {
            logp(j) = log_weights(j) + log_pdf_with_factor(x, model.means.row(j), factors[j]);
        }
        const double peak = logp.maxCoeff();
        const double lse = peak + std::log((logp.array() - peak).exp().sum());
        r.row(i) = (logp.array() - lse).exp();
        total_ll += lse;
    }
    return {std::move(r), total_ll};
}

GmmModel m_step(const FeatureMatrix& m, const Responsibilities& r,
                const GmmConfig& cfg) {
    const Eigen::Index n = m.rows();
    const Eigen::Index d = m.cols();
    const Eigen::Index k = r.cols();
    if (r.rows() != n) throw DataError("m_step: responsibility rows mismatch");

    const auto collapsed = collapsed_components(r);
    if (!collapsed.empty()) {
        throw NumericError("m_step: component " + std::to_string(collapsed.front()) +
                           " collapsed (zero total responsibility)");
    }

    GmmModel model;
    model.shape = cfg.shape;
    model.sharing = cfg.sharing;
    const Eigen::VectorXd nk = r.colwise().sum();
    model.weights = nk / static_cast<double>(n);
    model.means = (r.transpose() * m.values).array().colwise() / nk.array();

    std::vector<Eigen::MatrixXd> scatter(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::MatrixXd centered =
            m.values.rowwise() - model.means.row(j);
        const Eigen::MatrixXd weighted =
            centered.array().colwise() * r.col(j).array().sqrt();
        scatter[j] = weighted.transpose() * weighted;
    }

    model.covariances.resize(k);
    if (cfg.sharing == CovarianceSharing::Shared) {
        Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index j = 0; j < k; ++j) pooled += scatter[j];
        pooled /= static_cast<double>(n);
        const Eigen::MatrixXd shaped =
            shape_covariance(std::move(pooled), cfg.shape, cfg.regularization);
        for (Eigen::Index j = 0; j < k; ++j) model.covariances[j] = shaped;
    } else {
        for (Eigen::Index j = 0; j < k; ++j) {
            model.covariances[j] = shape_covariance(scatter[j] / nk(j), cfg.shape,
                                                    cfg.regularization);
        }
    }
    return model;
}

GmmModel gmm_fit(const FeatureMatrix& m, const GmmConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = m.rows();
    if (n <= cfg.k) throw DataError("gmm_fit: need more rows than components");
    require_finite(m.values, "gmm_fit");

    const Eigen::MatrixXd global_cov = global_covariance(m.values);

    GmmModel best;
    bool have_best = false;
    for (int rep = 0; rep < cfg.replicates; ++rep) {
        Rng rng(cfg.seed + static_cast<std::uint64_t>(rep));

        GmmModel model;
        model.shape = cfg.shape;
        model.sharing = cfg.sharing;
        model.weights = Eigen::VectorXd::Constant(cfg.k, 1.0 / cfg.k);
        model.means = kmeanspp_init(m, cfg.k, rng);
        const Eigen::MatrixXd init_cov =
            shape_covariance(global_cov, cfg.shape, cfg.regularization);
        model.covariances.assign(cfg.k, init_cov);

        bool reseeded = false;
        double prev_ll = -std::numeric_limits<double>::infinity();
        for (int it = 1; it <= cfg.max_iter; ++it) {
            auto [resp, ll] = e_step(model, m);
            model.log_likelihood = ll;
            model.log_likelihood_history.push_back(ll);
            model.iterations = it;

            const double denom =
                std::max(std::abs(prev_ll), std::numeric_limits<double>::min());
            if (it > 1 && (ll - prev_ll) / denom < cfg.tol) break;
            prev_ll = ll;

            const auto collapsed = collapsed_components(resp);
            if (!collapsed.empty()) {
                if (reseeded) {
                    throw NumericError("gmm_fit: component collapsed again after re-seeding");
                }
                reseeded = true;
                // The EM chain restarts here; drop the history of the
                // abandoned chain so monotonicity holds within the record.
                model.log_likelihood_history.clear();
                for (int j : collapsed) {
                    model.means.row(j) =
                        m.values.row(static_cast<Eigen::Index>(rng.uniform_index(n)));
                    model.covariances[j] =
                        shape_covariance(global_cov, cfg.shape, cfg.regularization);
                }
                model.weights = Eigen::VectorXd::Constant(cfg.k, 1.0 / cfg.k);
                prev_ll = -std::numeric_limits<double>::infinity();
                continue;
            }

            GmmModel updated = m_step(m, resp, cfg);
            model.weights = std::move(updated.weights);
            model.means = std::move(updated.means);
            model.covariances = std::move(updated.covariances);
        }

        model.replicate_chosen = rep;
        if (!have_best || model.log_likelihood > best.log_likelihood) {
            best = std::move(model);
            have_best = true;
        }
    }
    return best;
}

Assignment gmm_cluster(const GmmModel& model, const FeatureMatrix& m) {
    auto [resp, ll] = e_step(model, m);
    (void)ll;
    Assignment a;
    a.cluster.resize(resp.rows());
    for (Eigen::Index i = 0; i < resp.rows(); ++i) {
        int arg = 0;
        for (Eigen::Index j = 1; j < resp.cols(); ++j) {
            if (resp(i, j) > resp(i, arg)) arg = static_cast<int>(j);
        }
        a.cluster[i] = arg;
    }
    a.responsibilities = std::move(resp);
    return a;
}

}  // namespace wearlab
