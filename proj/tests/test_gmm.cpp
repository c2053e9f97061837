#include <doctest.h>

#include "wearlab/gmm.hpp"
#include "wearlab/ingest.hpp"
#include "wearlab/kmeans.hpp"
#include "wearlab/rng.hpp"
#include "wearlab/synth.hpp"

#include <cmath>
#include <numbers>

using namespace wearlab;

namespace {

FeatureMatrix points(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    const auto d = static_cast<Eigen::Index>(rows.front().size());
    m.values.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            m.values(static_cast<Eigen::Index>(i), j) = rows[i][j];
        }
        m.row_keys.push_back({"s1", static_cast<std::int64_t>(i)});
    }
    for (Eigen::Index j = 0; j < d; ++j) m.column_names.push_back("f" + std::to_string(j));
    return m;
}

// Naive density oracle with explicit inverse and determinant.
double log_pdf_reference(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& cov) {
    const double d = static_cast<double>(x.size());
    const double quad = (x - mean).transpose() * cov.inverse() * (x - mean);
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) +
                   std::log(cov.determinant()) + quad);
}

GmmModel two_component_model(double separation) {
    GmmModel model;
    model.weights = Eigen::Vector2d(0.5, 0.5);
    model.means = Eigen::MatrixXd(2, 2);
    model.means << 0.0, 0.0, separation, 0.0;
    model.covariances = {Eigen::MatrixXd::Identity(2, 2),
                         Eigen::MatrixXd::Identity(2, 2)};
    return model;
}

}  // namespace

TEST_CASE("gaussian_log_pdf closed forms") {
    // 1-D with variance 1/(2*pi): the normalization constant cancels.
    Eigen::VectorXd x(1), mu(1);
    x << 0.3;
    mu << 0.3;
    Eigen::MatrixXd cov(1, 1);
    cov << 1.0 / (2.0 * std::numbers::pi);
    CHECK(gaussian_log_pdf(x, mu, cov) == doctest::Approx(0.0).epsilon(1e-14));

    // 2-D standard normal at the mean.
    Eigen::VectorXd x2 = Eigen::VectorXd::Zero(2);
    CHECK(gaussian_log_pdf(x2, x2, Eigen::MatrixXd::Identity(2, 2)) ==
          doctest::Approx(-std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("gaussian_log_pdf matches the naive formula on random input") {
    Rng rng(51);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform_index(4));
        Eigen::VectorXd x(d), mu(d);
        for (int i = 0; i < d; ++i) {
            x(i) = 3.0 * rng.normal();
            mu(i) = 3.0 * rng.normal();
        }
        Eigen::MatrixXd a(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
        }
        const Eigen::MatrixXd cov =
            a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
        CHECK(gaussian_log_pdf(x, mu, cov) ==
              doctest::Approx(log_pdf_reference(x, mu, cov)).epsilon(1e-10));
    }
}

TEST_CASE("gaussian_log_pdf rejects non-positive-definite covariance") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    CHECK_THROWS_AS(gaussian_log_pdf(x, x, cov), NumericError);
}

TEST_CASE("e_step splits an equidistant point evenly") {
    const auto model = two_component_model(2.0);
    const auto m = points({{1.0, 0.0}});  // exactly between the means
    const auto [resp, ll] = e_step(model, m);
    CHECK(resp(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(resp(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(resp.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
    // Total log-likelihood is the mixture density at the point.
    const double expected =
        std::log(0.5 * std::exp(gaussian_log_pdf(
                           m.values.row(0), model.means.row(0),
                           model.covariances[0])) +
                 0.5 * std::exp(gaussian_log_pdf(
                           m.values.row(0), model.means.row(1),
                           model.covariances[1])));
    CHECK(ll == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("e_step with one component gives unit responsibilities") {
    GmmModel model;
    model.weights = Eigen::VectorXd::Ones(1);
    model.means = Eigen::MatrixXd::Zero(1, 2);
    model.covariances = {Eigen::MatrixXd::Identity(2, 2)};
    const auto m = points({{0.5, -1.0}, {3.0, 2.0}});
    const auto [resp, ll] = e_step(model, m);
    CHECK(resp(0, 0) == 1.0);
    CHECK(resp(1, 0) == 1.0);
}

TEST_CASE("e_step at a well-separated component mean is decisive") {
    const auto model = two_component_model(10.0);  // 10 sigma apart
    const auto m = points({{0.0, 0.0}});
    const auto [resp, ll] = e_step(model, m);
    CHECK(resp(0, 0) > 0.999);
}

TEST_CASE("m_step single component reduces to the sample MLE") {
    const auto m = points({{1.0, 2.0}, {3.0, 6.0}, {5.0, 4.0}});
    GmmConfig cfg;
    cfg.k = 1;
    const Responsibilities r = Eigen::MatrixXd::Ones(3, 1);
    const auto model = m_step(m, r, cfg);
    CHECK(model.weights(0) == doctest::Approx(1.0));
    CHECK(model.means(0, 0) == doctest::Approx(3.0));
    CHECK(model.means(0, 1) == doctest::Approx(4.0));
    // MLE covariance (divisor n) plus the ridge.
    Eigen::MatrixXd expected(2, 2);
    expected << 8.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 8.0 / 3.0;
    expected.diagonal().array() += cfg.regularization;
    CHECK((model.covariances[0] - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("m_step with hard responsibilities gives stratified statistics") {
    // Hand-worked six-point, two-cluster fixture. Cluster 0 holds rows
    // 0-2, cluster 1 rows 3-5.
    const auto m = points({{0.0, 0.0},
                           {2.0, 0.0},
                           {1.0, 3.0},
                           {10.0, 10.0},
                           {14.0, 10.0},
                           {12.0, 16.0}});
    Responsibilities r = Eigen::MatrixXd::Zero(6, 2);
    r.col(0).head(3).setOnes();
    r.col(1).tail(3).setOnes();

    GmmConfig cfg;
    cfg.k = 2;
    cfg.regularization = 0.0;

    SUBCASE("unshared full covariance") {
        const auto model = m_step(m, r, cfg);
        CHECK(model.weights(0) == doctest::Approx(0.5));
        CHECK(model.means(0, 0) == doctest::Approx(1.0));
        CHECK(model.means(0, 1) == doctest::Approx(1.0));
        CHECK(model.means(1, 0) == doctest::Approx(12.0));
        CHECK(model.means(1, 1) == doctest::Approx(12.0));
        // Cluster 0 deviations: (-1,-1), (1,-1), (0,2).
        Eigen::MatrixXd cov0(2, 2);
        cov0 << 2.0 / 3.0, 0.0, 0.0, 2.0;
        CHECK((model.covariances[0] - cov0).cwiseAbs().maxCoeff() < 1e-12);
        // Cluster 1 deviations: (-2,-2), (2,-2), (0,4).
        Eigen::MatrixXd cov1(2, 2);
        cov1 << 8.0 / 3.0, 0.0, 0.0, 8.0;
        CHECK((model.covariances[1] - cov1).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("shared full covariance pools the scatter") {
        cfg.sharing = CovarianceSharing::Shared;
        const auto model = m_step(m, r, cfg);
        // Pooled: (3*cov0 + 3*cov1) / 6.
        Eigen::MatrixXd pooled(2, 2);
        pooled << (2.0 + 8.0) / 6.0, 0.0, 0.0, (6.0 + 24.0) / 6.0;
        CHECK((model.covariances[0] - pooled).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((model.covariances[0].array() == model.covariances[1].array()).all());
    }
    SUBCASE("diagonal shape zeroes the off-diagonals exactly") {
        cfg.shape = CovarianceShape::Diagonal;
        // Couple the axes so the full covariance would be non-diagonal.
        auto skewed = m;
        skewed.values.col(1) += 0.5 * skewed.values.col(0);
        const auto model = m_step(skewed, r, cfg);
        CHECK(model.covariances[0](0, 1) == 0.0);
        CHECK(model.covariances[0](1, 0) == 0.0);
        CHECK(model.covariances[1](0, 1) == 0.0);
    }
}

TEST_CASE("m_step reports collapsed components") {
    const auto m = points({{0.0}, {1.0}, {2.0}});
    Responsibilities r = Eigen::MatrixXd::Zero(3, 2);
    r.col(0).setOnes();  // component 1 receives nothing
    GmmConfig cfg;
    cfg.k = 2;
    CHECK_THROWS_AS(m_step(m, r, cfg), NumericError);
}

TEST_CASE("gmm_fit recovers two separated blobs under all four structures") {
    const auto data = gen_mixture(spherical_blobs(2, 2, 1.0, 10.0, 200, 921));
    for (const auto shape : {CovarianceShape::Diagonal, CovarianceShape::Full}) {
        for (const auto sharing :
             {CovarianceSharing::Shared, CovarianceSharing::Unshared}) {
            GmmConfig cfg;
            cfg.k = 2;
            cfg.shape = shape;
            cfg.sharing = sharing;
            cfg.seed = 31;
            const auto model = gmm_fit(data.matrix, cfg);

            // Match recovered components to the generator means.
            const Eigen::RowVector2d truth0(0.0, 0.0);
            const Eigen::RowVector2d truth1(10.0, 0.0);
            const int a = (model.means.row(0) - truth0).norm() <
                                  (model.means.row(0) - truth1).norm()
                              ? 0
                              : 1;
            const int b = 1 - a;
            CHECK((model.means.row(a) - truth0).norm() < 0.1);
            CHECK((model.means.row(b) - truth1).norm() < 0.1);
            CHECK(std::abs(model.weights(0) - 0.5) < 0.05);

            if (shape == CovarianceShape::Diagonal) {
                CHECK(model.covariances[0](0, 1) == 0.0);
            }
            if (sharing == CovarianceSharing::Shared) {
                CHECK((model.covariances[0].array() == model.covariances[1].array()).all());
            }
        }
    }
}

TEST_CASE("gmm_fit with k=1 converges to the MLE in one shot") {
    const auto m = points({{1.0, 0.0}, {2.0, 1.0}, {3.0, -1.0}, {6.0, 2.0}});
    GmmConfig cfg;
    cfg.k = 1;
    cfg.seed = 5;
    const auto model = gmm_fit(m, cfg);
    CHECK(model.means(0, 0) == doctest::Approx(3.0));
    CHECK(model.means(0, 1) == doctest::Approx(0.5));
    CHECK(model.weights(0) == doctest::Approx(1.0));
    const Eigen::RowVectorXd mean = m.values.colwise().mean();
    const Eigen::MatrixXd centered = m.values.rowwise() - mean;
    Eigen::MatrixXd mle = centered.transpose() * centered / 4.0;
    mle.diagonal().array() += cfg.regularization;
    CHECK((model.covariances[0] - mle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gmm_fit is deterministic given the seed") {
    const auto data = gen_mixture(spherical_blobs(2, 2, 1.0, 4.0, 60, 11));
    GmmConfig cfg;
    cfg.k = 2;
    cfg.seed = 999;
    const auto a = gmm_fit(data.matrix, cfg);
    const auto b = gmm_fit(data.matrix, cfg);
    CHECK((a.means.array() == b.means.array()).all());
    CHECK((a.weights.array() == b.weights.array()).all());
    CHECK(a.log_likelihood == b.log_likelihood);
    CHECK(a.replicate_chosen == b.replicate_chosen);
}

TEST_CASE("EM log-likelihood is monotone across random problems") {
    Rng rng(71);
    int runs = 0;
    for (std::uint64_t seed = 0; runs < 40; ++seed, ++runs) {
        FeatureMatrix m;
        m.column_names = {"a", "b"};
        const int n = 30 + static_cast<int>(rng.uniform_index(40));
        m.values.resize(n, 2);
        for (int i = 0; i < n; ++i) {
            m.values(i, 0) = rng.normal() * 3.0;
            m.values(i, 1) = rng.normal() + 0.3 * m.values(i, 0);
            m.row_keys.push_back({"s1", i});
        }
        GmmConfig cfg;
        cfg.k = 2 + static_cast<int>(seed % 2);
        cfg.seed = seed;
        cfg.replicates = 1;
        cfg.shape = (seed % 2 == 0) ? CovarianceShape::Diagonal : CovarianceShape::Full;
        cfg.sharing =
            (seed % 4 < 2) ? CovarianceSharing::Shared : CovarianceSharing::Unshared;
        const auto model = gmm_fit(m, cfg);
        const auto& h = model.log_likelihood_history;
        for (std::size_t i = 1; i < h.size(); ++i) {
            CHECK(h[i] >= h[i - 1] - 1e-9 * std::abs(h[i - 1]));
        }
        // Responsibilities from the fitted model are a valid distribution.
        const auto [resp, ll] = e_step(model, m);
        for (Eigen::Index i = 0; i < resp.rows(); ++i) {
            CHECK(resp.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(resp.row(i).minCoeff() >= 0.0);
            CHECK(resp.row(i).maxCoeff() <= 1.0);
        }
    }
}

TEST_CASE("gmm and k-means agree on well-separated blobs") {
    const auto data = gen_mixture(spherical_blobs(2, 2, 1.0, 10.0, 150, 4242));
    GmmConfig gcfg;
    gcfg.k = 2;
    gcfg.shape = CovarianceShape::Diagonal;
    gcfg.sharing = CovarianceSharing::Shared;
    gcfg.seed = 8;
    const auto gmm_model = gmm_fit(data.matrix, gcfg);
    const auto gmm_assign = gmm_cluster(gmm_model, data.matrix);

    KMeansConfig kcfg;
    kcfg.k = 2;
    kcfg.seed = 8;
    const auto km = kmeans_fit(data.matrix, kcfg);
    CHECK(adjusted_rand_index(gmm_assign.cluster, km.assignments) ==
          doctest::Approx(1.0));
}

TEST_CASE("scaling features rescales recovered means") {
    const auto data = gen_mixture(spherical_blobs(2, 2, 1.0, 8.0, 80, 31337));
    GmmConfig cfg;
    cfg.k = 2;
    cfg.seed = 21;
    cfg.replicates = 1;
    const auto base = gmm_fit(data.matrix, cfg);

    const double c = 3.5;
    auto scaled = data.matrix;
    scaled.values *= c;
    const auto rescaled = gmm_fit(scaled, cfg);
    // kmeans++ seeding depends only on relative distances, so the same
    // replicate wins and means scale linearly.
    CHECK((rescaled.means - c * base.means).cwiseAbs().maxCoeff() <
          1e-6 * c * base.means.cwiseAbs().maxCoeff());
}

TEST_CASE("gmm_cluster assigns by maximum posterior with low-index ties") {
    const auto model = two_component_model(4.0);
    const auto m = points({{0.0, 0.0}, {4.0, 0.0}, {2.0, 0.0}});
    const auto assign = gmm_cluster(model, m);
    CHECK(assign.cluster[0] == 0);
    CHECK(assign.cluster[1] == 1);
    CHECK(assign.cluster[2] == 0);  // exact tie goes to the lower index
    CHECK(assign.responsibilities.rows() == 3);
    CHECK(assign.responsibilities(2, 0) == doctest::Approx(0.5));

    GmmModel single;
    single.weights = Eigen::VectorXd::Ones(1);
    single.means = Eigen::MatrixXd::Zero(1, 2);
    single.covariances = {Eigen::MatrixXd::Identity(2, 2)};
    const auto all_zero = gmm_cluster(single, m);
    CHECK(all_zero.cluster == std::vector<int>{0, 0, 0});
}

TEST_CASE("gmm_fit validates input") {
    const auto m = points({{1.0}, {2.0}});
    GmmConfig cfg;
    cfg.k = 2;
    CHECK_THROWS_AS(gmm_fit(m, cfg), DataError);  // needs n > k
    cfg.k = 0;
    CHECK_THROWS_AS(gmm_fit(m, cfg), DataError);
}
