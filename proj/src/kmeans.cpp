#include "wearlab/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wearlab {

namespace {

// Lexicographic count of distinct rows.
Eigen::Index distinct_row_count(const Eigen::MatrixXd& values) {
    const Eigen::Index n = values.rows();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto row_less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (values(a, j) != values(b, j)) return values(a, j) < values(b, j);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), row_less);
    Eigen::Index distinct = n > 0 ? 1 : 0;
    for (Eigen::Index i = 1; i < n; ++i) {
        if (row_less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

struct AssignOutcome {
    std::vector<int> labels;
    double objective = 0.0;
};

AssignOutcome assign_all(const Eigen::MatrixXd& values,
                         const Eigen::MatrixXd& centroids,
                         KMeansDistance distance) {
    const Eigen::Index n = values.rows();
    const Eigen::Index k = centroids.rows();
    AssignOutcome out;
    out.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        const Eigen::VectorXd x = values.row(i);
        for (Eigen::Index c = 0; c < k; ++c) {
            const double dist = kmeans_point_distance(x, centroids.row(c), distance);
            if (dist < best_dist) {
                best_dist = dist;
                best = static_cast<int>(c);
            }
        }
        out.labels[i] = best;
        out.objective += best_dist;
    }
    return out;
}

// Cluster means (normalized means under cosine); empty clusters are repaired
// by seizing the point farthest from its own centroid among clusters that
// can spare one.
Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& values,
                                 std::vector<int>& labels,
                                 const Eigen::MatrixXd& previous,
                                 KMeansDistance distance) {
    const Eigen::Index n = values.rows();
    const Eigen::Index k = previous.rows();
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, values.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        centroids.row(labels[i]) += values.row(i);
        ++counts[labels[i]];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            centroids.row(c) = previous.row(c);
            continue;
        }
        centroids.row(c) /= static_cast<double>(counts[c]);
        if (distance == KMeansDistance::Cosine) {
            const double norm = centroids.row(c).norm();
            if (norm > 0.0) {
                centroids.row(c) /= norm;
            } else {
                centroids.row(c) = previous.row(c);
            }
        }
    }

    for (Eigen::Index c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        Eigen::Index victim = -1;
        double victim_dist = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (counts[labels[i]] <= 1) continue;  // never empty a donor
            const double dist = kmeans_point_distance(
                values.row(i), centroids.row(labels[i]), distance);
            if (dist > victim_dist) {
                victim_dist = dist;
                victim = i;
            }
        }
        if (victim < 0) continue;  // every cluster is a singleton
        --counts[labels[victim]];
        labels[victim] = static_cast<int>(c);
        counts[c] = 1;
        centroids.row(c) = values.row(victim);
    }
    return centroids;
}

}  // namespace

KMeansDistance kmeans_distance_by_name(const std::string& name) {
    if (name == "sqeuclidean" || name == "squared_euclidean") {
        return KMeansDistance::SquaredEuclidean;
    }
    if (name == "cosine") return KMeansDistance::Cosine;
    throw DataError("unknown k-means distance: '" + name + "'");
}

std::string kmeans_distance_name(KMeansDistance d) {
    return d == KMeansDistance::SquaredEuclidean ? "squared_euclidean" : "cosine";
}

void KMeansConfig::validate() const {
    if (k < 1) throw DataError("kmeans: k must be >= 1");
    if (replicates < 1) throw DataError("kmeans: replicates must be >= 1");
    if (max_iter < 1) throw DataError("kmeans: max_iter must be >= 1");
    if (tol < 0.0) throw DataError("kmeans: tol must be >= 0");
    if (subsample_fraction <= 0.0 || subsample_fraction > 1.0) {
        throw DataError("kmeans: subsample_fraction must be in (0, 1]");
    }
    if (init == KMeansInit::Explicit && explicit_centroids.rows() != k) {
        throw DataError("kmeans: explicit init requires k centroid rows");
    }
}

double kmeans_point_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& c,
                             KMeansDistance distance) {
    if (distance == KMeansDistance::SquaredEuclidean) {
        return (x - c).squaredNorm();
    }
    const double nx = x.norm();
    const double nc = c.norm();
    if (nx == 0.0 || nc == 0.0) {
        throw NumericError("cosine distance undefined for zero vector");
    }
    return 1.0 - x.dot(c) / (nx * nc);
}

Eigen::MatrixXd kmeanspp_init(const FeatureMatrix& m, int k, Rng& rng,
                              KMeansDistance distance) {
    const Eigen::Index n = m.rows();
    if (n == 0) throw DataError("kmeanspp_init: empty matrix");
    if (k < 1) throw DataError("kmeanspp_init: k must be >= 1");
    if (static_cast<Eigen::Index>(k) > distinct_row_count(m.values)) {
        throw DataError("kmeanspp_init: k exceeds the number of distinct rows");
    }

    Eigen::MatrixXd centroids(k, m.cols());
    centroids.row(0) = m.values.row(static_cast<Eigen::Index>(rng.uniform_index(n)));

    std::vector<double> nearest(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        nearest[i] = kmeans_point_distance(m.values.row(i), centroids.row(0), distance);
    }
    for (int j = 1; j < k; ++j) {
        const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
        if (!(total > 0.0)) {
            throw NumericError("kmeanspp_init: no candidate with positive weight");
        }
        const Eigen::Index pick =
            static_cast<Eigen::Index>(rng.weighted_index(nearest, total));
        centroids.row(j) = m.values.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) {
            nearest[i] = std::min(
                nearest[i],
                kmeans_point_distance(m.values.row(i), centroids.row(j), distance));
        }
    }
    return centroids;
}

Eigen::MatrixXd preliminary_phase(const FeatureMatrix& m, const KMeansConfig& cfg,
                                  Rng& rng) {
    const Eigen::Index n = m.rows();
    const auto size = static_cast<Eigen::Index>(
        std::ceil(cfg.subsample_fraction * static_cast<double>(n)));
    if (size < cfg.k) {
        throw DataError("preliminary_phase: subsample of " + std::to_string(size) +
                        " rows cannot seed k=" + std::to_string(cfg.k));
    }

    const FeatureMatrix* data = &m;
    FeatureMatrix sub;
    if (size < n) {
        // Partial Fisher-Yates over the index set, then ascending order so
        // the subsample preserves row order.
        std::vector<Eigen::Index> idx(n);
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        for (Eigen::Index i = 0; i < size; ++i) {
            const auto pick = i + static_cast<Eigen::Index>(
                                      rng.uniform_index(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[i], idx[pick]);
        }
        idx.resize(size);
        std::sort(idx.begin(), idx.end());
        sub.column_names = m.column_names;
        sub.values.resize(size, m.cols());
        for (Eigen::Index i = 0; i < size; ++i) {
            sub.values.row(i) = m.values.row(idx[i]);
            if (!m.row_keys.empty()) sub.row_keys.push_back(m.row_keys[idx[i]]);
        }
        data = &sub;
    }

    const Eigen::MatrixXd init = kmeanspp_init(*data, cfg.k, rng, cfg.distance);
    return lloyd(*data, init, cfg).centroids;
}

KMeansModel lloyd(const FeatureMatrix& m, const Eigen::MatrixXd& init,
                  const KMeansConfig& cfg) {
    require_finite(m.values, "lloyd");
    require_finite(init, "lloyd init");
    if (init.cols() != m.cols()) throw DataError("lloyd: centroid dimension mismatch");
    for (Eigen::Index a = 0; a < init.rows(); ++a) {
        for (Eigen::Index b = a + 1; b < init.rows(); ++b) {
            if ((init.row(a).array() == init.row(b).array()).all()) {
                throw DataError("lloyd: initial centroids must be distinct");
            }
        }
    }

    KMeansModel model;
    model.distance = cfg.distance;
    Eigen::MatrixXd centroids = init;
    AssignOutcome current = assign_all(m.values, centroids, cfg.distance);
    model.objective_history.push_back(current.objective);

    for (int it = 1; it <= cfg.max_iter; ++it) {
        std::vector<int> repaired = current.labels;
        const Eigen::MatrixXd next = update_centroids(m.values, repaired, centroids,
                                                      cfg.distance);
        AssignOutcome after = assign_all(m.values, next, cfg.distance);
        model.iterations = it;
        model.objective_history.push_back(after.objective);

        const bool stable = after.labels == current.labels;
        const double denom = std::max(current.objective,
                                      std::numeric_limits<double>::min());
        const double improvement = (current.objective - after.objective) / denom;
        centroids = next;
        current = std::move(after);
        if (stable || improvement < cfg.tol) break;
    }

    model.centroids = std::move(centroids);
    model.assignments = std::move(current.labels);
    model.objective = current.objective;
    return model;
}

KMeansModel kmeans_fit(const FeatureMatrix& m, const KMeansConfig& cfg) {
    cfg.validate();
    if (m.rows() < cfg.k) {
        throw DataError("kmeans_fit: fewer rows than clusters");
    }
    require_finite(m.values, "kmeans_fit");

    KMeansModel best;
    bool have_best = false;
    for (int r = 0; r < cfg.replicates; ++r) {
        Rng rng(cfg.seed + static_cast<std::uint64_t>(r));
        Eigen::MatrixXd init;
        switch (cfg.init) {
            case KMeansInit::KMeansPP:
                init = kmeanspp_init(m, cfg.k, rng, cfg.distance);
                break;
            case KMeansInit::PreliminarySubsample:
                init = preliminary_phase(m, cfg, rng);
                break;
            case KMeansInit::Explicit:
                init = cfg.explicit_centroids;
                break;
        }
        KMeansModel candidate = lloyd(m, init, cfg);
        candidate.replicate_chosen = r;
        if (!have_best || candidate.objective < best.objective) {
            best = std::move(candidate);
            have_best = true;
        }
        if (cfg.init == KMeansInit::Explicit) break;  // replicates are identical
    }
    return best;
}

Assignment kmeans_predict(const KMeansModel& model, const FeatureMatrix& m) {
    if (m.cols() != model.centroids.cols()) {
        throw DataError("kmeans_predict: feature dimension mismatch");
    }
    require_finite(m.values, "kmeans_predict");
    Assignment a;
    a.cluster = assign_all(m.values, model.centroids, model.distance).labels;
    return a;
}

}  // namespace wearlab
