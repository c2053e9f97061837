#include "wearlab/som.hpp"

#include "wearlab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wearlab {

namespace {

// Plane distance between neuron centers; adjacent hexes are 1 apart.
double grid_distance(const HexNeuron& a, const HexNeuron& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double som_neighborhood(double grid_dist, double radius) {
    return std::exp(-(grid_dist * grid_dist) / (2.0 * radius * radius));
}

double som_radius(const SomConfig& cfg, int epoch) {
    if (cfg.epochs <= 1) return cfg.final_radius;
    const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
    return cfg.initial_radius + (cfg.final_radius - cfg.initial_radius) * t;
}

SomInit som_init_by_name(const std::string& name) {
    if (name == "random_sample") return SomInit::RandomSample;
    if (name == "linear_span") return SomInit::LinearSpan;
    throw DataError("unknown SOM init: '" + name + "'");
}

std::string som_init_name(SomInit init) {
    return init == SomInit::RandomSample ? "random_sample" : "linear_span";
}

SomConfig SomConfig::with_grid(int rows, int cols) {
    SomConfig cfg;
    cfg.rows = rows;
    cfg.cols = cols;
    cfg.initial_radius = std::max(1.0, std::max(rows, cols) / 2.0);
    cfg.final_radius = std::min(1.0, cfg.initial_radius);
    return cfg;
}

void SomConfig::validate() const {
    if (rows < 1 || cols < 1) throw DataError("som: grid must be at least 1x1");
    if (epochs < 1) throw DataError("som: epochs must be >= 1");
    if (!(final_radius > 0.0) || initial_radius < final_radius) {
        throw DataError("som: need initial_radius >= final_radius > 0");
    }
}

std::vector<HexNeuron> hex_grid(int rows, int cols) {
    std::vector<HexNeuron> grid;
    grid.reserve(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            HexNeuron n;
            n.row = i;
            n.col = j;
            n.q = j;  // axial parallelogram layout
            n.r = i;
            n.x = static_cast<double>(n.q) + 0.5 * static_cast<double>(n.r);
            n.y = static_cast<double>(n.r) * std::sqrt(3.0) / 2.0;
            grid.push_back(n);
        }
    }
    return grid;
}

bool hex_adjacent(const HexNeuron& a, const HexNeuron& b) {
    const int dq = b.q - a.q;
    const int dr = b.r - a.r;
    // The six axial neighbor offsets.
    return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) == 2;
}

SomModel som_init(const FeatureMatrix& m, const SomConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = m.rows();
    if (n < 1) throw DataError("som_init: empty data");
    require_finite(m.values, "som_init");

    SomModel model;
    model.rows = cfg.rows;
    model.cols = cfg.cols;
    model.grid = hex_grid(cfg.rows, cfg.cols);
    const int units = model.neuron_count();
    model.weights.resize(units, m.cols());

    if (cfg.init == SomInit::RandomSample) {
        Rng rng(cfg.seed);
        for (int u = 0; u < units; ++u) {
            model.weights.row(u) =
                m.values.row(static_cast<Eigen::Index>(rng.uniform_index(n)));
        }
        return model;
    }

    // linear_span: spread the grid across the first two principal axes,
    // +/- 2 standard deviations from the data mean.
    const Eigen::RowVectorXd mean = m.values.colwise().mean();
    const Eigen::MatrixXd centered = m.values.rowwise() - mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / std::max<double>(1.0, static_cast<double>(n - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::Index d = m.cols();
    // Eigenvalues ascend; take the top two axes (or fewer when d == 1).
    const Eigen::VectorXd axis1 = eig.eigenvectors().col(d - 1);
    const double scale1 = 2.0 * std::sqrt(std::max(0.0, eig.eigenvalues()(d - 1)));
    Eigen::VectorXd axis2 = Eigen::VectorXd::Zero(d);
    double scale2 = 0.0;
    if (d >= 2) {
        axis2 = eig.eigenvectors().col(d - 2);
        scale2 = 2.0 * std::sqrt(std::max(0.0, eig.eigenvalues()(d - 2)));
    }
    for (int u = 0; u < units; ++u) {
        const auto& g = model.grid[u];
        const double a = cfg.cols > 1
                             ? 2.0 * g.col / static_cast<double>(cfg.cols - 1) - 1.0
                             : 0.0;
        const double b = cfg.rows > 1
                             ? 2.0 * g.row / static_cast<double>(cfg.rows - 1) - 1.0
                             : 0.0;
        model.weights.row(u) =
            mean + (a * scale1) * axis1.transpose() + (b * scale2) * axis2.transpose();
    }
    return model;
}

int bmu(const SomModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.weights.cols()) {
        throw DataError("bmu: feature dimension mismatch");
    }
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index u = 0; u < model.weights.rows(); ++u) {
        const double dist = (model.weights.row(u).transpose() - x).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = static_cast<int>(u);
        }
    }
    return best;
}

SomModel som_train(const SomModel& model, const FeatureMatrix& m,
                   const SomConfig& cfg) {
    cfg.validate();
    if (m.cols() != model.weights.cols()) {
        throw DataError("som_train: feature dimension mismatch");
    }
    if (m.rows() < 1) throw DataError("som_train: empty data");
    require_finite(m.values, "som_train");

    SomModel trained = model;
    const int units = trained.neuron_count();
    const Eigen::Index n = m.rows();

    // Pairwise grid distances are epoch-invariant.
    Eigen::MatrixXd grid_dist(units, units);
    for (int a = 0; a < units; ++a) {
        for (int b = 0; b < units; ++b) {
            grid_dist(a, b) = grid_distance(trained.grid[a], trained.grid[b]);
        }
    }

    std::vector<int> bmus(n);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double radius = som_radius(cfg, epoch);
        for (Eigen::Index i = 0; i < n; ++i) {
            bmus[i] = bmu(trained, m.values.row(i));
        }
        // h(neuron, row) depends only on the row's BMU; accumulate per BMU
        // first, then mix. mass[b] = rows mapped to BMU b, sums[b] = their sum.
        Eigen::VectorXd mass = Eigen::VectorXd::Zero(units);
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(units, m.cols());
        for (Eigen::Index i = 0; i < n; ++i) {
            mass(bmus[i]) += 1.0;
            sums.row(bmus[i]) += m.values.row(i);
        }
        for (int u = 0; u < units; ++u) {
            double total = 0.0;
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(m.cols());
            for (int b = 0; b < units; ++b) {
                if (mass(b) == 0.0) continue;
                const double h = som_neighborhood(grid_dist(u, b), radius);
                total += h * mass(b);
                acc += h * sums.row(b);
            }
            if (total > 0.0) {
                trained.weights.row(u) = acc / total;
            }
            // else: dead neuron, keep the previous weight
        }
    }
    trained.trained_epochs = model.trained_epochs + cfg.epochs;
    return trained;
}

UMatrix u_matrix(const SomModel& model) {
    const int units = model.neuron_count();
    UMatrix u;
    std::vector<double> sum(units, 0.0);
    std::vector<int> degree(units, 0);
    for (int a = 0; a < units; ++a) {
        for (int b = a + 1; b < units; ++b) {
            if (!hex_adjacent(model.grid[a], model.grid[b])) continue;
            const double dist =
                (model.weights.row(a) - model.weights.row(b)).norm();
            u.edges.push_back({a, b, dist});
            sum[a] += dist;
            sum[b] += dist;
            ++degree[a];
            ++degree[b];
        }
    }
    u.neuron_mean.resize(units);
    for (int i = 0; i < units; ++i) {
        u.neuron_mean[i] = degree[i] > 0 ? sum[i] / degree[i] : 0.0;
    }
    return u;
}

std::vector<std::int64_t> sample_hits(const SomModel& model,
                                      const FeatureMatrix& m) {
    if (m.rows() > 0 && m.cols() != model.weights.cols()) {
        throw DataError("sample_hits: feature dimension mismatch");
    }
    std::vector<std::int64_t> counts(model.neuron_count(), 0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ++counts[bmu(model, m.values.row(i))];
    }
    return counts;
}

double quantization_error(const SomModel& model, const FeatureMatrix& m) {
    if (m.rows() < 1) throw DataError("quantization_error: empty data");
    if (m.cols() != model.weights.cols()) {
        throw DataError("quantization_error: feature dimension mismatch");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const Eigen::VectorXd x = m.values.row(i);
        total += (model.weights.row(bmu(model, x)).transpose() - x).norm();
    }
    return total / static_cast<double>(m.rows());
}

}  // namespace wearlab
