#include "wearlab/export.hpp"

#include <fstream>
#include <sstream>

namespace wearlab {

namespace {

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_to_json(const Eigen::VectorXd& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json standardization_to_json(const FeatureMatrix& m) {
    if (!m.standardization) return nullptr;
    Json out;
    out["mean"] = m.standardization->mean;
    out["stddev"] = m.standardization->stddev;
    return out;
}

}  // namespace

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV offset basis
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;  // FNV prime
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Json kmeans_model_to_json(const KMeansModel& model, const KMeansConfig& cfg,
                          const FeatureMatrix& m) {
    Json j;
    j["model"] = "kmeans";
    j["version"] = kVersion;
    j["config"] = {
        {"k", cfg.k},
        {"distance", kmeans_distance_name(cfg.distance)},
        {"replicates", cfg.replicates},
        {"max_iter", cfg.max_iter},
        {"tol", cfg.tol},
        {"init", cfg.init == KMeansInit::KMeansPP         ? "kmeanspp"
                 : cfg.init == KMeansInit::PreliminarySubsample ? "preliminary_subsample"
                                                                : "explicit"},
        {"subsample_fraction", cfg.subsample_fraction},
        {"seed", cfg.seed},
    };
    j["column_names"] = m.column_names;
    j["standardization"] = standardization_to_json(m);
    j["centroids"] = matrix_to_json(model.centroids);
    j["objective"] = model.objective;
    j["iterations"] = model.iterations;
    j["replicate_chosen"] = model.replicate_chosen;
    return j;
}

Json gmm_model_to_json(const GmmModel& model, const GmmConfig& cfg,
                       const FeatureMatrix& m) {
    Json j;
    j["model"] = "gmm";
    j["version"] = kVersion;
    j["config"] = {
        {"k", cfg.k},
        {"covariance_shape", covariance_shape_name(cfg.shape)},
        {"covariance_sharing", covariance_sharing_name(cfg.sharing)},
        {"tol", cfg.tol},
        {"max_iter", cfg.max_iter},
        {"regularization", cfg.regularization},
        {"replicates", cfg.replicates},
        {"seed", cfg.seed},
    };
    j["column_names"] = m.column_names;
    j["standardization"] = standardization_to_json(m);
    j["weights"] = vector_to_json(model.weights);
    j["means"] = matrix_to_json(model.means);
    // Full row-major matrices regardless of shape.
    Json covs = Json::array();
    for (const auto& cov : model.covariances) covs.push_back(matrix_to_json(cov));
    j["covariances"] = std::move(covs);
    j["log_likelihood"] = model.log_likelihood;
    j["iterations"] = model.iterations;
    j["replicate_chosen"] = model.replicate_chosen;
    return j;
}

namespace {

Json som_config_to_json(const SomConfig& cfg) {
    return {
        {"rows", cfg.rows},
        {"cols", cfg.cols},
        {"topology", "hexagonal"},
        {"epochs", cfg.epochs},
        {"initial_radius", cfg.initial_radius},
        {"final_radius", cfg.final_radius},
        {"neighborhood", "gaussian"},
        {"init", som_init_name(cfg.init)},
        {"seed", cfg.seed},
    };
}

}  // namespace

Json som_model_to_json(const SomModel& model, const SomConfig& cfg,
                       const FeatureMatrix& m) {
    Json j;
    j["model"] = "som";
    j["version"] = kVersion;
    j["config"] = som_config_to_json(cfg);
    j["column_names"] = m.column_names;
    j["standardization"] = standardization_to_json(m);
    j["trained_epochs"] = model.trained_epochs;
    Json grid = Json::array();
    for (const auto& g : model.grid) {
        grid.push_back({{"row", g.row},
                        {"col", g.col},
                        {"q", g.q},
                        {"r", g.r},
                        {"x", g.x},
                        {"y", g.y}});
    }
    j["grid"] = std::move(grid);
    j["weights"] = matrix_to_json(model.weights);
    return j;
}

Json u_matrix_to_json(const UMatrix& u, const SomModel& model, const SomConfig& cfg) {
    Json j;
    j["version"] = kVersion;
    j["config"] = som_config_to_json(cfg);
    Json edges = Json::array();
    for (const auto& e : u.edges) {
        edges.push_back({{"a", e.a},
                         {"b", e.b},
                         {"distance", e.distance},
                         {"ax", model.grid[e.a].x},
                         {"ay", model.grid[e.a].y},
                         {"bx", model.grid[e.b].x},
                         {"by", model.grid[e.b].y}});
    }
    j["edges"] = std::move(edges);
    j["neuron_mean"] = u.neuron_mean;
    return j;
}

Json som_hits_to_json(const std::vector<std::int64_t>& hits, double qe,
                      const SomConfig& cfg) {
    Json j;
    j["version"] = kVersion;
    j["config"] = som_config_to_json(cfg);
    j["counts"] = hits;
    j["quantization_error"] = qe;
    return j;
}

Json correlation_report_to_json(const CorrelationReport& report) {
    Json j;
    j["version"] = kVersion;
    j["variables"] = report.variables;
    Json r = Json::array();
    for (Eigen::Index i = 0; i < report.r.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < report.r.cols(); ++k) {
            if (report.defined(i, k)) {
                row.push_back(report.r(i, k));
            } else {
                row.push_back(nullptr);  // undefined (constant column)
            }
        }
        r.push_back(std::move(row));
    }
    j["r"] = std::move(r);
    j["constant_columns"] = report.constant_columns;
    Json hists = Json::array();
    for (std::size_t v = 0; v < report.histograms.size(); ++v) {
        hists.push_back({{"variable", report.variables[v]},
                         {"edges", report.histograms[v].edges},
                         {"counts", report.histograms[v].counts}});
    }
    j["histograms"] = std::move(hists);
    Json pairs = Json::array();
    for (const auto& p : report.pairs) {
        pairs.push_back({{"i", p.i}, {"j", p.j}});
    }
    j["pairs"] = std::move(pairs);
    return j;
}

std::string assignment_to_csv(const Assignment& a, const FeatureMatrix& m) {
    std::string out = "subject_id,second_ts,cluster\n";
    for (std::size_t i = 0; i < a.cluster.size(); ++i) {
        out += m.row_keys[i].subject_id;
        out.push_back(',');
        out += std::to_string(m.row_keys[i].second_ts);
        out.push_back(',');
        out += std::to_string(a.cluster[i]);
        out.push_back('\n');
    }
    return out;
}

std::string responsibilities_to_csv(const Assignment& a, const FeatureMatrix& m) {
    std::string out = "subject_id,second_ts";
    for (Eigen::Index k = 0; k < a.responsibilities.cols(); ++k) {
        out += ",r" + std::to_string(k);
    }
    out.push_back('\n');
    for (Eigen::Index i = 0; i < a.responsibilities.rows(); ++i) {
        out += m.row_keys[i].subject_id;
        out.push_back(',');
        out += std::to_string(m.row_keys[i].second_ts);
        for (Eigen::Index k = 0; k < a.responsibilities.cols(); ++k) {
            out.push_back(',');
            out += format_double_17(a.responsibilities(i, k));
        }
        out.push_back('\n');
    }
    return out;
}

std::string scatter_pair_to_csv(const CorrelationReport& report,
                                const FeatureMatrix& m, int pair_index) {
    const auto& p = report.pairs.at(pair_index);
    std::string out = report.variables[p.i] + "," + report.variables[p.j] + "\n";
    for (Eigen::Index row = 0; row < m.rows(); ++row) {
        out += format_double_17(m.values(row, p.i));
        out.push_back(',');
        out += format_double_17(m.values(row, p.j));
        out.push_back('\n');
    }
    return out;
}

ManifestBuilder::ManifestBuilder(std::string command, std::uint64_t seed) {
    manifest_["command"] = std::move(command);
    manifest_["version"] = kVersion;
    manifest_["seed"] = seed;
    manifest_["inputs"] = Json::object();
    manifest_["config"] = Json::object();
    manifest_["outputs"] = Json::object();
}

void ManifestBuilder::set_config(Json config) {
    manifest_["config"] = std::move(config);
}

void ManifestBuilder::add_input(const std::filesystem::path& path) {
    manifest_["inputs"][path.string()] = content_hash(read_file(path));
}

void ManifestBuilder::write_output(const std::filesystem::path& path,
                                   const std::string& content) {
    atomic_write(path, content);
    manifest_["outputs"][path.filename().string()] = content_hash(content);
}

void ManifestBuilder::finalize(const std::filesystem::path& out_dir) {
    atomic_write(out_dir / "manifest.json", manifest_.dump(2) + "\n");
}

}  // namespace wearlab
