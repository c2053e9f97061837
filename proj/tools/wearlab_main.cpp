// wearlab: reproducible clustering analyses of wearable sensor streams.
//
// Commands: ingest, correlate, kmeans, gmm, som, synth. Every run writes a
// manifest.json capturing inputs, config, seed and output hashes; reruns
// with identical inputs produce byte-identical files.

#include "wearlab/export.hpp"
#include "wearlab/gmm.hpp"
#include "wearlab/ingest.hpp"
#include "wearlab/kmeans.hpp"
#include "wearlab/som.hpp"
#include "wearlab/stats.hpp"
#include "wearlab/synth.hpp"
#include "wearlab/types.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace wearlab;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
    std::string input;
    std::string out;
    std::uint64_t seed = 0;
    bool standardize = true;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool standardize_default) {
    opts.standardize = standardize_default;
    cmd->add_option("--input", opts.input, "Input feature-matrix CSV")->required();
    cmd->add_option("--out", opts.out, "Output directory")->required();
    cmd->add_option("--seed", opts.seed, "RNG seed (recorded in the manifest)");
    cmd->add_flag("--standardize,!--no-standardize", opts.standardize,
                  "Standardize columns before the analysis");
}

FeatureMatrix load_features(const std::string& path, bool standardize_flag) {
    FeatureMatrix m = feature_matrix_from_csv(read_file(path));
    if (standardize_flag) m = standardize(m);
    return m;
}

// ---------------------------------------------------------------- ingest --

struct IngestOpts {
    std::string input;
    std::string out;
    std::string recipe = "hr_accel_mag";
    bool pooled = false;
    std::int64_t on_ms = 180000;
    std::int64_t off_ms = 180000;
};

// Input layout: <subject>_<modality>.csv with modality in
// {hr, accel, gsr, light}.
std::map<std::string, std::vector<fs::path>> discover_subjects(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw DataError("ingest: input directory not found: " + dir.string());
    }
    std::map<std::string, std::vector<fs::path>> subjects;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const std::string stem = entry.path().stem().string();
        const auto underscore = stem.rfind('_');
        if (underscore == std::string::npos) continue;
        const std::string suffix = stem.substr(underscore + 1);
        if (suffix != "hr" && suffix != "accel" && suffix != "gsr" && suffix != "light") {
            continue;
        }
        subjects[stem.substr(0, underscore)].push_back(entry.path());
    }
    if (subjects.empty()) {
        throw DataError("ingest: no stream CSVs found in " + dir.string());
    }
    for (auto& [subject, files] : subjects) std::sort(files.begin(), files.end());
    return subjects;
}

int cmd_ingest(const IngestOpts& opts) {
    const FeatureRecipe recipe = recipe_by_name(opts.recipe);
    const auto subjects = discover_subjects(opts.input);
    fs::create_directories(opts.out);

    ManifestBuilder manifest("ingest", 0);
    manifest.set_config({{"recipe", opts.recipe},
                         {"pooled", opts.pooled},
                         {"on_ms", opts.on_ms},
                         {"off_ms", opts.off_ms}});

    Json report;
    report["version"] = kVersion;
    report["subjects"] = Json::object();
    std::vector<FeatureMatrix> per_subject;

    for (const auto& [subject, files] : subjects) {
        std::vector<SensorStream> streams;
        for (const auto& file : files) {
            manifest.add_input(file);
            const std::string stem = file.stem().string();
            const auto& mod = modality_by_name(stem.substr(stem.rfind('_') + 1));
            try {
                streams.push_back(parse_stream(read_file(file), mod));
            } catch (const DataError& e) {
                throw DataError(file.string() + ": " + e.what());
            }
        }

        const auto segmented =
            segment_blocks(streams, {opts.on_ms, opts.off_ms}, subject);
        std::vector<FeatureMatrix> parts;
        std::int64_t dropped = 0;
        std::int64_t skipped_blocks = 0;
        for (const auto& block : segmented.blocks) {
            if (block.find(ModalityKind::HeartRate) == nullptr ||
                block.find(ModalityKind::Accelerometer) == nullptr) {
                ++skipped_blocks;
                continue;
            }
            auto aligned = align_features(block, recipe);
            dropped += aligned.dropped_seconds;
            if (aligned.matrix.rows() > 0) parts.push_back(std::move(aligned.matrix));
        }
        if (parts.empty()) {
            throw DataError("ingest: subject '" + subject + "' produced no usable rows");
        }
        FeatureMatrix matrix = pool_matrices(parts);
        manifest.write_output(fs::path(opts.out) / (subject + "_features.csv"),
                              feature_matrix_to_csv(matrix));

        Json subject_report;
        subject_report["blocks"] = segmented.blocks.size();
        subject_report["blocks_without_both_modalities"] = skipped_blocks;
        subject_report["total_samples"] = segmented.total_samples;
        subject_report["blocked_samples"] = segmented.blocked_samples;
        subject_report["off_period_samples"] = segmented.anomaly_samples;
        subject_report["rows"] = matrix.rows();
        subject_report["dropped_seconds"] = dropped;
        report["subjects"][subject] = std::move(subject_report);
        per_subject.push_back(std::move(matrix));
    }

    if (opts.pooled) {
        manifest.write_output(fs::path(opts.out) / "pooled_features.csv",
                              feature_matrix_to_csv(pool_matrices(per_subject)));
    }
    manifest.write_output(fs::path(opts.out) / "ingest_report.json",
                          report.dump(2) + "\n");
    manifest.finalize(opts.out);
    std::cout << "ingest: wrote " << per_subject.size() << " subject matrices to "
              << opts.out << "\n";
    return 0;
}

// ------------------------------------------------------------- correlate --

struct CorrelateOpts {
    CommonOpts common;
    int bins = 10;
};

int cmd_correlate(const CorrelateOpts& opts) {
    const auto m = load_features(opts.common.input, opts.common.standardize);
    const auto report = correlation_report(m, opts.bins);

    fs::create_directories(opts.common.out);
    ManifestBuilder manifest("correlate", opts.common.seed);
    manifest.add_input(opts.common.input);
    manifest.set_config({{"bins", opts.bins},
                         {"standardize", opts.common.standardize}});

    manifest.write_output(fs::path(opts.common.out) / "correlation.json",
                          correlation_report_to_json(report).dump(2) + "\n");
    for (std::size_t p = 0; p < report.pairs.size(); ++p) {
        const auto& pair = report.pairs[p];
        const std::string name = "scatter_" + report.variables[pair.i] + "_" +
                                 report.variables[pair.j] + ".csv";
        manifest.write_output(fs::path(opts.common.out) / name,
                              scatter_pair_to_csv(report, m, static_cast<int>(p)));
    }
    manifest.finalize(opts.common.out);
    std::cout << "correlate: " << report.pairs.size() << " variable pairs -> "
              << opts.common.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- kmeans --

struct KMeansOpts {
    CommonOpts common;
    KMeansConfig cfg;
    std::string distance = "squared_euclidean";
    std::string init = "kmeanspp";
    bool whiten = false;
};

int cmd_kmeans(const KMeansOpts& opts) {
    KMeansConfig cfg = opts.cfg;
    cfg.distance = kmeans_distance_by_name(opts.distance);
    if (opts.init == "kmeanspp") {
        cfg.init = KMeansInit::KMeansPP;
    } else if (opts.init == "preliminary_subsample") {
        cfg.init = KMeansInit::PreliminarySubsample;
    } else {
        throw DataError("kmeans: unknown init '" + opts.init + "'");
    }
    cfg.seed = opts.common.seed;

    FeatureMatrix m = load_features(opts.common.input, opts.common.standardize);
    if (opts.whiten) m = whiten(m);
    const auto model = kmeans_fit(m, cfg);
    Assignment assignment;
    assignment.cluster = model.assignments;

    fs::create_directories(opts.common.out);
    ManifestBuilder manifest("kmeans", cfg.seed);
    manifest.add_input(opts.common.input);
    Json config = kmeans_model_to_json(model, cfg, m)["config"];
    config["standardize"] = opts.common.standardize;
    config["whiten"] = opts.whiten;
    manifest.set_config(config);

    manifest.write_output(fs::path(opts.common.out) / "model.json",
                          kmeans_model_to_json(model, cfg, m).dump(2) + "\n");
    manifest.write_output(fs::path(opts.common.out) / "assignments.csv",
                          assignment_to_csv(assignment, m));
    manifest.finalize(opts.common.out);
    std::cout << "kmeans: k=" << cfg.k << " J=" << format_double(model.objective)
              << " replicate=" << model.replicate_chosen << " -> "
              << opts.common.out << "\n";
    return 0;
}

// ------------------------------------------------------------------- gmm --

struct GmmOpts {
    CommonOpts common;
    GmmConfig cfg;
    std::string shape = "full";
    std::string sharing = "unshared";
    bool all_structures = false;
};

int cmd_gmm(const GmmOpts& opts) {
    const FeatureMatrix m = load_features(opts.common.input, opts.common.standardize);
    fs::create_directories(opts.common.out);
    ManifestBuilder manifest("gmm", opts.common.seed);
    manifest.add_input(opts.common.input);

    std::vector<std::pair<CovarianceShape, CovarianceSharing>> structures;
    if (opts.all_structures) {
        structures = {{CovarianceShape::Diagonal, CovarianceSharing::Shared},
                      {CovarianceShape::Diagonal, CovarianceSharing::Unshared},
                      {CovarianceShape::Full, CovarianceSharing::Shared},
                      {CovarianceShape::Full, CovarianceSharing::Unshared}};
    } else {
        structures = {{covariance_shape_by_name(opts.shape),
                       covariance_sharing_by_name(opts.sharing)}};
    }

    Json config{{"k", opts.cfg.k},
                {"tol", opts.cfg.tol},
                {"max_iter", opts.cfg.max_iter},
                {"regularization", opts.cfg.regularization},
                {"replicates", opts.cfg.replicates},
                {"seed", opts.common.seed},
                {"standardize", opts.common.standardize},
                {"all_structures", opts.all_structures}};
    if (!opts.all_structures) {
        config["covariance_shape"] = opts.shape;
        config["covariance_sharing"] = opts.sharing;
    }
    manifest.set_config(config);

    for (const auto& [shape, sharing] : structures) {
        GmmConfig cfg = opts.cfg;
        cfg.shape = shape;
        cfg.sharing = sharing;
        cfg.seed = opts.common.seed;
        const auto model = gmm_fit(m, cfg);
        const auto assignment = gmm_cluster(model, m);

        const std::string tag = opts.all_structures
                                    ? "_" + covariance_shape_name(shape) + "_" +
                                          covariance_sharing_name(sharing)
                                    : "";
        manifest.write_output(fs::path(opts.common.out) / ("model" + tag + ".json"),
                              gmm_model_to_json(model, cfg, m).dump(2) + "\n");
        manifest.write_output(
            fs::path(opts.common.out) / ("assignments" + tag + ".csv"),
            assignment_to_csv(assignment, m));
        manifest.write_output(
            fs::path(opts.common.out) / ("responsibilities" + tag + ".csv"),
            responsibilities_to_csv(assignment, m));
        std::cout << "gmm: k=" << cfg.k << " " << covariance_shape_name(shape)
                  << "/" << covariance_sharing_name(sharing)
                  << " logL=" << format_double(model.log_likelihood) << "\n";
    }
    manifest.finalize(opts.common.out);
    return 0;
}

// ------------------------------------------------------------------- som --

struct SomOpts {
    CommonOpts common;
    SomConfig cfg;
    std::string init = "random_sample";
    bool radius_given = false;
};

int cmd_som(const SomOpts& opts) {
    SomConfig cfg = opts.cfg;
    if (!opts.radius_given) {
        const auto defaults = SomConfig::with_grid(cfg.rows, cfg.cols);
        cfg.initial_radius = defaults.initial_radius;
        cfg.final_radius = defaults.final_radius;
    }
    cfg.init = som_init_by_name(opts.init);
    cfg.seed = opts.common.seed;

    const FeatureMatrix m = load_features(opts.common.input, opts.common.standardize);
    const auto model = som_train(som_init(m, cfg), m, cfg);
    const auto u = u_matrix(model);
    const auto hits = sample_hits(model, m);

    fs::create_directories(opts.common.out);
    ManifestBuilder manifest("som", cfg.seed);
    manifest.add_input(opts.common.input);
    Json config = som_model_to_json(model, cfg, m)["config"];
    config["standardize"] = opts.common.standardize;
    manifest.set_config(config);

    manifest.write_output(fs::path(opts.common.out) / "som.json",
                          som_model_to_json(model, cfg, m).dump(2) + "\n");
    manifest.write_output(fs::path(opts.common.out) / "umatrix.json",
                          u_matrix_to_json(u, model, cfg).dump(2) + "\n");
    manifest.write_output(
        fs::path(opts.common.out) / "hits.json",
        som_hits_to_json(hits, quantization_error(model, m), cfg).dump(2) + "\n");
    manifest.finalize(opts.common.out);
    std::cout << "som: " << cfg.rows << "x" << cfg.cols << " grid, "
              << u.edges.size() << " u-matrix edges -> " << opts.common.out << "\n";
    return 0;
}

// ----------------------------------------------------------------- synth --

struct SynthOpts {
    std::string mode = "streams";
    std::string out;
    std::string spec_path;
    std::uint64_t seed = 0;
    int subjects = 1;
    int minutes = 60;
    double coupling = 0.7;
};

MixtureSpec mixture_spec_from_json(const Json& j) {
    MixtureSpec spec;
    spec.n = j.at("n").get<int>();
    spec.seed = j.value("seed", 0);
    for (const auto& cj : j.at("components")) {
        MixtureComponent c;
        c.weight = cj.at("weight").get<double>();
        const auto mean = cj.at("mean").get<std::vector<double>>();
        c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                   static_cast<Eigen::Index>(mean.size()));
        const auto rows = cj.at("covariance").get<std::vector<std::vector<double>>>();
        c.covariance.resize(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != rows.size()) {
                throw DataError("mixture spec: covariance must be square");
            }
            for (std::size_t cidx = 0; cidx < rows[r].size(); ++cidx) {
                c.covariance(static_cast<Eigen::Index>(r),
                             static_cast<Eigen::Index>(cidx)) = rows[r][cidx];
            }
        }
        spec.components.push_back(std::move(c));
    }
    return spec;
}

// Repeating rest/walk/run cycle covering `minutes` of wall time.
ActivitySchedule default_schedule(int minutes, double coupling) {
    ActivitySchedule schedule;
    schedule.coupling = coupling;
    std::int64_t remaining = static_cast<std::int64_t>(minutes) * 60;
    const ActivityRegime cycle[3] = {ActivityRegime::Rest, ActivityRegime::Walk,
                                     ActivityRegime::Run};
    int at = 0;
    while (remaining > 0) {
        const std::int64_t len = std::min<std::int64_t>(300, remaining);
        schedule.segments.push_back({len, cycle[at % 3]});
        remaining -= len;
        ++at;
    }
    return schedule;
}

int cmd_synth(const SynthOpts& opts) {
    fs::create_directories(opts.out);
    ManifestBuilder manifest("synth", opts.seed);

    if (opts.mode == "streams") {
        manifest.set_config({{"mode", "streams"},
                             {"subjects", opts.subjects},
                             {"minutes", opts.minutes},
                             {"coupling", opts.coupling}});
        for (int s = 0; s < opts.subjects; ++s) {
            const auto schedule = default_schedule(opts.minutes, opts.coupling);
            const auto streams =
                gen_sensor_streams(schedule, opts.seed + static_cast<std::uint64_t>(s));
            const std::string subject = "subject" + std::to_string(s + 1);
            for (const auto& stream : streams) {
                manifest.write_output(
                    fs::path(opts.out) / (subject + "_" + stream.modality.name + ".csv"),
                    serialize_stream(stream));
            }
        }
        manifest.finalize(opts.out);
        std::cout << "synth: " << opts.subjects << " subjects x " << opts.minutes
                  << " min -> " << opts.out << "\n";
        return 0;
    }
    if (opts.mode == "mixture") {
        if (opts.spec_path.empty()) {
            throw DataError("synth: --spec is required in mixture mode");
        }
        manifest.add_input(opts.spec_path);
        Json parsed;
        try {
            parsed = Json::parse(read_file(opts.spec_path));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("synth: bad spec JSON: " + std::string(e.what()));
        }
        MixtureSpec spec = mixture_spec_from_json(parsed);
        if (opts.seed != 0) spec.seed = opts.seed;
        manifest.set_config({{"mode", "mixture"}, {"n", spec.n}, {"seed", spec.seed}});
        const auto data = gen_mixture(spec);

        manifest.write_output(fs::path(opts.out) / "features.csv",
                              feature_matrix_to_csv(data.matrix));
        std::string labels = "row,label\n";
        for (std::size_t i = 0; i < data.labels.size(); ++i) {
            labels += std::to_string(i) + "," + std::to_string(data.labels[i]) + "\n";
        }
        manifest.write_output(fs::path(opts.out) / "labels.csv", labels);
        manifest.finalize(opts.out);
        std::cout << "synth: " << spec.n << " mixture points -> " << opts.out << "\n";
        return 0;
    }
    throw DataError("synth: unknown mode '" + opts.mode + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised clustering analyses for wearable sensor streams"};
    app.require_subcommand(1);

    IngestOpts ingest_opts;
    auto* ingest = app.add_subcommand("ingest", "Align stream CSVs into feature matrices");
    ingest->add_option("--input", ingest_opts.input, "Directory of per-subject stream CSVs")
        ->required();
    ingest->add_option("--out", ingest_opts.out, "Output directory")->required();
    ingest->add_option("--recipe", ingest_opts.recipe,
                       "Feature recipe: hr_accel_mag or hr_accel_xyz");
    ingest->add_flag("--pooled", ingest_opts.pooled, "Also write the pooled matrix");
    ingest->add_option("--on-ms", ingest_opts.on_ms, "Recording on-period (ms)");
    ingest->add_option("--off-ms", ingest_opts.off_ms, "Recording off-period (ms)");

    CorrelateOpts correlate_opts;
    auto* correlate = app.add_subcommand("correlate", "Pearson correlation report");
    add_common(correlate, correlate_opts.common, /*standardize_default=*/false);
    correlate->add_option("--bins", correlate_opts.bins, "Histogram bins");

    KMeansOpts kmeans_opts;
    auto* kmeans = app.add_subcommand("kmeans", "k-means clustering (k-means++ seeding)");
    add_common(kmeans, kmeans_opts.common, /*standardize_default=*/true);
    kmeans->add_option("--k", kmeans_opts.cfg.k, "Cluster count")->required();
    kmeans->add_option("--distance", kmeans_opts.distance,
                       "squared_euclidean or cosine");
    kmeans->add_option("--replicates", kmeans_opts.cfg.replicates, "Seeded restarts");
    kmeans->add_option("--max-iter", kmeans_opts.cfg.max_iter, "Iteration cap");
    kmeans->add_option("--tol", kmeans_opts.cfg.tol, "Relative J improvement threshold");
    kmeans->add_option("--init", kmeans_opts.init,
                       "kmeanspp or preliminary_subsample");
    kmeans->add_option("--subsample-fraction", kmeans_opts.cfg.subsample_fraction,
                       "Preliminary-phase subsample fraction");
    kmeans->add_flag("--whiten", kmeans_opts.whiten,
                     "Pre-whiten features (Mahalanobis geometry)");

    GmmOpts gmm_opts;
    auto* gmm = app.add_subcommand("gmm", "Gaussian-mixture clustering via EM");
    add_common(gmm, gmm_opts.common, /*standardize_default=*/true);
    gmm->add_option("--k", gmm_opts.cfg.k, "Component count")->required();
    gmm->add_option("--shape", gmm_opts.shape, "diagonal or full");
    gmm->add_option("--sharing", gmm_opts.sharing, "shared or unshared");
    gmm->add_flag("--all-structures", gmm_opts.all_structures,
                  "Fit all four covariance structures");
    gmm->add_option("--tol", gmm_opts.cfg.tol, "Relative log-likelihood threshold");
    gmm->add_option("--max-iter", gmm_opts.cfg.max_iter, "Iteration cap");
    gmm->add_option("--regularization", gmm_opts.cfg.regularization,
                    "Covariance diagonal ridge");
    gmm->add_option("--replicates", gmm_opts.cfg.replicates, "Seeded restarts");

    SomOpts som_opts;
    auto* som = app.add_subcommand("som", "Hexagonal self-organizing map");
    add_common(som, som_opts.common, /*standardize_default=*/true);
    som->add_option("--rows", som_opts.cfg.rows, "Grid rows");
    som->add_option("--cols", som_opts.cfg.cols, "Grid columns");
    som->add_option("--epochs", som_opts.cfg.epochs, "Training epochs");
    auto* r0 = som->add_option("--initial-radius", som_opts.cfg.initial_radius,
                               "Start of the linear radius decay");
    auto* r1 = som->add_option("--final-radius", som_opts.cfg.final_radius,
                               "End of the linear radius decay");
    som->add_option("--init", som_opts.init, "random_sample or linear_span");

    SynthOpts synth_opts;
    auto* synth = app.add_subcommand("synth", "Generate synthetic data");
    synth->add_option("--mode", synth_opts.mode, "streams or mixture");
    synth->add_option("--out", synth_opts.out, "Output directory")->required();
    synth->add_option("--spec", synth_opts.spec_path, "Mixture spec JSON (mixture mode)");
    synth->add_option("--seed", synth_opts.seed, "RNG seed");
    synth->add_option("--subjects", synth_opts.subjects, "Subject count (streams mode)");
    synth->add_option("--minutes", synth_opts.minutes, "Minutes per subject (streams mode)");
    synth->add_option("--coupling", synth_opts.coupling,
                      "HR/acceleration coupling in [0, 1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_opts);
        if (*correlate) return cmd_correlate(correlate_opts);
        if (*kmeans) return cmd_kmeans(kmeans_opts);
        if (*gmm) return cmd_gmm(gmm_opts);
        if (*som) {
            som_opts.radius_given = r0->count() > 0 || r1->count() > 0;
            return cmd_som(som_opts);
        }
        if (*synth) return cmd_synth(synth_opts);
    } catch (const NumericError& e) {
        std::cerr << "error (numerical): " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DataError& e) {
        std::cerr << "error (data): " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
