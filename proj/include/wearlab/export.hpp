#ifndef WEARLAB_EXPORT_HPP
#define WEARLAB_EXPORT_HPP

#include "wearlab/format.hpp"
#include "wearlab/gmm.hpp"
#include "wearlab/kmeans.hpp"
#include "wearlab/som.hpp"
#include "wearlab/stats.hpp"
#include "wearlab/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

// Deterministic model/report serialization and run manifests. All exports
// use insertion-ordered JSON and shortest round-trip numbers so identical
// runs produce byte-identical files.

namespace wearlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a 64-bit content fingerprint, hex-encoded. Used by manifests to pin
// output identity; not a cryptographic hash.
std::string content_hash(const std::string& bytes);

// Writes via a temporary file and rename so readers never observe partial
// content.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

Json kmeans_model_to_json(const KMeansModel& model, const KMeansConfig& cfg,
                          const FeatureMatrix& m);
Json gmm_model_to_json(const GmmModel& model, const GmmConfig& cfg,
                       const FeatureMatrix& m);
Json som_model_to_json(const SomModel& model, const SomConfig& cfg,
                       const FeatureMatrix& m);
Json u_matrix_to_json(const UMatrix& u, const SomModel& model, const SomConfig& cfg);
Json som_hits_to_json(const std::vector<std::int64_t>& hits, double qe,
                      const SomConfig& cfg);
Json correlation_report_to_json(const CorrelationReport& report);

// Assignment CSV: "subject_id,second_ts,cluster".
std::string assignment_to_csv(const Assignment& a, const FeatureMatrix& m);
// Responsibilities CSV: "subject_id,second_ts,r0,...,r{K-1}".
std::string responsibilities_to_csv(const Assignment& a, const FeatureMatrix& m);
// Scatter CSV for one variable pair: "<name_i>,<name_j>" per row.
std::string scatter_pair_to_csv(const CorrelationReport& report,
                                const FeatureMatrix& m, int pair_index);

// Run manifest: command, version, seed, config echo, input and output file
// hashes. Reruns with equal inputs and config must reproduce equal hashes.
class ManifestBuilder {
public:
    ManifestBuilder(std::string command, std::uint64_t seed);

    void set_config(Json config);
    void add_input(const std::filesystem::path& path);
    // Writes the file atomically and records its hash in the manifest.
    void write_output(const std::filesystem::path& path, const std::string& content);
    // Writes <out_dir>/manifest.json.
    void finalize(const std::filesystem::path& out_dir);

private:
    Json manifest_;
};

}  // namespace wearlab

#endif  // WEARLAB_EXPORT_HPP
