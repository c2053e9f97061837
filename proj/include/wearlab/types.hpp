#ifndef WEARLAB_TYPES_HPP
#define WEARLAB_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types shared by the ingestion pipeline and the clustering
// engines: sensor streams, recording blocks and the aligned feature matrix.

namespace wearlab {

// Input or file-format problem (bad CSV, mismatched dimensions, empty data).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (singular covariance, component collapse, non-finite values).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

enum class ModalityKind { HeartRate, Accelerometer, Gsr, AmbientLight };

// Fixed per-modality sampling model of the source device.
struct Modality {
    ModalityKind kind;
    std::string name;        // "hr", "accel", "gsr", "light"
    int nominal_rate_hz;     // samples per second
    int channels;            // values per sample
};

const Modality& modality(ModalityKind kind);
// Looks up a modality by its short name; throws DataError for unknown names.
const Modality& modality_by_name(const std::string& name);

struct Sample {
    std::int64_t timestamp_ms;
    std::vector<double> values;  // size == modality.channels
};

// One modality's timestamped samples, strictly increasing in time.
struct SensorStream {
    Modality modality;
    std::vector<Sample> samples;
};

// One 3-minute on-period bundling every modality present for a subject.
struct RecordingBlock {
    std::string subject_id;
    std::int64_t start_ms = 0;
    std::int64_t duration_ms = 180000;
    std::vector<SensorStream> streams;  // at most one per modality

    const SensorStream* find(ModalityKind kind) const;
};

struct RowKey {
    std::string subject_id;
    std::int64_t second_ts = 0;  // whole seconds since epoch

    bool operator==(const RowKey&) const = default;
};

// Per-column standardization parameters; stddev == 0 marks a constant column.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> stddev;
};

// n x d matrix of aligned per-second observations.
struct FeatureMatrix {
    Eigen::MatrixXd values;                    // n rows, d columns
    std::vector<std::string> column_names;     // size d, unique
    std::vector<RowKey> row_keys;              // size n
    std::optional<Standardization> standardization;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

// Per-row hard cluster membership, optionally with soft responsibilities.
struct Assignment {
    std::vector<int> cluster;                  // size n, each in [0, K)
    Eigen::MatrixXd responsibilities;          // n x K when soft info exists, else 0 x 0
};

// Throws NumericError if any entry of m is NaN or infinite.
void require_finite(const Eigen::MatrixXd& m, const std::string& context);

}  // namespace wearlab

#endif  // WEARLAB_TYPES_HPP
