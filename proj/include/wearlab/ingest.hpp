#ifndef WEARLAB_INGEST_HPP
#define WEARLAB_INGEST_HPP

#include "wearlab/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Stream parsing, 3-minute block segmentation and per-second feature
// alignment. All functions are pure; errors surface as DataError with
// file/line context where applicable.

namespace wearlab {

// Parses stream CSV content. Layout (UTF-8, header required):
//   single channel:  timestamp_ms,value
//   accelerometer:   timestamp_ms,x,y,z
// Timestamps are integer milliseconds, strictly increasing. Line numbers in
// error messages are 1-based and count the header.
SensorStream parse_stream(const std::string& content, const Modality& modality);

// Canonical serialization: header, one row per sample, values in shortest
// round-trip decimal form, '\n' line ends. parse_stream(serialize_stream(s))
// reproduces s bit-exactly.
std::string serialize_stream(const SensorStream& stream);

// On/off recording cadence, both in milliseconds.
struct BlockSchedule {
    std::int64_t on_ms = 180000;
    std::int64_t off_ms = 180000;
};

struct SegmentationResult {
    std::vector<RecordingBlock> blocks;
    // Samples falling in off-periods, per modality name. Not silently
    // dropped: callers surface these in ingest reports.
    std::vector<std::pair<std::string, std::int64_t>> off_period_counts;
    std::int64_t total_samples = 0;
    std::int64_t blocked_samples = 0;
    std::int64_t anomaly_samples = 0;
};

// Cuts streams into blocks covering the schedule's on-periods. The schedule
// is anchored at the earliest sample timestamp rounded down to the schedule
// period (on + off). Only on-periods containing at least one sample yield a
// block. Throws DataError when the stream set is empty or has no samples.
SegmentationResult segment_blocks(const std::vector<SensorStream>& streams,
                                  const BlockSchedule& schedule,
                                  const std::string& subject_id);

enum class FeatureRecipe { HrAccelMag, HrAccelXyz };

FeatureRecipe recipe_by_name(const std::string& name);
std::string recipe_name(FeatureRecipe recipe);

struct AlignResult {
    FeatureMatrix matrix;
    // Seconds that had HR or accelerometer samples but not both.
    std::int64_t dropped_seconds = 0;
};

// Aligns one block to per-second rows. A row is emitted for every whole
// second holding at least one HR and one accelerometer sample; features are
// per-second means (magnitude sqrt(x^2+y^2+z^2) under HrAccelMag, per-axis
// means under HrAccelXyz). Throws DataError if the block lacks HR or
// accelerometer data.
AlignResult align_features(const RecordingBlock& block, FeatureRecipe recipe);

// Concatenates matrices with identical columns into one pooled matrix.
FeatureMatrix pool_matrices(const std::vector<FeatureMatrix>& matrices);

// Centers and scales every column to mean 0 / sample stddev 1 and records
// the (mean, stddev) pairs. Constant columns map to all-zero with stddev 0.
// Requires n >= 2.
FeatureMatrix standardize(const FeatureMatrix& m);

// Exact inverse of standardize using the recorded parameters.
FeatureMatrix destandardize(const FeatureMatrix& m);

// Mahalanobis pre-whitening: rotates and scales the data so that the sample
// covariance becomes the identity. Euclidean distances in the result equal
// Mahalanobis distances in the input. Throws NumericError on singular
// covariance.
FeatureMatrix whiten(const FeatureMatrix& m);

// FeatureMatrix CSV: "subject_id,second_ts,<feature columns...>", values with
// 17 significant digits.
std::string feature_matrix_to_csv(const FeatureMatrix& m);
FeatureMatrix feature_matrix_from_csv(const std::string& content);

}  // namespace wearlab

#endif  // WEARLAB_INGEST_HPP
