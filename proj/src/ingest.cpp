#include "wearlab/ingest.hpp"

#include "wearlab/format.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace wearlab {

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string expected_header(const Modality& modality) {
    if (modality.kind == ModalityKind::Accelerometer) return "timestamp_ms,x,y,z";
    return "timestamp_ms,value";
}

// Splits content into lines; accepts \n and \r\n, ignores one trailing empty
// line.
std::vector<std::string_view> split_lines(const std::string& content) {
    std::vector<std::string_view> lines;
    std::string_view rest(content);
    while (!rest.empty()) {
        std::size_t nl = rest.find('\n');
        std::string_view line = (nl == std::string_view::npos) ? rest : rest.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

[[noreturn]] void parse_fail(const Modality& modality, std::size_t line_no,
                             const std::string& why) {
    throw DataError("stream csv (" + modality.name + "), line " +
                    std::to_string(line_no) + ": " + why);
}

}  // namespace

SensorStream parse_stream(const std::string& content, const Modality& modality) {
    const auto lines = split_lines(content);
    if (lines.empty()) {
        throw DataError("stream csv (" + modality.name + "): missing header");
    }
    if (lines[0] != expected_header(modality)) {
        parse_fail(modality, 1, "expected header '" + expected_header(modality) + "'");
    }

    SensorStream stream{modality, {}};
    stream.samples.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != static_cast<std::size_t>(modality.channels) + 1) {
            parse_fail(modality, line_no,
                       "expected " + std::to_string(modality.channels + 1) +
                           " fields, got " + std::to_string(fields.size()));
        }
        const auto ts = parse_int64(fields[0]);
        if (!ts) parse_fail(modality, line_no, "bad timestamp '" + std::string(fields[0]) + "'");
        if (!stream.samples.empty() && *ts <= stream.samples.back().timestamp_ms) {
            parse_fail(modality, line_no, "timestamp not strictly increasing");
        }

        Sample sample{*ts, {}};
        sample.values.reserve(modality.channels);
        for (int c = 0; c < modality.channels; ++c) {
            const auto v = parse_double(fields[c + 1]);
            if (!v || !std::isfinite(*v)) {
                parse_fail(modality, line_no, "bad value '" + std::string(fields[c + 1]) + "'");
            }
            sample.values.push_back(*v);
        }
        if (modality.kind == ModalityKind::HeartRate && sample.values[0] <= 0.0) {
            parse_fail(modality, line_no, "heart rate must be > 0");
        }
        stream.samples.push_back(std::move(sample));
    }
    return stream;
}

std::string serialize_stream(const SensorStream& stream) {
    std::string out = expected_header(stream.modality);
    out.push_back('\n');
    for (const auto& s : stream.samples) {
        out += std::to_string(s.timestamp_ms);
        for (double v : s.values) {
            out.push_back(',');
            out += format_double(v);
        }
        out.push_back('\n');
    }
    return out;
}

SegmentationResult segment_blocks(const std::vector<SensorStream>& streams,
                                  const BlockSchedule& schedule,
                                  const std::string& subject_id) {
    if (schedule.on_ms <= 0 || schedule.off_ms <= 0) {
        throw DataError("segment_blocks: schedule durations must be > 0");
    }
    bool any_samples = false;
    std::int64_t earliest = 0;
    for (std::size_t i = 0; i < streams.size(); ++i) {
        for (std::size_t j = i + 1; j < streams.size(); ++j) {
            if (streams[i].modality.kind == streams[j].modality.kind) {
                throw DataError("segment_blocks: duplicate stream for modality '" +
                                streams[i].modality.name + "'");
            }
        }
        if (streams[i].samples.empty()) continue;
        const std::int64_t t = streams[i].samples.front().timestamp_ms;
        earliest = any_samples ? std::min(earliest, t) : t;
        any_samples = true;
    }
    if (!any_samples) {
        throw DataError("segment_blocks: no samples in any input stream");
    }

    const std::int64_t period = schedule.on_ms + schedule.off_ms;
    // Anchor at the earliest sample rounded down to the schedule period
    // (floor division, timestamps may precede the epoch).
    std::int64_t anchor = earliest / period * period;
    if (earliest < 0 && anchor > earliest) anchor -= period;

    SegmentationResult result;
    // period index -> per-modality samples inside that on-window
    std::map<std::int64_t, std::map<std::string, std::vector<Sample>>> windows;
    for (const auto& s : streams) {
        std::int64_t off_count = 0;
        for (const auto& sample : s.samples) {
            ++result.total_samples;
            const std::int64_t rel = sample.timestamp_ms - anchor;
            const std::int64_t idx = rel / period;
            if (rel - idx * period < schedule.on_ms) {
                windows[idx][s.modality.name].push_back(sample);
                ++result.blocked_samples;
            } else {
                ++off_count;
                ++result.anomaly_samples;
            }
        }
        if (off_count > 0) {
            result.off_period_counts.emplace_back(s.modality.name, off_count);
        }
    }

    for (auto& [idx, by_modality] : windows) {
        RecordingBlock block;
        block.subject_id = subject_id;
        block.start_ms = anchor + idx * period;
        block.duration_ms = schedule.on_ms;
        for (auto& [name, samples] : by_modality) {
            SensorStream s{modality_by_name(name), std::move(samples)};
            block.streams.push_back(std::move(s));
        }
        result.blocks.push_back(std::move(block));
    }
    return result;
}

FeatureRecipe recipe_by_name(const std::string& name) {
    if (name == "hr_accel_mag") return FeatureRecipe::HrAccelMag;
    if (name == "hr_accel_xyz") return FeatureRecipe::HrAccelXyz;
    throw DataError("unknown feature recipe: '" + name + "'");
}

std::string recipe_name(FeatureRecipe recipe) {
    return recipe == FeatureRecipe::HrAccelMag ? "hr_accel_mag" : "hr_accel_xyz";
}

AlignResult align_features(const RecordingBlock& block, FeatureRecipe recipe) {
    const SensorStream* hr = block.find(ModalityKind::HeartRate);
    const SensorStream* accel = block.find(ModalityKind::Accelerometer);
    if (hr == nullptr || hr->samples.empty()) {
        throw DataError("align_features: block has no heart-rate samples");
    }
    if (accel == nullptr || accel->samples.empty()) {
        throw DataError("align_features: block has no accelerometer samples");
    }

    struct SecondAgg {
        double hr_sum = 0.0;
        std::int64_t hr_count = 0;
        double mag_sum = 0.0;
        Eigen::Vector3d axis_sum = Eigen::Vector3d::Zero();
        std::int64_t accel_count = 0;
    };
    auto floor_second = [](std::int64_t ms) {
        return ms >= 0 ? ms / 1000 : (ms - 999) / 1000;
    };

    std::map<std::int64_t, SecondAgg> seconds;
    for (const auto& s : hr->samples) {
        auto& agg = seconds[floor_second(s.timestamp_ms)];
        agg.hr_sum += s.values[0];
        ++agg.hr_count;
    }
    for (const auto& s : accel->samples) {
        auto& agg = seconds[floor_second(s.timestamp_ms)];
        const Eigen::Vector3d v(s.values[0], s.values[1], s.values[2]);
        agg.mag_sum += v.norm();
        agg.axis_sum += v;
        ++agg.accel_count;
    }

    const bool magnitude = recipe == FeatureRecipe::HrAccelMag;
    AlignResult result;
    result.matrix.column_names =
        magnitude ? std::vector<std::string>{"hr", "accel_mag"}
                  : std::vector<std::string>{"hr", "accel_x", "accel_y", "accel_z"};
    const Eigen::Index d = static_cast<Eigen::Index>(result.matrix.column_names.size());

    std::vector<Eigen::VectorXd> rows;
    for (const auto& [second, agg] : seconds) {
        if (agg.hr_count == 0 || agg.accel_count == 0) {
            ++result.dropped_seconds;
            continue;
        }
        Eigen::VectorXd row(d);
        row(0) = agg.hr_sum / static_cast<double>(agg.hr_count);
        if (magnitude) {
            row(1) = agg.mag_sum / static_cast<double>(agg.accel_count);
        } else {
            row.tail<3>() = agg.axis_sum / static_cast<double>(agg.accel_count);
        }
        rows.push_back(std::move(row));
        result.matrix.row_keys.push_back({block.subject_id, second});
    }

    result.matrix.values.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        result.matrix.values.row(static_cast<Eigen::Index>(i)) = rows[i];
    }
    return result;
}

FeatureMatrix pool_matrices(const std::vector<FeatureMatrix>& matrices) {
    if (matrices.empty()) throw DataError("pool_matrices: nothing to pool");
    FeatureMatrix pooled;
    pooled.column_names = matrices.front().column_names;
    Eigen::Index total = 0;
    for (const auto& m : matrices) {
        if (m.column_names != pooled.column_names) {
            throw DataError("pool_matrices: column mismatch between matrices");
        }
        total += m.rows();
    }
    pooled.values.resize(total, static_cast<Eigen::Index>(pooled.column_names.size()));
    Eigen::Index at = 0;
    for (const auto& m : matrices) {
        pooled.values.middleRows(at, m.rows()) = m.values;
        pooled.row_keys.insert(pooled.row_keys.end(), m.row_keys.begin(),
                               m.row_keys.end());
        at += m.rows();
    }
    return pooled;
}

FeatureMatrix standardize(const FeatureMatrix& m) {
    const Eigen::Index n = m.rows();
    const Eigen::Index d = m.cols();
    if (n < 2) throw DataError("standardize: need at least 2 rows");

    FeatureMatrix out = m;
    Standardization params;
    params.mean.resize(d);
    params.stddev.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double mean = m.values.col(j).mean();
        const double ss = (m.values.col(j).array() - mean).square().sum();
        const double stddev = std::sqrt(ss / static_cast<double>(n - 1));
        params.mean[j] = mean;
        params.stddev[j] = stddev;
        if (stddev == 0.0) {
            out.values.col(j).setZero();
        } else {
            out.values.col(j) = (m.values.col(j).array() - mean) / stddev;
        }
    }
    out.standardization = std::move(params);
    return out;
}

FeatureMatrix destandardize(const FeatureMatrix& m) {
    if (!m.standardization) {
        throw DataError("destandardize: matrix carries no standardization");
    }
    FeatureMatrix out = m;
    const auto& p = *m.standardization;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (p.stddev[j] == 0.0) {
            out.values.col(j).setConstant(p.mean[j]);
        } else {
            out.values.col(j) = m.values.col(j).array() * p.stddev[j] + p.mean[j];
        }
    }
    out.standardization.reset();
    return out;
}

FeatureMatrix whiten(const FeatureMatrix& m) {
    const Eigen::Index n = m.rows();
    if (n < 2) throw DataError("whiten: need at least 2 rows");
    const Eigen::RowVectorXd mean = m.values.colwise().mean();
    const Eigen::MatrixXd centered = m.values.rowwise() - mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd values = eig.eigenvalues();
    const double threshold = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
    if (values.minCoeff() <= threshold) {
        throw NumericError("whiten: sample covariance is singular");
    }
    const Eigen::MatrixXd transform =
        eig.eigenvectors() * values.cwiseSqrt().cwiseInverse().asDiagonal();

    FeatureMatrix out = m;
    out.values = centered * transform;
    return out;
}

std::string feature_matrix_to_csv(const FeatureMatrix& m) {
    std::string out = "subject_id,second_ts";
    for (const auto& name : m.column_names) {
        out.push_back(',');
        out += name;
    }
    out.push_back('\n');
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += m.row_keys[i].subject_id;
        out.push_back(',');
        out += std::to_string(m.row_keys[i].second_ts);
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out.push_back(',');
            out += format_double_17(m.values(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

FeatureMatrix feature_matrix_from_csv(const std::string& content) {
    const auto lines = split_lines(content);
    if (lines.empty()) throw DataError("feature csv: missing header");
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 3 || header[0] != "subject_id" || header[1] != "second_ts") {
        throw DataError("feature csv: expected header 'subject_id,second_ts,<features>'");
    }

    FeatureMatrix m;
    for (std::size_t j = 2; j < header.size(); ++j) {
        m.column_names.emplace_back(header[j]);
    }
    for (std::size_t a = 0; a < m.column_names.size(); ++a) {
        for (std::size_t b = a + 1; b < m.column_names.size(); ++b) {
            if (m.column_names[a] == m.column_names[b]) {
                throw DataError("feature csv: duplicate column '" + m.column_names[a] + "'");
            }
        }
    }
    const Eigen::Index d = static_cast<Eigen::Index>(m.column_names.size());
    const Eigen::Index n = static_cast<Eigen::Index>(lines.size()) - 1;
    m.values.resize(n, d);
    m.row_keys.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t line_no = static_cast<std::size_t>(i) + 2;
        const auto fields = split_csv_line(lines[i + 1]);
        if (fields.size() != header.size()) {
            throw DataError("feature csv, line " + std::to_string(line_no) +
                            ": field count mismatch");
        }
        const auto ts = parse_int64(fields[1]);
        if (!ts) {
            throw DataError("feature csv, line " + std::to_string(line_no) +
                            ": bad second_ts");
        }
        m.row_keys.push_back({std::string(fields[0]), *ts});
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto v = parse_double(fields[j + 2]);
            if (!v || !std::isfinite(*v)) {
                throw DataError("feature csv, line " + std::to_string(line_no) +
                                ": bad value '" + std::string(fields[j + 2]) + "'");
            }
            m.values(i, j) = *v;
        }
    }
    return m;
}

}  // namespace wearlab
