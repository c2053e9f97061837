#include <doctest.h>

#include "wearlab/ingest.hpp"
#include "wearlab/rng.hpp"
#include "wearlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

using namespace wearlab;

namespace {

SensorStream hr_stream(const std::vector<std::pair<std::int64_t, double>>& rows) {
    SensorStream s{modality(ModalityKind::HeartRate), {}};
    for (const auto& [t, v] : rows) s.samples.push_back({t, {v}});
    return s;
}

RecordingBlock block_of(std::vector<SensorStream> streams, std::int64_t start,
                        std::int64_t duration) {
    RecordingBlock b;
    b.subject_id = "s1";
    b.start_ms = start;
    b.duration_ms = duration;
    b.streams = std::move(streams);
    return b;
}

FeatureMatrix tiny_matrix(const std::vector<std::vector<double>>& rows,
                          std::vector<std::string> names) {
    FeatureMatrix m;
    m.column_names = std::move(names);
    m.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(m.column_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
        }
        m.row_keys.push_back({"s1", static_cast<std::int64_t>(i)});
    }
    return m;
}

}  // namespace

TEST_CASE("modality table matches the device rates") {
    CHECK(modality(ModalityKind::HeartRate).nominal_rate_hz == 1);
    CHECK(modality(ModalityKind::Accelerometer).nominal_rate_hz == 8);
    CHECK(modality(ModalityKind::Gsr).nominal_rate_hz == 5);
    CHECK(modality(ModalityKind::AmbientLight).nominal_rate_hz == 2);
    CHECK(modality(ModalityKind::Accelerometer).channels == 3);
    CHECK(modality(ModalityKind::HeartRate).channels == 1);
    CHECK_THROWS_AS(modality_by_name("thermometer"), DataError);
}

TEST_CASE("parse_stream handles the header-only file") {
    const auto s = parse_stream("timestamp_ms,value\n", modality(ModalityKind::HeartRate));
    CHECK(s.samples.empty());
}

TEST_CASE("parse_stream reads heart-rate rows at 1 Hz spacing") {
    const auto s = parse_stream("timestamp_ms,value\n0,70\n1000,71\n2000,69\n",
                                modality(ModalityKind::HeartRate));
    REQUIRE(s.samples.size() == 3);
    CHECK(s.samples[0].values[0] == 70.0);
    CHECK(s.samples[1].timestamp_ms - s.samples[0].timestamp_ms ==
          1000 / s.modality.nominal_rate_hz);
    CHECK(s.samples[2].timestamp_ms - s.samples[1].timestamp_ms == 1000);
}

TEST_CASE("parse_stream reports the offending line") {
    SUBCASE("accelerometer row with two values") {
        try {
            parse_stream("timestamp_ms,x,y,z\n0,0.1,0.2\n",
                         modality(ModalityKind::Accelerometer));
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("garbage value") {
        try {
            parse_stream("timestamp_ms,value\n0,70\n1000,abc\n",
                         modality(ModalityKind::HeartRate));
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("non-monotone timestamp") {
        try {
            parse_stream("timestamp_ms,value\n1000,70\n1000,71\n",
                         modality(ModalityKind::HeartRate));
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
            CHECK(std::string(e.what()).find("increasing") != std::string::npos);
        }
    }
    SUBCASE("non-positive heart rate") {
        CHECK_THROWS_AS(parse_stream("timestamp_ms,value\n0,0\n",
                                     modality(ModalityKind::HeartRate)),
                        DataError);
    }
    SUBCASE("wrong header") {
        CHECK_THROWS_AS(parse_stream("time,value\n0,70\n",
                                     modality(ModalityKind::HeartRate)),
                        DataError);
    }
}

TEST_CASE("stream serialization round-trips byte-identically") {
    // Simulated streams cover all four modalities and fractional values.
    ActivitySchedule schedule;
    schedule.segments = {{30, ActivityRegime::Rest}, {30, ActivityRegime::Run}};
    const auto streams = gen_sensor_streams(schedule, 99);
    for (const auto& s : streams) {
        const std::string once = serialize_stream(s);
        const SensorStream reparsed = parse_stream(once, s.modality);
        CHECK(reparsed.samples.size() == s.samples.size());
        CHECK(serialize_stream(reparsed) == once);
    }
}

TEST_CASE("segment_blocks splits continuous data into on-periods") {
    // 6 minutes of 1 Hz HR starting at the schedule origin.
    std::vector<std::pair<std::int64_t, double>> rows;
    for (int t = 0; t < 360; ++t) rows.push_back({t * 1000, 70.0});
    const auto result = segment_blocks({hr_stream(rows)}, {}, "s1");

    REQUIRE(result.blocks.size() == 1);
    CHECK(result.blocks[0].start_ms == 0);
    CHECK(result.blocks[0].streams.at(0).samples.size() == 180);
    CHECK(result.blocked_samples == 180);
    CHECK(result.anomaly_samples == 180);
    REQUIRE(result.off_period_counts.size() == 1);
    CHECK(result.off_period_counts[0].first == "hr");
    CHECK(result.off_period_counts[0].second == 180);
    CHECK(result.total_samples == result.blocked_samples + result.anomaly_samples);
}

TEST_CASE("segment_blocks rejects empty input") {
    CHECK_THROWS_AS(segment_blocks({}, {}, "s1"), DataError);
    SensorStream empty{modality(ModalityKind::HeartRate), {}};
    CHECK_THROWS_AS(segment_blocks({empty}, {}, "s1"), DataError);
}

TEST_CASE("segment_blocks rejects duplicate modality streams") {
    const auto a = hr_stream({{0, 70.0}});
    const auto b = hr_stream({{500, 71.0}});
    CHECK_THROWS_AS(segment_blocks({a, b}, {}, "s1"), DataError);
}

TEST_CASE("two weeks of the default cadence yields 10 blocks per hour") {
    std::vector<std::pair<std::int64_t, double>> rows;
    const std::int64_t seconds = 14LL * 24 * 3600;
    rows.reserve(seconds);
    for (std::int64_t t = 0; t < seconds; ++t) rows.push_back({t * 1000, 72.0});
    const auto result = segment_blocks({hr_stream(rows)}, {}, "s1");

    CHECK(result.blocks.size() == 14 * 24 * 10);
    for (const auto& b : result.blocks) {
        CHECK(b.streams.at(0).samples.size() == 180);
    }
}

TEST_CASE("segment_blocks is anchored by rounding the earliest sample down") {
    // First sample at t=400s lands inside the second schedule period
    // [360s, 720s): on-window [360s, 540s).
    std::vector<std::pair<std::int64_t, double>> rows;
    for (int t = 400; t < 560; ++t) rows.push_back({t * 1000, 70.0});
    const auto result = segment_blocks({hr_stream(rows)}, {}, "s1");
    REQUIRE(result.blocks.size() == 1);
    CHECK(result.blocks[0].start_ms == 360000);
    CHECK(result.blocks[0].streams.at(0).samples.size() == 140);  // 400..539
    CHECK(result.anomaly_samples == 20);                          // 540..559
}

TEST_CASE("segment_blocks partitions every sample exactly once") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        ActivitySchedule schedule;
        schedule.segments = {{60 + static_cast<std::int64_t>(rng.uniform_index(300)),
                              ActivityRegime::Walk}};
        schedule.start_ms = static_cast<std::int64_t>(rng.uniform_index(1000000));
        const auto streams = gen_sensor_streams(schedule, trial);
        const auto result = segment_blocks(streams, {}, "s1");

        std::int64_t input = 0;
        for (const auto& s : streams) input += static_cast<std::int64_t>(s.samples.size());
        std::int64_t in_blocks = 0;
        for (const auto& b : result.blocks) {
            for (const auto& s : b.streams) {
                in_blocks += static_cast<std::int64_t>(s.samples.size());
                for (const auto& sample : s.samples) {
                    CHECK(sample.timestamp_ms >= b.start_ms);
                    CHECK(sample.timestamp_ms < b.start_ms + b.duration_ms);
                }
            }
        }
        CHECK(input == result.total_samples);
        CHECK(in_blocks == result.blocked_samples);
        CHECK(input == result.blocked_samples + result.anomaly_samples);
    }
}

TEST_CASE("align_features computes the constant-magnitude example") {
    SensorStream accel{modality(ModalityKind::Accelerometer), {}};
    for (int i = 0; i < 8; ++i) accel.samples.push_back({i * 125, {1.0, 0.0, 0.0}});
    const auto block = block_of({hr_stream({{0, 70.0}}), accel}, 0, 180000);

    const auto result = align_features(block, FeatureRecipe::HrAccelMag);
    REQUIRE(result.matrix.rows() == 1);
    CHECK(result.matrix.values(0, 0) == doctest::Approx(70.0));
    CHECK(result.matrix.values(0, 1) == doctest::Approx(1.0));
    CHECK(result.matrix.column_names == std::vector<std::string>{"hr", "accel_mag"});
    CHECK(result.dropped_seconds == 0);
    CHECK(result.matrix.row_keys[0].subject_id == "s1");
    CHECK(result.matrix.row_keys[0].second_ts == 0);
}

TEST_CASE("align_features drops seconds missing a modality") {
    SensorStream accel{modality(ModalityKind::Accelerometer), {}};
    accel.samples.push_back({0, {0.3, 0.4, 0.0}});  // second 0 only
    const auto block =
        block_of({hr_stream({{0, 70.0}, {1000, 71.0}}), accel}, 0, 180000);

    const auto result = align_features(block, FeatureRecipe::HrAccelMag);
    CHECK(result.matrix.rows() == 1);  // second 1 has HR but no accel
    CHECK(result.dropped_seconds == 1);
    CHECK(result.matrix.values(0, 1) == doctest::Approx(0.5));  // |(0.3,0.4,0)|
}

TEST_CASE("align_features emits 180 rows for a full block at device rates") {
    ActivitySchedule schedule;
    schedule.segments = {{180, ActivityRegime::Rest}};
    const auto streams = gen_sensor_streams(schedule, 5);
    const auto segmented = segment_blocks(streams, {}, "s1");
    REQUIRE(segmented.blocks.size() == 1);

    for (const auto recipe : {FeatureRecipe::HrAccelMag, FeatureRecipe::HrAccelXyz}) {
        const auto result = align_features(segmented.blocks[0], recipe);
        CHECK(result.matrix.rows() == 180);
        CHECK(result.matrix.rows() <= segmented.blocks[0].duration_ms / 1000);
        CHECK(result.matrix.values.allFinite());
        CHECK(result.matrix.cols() == (recipe == FeatureRecipe::HrAccelMag ? 2 : 4));
    }
}

TEST_CASE("align_features requires both modalities") {
    const auto hr_only = block_of({hr_stream({{0, 70.0}})}, 0, 180000);
    CHECK_THROWS_AS(align_features(hr_only, FeatureRecipe::HrAccelMag), DataError);

    SensorStream accel{modality(ModalityKind::Accelerometer), {}};
    accel.samples.push_back({0, {1.0, 0.0, 0.0}});
    const auto accel_only = block_of({accel}, 0, 180000);
    CHECK_THROWS_AS(align_features(accel_only, FeatureRecipe::HrAccelMag), DataError);
}

TEST_CASE("standardize matches the hand-worked column") {
    const auto m = tiny_matrix({{2.0}, {4.0}, {6.0}}, {"hr"});
    const auto out = standardize(m);
    CHECK(out.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(out.values(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.values(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(out.standardization.has_value());
    CHECK(out.standardization->mean[0] == doctest::Approx(4.0));
    CHECK(out.standardization->stddev[0] == doctest::Approx(2.0));
}

TEST_CASE("standardize maps constant columns to zero and flags them") {
    const auto m = tiny_matrix({{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}}, {"a", "b"});
    const auto out = standardize(m);
    CHECK(out.values.col(0).isZero(0.0));
    CHECK(out.standardization->stddev[0] == 0.0);
    CHECK(out.standardization->stddev[1] > 0.0);
}

TEST_CASE("standardize is idempotent on standardized data") {
    Rng rng(21);
    FeatureMatrix m;
    m.column_names = {"a", "b", "c"};
    m.values.resize(40, 3);
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 3; ++j) m.values(i, j) = rng.normal() * 10 + 5;
        m.row_keys.push_back({"s1", i});
    }
    const auto once = standardize(m);
    const auto twice = standardize(once);
    CHECK((twice.values - once.values).cwiseAbs().maxCoeff() < 1e-12);

    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(once.values.col(j).mean()) < 1e-12);
        const double ss = once.values.col(j).array().square().sum();
        CHECK(std::sqrt(ss / 39.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("destandardize inverts standardize") {
    Rng rng(22);
    FeatureMatrix m;
    m.column_names = {"a", "b"};
    m.values.resize(25, 2);
    for (int i = 0; i < 25; ++i) {
        m.values(i, 0) = 60.0 + 30.0 * rng.uniform();
        m.values(i, 1) = 1e6 + rng.normal();  // large offset exercises stability
        m.row_keys.push_back({"s1", i});
    }
    const auto restored = destandardize(standardize(m));
    CHECK((restored.values - m.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("standardize needs two rows") {
    CHECK_THROWS_AS(standardize(tiny_matrix({{1.0}}, {"a"})), DataError);
}

TEST_CASE("whiten produces identity sample covariance") {
    Rng rng(31);
    FeatureMatrix m;
    m.column_names = {"a", "b"};
    m.values.resize(300, 2);
    for (int i = 0; i < 300; ++i) {
        const double x = rng.normal();
        m.values(i, 0) = 3.0 * x + 1.0;
        m.values(i, 1) = -2.0 * x + 0.5 * rng.normal();  // strongly correlated
        m.row_keys.push_back({"s1", i});
    }
    const auto w = whiten(m);
    const Eigen::MatrixXd cov =
        (w.values.transpose() * w.values) / (w.values.rows() - 1.0);
    CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);

    FeatureMatrix degenerate = m;
    degenerate.values.col(1) = 2.0 * degenerate.values.col(0);
    CHECK_THROWS_AS(whiten(degenerate), NumericError);
}

TEST_CASE("feature matrix csv round-trips exactly") {
    Rng rng(41);
    FeatureMatrix m;
    m.column_names = {"hr", "accel_mag"};
    m.values.resize(50, 2);
    for (int i = 0; i < 50; ++i) {
        m.values(i, 0) = 60.0 + 100.0 * rng.uniform();
        m.values(i, 1) = rng.normal();
        m.row_keys.push_back({"subject-7", 1600000000 + i});
    }
    const std::string csv = feature_matrix_to_csv(m);
    const auto back = feature_matrix_from_csv(csv);
    CHECK(back.column_names == m.column_names);
    REQUIRE(back.rows() == m.rows());
    CHECK((back.values.array() == m.values.array()).all());
    CHECK(back.row_keys[49].subject_id == "subject-7");
    CHECK(back.row_keys[49].second_ts == 1600000049);
    CHECK(feature_matrix_to_csv(back) == csv);
}

TEST_CASE("pool_matrices concatenates and checks columns") {
    const auto a = tiny_matrix({{1.0, 2.0}}, {"x", "y"});
    const auto b = tiny_matrix({{3.0, 4.0}, {5.0, 6.0}}, {"x", "y"});
    const auto pooled = pool_matrices({a, b});
    CHECK(pooled.rows() == 3);
    CHECK(pooled.values(2, 1) == 6.0);

    const auto other = tiny_matrix({{1.0, 2.0}}, {"x", "z"});
    CHECK_THROWS_AS(pool_matrices({a, other}), DataError);
}
