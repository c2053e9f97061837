#include "wearlab/types.hpp"

#include <array>
#include <cmath>

namespace wearlab {

namespace {

const std::array<Modality, 4> kModalities = {{
    {ModalityKind::HeartRate, "hr", 1, 1},
    {ModalityKind::Accelerometer, "accel", 8, 3},
    {ModalityKind::Gsr, "gsr", 5, 1},
    {ModalityKind::AmbientLight, "light", 2, 1},
}};

}  // namespace

const Modality& modality(ModalityKind kind) {
    for (const auto& m : kModalities) {
        if (m.kind == kind) return m;
    }
    throw DataError("unknown modality kind");
}

const Modality& modality_by_name(const std::string& name) {
    for (const auto& m : kModalities) {
        if (m.name == name) return m;
    }
    throw DataError("unknown modality name: '" + name + "'");
}

const SensorStream* RecordingBlock::find(ModalityKind kind) const {
    for (const auto& s : streams) {
        if (s.modality.kind == kind) return &s;
    }
    return nullptr;
}

void require_finite(const Eigen::MatrixXd& m, const std::string& context) {
    if (!m.allFinite()) {
        throw NumericError(context + ": non-finite value encountered");
    }
}

}  // namespace wearlab
