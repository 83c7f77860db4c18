#include "sleepgeo/types.hpp"

#include <iostream>

namespace sleepgeo {

void warn(WarningLog* log, std::string message) {
    if (log != nullptr) {
        log->push_back(std::move(message));
    } else {
        std::cerr << "warning: " << message << "\n";
    }
}

const char* stage_name(SleepStage s) {
    switch (s) {
        case SleepStage::Awake: return "Awake";
        case SleepStage::Rem: return "REM";
        case SleepStage::N1: return "N1";
        case SleepStage::N2: return "N2";
        case SleepStage::N3: return "N3";
    }
    return "?";
}

SleepStage stage_from_code(int code) {
    if (code < 1 || code > kNumStages) {
        throw DataError("stage code out of range 1..5: " + std::to_string(code));
    }
    return static_cast<SleepStage>(code);
}

const Channel& Recording::channel(const std::string& label) const {
    for (const Channel& c : channels) {
        if (c.label == label) return c;
    }
    throw DataError("no channel labeled '" + label + "' in recording");
}

} // namespace sleepgeo
