#ifndef SLEEPGEO_TYPES_HPP
#define SLEEPGEO_TYPES_HPP

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleepgeo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Input/format problems (bad header bytes, malformed CSV, ...). CLI exit code 2.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Semantically invalid data (mismatched sizes, violated preconditions). CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure (disconnected graph, silent epoch, ...). CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Optional sink for non-fatal diagnostics; ops append instead of printing
// when a sink is supplied.
using WarningLog = std::vector<std::string>;

void warn(WarningLog* log, std::string message);

// Five-class staging, integer codes fixed by convention: Awake=1, REM=2,
// N1=3, N2=4, N3=5.
enum class SleepStage : int {
    Awake = 1,
    Rem = 2,
    N1 = 3,
    N2 = 4,
    N3 = 5,
};

constexpr int kNumStages = 5;

const char* stage_name(SleepStage s);
SleepStage stage_from_code(int code);

struct Channel {
    std::string label;
    double sampling_rate = 0.0;  // Hz
    std::vector<double> samples; // physical units
};

struct Recording {
    std::vector<Channel> channels;
    std::string start_date; // dd.mm.yy as stored in the file
    std::string start_time; // hh.mm.ss
    double duration_s = 0.0;

    const Channel& channel(const std::string& label) const;
};

struct HypnogramEntry {
    double onset_s = 0.0;
    double duration_s = 0.0;
    std::string label; // raw annotation text, kept verbatim
};

struct Hypnogram {
    std::vector<HypnogramEntry> entries; // non-overlapping, onset non-decreasing
};

// One 30-second scoring window. Windows are addressed by epoch index into
// the parent Recording (see epoch_window), never copied.
struct LabeledEpoch {
    int index = 0;                   // epoch ordinal within the recording
    std::optional<SleepStage> stage; // nullopt = excluded
    std::string exclusion_reason;    // set iff stage is nullopt

    bool excluded() const { return !stage.has_value(); }
};

} // namespace sleepgeo

#endif
