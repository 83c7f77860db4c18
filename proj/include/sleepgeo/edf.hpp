#ifndef SLEEPGEO_EDF_HPP
#define SLEEPGEO_EDF_HPP

#include "sleepgeo/types.hpp"

#include <cstddef>
#include <span>
#include <string_view>

namespace sleepgeo {

// Parses a continuous EDF/EDF+C recording with 16-bit little-endian samples.
// Digital values are rescaled to physical units from the per-signal
// (physical_min, physical_max, digital_min, digital_max) header fields.
// Annotation signals ("EDF Annotations") are skipped; use parse_hypnogram
// to read them. EDF+D (discontinuous) files are rejected.
Recording parse_edf(std::span<const unsigned char> bytes);
Recording parse_edf_file(const std::string& path);

// Accepts either an EDF+ file carrying an "EDF Annotations" signal or a
// plain CSV "onset_s,duration_s,label". Raw labels are kept verbatim,
// including "Movement time" and "Sleep stage ?".
Hypnogram parse_hypnogram(std::span<const unsigned char> bytes);
Hypnogram parse_hypnogram_file(const std::string& path);

// Maps a raw annotation label to a stage. N4 relabels to N3; movement and
// unknown labels return nullopt (excluded). Accepts both the long
// "Sleep stage X" form and bare "W"/"R"/"N1".. labels.
std::optional<SleepStage> stage_from_label(std::string_view raw,
                                           std::string* exclusion_reason = nullptr);

struct Segmentation {
    std::vector<LabeledEpoch> epochs;
    int dropped = 0; // epochs whose window extends past the signal end
    int samples_per_epoch = 0;
};

// Cuts the recording into labeled 30-second epochs. Epochs not covered by
// any hypnogram entry are marked excluded ("unannotated").
Segmentation segment_epochs(const Recording& rec, const Hypnogram& hyp,
                            double epoch_s = 30.0, WarningLog* warnings = nullptr);

// Trims leading/trailing runs of Awake epochs to at most margin_min minutes
// adjacent to the first/last non-Awake epoch. Interior epochs are untouched;
// only Awake epochs are ever removed.
std::vector<LabeledEpoch> truncate_wake(std::vector<LabeledEpoch> epochs,
                                        double margin_min, double epoch_s = 30.0,
                                        WarningLog* warnings = nullptr);

// The samples of one epoch window in one channel. The window length
// epoch_s * sampling_rate must be integral (3000 samples at 100 Hz).
std::span<const double> epoch_window(const Channel& channel, int epoch_index,
                                     double epoch_s = 30.0);

} // namespace sleepgeo

#endif
