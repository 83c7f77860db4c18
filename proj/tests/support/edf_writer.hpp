#ifndef SLEEPGEO_TESTS_EDF_WRITER_HPP
#define SLEEPGEO_TESTS_EDF_WRITER_HPP

// Test-only EDF writer, built directly from the format description and kept
// independent of the parser it exercises.

#include <cstdint>
#include <string>
#include <vector>

namespace sleepgeo::testing {

struct FixtureSignal {
    std::string label;
    double physical_min = -100.0;
    double physical_max = 100.0;
    int digital_min = -32768;
    int digital_max = 32767;
    int samples_per_record = 0;
    std::vector<std::int16_t> digital; // samples_per_record * num_records values
};

std::vector<unsigned char> write_edf(const std::vector<FixtureSignal>& signals, int num_records,
                                     double record_duration_s);

struct FixtureAnnotation {
    double onset_s = 0.0;
    double duration_s = 0.0;
    std::string text;
};

// EDF+C file whose only signal is an "EDF Annotations" channel carrying the
// given TALs, one annotation per data record.
std::vector<unsigned char> write_edfplus_annotations(
    const std::vector<FixtureAnnotation>& annotations, double record_duration_s);

} // namespace sleepgeo::testing

#endif
