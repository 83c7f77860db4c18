#include "support/edf_writer.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace sleepgeo::testing {

namespace {

void put_field(std::vector<unsigned char>& out, const std::string& value, size_t width) {
    if (value.size() > width) throw std::runtime_error("EDF field too wide: " + value);
    for (size_t i = 0; i < width; ++i) {
        out.push_back(i < value.size() ? static_cast<unsigned char>(value[i]) : ' ');
    }
}

std::string num_field(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void put_i16le(std::vector<unsigned char>& out, std::int16_t v) {
    out.push_back(static_cast<unsigned char>(static_cast<std::uint16_t>(v) & 0xff));
    out.push_back(static_cast<unsigned char>(static_cast<std::uint16_t>(v) >> 8));
}

std::vector<unsigned char> write_header(const std::vector<FixtureSignal>& signals,
                                        int num_records, double record_duration_s,
                                        const std::string& reserved) {
    const size_t ns = signals.size();
    std::vector<unsigned char> out;
    put_field(out, "0", 8);
    put_field(out, "test patient", 80);
    put_field(out, "test recording", 80);
    put_field(out, "01.01.01", 8);
    put_field(out, "00.00.00", 8);
    put_field(out, std::to_string(256 + 256 * ns), 8);
    put_field(out, reserved, 44);
    put_field(out, std::to_string(num_records), 8);
    put_field(out, num_field(record_duration_s), 8);
    put_field(out, std::to_string(ns), 4);

    for (const FixtureSignal& s : signals) put_field(out, s.label, 16);
    for (size_t i = 0; i < ns; ++i) put_field(out, "test transducer", 80);
    for (size_t i = 0; i < ns; ++i) put_field(out, "uV", 8);
    for (const FixtureSignal& s : signals) put_field(out, num_field(s.physical_min), 8);
    for (const FixtureSignal& s : signals) put_field(out, num_field(s.physical_max), 8);
    for (const FixtureSignal& s : signals) put_field(out, std::to_string(s.digital_min), 8);
    for (const FixtureSignal& s : signals) put_field(out, std::to_string(s.digital_max), 8);
    for (size_t i = 0; i < ns; ++i) put_field(out, "", 80);
    for (const FixtureSignal& s : signals) put_field(out, std::to_string(s.samples_per_record), 8);
    for (size_t i = 0; i < ns; ++i) put_field(out, "", 32);
    return out;
}

} // namespace

std::vector<unsigned char> write_edf(const std::vector<FixtureSignal>& signals, int num_records,
                                     double record_duration_s) {
    for (const FixtureSignal& s : signals) {
        if (s.digital.size() !=
            static_cast<size_t>(s.samples_per_record) * static_cast<size_t>(num_records)) {
            throw std::runtime_error("signal '" + s.label + "' sample count mismatch");
        }
    }
    std::vector<unsigned char> out = write_header(signals, num_records, record_duration_s, "");
    for (int r = 0; r < num_records; ++r) {
        for (const FixtureSignal& s : signals) {
            for (int i = 0; i < s.samples_per_record; ++i) {
                put_i16le(out, s.digital[static_cast<size_t>(r) *
                                             static_cast<size_t>(s.samples_per_record) +
                                         static_cast<size_t>(i)]);
            }
        }
    }
    return out;
}

std::vector<unsigned char> write_edfplus_annotations(
    const std::vector<FixtureAnnotation>& annotations, double record_duration_s) {
    // One TAL per record; size the record to fit the longest TAL.
    std::vector<std::string> tals;
    size_t max_len = 0;
    for (size_t r = 0; r < annotations.size(); ++r) {
        const FixtureAnnotation& a = annotations[r];
        std::string tal = "+" + num_field(static_cast<double>(r) * record_duration_s) +
                          "\x14\x14"; // record timestamp TAL, empty annotation
        tal.push_back('\0');
        tal += "+" + num_field(a.onset_s) + "\x15" + num_field(a.duration_s) + "\x14" + a.text +
               "\x14";
        tal.push_back('\0');
        max_len = std::max(max_len, tal.size());
        tals.push_back(std::move(tal));
    }
    const int spr = static_cast<int>((max_len + 1) / 2) + 1;

    FixtureSignal ann;
    ann.label = "EDF Annotations";
    ann.physical_min = 0;
    ann.physical_max = 1;
    ann.digital_min = -32768;
    ann.digital_max = 32767;
    ann.samples_per_record = spr;

    std::vector<unsigned char> out = write_header({ann}, static_cast<int>(annotations.size()),
                                                  record_duration_s, "EDF+C");
    for (const std::string& tal : tals) {
        std::string padded = tal;
        padded.resize(static_cast<size_t>(spr) * 2, '\0');
        for (char c : padded) out.push_back(static_cast<unsigned char>(c));
    }
    return out;
}

} // namespace sleepgeo::testing
