#include "sleepgeo/edf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace sleepgeo {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// EDF header fields are fixed-width ASCII.
std::string_view ascii_field(std::span<const unsigned char> bytes, size_t offset, size_t len,
                             const char* what) {
    if (offset + len > bytes.size()) {
        throw ParseError(std::string("EDF header truncated while reading ") + what +
                         " at byte offset " + std::to_string(offset));
    }
    return std::string_view(reinterpret_cast<const char*>(bytes.data()) + offset, len);
}

long parse_long_field(std::string_view field, size_t offset, const char* what) {
    std::string_view t = trim(field);
    long value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ParseError(std::string("malformed EDF integer field '") + std::string(t) +
                         "' (" + what + ") at byte offset " + std::to_string(offset));
    }
    return value;
}

double parse_double_field(std::string_view field, size_t offset, const char* what) {
    std::string t(trim(field));
    if (t.empty()) {
        throw ParseError(std::string("empty EDF numeric field (") + what +
                         ") at byte offset " + std::to_string(offset));
    }
    size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != t.size()) {
        throw ParseError(std::string("malformed EDF numeric field '") + t + "' (" + what +
                         ") at byte offset " + std::to_string(offset));
    }
    return value;
}

constexpr size_t kFixedHeader = 256;

struct SignalHeader {
    std::string label;
    double physical_min = 0, physical_max = 0;
    long digital_min = 0, digital_max = 0;
    long samples_per_record = 0;
    bool is_annotation = false;
};

struct EdfLayout {
    long num_records = 0;
    double record_duration_s = 0;
    std::vector<SignalHeader> signals;
    size_t data_offset = 0;
    long record_size_bytes = 0;
};

EdfLayout parse_header(std::span<const unsigned char> bytes) {
    if (bytes.empty()) {
        throw ParseError("empty input is not an EDF file");
    }
    if (bytes.size() < kFixedHeader) {
        throw ParseError("EDF fixed header incomplete: got " + std::to_string(bytes.size()) +
                         " bytes, need 256");
    }
    std::string_view version = trim(ascii_field(bytes, 0, 8, "version"));
    if (version != "0") {
        throw ParseError("unsupported EDF version field '" + std::string(version) +
                         "' at byte offset 0");
    }
    std::string_view reserved = ascii_field(bytes, 192, 44, "reserved");
    if (reserved.substr(0, 5) == "EDF+D") {
        throw ParseError("EDF+D discontinuous recordings are not supported");
    }

    EdfLayout layout;
    long header_bytes = parse_long_field(ascii_field(bytes, 184, 8, "header size"), 184, "header size");
    layout.num_records = parse_long_field(ascii_field(bytes, 236, 8, "record count"), 236, "record count");
    layout.record_duration_s =
        parse_double_field(ascii_field(bytes, 244, 8, "record duration"), 244, "record duration");
    long ns = parse_long_field(ascii_field(bytes, 252, 4, "signal count"), 252, "signal count");

    if (ns <= 0) throw ParseError("EDF signal count must be positive, got " + std::to_string(ns));
    if (layout.num_records < 0) {
        throw ParseError("EDF record count is unknown (-1); only complete files are supported");
    }

    // Per-signal headers are field-major: all labels, then all transducers, ...
    size_t base = kFixedHeader;
    const size_t w_label = 16, w_transducer = 80, w_dim = 8, w_pmin = 8, w_pmax = 8, w_dmin = 8,
                 w_dmax = 8, w_prefilter = 80, w_spr = 8, w_reserved = 32;
    const size_t per_signal = w_label + w_transducer + w_dim + w_pmin + w_pmax + w_dmin + w_dmax +
                              w_prefilter + w_spr + w_reserved;
    if (bytes.size() < kFixedHeader + per_signal * static_cast<size_t>(ns)) {
        throw ParseError("EDF signal headers truncated at byte offset " +
                         std::to_string(bytes.size()));
    }
    size_t off_label = base;
    size_t off_pmin = base + static_cast<size_t>(ns) * (w_label + w_transducer + w_dim);
    size_t off_pmax = off_pmin + static_cast<size_t>(ns) * w_pmin;
    size_t off_dmin = off_pmax + static_cast<size_t>(ns) * w_pmax;
    size_t off_dmax = off_dmin + static_cast<size_t>(ns) * w_dmin;
    size_t off_spr = off_dmax + static_cast<size_t>(ns) * (w_dmax + w_prefilter);

    layout.signals.resize(static_cast<size_t>(ns));
    for (long i = 0; i < ns; ++i) {
        SignalHeader& sig = layout.signals[static_cast<size_t>(i)];
        size_t o = off_label + static_cast<size_t>(i) * w_label;
        sig.label = std::string(trim(ascii_field(bytes, o, w_label, "signal label")));
        sig.is_annotation = sig.label == "EDF Annotations";

        o = off_pmin + static_cast<size_t>(i) * w_pmin;
        sig.physical_min = parse_double_field(ascii_field(bytes, o, w_pmin, "physical min"), o,
                                              "physical min");
        o = off_pmax + static_cast<size_t>(i) * w_pmax;
        sig.physical_max = parse_double_field(ascii_field(bytes, o, w_pmax, "physical max"), o,
                                              "physical max");
        o = off_dmin + static_cast<size_t>(i) * w_dmin;
        sig.digital_min = parse_long_field(ascii_field(bytes, o, w_dmin, "digital min"), o,
                                           "digital min");
        o = off_dmax + static_cast<size_t>(i) * w_dmax;
        sig.digital_max = parse_long_field(ascii_field(bytes, o, w_dmax, "digital max"), o,
                                           "digital max");
        o = off_spr + static_cast<size_t>(i) * w_spr;
        sig.samples_per_record = parse_long_field(
            ascii_field(bytes, o, w_spr, "samples per record"), o, "samples per record");
        if (sig.samples_per_record <= 0) {
            throw ParseError("signal '" + sig.label + "' has non-positive samples-per-record");
        }
        layout.record_size_bytes += 2 * sig.samples_per_record;
    }

    layout.data_offset = kFixedHeader + per_signal * static_cast<size_t>(ns);
    if (header_bytes != static_cast<long>(layout.data_offset)) {
        // Tolerate a wrong header-size field only if it does not point before the signal headers.
        if (header_bytes < static_cast<long>(layout.data_offset)) {
            throw ParseError("EDF header size field " + std::to_string(header_bytes) +
                             " disagrees with signal count at byte offset 184");
        }
        layout.data_offset = static_cast<size_t>(header_bytes);
    }
    return layout;
}

int16_t read_i16le(const unsigned char* p) {
    return static_cast<int16_t>(static_cast<uint16_t>(p[0]) | (static_cast<uint16_t>(p[1]) << 8));
}

} // namespace

Recording parse_edf(std::span<const unsigned char> bytes) {
    EdfLayout layout = parse_header(bytes);

    Recording rec;
    rec.start_date = std::string(trim(ascii_field(bytes, 168, 8, "start date")));
    rec.start_time = std::string(trim(ascii_field(bytes, 176, 8, "start time")));
    rec.duration_s = static_cast<double>(layout.num_records) * layout.record_duration_s;

    struct Slot {
        size_t channel_index;
        double gain;
        double digital_min;
        double physical_min;
    };
    std::vector<Slot> slots(layout.signals.size());
    for (size_t i = 0; i < layout.signals.size(); ++i) {
        const SignalHeader& sig = layout.signals[i];
        if (sig.is_annotation) continue;
        if (sig.digital_min == sig.digital_max) {
            throw ParseError("signal '" + sig.label +
                             "': digital min equals digital max, cannot rescale");
        }
        Channel ch;
        ch.label = sig.label;
        ch.sampling_rate =
            static_cast<double>(sig.samples_per_record) / layout.record_duration_s;
        ch.samples.reserve(static_cast<size_t>(sig.samples_per_record * layout.num_records));
        double gain = (sig.physical_max - sig.physical_min) /
                      static_cast<double>(sig.digital_max - sig.digital_min);
        slots[i] = Slot{rec.channels.size(), gain, static_cast<double>(sig.digital_min),
                        sig.physical_min};
        rec.channels.push_back(std::move(ch));
    }
    if (rec.channels.empty()) {
        throw ParseError("EDF file contains no signal channels");
    }

    size_t pos = layout.data_offset;
    for (long r = 0; r < layout.num_records; ++r) {
        if (pos + static_cast<size_t>(layout.record_size_bytes) > bytes.size()) {
            throw ParseError("EDF data truncated in record " + std::to_string(r) + " of " +
                             std::to_string(layout.num_records));
        }
        for (size_t i = 0; i < layout.signals.size(); ++i) {
            const SignalHeader& sig = layout.signals[i];
            size_t nbytes = 2 * static_cast<size_t>(sig.samples_per_record);
            if (!sig.is_annotation) {
                Channel& ch = rec.channels[slots[i].channel_index];
                for (long s = 0; s < sig.samples_per_record; ++s) {
                    int16_t d = read_i16le(bytes.data() + pos + 2 * static_cast<size_t>(s));
                    ch.samples.push_back(
                        (static_cast<double>(d) - slots[i].digital_min) * slots[i].gain +
                        slots[i].physical_min);
                }
            }
            pos += nbytes;
        }
    }
    return rec;
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

bool looks_like_edf(std::span<const unsigned char> bytes) {
    if (bytes.size() < 8) return false;
    std::string_view version(reinterpret_cast<const char*>(bytes.data()), 8);
    return trim(version) == "0";
}

void validate_hypnogram(Hypnogram& hyp) {
    std::stable_sort(hyp.entries.begin(), hyp.entries.end(),
                     [](const HypnogramEntry& a, const HypnogramEntry& b) {
                         return a.onset_s < b.onset_s;
                     });
    for (size_t i = 0; i < hyp.entries.size(); ++i) {
        const HypnogramEntry& e = hyp.entries[i];
        if (e.duration_s < 0) {
            throw ParseError("hypnogram entry " + std::to_string(i) + " has negative duration " +
                             std::to_string(e.duration_s));
        }
        if (i + 1 < hyp.entries.size()) {
            double end = e.onset_s + e.duration_s;
            if (end > hyp.entries[i + 1].onset_s + 1e-9) {
                throw ParseError("hypnogram entries overlap near onset " +
                                 std::to_string(hyp.entries[i + 1].onset_s) + " s");
            }
        }
    }
}

// Timed Annotation Lists: "+onset[\x15duration]\x14text\x14...\x14\x00".
void parse_tal_block(std::span<const unsigned char> block, Hypnogram& out) {
    size_t pos = 0;
    while (pos < block.size()) {
        if (block[pos] == 0) {
            ++pos;
            continue;
        }
        size_t tal_end = pos;
        while (tal_end < block.size() && block[tal_end] != 0) ++tal_end;
        std::string_view tal(reinterpret_cast<const char*>(block.data()) + pos, tal_end - pos);

        size_t first14 = tal.find('\x14');
        if (first14 == std::string_view::npos) {
            throw ParseError("malformed TAL (missing 0x14 separator)");
        }
        std::string_view head = tal.substr(0, first14);
        double onset = 0.0, duration = 0.0;
        size_t sep15 = head.find('\x15');
        try {
            if (sep15 == std::string_view::npos) {
                onset = std::stod(std::string(head));
            } else {
                onset = std::stod(std::string(head.substr(0, sep15)));
                duration = std::stod(std::string(head.substr(sep15 + 1)));
            }
        } catch (const std::exception&) {
            throw ParseError("malformed TAL onset/duration field '" + std::string(head) + "'");
        }

        size_t text_begin = first14 + 1;
        while (text_begin <= tal.size()) {
            size_t text_end = tal.find('\x14', text_begin);
            if (text_end == std::string_view::npos) break;
            std::string_view text = tal.substr(text_begin, text_end - text_begin);
            if (!text.empty()) {
                out.entries.push_back(HypnogramEntry{onset, duration, std::string(text)});
            }
            text_begin = text_end + 1;
        }
        pos = tal_end;
    }
}

Hypnogram parse_hypnogram_edf(std::span<const unsigned char> bytes) {
    EdfLayout layout = parse_header(bytes);
    Hypnogram hyp;
    bool found = false;
    size_t pos = layout.data_offset;
    for (long r = 0; r < layout.num_records; ++r) {
        if (pos + static_cast<size_t>(layout.record_size_bytes) > bytes.size()) {
            throw ParseError("EDF data truncated in record " + std::to_string(r) + " of " +
                             std::to_string(layout.num_records));
        }
        for (const SignalHeader& sig : layout.signals) {
            size_t nbytes = 2 * static_cast<size_t>(sig.samples_per_record);
            if (sig.is_annotation) {
                found = true;
                parse_tal_block(bytes.subspan(pos, nbytes), hyp);
            }
            pos += nbytes;
        }
    }
    if (!found) {
        throw ParseError("EDF file has no 'EDF Annotations' signal to use as a hypnogram");
    }
    validate_hypnogram(hyp);
    return hyp;
}

Hypnogram parse_hypnogram_csv(std::string_view text) {
    Hypnogram hyp;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;

        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string_view::npos ? std::string_view::npos : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos) {
            throw ParseError("hypnogram CSV line " + std::to_string(line_no) +
                             ": expected 'onset_s,duration_s,label'");
        }
        std::string onset_str(trim(line.substr(0, c1)));
        std::string dur_str(trim(line.substr(c1 + 1, c2 - c1 - 1)));
        std::string label(trim(line.substr(c2 + 1)));
        double onset = 0.0, duration = 0.0;
        try {
            size_t u1 = 0, u2 = 0;
            onset = std::stod(onset_str, &u1);
            duration = std::stod(dur_str, &u2);
            if (u1 != onset_str.size() || u2 != dur_str.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            if (line_no == 1) continue; // header row
            throw ParseError("hypnogram CSV line " + std::to_string(line_no) +
                             ": non-numeric onset/duration");
        }
        hyp.entries.push_back(HypnogramEntry{onset, duration, label});
    }
    if (hyp.entries.empty()) {
        throw ParseError("hypnogram CSV contains no entries");
    }
    validate_hypnogram(hyp);
    return hyp;
}

} // namespace

Hypnogram parse_hypnogram(std::span<const unsigned char> bytes) {
    if (bytes.empty()) throw ParseError("empty hypnogram input");
    if (looks_like_edf(bytes)) return parse_hypnogram_edf(bytes);
    return parse_hypnogram_csv(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Recording parse_edf_file(const std::string& path) {
    std::vector<unsigned char> bytes = read_file(path);
    return parse_edf(std::span<const unsigned char>(bytes));
}

Hypnogram parse_hypnogram_file(const std::string& path) {
    std::vector<unsigned char> bytes = read_file(path);
    return parse_hypnogram(std::span<const unsigned char>(bytes));
}

std::optional<SleepStage> stage_from_label(std::string_view raw, std::string* exclusion_reason) {
    std::string_view label = trim(raw);
    std::string_view key = label;
    if (key.size() > 12 && key.substr(0, 12) == "Sleep stage ") key = key.substr(12);

    auto excluded = [&](std::string why) -> std::optional<SleepStage> {
        if (exclusion_reason != nullptr) *exclusion_reason = std::move(why);
        return std::nullopt;
    };

    if (key == "W") return SleepStage::Awake;
    if (key == "R" || key == "REM") return SleepStage::Rem;
    if (key == "1" || key == "N1") return SleepStage::N1;
    if (key == "2" || key == "N2") return SleepStage::N2;
    if (key == "3" || key == "N3") return SleepStage::N3;
    if (key == "4" || key == "N4") return SleepStage::N3; // AASM relabeling
    if (key == "?") return excluded("unknown stage");
    if (label == "Movement time" || key == "M") return excluded("movement");
    return excluded("unrecognized label '" + std::string(label) + "'");
}

std::span<const double> epoch_window(const Channel& channel, int epoch_index, double epoch_s) {
    double exact = epoch_s * channel.sampling_rate;
    long spe = std::lround(exact);
    if (spe <= 0 || std::abs(exact - static_cast<double>(spe)) > 1e-9) {
        throw DataError("epoch length " + std::to_string(epoch_s) +
                        " s is not an integral number of samples at " +
                        std::to_string(channel.sampling_rate) + " Hz");
    }
    size_t begin = static_cast<size_t>(epoch_index) * static_cast<size_t>(spe);
    if (epoch_index < 0 || begin + static_cast<size_t>(spe) > channel.samples.size()) {
        throw DataError("epoch " + std::to_string(epoch_index) +
                        " extends past the end of channel '" + channel.label + "'");
    }
    return std::span<const double>(channel.samples.data() + begin, static_cast<size_t>(spe));
}

Segmentation segment_epochs(const Recording& rec, const Hypnogram& hyp, double epoch_s,
                            WarningLog* warnings) {
    Segmentation out;
    if (rec.channels.empty() || rec.duration_s <= 0) {
        return out;
    }
    long candidates = static_cast<long>(std::floor(rec.duration_s / epoch_s + 1e-9));

    // Complete epochs must fit in every channel.
    long complete = candidates;
    for (const Channel& ch : rec.channels) {
        double exact = epoch_s * ch.sampling_rate;
        long spe = std::lround(exact);
        if (spe <= 0 || std::abs(exact - static_cast<double>(spe)) > 1e-9) {
            throw DataError("epoch length " + std::to_string(epoch_s) +
                            " s is not an integral number of samples at " +
                            std::to_string(ch.sampling_rate) + " Hz (channel '" + ch.label +
                            "')");
        }
        complete = std::min(complete, static_cast<long>(ch.samples.size()) / spe);
    }
    out.dropped = static_cast<int>(candidates - complete);
    if (out.dropped > 0) {
        warn(warnings, std::to_string(out.dropped) +
                           " epoch(s) extend past the signal end and were dropped");
    }
    out.samples_per_epoch =
        static_cast<int>(std::lround(epoch_s * rec.channels.front().sampling_rate));

    size_t cursor = 0;
    for (long e = 0; e < complete; ++e) {
        double t0 = static_cast<double>(e) * epoch_s;
        while (cursor < hyp.entries.size() &&
               hyp.entries[cursor].onset_s + hyp.entries[cursor].duration_s <= t0 + 1e-9) {
            ++cursor;
        }
        LabeledEpoch ep;
        ep.index = static_cast<int>(e);
        if (cursor < hyp.entries.size() && hyp.entries[cursor].onset_s <= t0 + 1e-9) {
            std::string reason;
            ep.stage = stage_from_label(hyp.entries[cursor].label, &reason);
            if (!ep.stage) ep.exclusion_reason = reason;
        } else {
            ep.exclusion_reason = "unannotated";
        }
        out.epochs.push_back(std::move(ep));
    }
    return out;
}

std::vector<LabeledEpoch> truncate_wake(std::vector<LabeledEpoch> epochs, double margin_min,
                                        double epoch_s, WarningLog* warnings) {
    auto is_awake = [](const LabeledEpoch& e) {
        return e.stage.has_value() && *e.stage == SleepStage::Awake;
    };
    auto first_it = std::find_if_not(epochs.begin(), epochs.end(), is_awake);
    if (first_it == epochs.end()) {
        warn(warnings, "recording contains only Awake epochs; wake truncation skipped");
        return epochs;
    }
    auto last_it = std::find_if_not(epochs.rbegin(), epochs.rend(), is_awake);

    long margin_epochs = std::lround(margin_min * 60.0 / epoch_s);
    long first_keep = std::max<long>(0, (first_it - epochs.begin()) - margin_epochs);
    long last_keep = std::min<long>(static_cast<long>(epochs.size()) - 1,
                                    (epochs.rend() - last_it - 1) + margin_epochs);
    return std::vector<LabeledEpoch>(epochs.begin() + first_keep, epochs.begin() + last_keep + 1);
}

} // namespace sleepgeo
