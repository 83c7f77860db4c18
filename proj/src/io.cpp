#include "sleepgeo/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sleepgeo {

std::string format_double(double v) {
    char buf[64];
    // Shortest representation that round-trips: try increasing precision.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_field_double(const std::string& s, const std::string& path, size_t line_no) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad numeric field '" + s + "'");
    }
}

int parse_field_int(const std::string& s, const std::string& path, size_t line_no) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad integer field '" + s + "'");
    }
    return v;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw DataError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw DataError("cannot open for reading: " + path);
    return in;
}

} // namespace

void write_epoch_csv(const std::string& path, const EpochTable& table,
                     const std::string& value_prefix) {
    if (table.values.rows() != static_cast<long>(table.stage.size()) ||
        table.values.rows() != static_cast<long>(table.epoch_index.size())) {
        throw DataError("epoch table row counts disagree");
    }
    std::ofstream out = open_out(path);
    out << "epoch_index,stage";
    for (long c = 0; c < table.values.cols(); ++c) out << "," << value_prefix << (c + 1);
    out << "\n";
    for (long r = 0; r < table.values.rows(); ++r) {
        out << table.epoch_index[static_cast<size_t>(r)] << ","
            << table.stage[static_cast<size_t>(r)];
        for (long c = 0; c < table.values.cols(); ++c) {
            out << "," << format_double(table.values(r, c));
        }
        out << "\n";
    }
}

EpochTable read_epoch_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const size_t cols = split_csv_line(line).size();
    if (cols < 3) throw ParseError(path + ": expected epoch_index,stage,value columns");

    EpochTable table;
    std::vector<std::vector<double>> rows;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != cols) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(cols) + " fields, got " +
                             std::to_string(fields.size()));
        }
        table.epoch_index.push_back(parse_field_int(fields[0], path, line_no));
        table.stage.push_back(parse_field_int(fields[1], path, line_no));
        std::vector<double> vals;
        for (size_t c = 2; c < cols; ++c) vals.push_back(parse_field_double(fields[c], path, line_no));
        rows.push_back(std::move(vals));
    }
    table.values.resize(static_cast<long>(rows.size()), static_cast<long>(cols - 2));
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t c = 0; c + 2 < cols; ++c) {
            table.values(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
        }
    }
    return table;
}

void write_feature_csv(const std::string& path, const std::vector<int>& stages,
                       const Matrix& features) {
    if (features.rows() != static_cast<long>(stages.size())) {
        throw DataError("feature row count does not match stage count");
    }
    std::ofstream out = open_out(path);
    out << "stage";
    for (long c = 0; c < features.cols(); ++c) out << ",u" << c;
    out << "\n";
    for (long r = 0; r < features.rows(); ++r) {
        out << stages[static_cast<size_t>(r)];
        for (long c = 0; c < features.cols(); ++c) out << "," << format_double(features(r, c));
        out << "\n";
    }
}

void read_feature_csv(const std::string& path, std::vector<int>& stages, Matrix& features) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const size_t cols = split_csv_line(line).size();
    if (cols < 2) throw ParseError(path + ": expected stage,u0.. columns");

    stages.clear();
    std::vector<std::vector<double>> rows;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != cols) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": field count mismatch");
        }
        stages.push_back(parse_field_int(fields[0], path, line_no));
        std::vector<double> vals;
        for (size_t c = 1; c < cols; ++c) vals.push_back(parse_field_double(fields[c], path, line_no));
        rows.push_back(std::move(vals));
    }
    features.resize(static_cast<long>(rows.size()), static_cast<long>(cols - 1));
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t c = 0; c + 1 < cols; ++c) {
            features(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
        }
    }
}

void write_matrix_binary(const std::string& path, const Matrix& m) {
    std::ofstream out = open_out(path, std::ios::binary);
    out << "SGMAT1\n" << m.rows() << " " << m.cols() << "\n";
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            out.write(reinterpret_cast<const char*>(&v), sizeof(double));
        }
    }
}

Matrix read_matrix_binary(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::binary);
    std::string magic;
    std::getline(in, magic);
    if (magic != "SGMAT1") throw ParseError(path + ": bad matrix magic '" + magic + "'");
    long rows = 0, cols = 0;
    in >> rows >> cols;
    in.ignore(1, '\n');
    if (rows < 0 || cols < 0) throw ParseError(path + ": bad matrix shape");
    Matrix m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            double v = 0;
            in.read(reinterpret_cast<char*>(&v), sizeof(double));
            if (!in) throw ParseError(path + ": matrix data truncated");
            m(r, c) = v;
        }
    }
    return m;
}

std::uint64_t file_digest(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
}

} // namespace sleepgeo
