#ifndef SLEEPGEO_IO_HPP
#define SLEEPGEO_IO_HPP

#include "sleepgeo/types.hpp"

#include <cstdint>
#include <string>

namespace sleepgeo {

// Shortest round-trippable decimal form of a double; output is
// deterministic so reruns produce byte-identical files.
std::string format_double(double v);

// Feature/embedding table tied to its epoch labels: one row per epoch,
// stage codes 1..5.
struct EpochTable {
    std::vector<int> epoch_index;
    std::vector<int> stage;
    Matrix values;

    long rows() const { return values.rows(); }
};

// CSV with header "epoch_index,stage,<prefix>1..<prefix>N".
void write_epoch_csv(const std::string& path, const EpochTable& table,
                     const std::string& value_prefix);
EpochTable read_epoch_csv(const std::string& path);

// Feature CSV per the feature-export contract: header "stage,u0..u9",
// one row per epoch (no index column).
void write_feature_csv(const std::string& path, const std::vector<int>& stages,
                       const Matrix& features);
void read_feature_csv(const std::string& path, std::vector<int>& stages, Matrix& features);

// Dense row-major float64 matrix with a small self-describing header:
//   magic "SGMAT1\n", ASCII "rows cols\n", then rows*cols little-endian
//   doubles.
void write_matrix_binary(const std::string& path, const Matrix& m);
Matrix read_matrix_binary(const std::string& path);

// FNV-1a 64-bit digest of a file, for run manifests.
std::uint64_t file_digest(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace sleepgeo

#endif
