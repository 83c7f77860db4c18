#ifndef SLEEPGEO_HMM_HPP
#define SLEEPGEO_HMM_HPP

#include "sleepgeo/types.hpp"

#include <cstdint>
#include <span>

namespace sleepgeo {

// LBG vector-quantization codebook. Size is a power of two (splitting
// construction); symbols are 1-based, 1..size().
struct Codebook {
    Matrix centroids; // size x dim

    int size() const { return static_cast<int>(centroids.rows()); }
    int dim() const { return static_cast<int>(centroids.cols()); }
};

// Classic LBG: global centroid, then repeated (1 +- delta) splits with
// Lloyd iterations to convergence (relative distortion change < 1e-6 or
// 100 iterations). Empty cells are re-seeded from the point currently
// farthest from its centroid. The construction is deterministic; the seed
// is accepted for interface uniformity and echoed in reports.
Codebook lbg_codebook(const Matrix& features, int size, std::uint64_t seed = 0);

// Index (1-based) of the nearest centroid; ties take the lowest index.
int quantize(const Codebook& cb, const Vector& v);
std::vector<int> quantize_all(const Codebook& cb, const Matrix& rows);

// Mean squared distance to the assigned centroid.
double codebook_distortion(const Codebook& cb, const Matrix& rows);

// Row-stochastic 5x5 stage transition estimates. Counts pool across
// sequences but never across a sequence boundary; additive smoothing
// kappa, rows without counts fall back to uniform.
Matrix estimate_transitions(std::span<const std::vector<int>> stage_sequences,
                            double kappa = 1.0);

// Row-stochastic 5 x codebook_size emission estimates from aligned
// (stage, symbol) sequences.
Matrix estimate_emissions(std::span<const std::vector<int>> stage_sequences,
                          std::span<const std::vector<int>> symbol_sequences,
                          int codebook_size, double kappa = 1.0);

// Trained model. The initial state is Awake by convention: decoding starts
// from s_0 = 1 and takes one transition before the first emission.
struct HmmModel {
    Codebook codebook;
    Matrix transition; // 5 x 5
    Matrix emission;   // 5 x |O|

    int num_symbols() const { return static_cast<int>(emission.cols()); }
};

struct ViterbiTrace {
    Matrix nu;            // 5 x T, log domain
    Eigen::MatrixXi back; // 5 x T, best relay state (1-based), col 0 unused
    std::vector<int> path; // decoded stages, 1-based codes
    double log_prob = 0.0; // log joint probability of the decoded path
};

// Log-domain Viterbi with nu_1(j) = m(1,j) e_j(o_1), free terminal state
// (argmax over nu_T). All DP ties resolve to the lowest state index.
ViterbiTrace viterbi(const HmmModel& model, std::span<const int> observations);

} // namespace sleepgeo

#endif
