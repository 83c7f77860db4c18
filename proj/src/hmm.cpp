#include "sleepgeo/hmm.hpp"

#include <cmath>
#include <limits>

namespace sleepgeo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Assign every row to its nearest centroid (ties -> lowest index). Returns
// the mean squared distance.
double assign_points(const Matrix& rows, const Matrix& centroids, std::vector<int>& assignment) {
    const int n = static_cast<int>(rows.rows());
    const int k = static_cast<int>(centroids.rows());
    assignment.resize(static_cast<size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int c = 0; c < k; ++c) {
            const double d = (rows.row(i) - centroids.row(c)).squaredNorm();
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        assignment[static_cast<size_t>(i)] = arg;
        total += best;
    }
    return total / static_cast<double>(n);
}

void lloyd_iterations(const Matrix& rows, Matrix& centroids) {
    const int n = static_cast<int>(rows.rows());
    const int k = static_cast<int>(centroids.rows());
    std::vector<int> assignment;
    double prev = assign_points(rows, centroids, assignment);
    for (int iter = 0; iter < 100; ++iter) {
        Matrix sums = Matrix::Zero(k, rows.cols());
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            sums.row(assignment[static_cast<size_t>(i)]) += rows.row(i);
            ++counts[static_cast<size_t>(assignment[static_cast<size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) {
                centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<size_t>(c)]);
            } else {
                // Re-seed an empty cell from the point farthest from its centroid.
                double worst = -1.0;
                int arg = 0;
                for (int i = 0; i < n; ++i) {
                    const double d =
                        (rows.row(i) - centroids.row(assignment[static_cast<size_t>(i)]))
                            .squaredNorm();
                    if (d > worst) {
                        worst = d;
                        arg = i;
                    }
                }
                centroids.row(c) = rows.row(arg);
            }
        }
        const double dist = assign_points(rows, centroids, assignment);
        if (prev > 0.0 && std::abs(prev - dist) / prev < 1e-6) {
            return;
        }
        if (dist == 0.0) return;
        prev = dist;
    }
}

} // namespace

Codebook lbg_codebook(const Matrix& features, int size, std::uint64_t seed) {
    (void)seed; // construction is deterministic
    const int n = static_cast<int>(features.rows());
    if (size < 1 || (size & (size - 1)) != 0) {
        throw DataError("codebook size must be a power of two, got " + std::to_string(size));
    }
    if (size > n) {
        throw DataError("codebook size " + std::to_string(size) + " exceeds training count " +
                        std::to_string(n));
    }
    if (!features.allFinite()) throw DataError("codebook training features must be finite");

    constexpr double kSplitDelta = 1e-3;
    Codebook cb;
    cb.centroids = features.colwise().mean();
    while (cb.size() < size) {
        Matrix split(cb.size() * 2, cb.dim());
        for (int c = 0; c < cb.size(); ++c) {
            split.row(2 * c) = cb.centroids.row(c) * (1.0 + kSplitDelta);
            split.row(2 * c + 1) = cb.centroids.row(c) * (1.0 - kSplitDelta);
        }
        cb.centroids = std::move(split);
        lloyd_iterations(features, cb.centroids);
    }
    return cb;
}

int quantize(const Codebook& cb, const Vector& v) {
    if (static_cast<int>(v.size()) != cb.dim()) {
        throw DataError("feature dimension " + std::to_string(v.size()) +
                        " does not match codebook dimension " + std::to_string(cb.dim()));
    }
    if (!v.allFinite()) throw DataError("cannot quantize a non-finite feature vector");
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < cb.size(); ++c) {
        const double d = (cb.centroids.row(c).transpose() - v).squaredNorm();
        if (d < best) {
            best = d;
            arg = c;
        }
    }
    return arg + 1;
}

std::vector<int> quantize_all(const Codebook& cb, const Matrix& rows) {
    std::vector<int> symbols(static_cast<size_t>(rows.rows()));
    for (int i = 0; i < static_cast<int>(rows.rows()); ++i) {
        symbols[static_cast<size_t>(i)] = quantize(cb, rows.row(i).transpose());
    }
    return symbols;
}

double codebook_distortion(const Codebook& cb, const Matrix& rows) {
    std::vector<int> assignment;
    return assign_points(rows, cb.centroids, assignment);
}

Matrix estimate_transitions(std::span<const std::vector<int>> stage_sequences, double kappa) {
    Matrix counts = Matrix::Zero(kNumStages, kNumStages);
    for (const std::vector<int>& seq : stage_sequences) {
        if (seq.empty()) throw DataError("empty stage sequence");
        for (size_t t = 0; t + 1 < seq.size(); ++t) {
            const int a = seq[t], b = seq[t + 1];
            if (a < 1 || a > kNumStages || b < 1 || b > kNumStages) {
                throw DataError("stage code out of range in training sequence");
            }
            counts(a - 1, b - 1) += 1.0;
        }
    }
    Matrix m(kNumStages, kNumStages);
    for (int i = 0; i < kNumStages; ++i) {
        const double row_total = counts.row(i).sum() + kappa * kNumStages;
        if (row_total <= 0.0) {
            m.row(i).setConstant(1.0 / kNumStages);
            continue;
        }
        for (int j = 0; j < kNumStages; ++j) m(i, j) = (counts(i, j) + kappa) / row_total;
    }
    return m;
}

Matrix estimate_emissions(std::span<const std::vector<int>> stage_sequences,
                          std::span<const std::vector<int>> symbol_sequences, int codebook_size,
                          double kappa) {
    if (stage_sequences.size() != symbol_sequences.size()) {
        throw DataError("stage and symbol sequence counts differ");
    }
    if (codebook_size < 1) throw DataError("codebook size must be positive");
    Matrix counts = Matrix::Zero(kNumStages, codebook_size);
    for (size_t s = 0; s < stage_sequences.size(); ++s) {
        const std::vector<int>& stages = stage_sequences[s];
        const std::vector<int>& symbols = symbol_sequences[s];
        if (stages.size() != symbols.size()) {
            throw DataError("stage/symbol sequence " + std::to_string(s) +
                            " lengths differ: " + std::to_string(stages.size()) + " vs " +
                            std::to_string(symbols.size()));
        }
        for (size_t t = 0; t < stages.size(); ++t) {
            const int j = stages[t], k = symbols[t];
            if (j < 1 || j > kNumStages) throw DataError("stage code out of range");
            if (k < 1 || k > codebook_size) throw DataError("symbol out of range 1..|O|");
            counts(j - 1, k - 1) += 1.0;
        }
    }
    Matrix e(kNumStages, codebook_size);
    for (int j = 0; j < kNumStages; ++j) {
        const double row_total = counts.row(j).sum() + kappa * codebook_size;
        if (row_total <= 0.0) {
            e.row(j).setConstant(1.0 / codebook_size);
            continue;
        }
        for (int k = 0; k < codebook_size; ++k) e(j, k) = (counts(j, k) + kappa) / row_total;
    }
    return e;
}

ViterbiTrace viterbi(const HmmModel& model, std::span<const int> observations) {
    const long T = static_cast<long>(observations.size());
    if (T == 0) throw DataError("empty observation sequence");
    const int num_symbols = model.num_symbols();
    for (int o : observations) {
        if (o < 1 || o > num_symbols) {
            throw DataError("observation symbol " + std::to_string(o) + " out of range 1..|O|");
        }
    }

    Matrix log_m = model.transition.array().log();
    Matrix log_e = model.emission.array().log();

    ViterbiTrace trace;
    trace.nu.resize(kNumStages, T);
    trace.back = Eigen::MatrixXi::Zero(kNumStages, T);

    // The recording starts Awake: one transition from state 1, then emit.
    for (int j = 0; j < kNumStages; ++j) {
        trace.nu(j, 0) = log_m(0, j) + log_e(j, observations[0] - 1);
    }
    for (long t = 1; t < T; ++t) {
        for (int j = 0; j < kNumStages; ++j) {
            double best = kNegInf;
            int arg = 0;
            for (int s = 0; s < kNumStages; ++s) {
                const double cand = trace.nu(s, t - 1) + log_m(s, j);
                if (cand > best) {
                    best = cand;
                    arg = s;
                }
            }
            trace.nu(j, t) = best + log_e(j, observations[static_cast<size_t>(t)] - 1);
            trace.back(j, t) = arg + 1;
        }
    }

    // Free terminal state: the paper's absorbing F with uninformative
    // emission reduces to an argmax over the last column.
    int last = 0;
    double best = kNegInf;
    for (int j = 0; j < kNumStages; ++j) {
        if (trace.nu(j, T - 1) > best) {
            best = trace.nu(j, T - 1);
            last = j;
        }
    }
    trace.log_prob = best;
    trace.path.resize(static_cast<size_t>(T));
    trace.path[static_cast<size_t>(T - 1)] = last + 1;
    for (long t = T - 1; t >= 1; --t) {
        trace.path[static_cast<size_t>(t - 1)] = trace.back(trace.path[static_cast<size_t>(t)] - 1, t);
    }
    return trace;
}

} // namespace sleepgeo
