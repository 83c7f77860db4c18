#ifndef SLEEPGEO_DIFFUSION_HPP
#define SLEEPGEO_DIFFUSION_HPP

#include "sleepgeo/types.hpp"

namespace sleepgeo {

// Neighborhood covariances of a point cloud (rows = points). K_nb nearest
// neighbors in Euclidean distance, excluding the point itself.
struct LocalCovariances {
    std::vector<Matrix> gamma;       // one p x p PSD matrix per point
    Eigen::MatrixXi neighbors;       // J x K_nb neighbor indices
    int k_nb = 0;
};

LocalCovariances local_covariances(const Matrix& points, double alpha);

// Truncated pseudo-inverse: invert the top `rank` eigenvalues, zero the
// rest. Eigenvalues below rel_floor * lambda_max are treated as zero.
Matrix truncated_pinv(const Matrix& psd, int rank, double rel_floor = 1e-10);

// Squared local Mahalanobis distance matrix:
//   d2(i,j) = 1/2 (u_i - u_j)^T (pinv_d[G_i] + pinv_d[G_j]) (u_i - u_j).
Matrix local_mahalanobis_sq(const Matrix& points, const LocalCovariances& cov, int rank,
                            WarningLog* warnings = nullptr);

// Elementwise square root of local_mahalanobis_sq (in numeric-noise cases
// tiny negatives are clamped to zero).
Matrix local_mahalanobis(const Matrix& points, const LocalCovariances& cov, int rank,
                         WarningLog* warnings = nullptr);

struct AffinityMatrix {
    Matrix w;           // symmetric, nonnegative
    double epsilon = 0; // kernel bandwidth actually used
};

// Gaussian affinity W_ij = exp(-dist2_ij / eps) with eps the eps_quantile
// empirical quantile of the off-diagonal squared distances (sorted array,
// index floor(q*n)). Diagonal set to `diagonal` (default 0).
AffinityMatrix affinity(const Matrix& dist2, double eps_quantile = 0.05, double diagonal = 0.0);

struct TransitionMatrix {
    Matrix a;      // row-stochastic, a = D^-1 W
    Vector degree; // diagonal of D (row sums of W)

    int size() const { return static_cast<int>(a.rows()); }
};

TransitionMatrix transition(const AffinityMatrix& aff);

// Diffusion-map coordinates: column l-2 of coords is lambda_l^t phi_l,
// l = 2..d_hat+1, right eigenvectors of A via the symmetric conjugation
// D^-1/2 W D^-1/2. The trivial pair (lambda_1 = 1, constant phi_1) is
// skipped. Sign convention: the entry of largest magnitude of each phi_l
// is positive.
struct Embedding {
    Matrix coords;      // J x d_hat
    Vector eigenvalues; // lambda_2 .. lambda_{d_hat+1}
    double t = 1.0;

    int points() const { return static_cast<int>(coords.rows()); }
    int dims() const { return static_cast<int>(coords.cols()); }
};

Embedding diffusion_map(const TransitionMatrix& trans, double t, int d_hat);

double diffusion_distance(const Embedding& emb, int i, int j);

// Shared eigensolver: descending eigenpairs of D^-1/2 M D^-1/2 mapped back
// to right eigenvectors of D^-1 M, sign-fixed, ties ordered by eigenvector
// lexicographic comparison.
struct SpectralPairs {
    Vector eigenvalues;  // descending
    Matrix eigenvectors; // columns, right eigenvectors of D^-1 M
};

SpectralPairs row_stochastic_eig(const Matrix& symmetric_m, const Vector& degree);

} // namespace sleepgeo

#endif
