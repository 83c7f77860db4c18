#ifndef SLEEPGEO_FUSION_HPP
#define SLEEPGEO_FUSION_HPP

#include "sleepgeo/diffusion.hpp"

namespace sleepgeo {

// Alternating-diffusion operator A_xy = A_x * A_y. The order is significant
// and fixed as (first channel) * (second channel).
Matrix alternating_diffusion(const TransitionMatrix& ax, const TransitionMatrix& ay);

// Common metric: dist(i,j) = || row_i(A_xy) - row_j(A_xy) ||_2.
Matrix common_metric(const Matrix& a_xy);

// Diffusion map over the common metric (squared inside the Gaussian
// kernel): psi_2 .. psi_{d_hat+1}.
Embedding adm_embed(const Matrix& common_dist, double eps_quantile, double t, int d_hat,
                    double diagonal = 0.0);

// Bipartite co-clustering operator
//   M = [ 0        W_x W_y ]
//       [ W_y W_x  0       ],
// rows/cols 0..J-1 = first-channel epochs, J..2J-1 = second-channel epochs.
struct BipartiteOperator {
    Matrix m;      // 2J x 2J, nonnegative, zero diagonal blocks
    Vector degree; // row sums of m
    int side = 0;  // J

    int size() const { return static_cast<int>(m.rows()); }
};

BipartiteOperator multiview_operator(const AffinityMatrix& wx, const AffinityMatrix& wy);

// Right eigenvectors q_2 .. q_{d_tilde+1} of D^-1 M, descending eigenvalue,
// trivial top pair skipped. Rows 0..J-1 index first-channel epochs, rows
// J..2J-1 second-channel epochs.
Matrix cocluster_eigvecs(const BipartiteOperator& op, int d_tilde);

enum class InduceDirection {
    FirstToSecond, // clusters given on channel-x vertices, induced on channel-y
    SecondToFirst,
};

// Cluster induction across the bipartite graph: each vertex on the other
// side joins the cluster maximizing summed affinity; ties take the lowest
// cluster index. Cluster ids are 0..num_clusters-1 and every id must be
// used on the input side.
std::vector<int> induce_clusters(const BipartiteOperator& op, const std::vector<int>& clusters,
                                 int num_clusters, InduceDirection direction);

// Common intrinsic feature: row j is
//   [ psi_2(j)..psi_{d_hat+1}(j), q_2(j)..q_{d_tilde+1}(j),
//     q_2(J+j)..q_{d_tilde+1}(J+j) ].
Matrix common_feature(const Embedding& psi, const Matrix& q, int d_hat, int d_tilde);

} // namespace sleepgeo

#endif
