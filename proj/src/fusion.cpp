#include "sleepgeo/fusion.hpp"

#include <cmath>
#include <iostream>

namespace sleepgeo {

Matrix alternating_diffusion(const TransitionMatrix& ax, const TransitionMatrix& ay) {
    if (ax.size() != ay.size()) {
        throw DataError("channel transition matrices have different sizes: " +
                        std::to_string(ax.size()) + " vs " + std::to_string(ay.size()));
    }
    return ax.a * ay.a;
}

Matrix common_metric(const Matrix& a_xy) {
    const int n = static_cast<int>(a_xy.rows());
    Matrix dist = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = (a_xy.row(i) - a_xy.row(j)).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    return dist;
}

Embedding adm_embed(const Matrix& common_dist, double eps_quantile, double t, int d_hat,
                    double diagonal) {
    Matrix dist2 = common_dist.cwiseProduct(common_dist);
    AffinityMatrix w = affinity(dist2, eps_quantile, diagonal);
    return diffusion_map(transition(w), t, d_hat);
}

BipartiteOperator multiview_operator(const AffinityMatrix& wx, const AffinityMatrix& wy) {
    const int n = static_cast<int>(wx.w.rows());
    if (static_cast<int>(wy.w.rows()) != n) {
        throw DataError("channel affinity matrices have different sizes");
    }
    BipartiteOperator op;
    op.side = n;
    op.m = Matrix::Zero(2 * n, 2 * n);
    Matrix wxy = wx.w * wy.w;
    op.m.topRightCorner(n, n) = wxy;
    op.m.bottomLeftCorner(n, n) = wxy.transpose(); // = W_y W_x for symmetric W
    op.degree = op.m.rowwise().sum();
    for (int i = 0; i < 2 * n; ++i) {
        if (op.degree[i] <= 0.0) {
            throw DataError("bipartite operator row " + std::to_string(i) + " sums to zero");
        }
    }
    return op;
}

Matrix cocluster_eigvecs(const BipartiteOperator& op, int d_tilde) {
    const int n2 = op.size();
    if (d_tilde < 1 || d_tilde + 1 > n2) {
        throw DataError("d_tilde " + std::to_string(d_tilde) + " needs d_tilde + 1 <= 2J = " +
                        std::to_string(n2));
    }
    // M is symmetric by construction (the two blocks are transposes); fall
    // back to a general solver only if that ever fails numerically.
    if (!op.m.isApprox(op.m.transpose(), 1e-9)) {
        Eigen::EigenSolver<Matrix> general(op.degree.cwiseInverse().asDiagonal() * op.m);
        if (general.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
        const double max_imag = general.eigenvalues().imag().cwiseAbs().maxCoeff();
        if (max_imag > 1e-8) {
            std::cerr << "warning: bipartite operator has complex eigenvalues (max imag "
                      << max_imag << ")\n";
        }
        std::vector<int> order(static_cast<size_t>(n2));
        for (int i = 0; i < n2; ++i) order[static_cast<size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return general.eigenvalues()[a].real() > general.eigenvalues()[b].real();
        });
        Matrix q(n2, d_tilde);
        for (int l = 0; l < d_tilde; ++l) {
            q.col(l) = general.eigenvectors().col(order[static_cast<size_t>(l) + 1]).real();
        }
        return q;
    }

    SpectralPairs pairs = row_stochastic_eig(op.m, op.degree);
    if (pairs.eigenvalues[1] >= 1.0 - 1e-9) {
        throw NumericError("bipartite graph is disconnected (lambda_2 = 1)");
    }
    return pairs.eigenvectors.middleCols(1, d_tilde);
}

std::vector<int> induce_clusters(const BipartiteOperator& op, const std::vector<int>& clusters,
                                 int num_clusters, InduceDirection direction) {
    const int n = op.side;
    if (static_cast<int>(clusters.size()) != n) {
        throw DataError("cluster assignment length does not match side size");
    }
    if (num_clusters < 1) throw DataError("need at least one cluster");
    std::vector<int> counts(static_cast<size_t>(num_clusters), 0);
    for (int c : clusters) {
        if (c < 0 || c >= num_clusters) throw DataError("cluster id out of range");
        ++counts[static_cast<size_t>(c)];
    }
    for (int m = 0; m < num_clusters; ++m) {
        if (counts[static_cast<size_t>(m)] == 0) {
            throw DataError("cluster " + std::to_string(m) + " is empty on the input side");
        }
    }

    // Cross-block affinity between x-vertex i and y-vertex j.
    auto cross = [&](int i, int j) { return op.m(i, n + j); };

    std::vector<int> induced(static_cast<size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        double best = -1.0;
        int best_cluster = 0;
        for (int m = 0; m < num_clusters; ++m) {
            double sum = 0.0;
            for (int u = 0; u < n; ++u) {
                if (clusters[static_cast<size_t>(u)] != m) continue;
                sum += direction == InduceDirection::FirstToSecond ? cross(u, v) : cross(v, u);
            }
            if (sum > best) {
                best = sum;
                best_cluster = m;
            }
        }
        induced[static_cast<size_t>(v)] = best_cluster;
    }
    return induced;
}

Matrix common_feature(const Embedding& psi, const Matrix& q, int d_hat, int d_tilde) {
    const int n = psi.points();
    if (psi.dims() < d_hat) {
        throw DataError("embedding has fewer than d_hat coordinates");
    }
    if (static_cast<int>(q.rows()) != 2 * n) {
        throw DataError("co-clustering eigenvector matrix must have 2J rows");
    }
    if (static_cast<int>(q.cols()) < d_tilde) {
        throw DataError("co-clustering matrix has fewer than d_tilde columns");
    }
    Matrix v(n, d_hat + 2 * d_tilde);
    v.leftCols(d_hat) = psi.coords.leftCols(d_hat);
    v.middleCols(d_hat, d_tilde) = q.topRows(n).leftCols(d_tilde);
    v.rightCols(d_tilde) = q.bottomRows(n).leftCols(d_tilde);
    return v;
}

} // namespace sleepgeo
