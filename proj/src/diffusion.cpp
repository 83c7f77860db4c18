#include "sleepgeo/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sleepgeo {

LocalCovariances local_covariances(const Matrix& points, double alpha) {
    const int n = static_cast<int>(points.rows());
    if (n < 2) throw DataError("local covariances need at least 2 points");
    const int k_nb = static_cast<int>(std::lround(alpha * static_cast<double>(n)));
    if (k_nb < 2) {
        throw DataError("neighborhood size round(alpha*J) = " + std::to_string(k_nb) +
                        " is too small (need >= 2)");
    }
    if (k_nb > n - 1) {
        throw DataError("neighborhood size " + std::to_string(k_nb) + " exceeds J-1 = " +
                        std::to_string(n - 1));
    }

    LocalCovariances out;
    out.k_nb = k_nb;
    out.neighbors.resize(n, k_nb);
    out.gamma.resize(static_cast<size_t>(n));

    std::vector<int> order(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        Vector d2 = (points.rowwise() - points.row(j)).rowwise().squaredNorm();
        std::iota(order.begin(), order.end(), 0);
        // Distance ties break by index so the neighborhoods are reproducible.
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (d2[a] != d2[b]) return d2[a] < d2[b];
            return a < b;
        });
        Matrix gamma = Matrix::Zero(points.cols(), points.cols());
        int taken = 0;
        for (int idx : order) {
            if (idx == j) continue;
            out.neighbors(j, taken) = idx;
            Vector diff = (points.row(idx) - points.row(j)).transpose();
            gamma.noalias() += diff * diff.transpose();
            if (++taken == k_nb) break;
        }
        out.gamma[static_cast<size_t>(j)] = gamma / static_cast<double>(k_nb);
    }
    return out;
}

Matrix truncated_pinv(const Matrix& psd, int rank, double rel_floor) {
    if (psd.rows() != psd.cols()) throw DataError("truncated_pinv needs a square matrix");
    if (!psd.isApprox(psd.transpose(), 1e-10)) {
        throw DataError("truncated_pinv needs a symmetric matrix");
    }
    const int p = static_cast<int>(psd.rows());
    if (rank < 0 || rank > p) {
        throw DataError("truncation rank " + std::to_string(rank) + " out of range 0.." +
                        std::to_string(p));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(psd);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    // Eigen returns ascending order; the top `rank` are the last columns.
    const Vector& ev = es.eigenvalues();
    const double lmax = ev[p - 1];
    Vector inv = Vector::Zero(p);
    for (int i = 0; i < rank; ++i) {
        const double l = ev[p - 1 - i];
        if (l > rel_floor * lmax && l > 0.0) inv[p - 1 - i] = 1.0 / l;
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Matrix local_mahalanobis_sq(const Matrix& points, const LocalCovariances& cov, int rank,
                            WarningLog* warnings) {
    const int n = static_cast<int>(points.rows());
    if (static_cast<int>(cov.gamma.size()) != n) {
        throw DataError("covariance count does not match point count");
    }
    std::vector<Matrix> pinv(static_cast<size_t>(n));
    int degenerate = 0;
    for (int j = 0; j < n; ++j) {
        const Matrix& g = cov.gamma[static_cast<size_t>(j)];
        if (g.lpNorm<Eigen::Infinity>() == 0.0) {
            // Pseudo-inverse of the zero matrix is zero: that side simply
            // contributes nothing to the quadratic form.
            pinv[static_cast<size_t>(j)] = Matrix::Zero(g.rows(), g.cols());
            ++degenerate;
        } else {
            pinv[static_cast<size_t>(j)] = truncated_pinv(g, rank);
        }
    }
    if (degenerate > 0) {
        warn(warnings, std::to_string(degenerate) +
                           " point(s) have an all-zero local covariance; their side of the "
                           "Mahalanobis form is zero");
    }

    Matrix d2 = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Vector diff = (points.row(i) - points.row(j)).transpose();
            double q = 0.5 * (diff.dot(pinv[static_cast<size_t>(i)] * diff) +
                              diff.dot(pinv[static_cast<size_t>(j)] * diff));
            if (q < 0.0) q = 0.0;
            d2(i, j) = q;
            d2(j, i) = q;
        }
    }
    return d2;
}

Matrix local_mahalanobis(const Matrix& points, const LocalCovariances& cov, int rank,
                         WarningLog* warnings) {
    return local_mahalanobis_sq(points, cov, rank, warnings).cwiseSqrt();
}

AffinityMatrix affinity(const Matrix& dist2, double eps_quantile, double diagonal) {
    const int n = static_cast<int>(dist2.rows());
    if (dist2.cols() != n) throw DataError("distance matrix must be square");
    if (n < 2) throw DataError("affinity needs at least 2 points");
    if (!dist2.isApprox(dist2.transpose(), 1e-9)) {
        throw DataError("distance matrix must be symmetric");
    }
    if (dist2.diagonal().lpNorm<Eigen::Infinity>() > 1e-12) {
        throw DataError("distance matrix must have a zero diagonal");
    }
    if (eps_quantile <= 0.0 || eps_quantile > 1.0) {
        throw DataError("eps_quantile must lie in (0, 1]");
    }

    std::vector<double> offdiag;
    offdiag.reserve(static_cast<size_t>(n) * static_cast<size_t>(n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) offdiag.push_back(dist2(i, j));
    }
    std::sort(offdiag.begin(), offdiag.end());
    size_t idx = static_cast<size_t>(std::floor(eps_quantile * static_cast<double>(offdiag.size())));
    idx = std::min(idx, offdiag.size() - 1);
    const double eps = offdiag[idx];
    if (eps <= 0.0) {
        throw DataError("degenerate point cloud: kernel bandwidth quantile is zero");
    }

    AffinityMatrix out;
    out.epsilon = eps;
    out.w = (-dist2.array() / eps).exp();
    out.w.diagonal().setConstant(diagonal);
    return out;
}

TransitionMatrix transition(const AffinityMatrix& aff) {
    const int n = static_cast<int>(aff.w.rows());
    TransitionMatrix out;
    out.degree = aff.w.rowwise().sum();
    for (int i = 0; i < n; ++i) {
        if (out.degree[i] <= 0.0) {
            throw DataError("vertex " + std::to_string(i) +
                            " has zero affinity row sum (isolated point)");
        }
    }
    out.a = out.degree.cwiseInverse().asDiagonal() * aff.w;
    return out;
}

SpectralPairs row_stochastic_eig(const Matrix& symmetric_m, const Vector& degree) {
    const int n = static_cast<int>(symmetric_m.rows());
    Vector d_isqrt = degree.cwiseSqrt().cwiseInverse();
    Matrix s = d_isqrt.asDiagonal() * symmetric_m * d_isqrt.asDiagonal();
    // Guard against asymmetry from floating-point roundoff.
    s = 0.5 * (s + s.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");

    Matrix phi = d_isqrt.asDiagonal() * es.eigenvectors(); // right eigenvectors of D^-1 M
    // Fix signs: largest-magnitude entry positive (first such index on ties).
    for (int c = 0; c < n; ++c) {
        int arg = 0;
        double best = -1.0;
        for (int r = 0; r < n; ++r) {
            const double m = std::abs(phi(r, c));
            if (m > best) {
                best = m;
                arg = r;
            }
        }
        if (phi(arg, c) < 0) phi.col(c) = -phi.col(c);
    }

    // Descending eigenvalues; exact ties ordered by eigenvector comparison.
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (es.eigenvalues()[a] != es.eigenvalues()[b]) {
            return es.eigenvalues()[a] > es.eigenvalues()[b];
        }
        for (int r = 0; r < n; ++r) {
            if (phi(r, a) != phi(r, b)) return phi(r, a) < phi(r, b);
        }
        return false;
    });

    SpectralPairs out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (int c = 0; c < n; ++c) {
        out.eigenvalues[c] = es.eigenvalues()[order[static_cast<size_t>(c)]];
        out.eigenvectors.col(c) = phi.col(order[static_cast<size_t>(c)]);
    }
    return out;
}

namespace {

double eigen_power(double lambda, double t) {
    if (lambda >= 0.0) return std::pow(lambda, t);
    double integral = 0.0;
    if (std::modf(t, &integral) != 0.0) {
        throw NumericError("negative eigenvalue with non-integer diffusion time");
    }
    return std::pow(lambda, t);
}

} // namespace

Embedding diffusion_map(const TransitionMatrix& trans, double t, int d_hat) {
    const int n = trans.size();
    if (t <= 0) throw DataError("diffusion time must be positive");
    if (d_hat < 1 || d_hat + 1 > n) {
        throw DataError("embedding dimension " + std::to_string(d_hat) +
                        " needs d_hat + 1 <= J = " + std::to_string(n));
    }
    Matrix w = trans.degree.asDiagonal() * trans.a; // recover symmetric W
    SpectralPairs pairs = row_stochastic_eig(w, trans.degree);

    if (pairs.eigenvalues[0] < 1.0 - 1e-6 || pairs.eigenvalues[0] > 1.0 + 1e-6) {
        throw NumericError("top eigenvalue is not 1; transition matrix is not row-stochastic");
    }
    if (pairs.eigenvalues[1] >= 1.0 - 1e-9) {
        throw NumericError(
            "graph is disconnected (lambda_2 = 1); increase the kernel bandwidth quantile");
    }

    Embedding emb;
    emb.t = t;
    emb.eigenvalues = pairs.eigenvalues.segment(1, d_hat);
    emb.coords.resize(n, d_hat);
    for (int l = 0; l < d_hat; ++l) {
        emb.coords.col(l) = eigen_power(emb.eigenvalues[l], t) * pairs.eigenvectors.col(l + 1);
    }
    return emb;
}

double diffusion_distance(const Embedding& emb, int i, int j) {
    if (i < 0 || j < 0 || i >= emb.points() || j >= emb.points()) {
        throw DataError("diffusion_distance index out of range");
    }
    return (emb.coords.row(i) - emb.coords.row(j)).norm();
}

} // namespace sleepgeo
