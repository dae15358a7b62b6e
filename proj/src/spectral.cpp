#include "spectop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

namespace spectop {

namespace {

void fix_signs(Eigen::MatrixXd& vectors) {
    for (int j = 0; j < vectors.cols(); ++j) {
        for (int i = 0; i < vectors.rows(); ++i) {
            if (std::abs(vectors(i, j)) > 1e-12) {
                if (vectors(i, j) < 0) vectors.col(j) *= -1.0;
                break;
            }
        }
    }
}

Eigen::VectorXd pair_residuals(const Eigen::MatrixXd& laplacian,
                               const Eigen::VectorXd& values,
                               const Eigen::MatrixXd& vectors) {
    Eigen::VectorXd r(values.size());
    for (int j = 0; j < values.size(); ++j)
        r(j) = (laplacian * vectors.col(j) - values(j) * vectors.col(j)).norm();
    return r;
}

SpectralBasis finalize(const Eigen::MatrixXd& laplacian, Eigen::VectorXd values,
                       Eigen::MatrixXd vectors) {
    fix_signs(vectors);
    SpectralBasis basis;
    basis.residuals = pair_residuals(laplacian, values, vectors);
    basis.eigenvalues = std::move(values);
    basis.eigenvectors = std::move(vectors);
    if (basis.mode_count() >= 2) basis.fiedler = basis.eigenvalues(1);
    return basis;
}

SpectralBasis dense_lowest(const Eigen::MatrixXd& laplacian, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success)
        throw SolverError("dense eigendecomposition failed", 0.0);
    return finalize(laplacian, solver.eigenvalues().head(k),
                    solver.eigenvectors().leftCols(k));
}

// Subspace iteration on the spectral complement sigma*I - L (sigma a Gershgorin
// bound on lambda_max), re-orthonormalized every step; no linear solves.
SpectralBasis iterative_lowest(const Eigen::MatrixXd& laplacian, int k,
                               const EigOptions& options) {
    const int n = static_cast<int>(laplacian.rows());
    const int cap = options.max_iter > 0 ? options.max_iter : 10 * n;

    double sigma = 1.0;
    for (int i = 0; i < n; ++i)
        sigma = std::max(sigma, laplacian.row(i).cwiseAbs().sum());

    // small guard block improves separation of the k-th pair
    const int block = std::min(n, k + std::min(4, n - k));
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(n, block);
    for (int j = 0; j < block; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = gauss(rng);

    Eigen::VectorXd ritz;
    Eigen::MatrixXd vectors;
    double best = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cap; ++iter) {
        x = sigma * x - laplacian * x;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
        Eigen::MatrixXd small = q.transpose() * laplacian * q;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(small);
        ritz = rr.eigenvalues();
        vectors = q * rr.eigenvectors();
        x = vectors;

        double worst = 0.0;
        for (int j = 0; j < k; ++j)
            worst = std::max(worst,
                             (laplacian * vectors.col(j) - ritz(j) * vectors.col(j)).norm());
        best = std::min(best, worst);
        if (worst <= options.tol)
            return finalize(laplacian, ritz.head(k), vectors.leftCols(k));
    }
    throw SolverError("lowest-eigenpair iteration did not converge", best);
}

struct Coarsening {
    std::vector<int> owner;      // vertex -> sample slot, -1 if unreachable
    int sample_count = 0;
    bool induced_disconnected = false;
};

Coarsening assign_clusters(const SurfaceComplex& complex, const std::vector<int>& samples) {
    const int n = complex.vertex_count();
    Coarsening c;
    c.sample_count = static_cast<int>(samples.size());
    c.owner.assign(n, -1);
    std::deque<int> queue;
    for (int j = 0; j < c.sample_count; ++j) {
        c.owner[samples[j]] = j;
        queue.push_back(samples[j]);
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int u : complex.adjacency[v]) {
            if (c.owner[u] < 0) {
                c.owner[u] = c.owner[v];
                queue.push_back(u);
            }
        }
    }
    return c;
}

int component_count(const std::vector<std::vector<int>>& adjacency, int n) {
    std::vector<int> seen(n, 0);
    int comps = 0;
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        ++comps;
        std::deque<int> queue{s};
        seen[s] = 1;
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int u : adjacency[v])
                if (!seen[u]) {
                    seen[u] = 1;
                    queue.push_back(u);
                }
        }
    }
    return comps;
}

// Fisher-Yates with an explicit rejection-sampled bound so the draw sequence
// is fully specified by the seed.
std::vector<int> uniform_sample(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    auto draw = [&rng](std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do {
            r = rng();
        } while (r >= limit);
        return static_cast<int>(r % bound);
    };
    for (int i = 0; i < count; ++i) {
        const int j = i + draw(static_cast<std::uint64_t>(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace

SpectralBasis eigendecompose(const Eigen::MatrixXd& laplacian, int k,
                             EigMethod method, const EigOptions& options) {
    const int n = static_cast<int>(laplacian.rows());
    if (laplacian.cols() != n) throw ParameterError("matrix must be square");
    if (k < 1 || k > n) throw ParameterError("mode count out of range");
    if ((laplacian - laplacian.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw ParameterError("matrix must be symmetric");
    return method == EigMethod::Dense ? dense_lowest(laplacian, k)
                                      : iterative_lowest(laplacian, k, options);
}

SpectralBasis eigendecompose(const SpMat& laplacian, int k, EigMethod method,
                             const EigOptions& options) {
    return eigendecompose(Eigen::MatrixXd(laplacian), k, method, options);
}

SpectralBasis nystrom_basis(const SurfaceComplex& complex, int coarse_count,
                            int k, std::uint64_t seed) {
    const int n = complex.vertex_count();
    if (coarse_count < 1 || coarse_count > n)
        throw ParameterError("coarse count out of range");
    if (k < 1 || k > coarse_count)
        throw ParameterError("mode count exceeds coarse sample size");

    const Eigen::MatrixXd full = Eigen::MatrixXd(hodge_laplacians(complex).l0);
    if (coarse_count == n) return dense_lowest(full, k); // degenerate full sample

    const std::vector<int> samples = uniform_sample(n, coarse_count, seed);
    const Coarsening clusters = assign_clusters(complex, samples);

    // induced subgraph connectivity check (sampling-sparsity warning)
    std::vector<int> slot(n, -1);
    for (int j = 0; j < coarse_count; ++j) slot[samples[j]] = j;
    std::vector<std::vector<int>> induced(coarse_count);
    for (const auto& e : complex.edges) {
        if (slot[e[0]] >= 0 && slot[e[1]] >= 0) {
            induced[slot[e[0]]].push_back(slot[e[1]]);
            induced[slot[e[1]]].push_back(slot[e[0]]);
        }
    }
    const bool full_connected = component_count(complex.adjacency, n) == 1;
    const bool induced_connected = component_count(induced, coarse_count) == 1;

    // quotient Laplacian: weight = number of full edges crossing two clusters
    const int m = coarse_count;
    Eigen::MatrixXd coarse = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : complex.edges) {
        const int a = clusters.owner[e[0]], b = clusters.owner[e[1]];
        if (a != b && a >= 0 && b >= 0) {
            coarse(a, b) -= 1.0;
            coarse(b, a) -= 1.0;
            coarse(a, a) += 1.0;
            coarse(b, b) += 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cs(coarse);
    if (cs.info() != Eigen::Success)
        throw SolverError("coarse eigendecomposition failed", 0.0);

    // prolong an enriched block and refine: Richardson low-pass filtering in
    // the full operator, re-orthonormalization, Rayleigh-Ritz each round
    const int kext = std::min(m, 3 * k + 5);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, kext);
    for (int v = 0; v < n; ++v)
        if (clusters.owner[v] >= 0)
            x.row(v) = cs.eigenvectors().block(clusters.owner[v], 0, 1, kext);

    double sigma = 1.0;
    for (int i = 0; i < n; ++i)
        sigma = std::max(sigma, full.row(i).cwiseAbs().sum());

    Eigen::VectorXd ritz;
    const int rounds = 8, steps = 3;
    for (int round = 0; round <= rounds; ++round) {
        if (round > 0)
            for (int s = 0; s < steps; ++s) x -= (full * x) / sigma;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, kext);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(q.transpose() * full * q);
        ritz = rr.eigenvalues();
        x = q * rr.eigenvectors();
    }

    SpectralBasis basis = finalize(full, ritz.head(k), x.leftCols(k));
    basis.coarse_disconnected = full_connected && !induced_connected;
    return basis;
}

double spectral_entropy(const Eigen::VectorXd& h) {
    if (h.size() == 0) throw DomainError("empty kernel vector");
    double total = 0.0;
    for (int i = 0; i < h.size(); ++i) {
        if (!(h(i) > 0.0)) throw DomainError("kernel entries must be positive");
        total += h(i);
    }
    double entropy = 0.0;
    for (int i = 0; i < h.size(); ++i) {
        const double p = h(i) / total;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return entropy;
}

int null_space_dimension(const SpMat& laplacian, double tau) {
    if (laplacian.rows() == 0) return 0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(laplacian),
                                                          Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& values = solver.eigenvalues();
    const double cutoff = tau * std::max(values(values.size() - 1), 1.0);
    int dim = 0;
    while (dim < values.size() && values(dim) <= cutoff) ++dim;
    return dim;
}

double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) throw ParameterError("subspace dimensions differ");
    // sine formulation: stable for near-identical subspaces
    const Eigen::MatrixXd residual = b - a * (a.transpose() * b);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
    const double smax = svd.singularValues().maxCoeff();
    return std::asin(std::clamp(smax, 0.0, 1.0));
}

} // namespace spectop
