#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spectop/complex.hpp"
#include "spectop/errors.hpp"

namespace spectop {

/// Eigenvalue threshold factor: an eigenvalue counts as zero iff
/// lambda <= kNullTau * max(lambda_max, 1).
inline constexpr double kNullTau = 1e-8;

/// The k lowest eigenpairs of a symmetric PSD operator.
///
/// Invariants: eigenvalues ascending and >= -1e-10; columns orthonormal to
/// 1e-8; per-pair residual ||L phi - lambda phi|| recorded. Sign convention:
/// the first component of each eigenvector whose magnitude exceeds 1e-12 is
/// positive.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors; // n x k, orthonormal columns
    Eigen::VectorXd residuals;
    /// lambda_1 (algebraic connectivity when the operator is a vertex Laplacian).
    double fiedler = std::numeric_limits<double>::quiet_NaN();
    /// Set by nystrom_basis when the sampled induced subgraph is disconnected
    /// although the full graph is connected (spurious zero modes possible).
    bool coarse_disconnected = false;

    int mode_count() const { return static_cast<int>(eigenvalues.size()); }
};

enum class EigMethod { Dense, Iterative };

struct EigOptions {
    double tol = 1e-10; // per-pair residual tolerance (iterative method)
    int max_iter = 0;   // 0 -> 10 * dim
};

/// k lowest eigenpairs of a symmetric matrix. The dense path runs a full
/// tridiagonal solve; the iterative path runs spectral-complement subspace
/// iteration with full reorthogonalization and a Rayleigh-Ritz finish, and
/// throws SolverError (carrying the best residual) if the iteration cap is
/// reached.
SpectralBasis eigendecompose(const Eigen::MatrixXd& laplacian, int k,
                             EigMethod method = EigMethod::Dense,
                             const EigOptions& options = {});
SpectralBasis eigendecompose(const SpMat& laplacian, int k,
                             EigMethod method = EigMethod::Dense,
                             const EigOptions& options = {});

/// Approximate k lowest eigenpairs of the vertex Laplacian from a uniform
/// without-replacement subsample of coarse_count vertices. Deterministic given
/// the seed. The coarse operator is the sample-cluster quotient Laplacian
/// (each vertex assigned to its nearest sample by multi-source BFS); coarse
/// eigenvectors are prolonged to all vertices and refined by smoothed subspace
/// iteration with a Rayleigh-Ritz projection against the full Laplacian.
SpectralBasis nystrom_basis(const SurfaceComplex& complex, int coarse_count,
                            int k, std::uint64_t seed);

/// Shannon entropy (nats) of the normalized kernel mass p_l = h_l / sum(h).
/// Throws DomainError unless every h_l > 0.
double spectral_entropy(const Eigen::VectorXd& h);

/// Number of eigenvalues of a symmetric PSD operator at or below
/// tau * max(lambda_max, 1), via a full dense eigenvalue solve.
int null_space_dimension(const SpMat& laplacian, double tau = kNullTau);

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases with the same column count.
double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

} // namespace spectop
