#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectop/complex.hpp"
#include "spectop/spectral.hpp"

namespace spectop {

/// Betti numbers from Hodge Laplacian null spaces: beta0 components, beta1
/// independent cycles, beta2 enclosed voids. euler_ok records the identity
/// beta0 - beta1 + beta2 = |V| - |E| + |F|.
struct BettiNumbers {
    int beta0 = 0;
    int beta1 = 0;
    int beta2 = 0;
    bool euler_ok = false;
};

BettiNumbers betti_numbers(const HodgeLaplacians& laplacians);

/// A homology cycle basis: one generator per independent cycle.
///
/// Generators are fundamental cycles of a breadth-first spanning forest
/// (rooted at the lowest-index vertex per component, one candidate per
/// non-tree edge); on complexes with faces, candidates whose harmonic content
/// is dependent on already-selected generators are skipped, shortest first,
/// leaving exactly beta1 columns.
struct CycleBasis {
    /// Centered, unit-norm vertex indicators of each cycle (|V| x beta1).
    /// Mean removal keeps the columns orthogonal to the constant mode, so
    /// projected-rank measurements see only cycle structure.
    Eigen::MatrixXd U;
    /// Raw 0/1 vertex indicators, one column per cycle.
    Eigen::MatrixXd indicators;
    /// Unit-norm signed edge circulations, one column per cycle (|E| x beta1).
    Eigen::MatrixXd circulations;
    std::vector<int> cycle_lengths;
    int l_min = 0;
    int l_max = 0;
    double gamma = 1.0; // l_max / l_min

    int count() const { return static_cast<int>(cycle_lengths.size()); }
};

CycleBasis cycle_basis(const SurfaceComplex& complex);

/// Cycle-subspace fidelity rho(k) = sigma_min(Phi_k^T U) and the numerical
/// rank of the same matrix at threshold 1e-8.
struct FidelityResult {
    double rho = 0.0;
    int rank = 0;
};

FidelityResult cycle_subspace_fidelity(const SpectralBasis& basis, const CycleBasis& cycles,
                                       int k);

/// Topology-preserving mode floor k_min = beta0 + beta1 + delta_k, where the
/// augmentation delta_k = ceil(x) applies only when x = C1 / (l_min^2 delta_gap)
/// exceeds 1 (small x leaves the bare floor). delta_gap is the eigengap
/// lambda_{k+1} - lambda_k at k = beta0 + beta1; a gap at or below the null
/// threshold makes the augmentation undefined and sets degenerate_gap with
/// delta_k = 0.
struct CompressionBudget {
    int k_base = 0;
    int delta_k = 0;
    int k_min = 0;
    double delta_gap = 0.0;
    std::optional<double> x;
    double c1 = 1.0;
    bool degenerate_gap = false;
};

CompressionBudget compression_floor(const BettiNumbers& betti, const SpectralBasis& basis,
                                    const CycleBasis& cycles, double c1 = 1.0);

/// Betti numbers as seen by a k-mode compressed representation:
/// beta0_hat counts retained near-zero modes (capped at beta0), and beta1_hat
/// is the rank of Phi_k^T U.
struct CompressedBetti {
    int beta0_hat = 0;
    int beta1_hat = 0;
};

CompressedBetti compressed_betti(const SpectralBasis& basis, const CycleBasis& cycles,
                                 const BettiNumbers& betti, int k);

/// Minimum heat (joules) to erase n distinct states at temperature T kelvin:
/// floor(log2 n) * k_B T ln 2. Throws DomainError for n = 0 or T <= 0.
double landauer_bound(std::uint64_t n, double temperature_kelvin);

// --- synthetic graph families (deterministic constructions) ---

SurfaceComplex make_path(int n);
/// Triangulated rows x cols grid patch with faces (a disk: beta = 1, 0, 0).
SurfaceComplex make_grid(int rows, int cols);
/// Two cycles of lengths la and lb sharing one vertex (beta1 = 2).
SurfaceComplex make_figure_eight(int la, int lb);
/// Two l-cycles joined by a bridge of bridge_len edges (beta1 = 2).
SurfaceComplex make_separated_cycles(int l, int bridge_len);
/// Triangulated grid of n vertices with n_cross long cross-links, each adding
/// one independent junction loop (beta1 = n_cross).
SurfaceComplex make_channeled(int n, int n_cross);
/// base x base grid patch with a rim cycle of rim_len edges attached at one
/// vertex (beta1 = 1).
SurfaceComplex make_crater(int rim_len, int base);

/// Parse a descriptor such as "figure_eight(3,3)" or "path(8)".
SurfaceComplex gen_family(const std::string& descriptor);

/// One row of the spectral-ordering failure sweep.
struct A2SweepRow {
    std::string family;
    int l = 0;
    int beta0 = 0;
    int beta1 = 0;
    double gamma = 1.0;
    double delta_gap = 0.0;
    bool degenerate_gap = false;
    std::optional<double> x; // 1 / (l_min^2 delta_gap)
    double rho_at_kmin = 0.0;
    int rank_at_kmin = 0;
    std::optional<double> rho_after_augmentation;
    std::optional<int> rank_after_augmentation;
    bool a2_holds = false; // rank at k_min already equals beta1
};

/// Sweep the listed families ("A" = figure-eight, "B" = separated-cycle
/// control with bridge length 2) over the given cycle lengths, augmenting by
/// delta_k_aug modes where the retained subspace collapses.
std::vector<A2SweepRow> a2_sweep(const std::vector<int>& lengths,
                                 const std::vector<std::string>& families,
                                 int delta_k_aug = 2);

/// Least-squares fit of 1 - rho(k_min) = C1 x + C2 (gamma - 1) over rows with
/// a defined x. C2 is only identifiable when gamma varies across rows.
struct A2FitResult {
    double c1 = 0.0;
    double c2 = 0.0;
    bool c2_identifiable = false;
};

std::optional<A2FitResult> fit_a2_constants(const std::vector<A2SweepRow>& rows);

std::string sweep_to_csv(const std::vector<A2SweepRow>& rows);

} // namespace spectop
