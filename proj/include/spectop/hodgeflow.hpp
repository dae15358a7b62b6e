#pragma once

#include <Eigen/Dense>

#include "spectop/complex.hpp"

namespace spectop {

/// Orthogonal decomposition of an edge flow f into gradient (b1^T psi), curl
/// (b2 omega), and harmonic parts, with the squared 2-norm of each component.
struct HodgeSplit {
    Eigen::VectorXd gradient;
    Eigen::VectorXd curl;
    Eigen::VectorXd harmonic;
    Eigen::VectorXd potential;   // psi, zero mean per connected component
    Eigen::VectorXd circulation; // omega, minimum norm
    double e_grad = 0.0;
    double e_curl = 0.0;
    double e_harm = 0.0;
};

/// Decompose an edge flow. The potential solves min ||b1^T psi - f|| and the
/// circulation solves min ||b2 omega - f||, both by least-squares conjugate
/// gradients to the given tolerance (iteration cap 20x the problem size).
/// Throws SolverError on non-convergence.
HodgeSplit hodge_decompose(const SurfaceComplex& complex, const Eigen::VectorXd& flow,
                           double tol = 1e-10);

/// dim ker(l1) under the null threshold; equals beta1.
int harmonic_dimension(const SurfaceComplex& complex);

struct ChannelThresholds {
    double entropy_max = 0.0; // H*: entropy must fall below this
    double curl_min = 0.0;    // E*_c: curl energy must exceed this
    int beta1_min = 1;        // beta1*: cycle count must reach this

    /// Reference thresholds derived from a flat baseline:
    /// H* = 0.95 H_flat, E*_c = 10 E_curl_flat + 1e-9, beta1* = 1.
    static ChannelThresholds from_flat_baseline(double entropy_flat, double e_curl_flat) {
        return {0.95 * entropy_flat, 10.0 * e_curl_flat + 1e-9, 1};
    }
};

/// Triple channel criterion: low spectral entropy, elevated curl energy,
/// anomalous beta1. Necessary, not sufficient, for a channel network;
/// the joint flag is the conjunction of all three.
struct ChannelDiagnostic {
    bool entropy_low = false;
    bool curl_high = false;
    bool beta1_anomalous = false;
    bool joint = false;
    ChannelThresholds thresholds;
    double entropy = 0.0;
    double e_curl = 0.0;
    int beta1 = 0;
};

ChannelDiagnostic channel_diagnostic(const SurfaceComplex& complex,
                                     const Eigen::VectorXd& flow,
                                     const Eigen::VectorXd& h_star,
                                     const ChannelThresholds& thresholds);

/// Synthetic drainage: gradient of an elevation potential plus circulation on
/// each supplied cycle (columns must be unit-norm edge circulations), each
/// scaled by coeff * ||gradient part|| / sqrt(#cycles).
Eigen::VectorXd synthetic_drainage_flow(const SurfaceComplex& complex,
                                        const Eigen::VectorXd& elevation,
                                        const Eigen::MatrixXd& circulations,
                                        double coeff = 0.3);

} // namespace spectop
