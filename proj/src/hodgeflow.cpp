#include "spectop/hodgeflow.hpp"

#include <deque>

#include <Eigen/IterativeLinearSolvers>

#include "spectop/spectral.hpp"

namespace spectop {

namespace {

std::vector<int> connected_components(const SurfaceComplex& complex) {
    const int n = complex.vertex_count();
    std::vector<int> comp(n, -1);
    int next = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = next;
        std::deque<int> queue{s};
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int u : complex.adjacency[v])
                if (comp[u] < 0) {
                    comp[u] = next;
                    queue.push_back(u);
                }
        }
        ++next;
    }
    return comp;
}

Eigen::VectorXd least_squares(const SpMat& a, const Eigen::VectorXd& b, double tol,
                              const char* what) {
    if (a.cols() == 0) return Eigen::VectorXd(0);
    const Eigen::VectorXd rhs = SpMat(a.transpose()) * b;
    if (rhs.norm() <= 1e-12 * std::max(b.norm(), 1.0))
        return Eigen::VectorXd::Zero(a.cols()); // b orthogonal to the range

    Eigen::LeastSquaresConjugateGradient<SpMat> solver;
    solver.setTolerance(tol);
    solver.setMaxIterations(20 * std::max(a.rows(), a.cols()));
    solver.compute(a);
    Eigen::VectorXd x = solver.solve(b);
    if (solver.info() != Eigen::Success) {
        // iteration cap: accept only if the normal equations are satisfied
        const double opt = (SpMat(a.transpose()) * (a * x - b)).norm();
        if (opt > 10.0 * tol * rhs.norm())
            throw SolverError(std::string(what) + " least squares did not converge",
                              solver.error());
    }
    return x;
}

} // namespace

HodgeSplit hodge_decompose(const SurfaceComplex& complex, const Eigen::VectorXd& flow,
                           double tol) {
    if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
    if (flow.size() != complex.edge_count())
        throw ParameterError("flow length must equal the edge count");

    HodgeSplit split;
    const SpMat b1t = complex.b1.transpose();
    split.potential = least_squares(b1t, flow, tol, "potential");

    // gauge: zero mean per connected component
    const std::vector<int> comp = connected_components(complex);
    const int ncomp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(ncomp);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(ncomp);
    for (int v = 0; v < complex.vertex_count(); ++v) {
        sums(comp[v]) += split.potential(v);
        counts(comp[v]) += 1.0;
    }
    for (int v = 0; v < complex.vertex_count(); ++v)
        split.potential(v) -= sums(comp[v]) / counts(comp[v]);

    split.gradient = b1t * split.potential;

    if (complex.face_count() > 0) {
        split.circulation = least_squares(complex.b2, flow, tol, "circulation");
        split.curl = complex.b2 * split.circulation;
    } else {
        split.circulation = Eigen::VectorXd(0);
        split.curl = Eigen::VectorXd::Zero(flow.size());
    }

    split.harmonic = flow - split.gradient - split.curl;
    split.e_grad = split.gradient.squaredNorm();
    split.e_curl = split.curl.squaredNorm();
    split.e_harm = split.harmonic.squaredNorm();
    return split;
}

int harmonic_dimension(const SurfaceComplex& complex) {
    return null_space_dimension(hodge_laplacians(complex).l1);
}

ChannelDiagnostic channel_diagnostic(const SurfaceComplex& complex,
                                     const Eigen::VectorXd& flow,
                                     const Eigen::VectorXd& h_star,
                                     const ChannelThresholds& thresholds) {
    ChannelDiagnostic diag;
    diag.thresholds = thresholds;
    diag.entropy = spectral_entropy(h_star);
    diag.e_curl = hodge_decompose(complex, flow).e_curl;
    diag.beta1 = harmonic_dimension(complex);
    diag.entropy_low = diag.entropy < thresholds.entropy_max;
    diag.curl_high = diag.e_curl > thresholds.curl_min;
    diag.beta1_anomalous = diag.beta1 >= thresholds.beta1_min;
    diag.joint = diag.entropy_low && diag.curl_high && diag.beta1_anomalous;
    return diag;
}

Eigen::VectorXd synthetic_drainage_flow(const SurfaceComplex& complex,
                                        const Eigen::VectorXd& elevation,
                                        const Eigen::MatrixXd& circulations,
                                        double coeff) {
    if (elevation.size() != complex.vertex_count())
        throw ParameterError("elevation length must equal the vertex count");
    Eigen::VectorXd flow = SpMat(complex.b1.transpose()) * elevation;
    const int ncirc = static_cast<int>(circulations.cols());
    if (ncirc > 0) {
        if (circulations.rows() != complex.edge_count())
            throw ParameterError("circulation rows must equal the edge count");
        const double scale = coeff * flow.norm() / std::sqrt(static_cast<double>(ncirc));
        for (int i = 0; i < ncirc; ++i) flow += scale * circulations.col(i);
    }
    return flow;
}

} // namespace spectop
