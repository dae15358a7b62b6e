#include "spectop/topology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <sstream>

namespace spectop {

namespace {

constexpr double kAugmentationTau = 1.0; // ceil(x) applies only above this
constexpr double kRankTol = 1e-8;

int matrix_rank(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return static_cast<int>((svd.singularValues().array() > kRankTol).count());
}

struct SpanningForest {
    std::vector<int> parent; // -1 at roots
    std::vector<int> depth;
    std::vector<bool> in_tree; // per edge index
};

SpanningForest bfs_forest(const SurfaceComplex& complex) {
    const int n = complex.vertex_count();
    SpanningForest forest;
    forest.parent.assign(n, -2);
    forest.depth.assign(n, 0);
    forest.in_tree.assign(complex.edge_count(), false);
    for (int root = 0; root < n; ++root) {
        if (forest.parent[root] != -2) continue;
        forest.parent[root] = -1;
        std::deque<int> queue{root};
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int u : complex.adjacency[v]) {
                if (forest.parent[u] == -2) {
                    forest.parent[u] = v;
                    forest.depth[u] = forest.depth[v] + 1;
                    forest.in_tree[complex.edge_index(u, v)] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    return forest;
}

// Vertex sequence of the fundamental cycle closed by non-tree edge (u, v):
// u .. common ancestor .. v, traversed so the closing edge is v -> u.
std::vector<int> fundamental_cycle(const SpanningForest& forest, int u, int v) {
    std::vector<int> up{u}, down{v};
    int a = u, b = v;
    while (forest.depth[a] > forest.depth[b]) { a = forest.parent[a]; up.push_back(a); }
    while (forest.depth[b] > forest.depth[a]) { b = forest.parent[b]; down.push_back(b); }
    while (a != b) {
        a = forest.parent[a]; up.push_back(a);
        b = forest.parent[b]; down.push_back(b);
    }
    up.insert(up.end(), down.rbegin() + 1, down.rend());
    return up;
}

Eigen::VectorXd circulation_vector(const SurfaceComplex& complex,
                                   const std::vector<int>& cycle) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(complex.edge_count());
    const int len = static_cast<int>(cycle.size());
    for (int i = 0; i < len; ++i) {
        const int u = cycle[i], v = cycle[(i + 1) % len];
        const int e = complex.edge_index(u, v);
        z(e) = u < v ? 1.0 : -1.0;
    }
    return z;
}

std::vector<Eigen::Vector3d> circle_positions(int count, const Eigen::Vector3d& center,
                                              double radius, double phase = 0.0) {
    std::vector<Eigen::Vector3d> points(count);
    for (int i = 0; i < count; ++i) {
        const double t = phase + 2.0 * M_PI * i / count;
        points[i] = center + Eigen::Vector3d(radius * std::cos(t), radius * std::sin(t), 0.0);
    }
    return points;
}

} // namespace

BettiNumbers betti_numbers(const HodgeLaplacians& laplacians) {
    BettiNumbers b;
    b.beta0 = null_space_dimension(laplacians.l0);
    b.beta1 = null_space_dimension(laplacians.l1);
    b.beta2 = null_space_dimension(laplacians.l2);
    const long nv = laplacians.l0.rows();
    const long ne = laplacians.l1.rows();
    const long nf = laplacians.l2.rows();
    b.euler_ok = (b.beta0 - b.beta1 + b.beta2) == (nv - ne + nf);
    return b;
}

CycleBasis cycle_basis(const SurfaceComplex& complex) {
    const int nv = complex.vertex_count();
    const int ne = complex.edge_count();
    const SpanningForest forest = bfs_forest(complex);

    struct Candidate {
        int length;
        int edge;
        std::vector<int> cycle;
    };
    std::vector<Candidate> candidates;
    for (int e = 0; e < ne; ++e) {
        if (forest.in_tree[e]) continue;
        auto cycle = fundamental_cycle(forest, complex.edges[e][0], complex.edges[e][1]);
        candidates.push_back({static_cast<int>(cycle.size()), e, std::move(cycle)});
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.length != b.length ? a.length < b.length : a.edge < b.edge;
    });

    // On complexes with faces, drop candidates whose harmonic content is
    // dependent on already-selected generators. A cycle's circulation has no
    // gradient part, so its harmonic part is the residual off im(b2).
    Eigen::MatrixXd boundary_basis; // orthonormal basis of im(b2)
    int boundary_rank = 0;
    if (complex.face_count() > 0) {
        const Eigen::MatrixXd b2(complex.b2);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b2);
        qr.setThreshold(1e-10);
        boundary_rank = static_cast<int>(qr.rank());
        boundary_basis = Eigen::MatrixXd(qr.householderQ())
                             .leftCols(boundary_rank);
    }

    std::vector<const Candidate*> selected;
    std::vector<Eigen::VectorXd> harmonic_parts;
    Eigen::MatrixXd circulations(ne, 0);
    for (const auto& cand : candidates) {
        const Eigen::VectorXd z = circulation_vector(complex, cand.cycle);
        Eigen::VectorXd h = z;
        if (boundary_rank > 0) h -= boundary_basis * (boundary_basis.transpose() * z);
        for (const auto& prev : harmonic_parts) h -= prev.dot(h) * prev;
        if (h.norm() <= 1e-6 * z.norm()) continue;
        harmonic_parts.push_back(h / h.norm());
        selected.push_back(&cand);
        circulations.conservativeResize(Eigen::NoChange, selected.size());
        circulations.col(selected.size() - 1) = z / z.norm();
    }

    CycleBasis basis;
    basis.circulations = std::move(circulations);
    basis.U.resize(nv, selected.size());
    basis.indicators.resize(nv, selected.size());
    for (std::size_t j = 0; j < selected.size(); ++j) {
        Eigen::VectorXd ind = Eigen::VectorXd::Zero(nv);
        for (int v : selected[j]->cycle) ind(v) = 1.0;
        basis.indicators.col(j) = ind;
        Eigen::VectorXd centered = ind.array() - ind.mean();
        basis.U.col(j) = centered / centered.norm();
        basis.cycle_lengths.push_back(selected[j]->length);
    }
    if (!basis.cycle_lengths.empty()) {
        basis.l_min = *std::min_element(basis.cycle_lengths.begin(), basis.cycle_lengths.end());
        basis.l_max = *std::max_element(basis.cycle_lengths.begin(), basis.cycle_lengths.end());
        basis.gamma = static_cast<double>(basis.l_max) / basis.l_min;
    }
    return basis;
}

FidelityResult cycle_subspace_fidelity(const SpectralBasis& basis, const CycleBasis& cycles,
                                       int k) {
    if (k < 1 || k > basis.mode_count())
        throw ParameterError("retained mode count out of range");
    if (cycles.count() == 0) return {0.0, 0};
    const Eigen::MatrixXd projected =
        basis.eigenvectors.leftCols(k).transpose() * cycles.U;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(projected);
    FidelityResult result;
    result.rho = svd.singularValues().minCoeff();
    result.rank = static_cast<int>((svd.singularValues().array() > kRankTol).count());
    return result;
}

CompressionBudget compression_floor(const BettiNumbers& betti, const SpectralBasis& basis,
                                    const CycleBasis& cycles, double c1) {
    CompressionBudget budget;
    budget.c1 = c1;
    budget.k_base = betti.beta0 + betti.beta1;
    if (basis.mode_count() < budget.k_base + 2)
        throw ParameterError("need at least beta0 + beta1 + 2 modes to evaluate the gap");

    budget.delta_gap = basis.eigenvalues(budget.k_base + 1) - basis.eigenvalues(budget.k_base);
    const double scale = std::max(basis.eigenvalues(basis.mode_count() - 1), 1.0);
    if (budget.delta_gap <= kNullTau * scale) {
        budget.degenerate_gap = true; // augmentation undefined
        budget.delta_k = 0;
    } else if (cycles.count() > 0) {
        const double x =
            c1 / (static_cast<double>(cycles.l_min) * cycles.l_min * budget.delta_gap);
        budget.x = x;
        budget.delta_k = x > kAugmentationTau ? static_cast<int>(std::ceil(x)) : 0;
    }
    budget.k_min = budget.k_base + budget.delta_k;
    return budget;
}

CompressedBetti compressed_betti(const SpectralBasis& basis, const CycleBasis& cycles,
                                 const BettiNumbers& betti, int k) {
    if (k < 1 || k > basis.mode_count())
        throw ParameterError("retained mode count out of range");
    CompressedBetti result;
    const double scale = std::max(basis.eigenvalues(basis.mode_count() - 1), 1.0);
    for (int i = 0; i < k; ++i)
        if (basis.eigenvalues(i) <= kNullTau * scale) ++result.beta0_hat;
    result.beta0_hat = std::min(result.beta0_hat, betti.beta0);
    if (cycles.count() > 0)
        result.beta1_hat = matrix_rank(basis.eigenvectors.leftCols(k).transpose() * cycles.U);
    return result;
}

double landauer_bound(std::uint64_t n, double temperature_kelvin) {
    if (n == 0) throw DomainError("state count must be at least 1");
    if (!(temperature_kelvin > 0.0)) throw DomainError("temperature must be positive");
    constexpr double kBoltzmann = 1.380649e-23; // J/K
    const int bits = std::bit_width(n) - 1;     // floor(log2 n)
    return bits * kBoltzmann * temperature_kelvin * M_LN2;
}

SurfaceComplex make_path(int n) {
    if (n < 2) throw ParameterError("path needs at least two vertices");
    std::vector<Eigen::Vector3d> points(n);
    std::vector<std::array<int, 2>> edges;
    for (int i = 0; i < n; ++i) points[i] = {static_cast<double>(i), 0.0, 0.0};
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    return build_complex(std::move(points), {}, edges);
}

SurfaceComplex make_grid(int rows, int cols) {
    if (rows < 2 || cols < 2) throw ParameterError("grid needs at least 2x2 vertices");
    const auto vid = [cols](int r, int c) { return r * cols + c; };
    std::vector<Eigen::Vector3d> points(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            points[vid(r, c)] = {static_cast<double>(c), static_cast<double>(r), 0.0};
    std::vector<std::array<int, 3>> faces;
    for (int r = 0; r + 1 < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c) {
            faces.push_back({vid(r, c), vid(r, c + 1), vid(r + 1, c + 1)});
            faces.push_back({vid(r, c), vid(r + 1, c + 1), vid(r + 1, c)});
        }
    return build_complex(std::move(points), std::move(faces));
}

SurfaceComplex make_figure_eight(int la, int lb) {
    if (la < 3 || lb < 3) throw ParameterError("cycle lengths must be at least 3");
    const int n = la + lb - 1;
    std::vector<Eigen::Vector3d> points(n);
    points[0] = {0.0, 0.0, 0.0};
    const auto left = circle_positions(la, {-1.0, 0.0, 0.0}, 1.0);
    const auto right = circle_positions(lb, {1.0, 0.0, 0.0}, 1.0, M_PI);
    for (int i = 1; i < la; ++i) points[i] = left[i];
    for (int i = 1; i < lb; ++i) points[la + i - 1] = right[i];
    std::vector<std::array<int, 2>> edges;
    auto add_cycle = [&edges](const std::vector<int>& cyc) {
        const int len = static_cast<int>(cyc.size());
        for (int i = 0; i < len; ++i) {
            const int u = cyc[i], v = cyc[(i + 1) % len];
            edges.push_back({std::min(u, v), std::max(u, v)});
        }
    };
    std::vector<int> a(la), b(lb);
    std::iota(a.begin(), a.end(), 0);
    b[0] = 0;
    std::iota(b.begin() + 1, b.end(), la);
    add_cycle(a);
    add_cycle(b);
    return build_complex(std::move(points), {}, edges);
}

SurfaceComplex make_separated_cycles(int l, int bridge_len) {
    if (l < 3) throw ParameterError("cycle length must be at least 3");
    if (bridge_len < 1) throw ParameterError("bridge length must be at least 1");
    const int n = 2 * l + bridge_len - 1;
    std::vector<Eigen::Vector3d> points(n);
    const auto left = circle_positions(l, {-2.0, 0.0, 0.0}, 1.0);
    const auto right = circle_positions(l, {2.0 + bridge_len, 0.0, 0.0}, 1.0, M_PI);
    for (int i = 0; i < l; ++i) points[i] = left[i];
    for (int i = 0; i < l; ++i) points[l + i] = right[i];
    for (int i = 0; i + 1 < bridge_len; ++i)
        points[2 * l + i] = {-1.0 + 3.0 * (i + 1) / bridge_len, 0.0, 0.0};

    std::vector<std::array<int, 2>> edges;
    for (int i = 0; i < l; ++i) {
        edges.push_back({std::min(i, (i + 1) % l), std::max(i, (i + 1) % l)});
        edges.push_back({std::min(l + i, l + (i + 1) % l), std::max(l + i, l + (i + 1) % l)});
    }
    int prev = 0; // bridge runs from vertex 0 of the left cycle to vertex l
    for (int i = 0; i + 1 < bridge_len; ++i) {
        edges.push_back({std::min(prev, 2 * l + i), std::max(prev, 2 * l + i)});
        prev = 2 * l + i;
    }
    edges.push_back({std::min(prev, l), std::max(prev, l)});
    return build_complex(std::move(points), {}, edges);
}

SurfaceComplex make_channeled(int n, int n_cross) {
    if (n < 16) throw ParameterError("channeled family needs at least 16 vertices");
    if (n_cross < 1) throw ParameterError("need at least one cross-link");
    int rows = static_cast<int>(std::sqrt(n / 2.0));
    while (rows > 2 && n % rows != 0) --rows;
    if (rows < 2 || n % rows != 0)
        throw ParameterError("vertex count must factor into a rows x cols grid");
    const int cols = n / rows;

    SurfaceComplex grid = make_grid(rows, cols);
    const auto vid = [cols](int r, int c) { return r * cols + c; };
    const int span = std::max(4, (10 * cols) / 32);
    if (span + 6 > cols || n_cross + 1 > rows)
        throw ParameterError("grid too small for the requested cross-links");
    std::vector<std::array<int, 2>> links;
    for (int i = 0; i < n_cross; ++i) {
        const int r = ((i + 1) * rows) / (n_cross + 1);
        const int ca = 2 + (i * (cols - span - 4)) / std::max(1, n_cross - 1);
        links.push_back({vid(r, ca), vid(r, ca + span)});
    }
    return build_complex(grid.vertices, grid.faces, links);
}

SurfaceComplex make_crater(int rim_len, int base) {
    if (rim_len < 3) throw ParameterError("rim length must be at least 3");
    if (base < 2) throw ParameterError("base grid must be at least 2x2");
    SurfaceComplex grid = make_grid(base, base);
    const int n0 = grid.vertex_count();
    std::vector<Eigen::Vector3d> points = grid.vertices;
    const auto rim_pos =
        circle_positions(rim_len, {-0.5, -0.5, 0.5}, std::max(1.0, base / 3.0));
    for (int i = 1; i < rim_len; ++i) points.push_back(rim_pos[i]);

    std::vector<std::array<int, 2>> rim_edges;
    std::vector<int> rim{0};
    for (int i = 0; i + 1 < rim_len; ++i) rim.push_back(n0 + i);
    for (int i = 0; i < rim_len; ++i) {
        const int u = rim[i], v = rim[(i + 1) % rim_len];
        rim_edges.push_back({std::min(u, v), std::max(u, v)});
    }
    return build_complex(std::move(points), grid.faces, rim_edges);
}

SurfaceComplex gen_family(const std::string& descriptor) {
    const auto open = descriptor.find('(');
    const auto close = descriptor.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ParameterError("family descriptor must look like name(arg, ...)");
    const std::string name = descriptor.substr(0, open);
    std::vector<int> args;
    std::stringstream argstream(descriptor.substr(open + 1, close - open - 1));
    std::string tok;
    while (std::getline(argstream, tok, ',')) {
        try {
            args.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ParameterError("bad family argument '" + tok + "'");
        }
    }
    auto want = [&](std::size_t k) {
        if (args.size() != k)
            throw ParameterError(name + " takes " + std::to_string(k) + " arguments");
    };
    if (name == "path") { want(1); return make_path(args[0]); }
    if (name == "grid") { want(2); return make_grid(args[0], args[1]); }
    if (name == "figure_eight") { want(2); return make_figure_eight(args[0], args[1]); }
    if (name == "separated_cycles") { want(2); return make_separated_cycles(args[0], args[1]); }
    if (name == "channeled") { want(2); return make_channeled(args[0], args[1]); }
    if (name == "crater") { want(2); return make_crater(args[0], args[1]); }
    throw ParameterError("unknown family '" + name + "'");
}

std::vector<A2SweepRow> a2_sweep(const std::vector<int>& lengths,
                                 const std::vector<std::string>& families,
                                 int delta_k_aug) {
    std::vector<A2SweepRow> rows;
    for (const auto& family : families) {
        for (int l : lengths) {
            if (l < 3) throw ParameterError("cycle length must be at least 3");
            const SurfaceComplex complex = family == "A"
                                               ? make_figure_eight(l, l)
                                               : make_separated_cycles(l, 2);
            const HodgeLaplacians laplacians = hodge_laplacians(complex);
            const BettiNumbers betti = betti_numbers(laplacians);
            const SpectralBasis basis =
                eigendecompose(laplacians.l0, complex.vertex_count());
            const CycleBasis cycles = cycle_basis(complex);
            const CompressionBudget budget = compression_floor(betti, basis, cycles);

            A2SweepRow row;
            row.family = family;
            row.l = l;
            row.beta0 = betti.beta0;
            row.beta1 = betti.beta1;
            row.gamma = cycles.gamma;
            row.delta_gap = budget.delta_gap;
            row.degenerate_gap = budget.degenerate_gap;
            row.x = budget.x;
            const FidelityResult at_kmin =
                cycle_subspace_fidelity(basis, cycles, budget.k_base);
            row.rho_at_kmin = at_kmin.rho;
            row.rank_at_kmin = at_kmin.rank;
            row.a2_holds = at_kmin.rank == betti.beta1;
            const int k_aug = budget.k_base + delta_k_aug;
            if (!row.a2_holds && k_aug <= basis.mode_count()) {
                const FidelityResult eased = cycle_subspace_fidelity(basis, cycles, k_aug);
                row.rho_after_augmentation = eased.rho;
                row.rank_after_augmentation = eased.rank;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::optional<A2FitResult> fit_a2_constants(const std::vector<A2SweepRow>& rows) {
    // fit 1 - rho(k_min) = c1 * x + c2 * (gamma - 1) over rows with defined x
    std::vector<double> xs, gs, ys;
    for (const auto& row : rows) {
        if (!row.x) continue;
        xs.push_back(*row.x);
        gs.push_back(row.gamma - 1.0);
        ys.push_back(1.0 - row.rho_at_kmin);
    }
    if (xs.empty()) return std::nullopt;
    const bool gamma_varies =
        *std::max_element(gs.begin(), gs.end()) - *std::min_element(gs.begin(), gs.end()) >
        1e-12;
    A2FitResult fit;
    if (!gamma_varies) {
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        if (sxx == 0.0) return std::nullopt;
        fit.c1 = sxy / sxx;
        return fit;
    }
    Eigen::MatrixXd design(xs.size(), 2);
    Eigen::VectorXd target(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        design(i, 0) = xs[i];
        design(i, 1) = gs[i];
        target(i) = ys[i];
    }
    const Eigen::Vector2d sol =
        design.colPivHouseholderQr().solve(target);
    fit.c1 = sol(0);
    fit.c2 = sol(1);
    fit.c2_identifiable = true;
    return fit;
}

std::string sweep_to_csv(const std::vector<A2SweepRow>& rows) {
    std::ostringstream out;
    out << "family,l,delta_k,x,rho_at_kmin,rho_after_aug,rank_at_kmin\n";
    char buf[64];
    auto num = [&buf](double v, const char* fmt) {
        std::snprintf(buf, sizeof(buf), fmt, v);
        return std::string(buf);
    };
    for (const auto& row : rows) {
        out << row.family << ',' << row.l << ',';
        out << (row.degenerate_gap ? std::string("degenerate")
                                   : num(row.delta_gap, "%.4f"))
            << ',';
        out << (row.x ? num(*row.x, "%.3f") : std::string("")) << ',';
        out << num(row.rho_at_kmin, "%.3f") << ',';
        out << (row.rho_after_augmentation ? num(*row.rho_after_augmentation, "%.3f")
                                           : std::string(""))
            << ',';
        out << row.rank_at_kmin << '\n';
    }
    return out.str();
}

} // namespace spectop
