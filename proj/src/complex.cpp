#include "spectop/complex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace spectop {

namespace {

std::uint64_t edge_key(int u, int v) {
    const auto lo = static_cast<std::uint64_t>(std::min(u, v));
    const auto hi = static_cast<std::uint64_t>(std::max(u, v));
    return (lo << 32) | hi;
}

} // namespace

int SurfaceComplex::edge_index(int u, int v) const {
    auto it = edge_lookup.find(edge_key(u, v));
    return it == edge_lookup.end() ? -1 : it->second;
}

SurfaceComplex build_complex(std::vector<Eigen::Vector3d> vertices,
                             std::vector<std::array<int, 3>> faces,
                             const std::vector<std::array<int, 2>>& extra_edges) {
    const int nv = static_cast<int>(vertices.size());
    auto check_vertex = [nv](int v) {
        if (v < 0 || v >= nv)
            throw StructuralError("vertex index " + std::to_string(v) + " out of range");
    };

    std::set<std::array<int, 2>> edge_set;
    for (const auto& f : faces) {
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw StructuralError("degenerate face with repeated vertex");
        for (int v : f) check_vertex(v);
        for (int i = 0; i < 3; ++i) {
            const int u = f[i], v = f[(i + 1) % 3];
            edge_set.insert({std::min(u, v), std::max(u, v)});
        }
    }
    for (const auto& e : extra_edges) {
        check_vertex(e[0]);
        check_vertex(e[1]);
        if (e[0] == e[1]) throw StructuralError("self-loop edge");
        edge_set.insert({std::min(e[0], e[1]), std::max(e[0], e[1])});
    }

    SurfaceComplex c;
    c.vertices = std::move(vertices);
    c.faces = std::move(faces);
    c.edges.assign(edge_set.begin(), edge_set.end());

    const int ne = c.edge_count();
    const int nf = c.face_count();
    c.edge_lookup.reserve(static_cast<std::size_t>(ne) * 2);
    for (int i = 0; i < ne; ++i)
        c.edge_lookup.emplace(edge_key(c.edges[i][0], c.edges[i][1]), i);

    std::vector<Eigen::Triplet<double>> t1;
    t1.reserve(static_cast<std::size_t>(ne) * 2);
    for (int i = 0; i < ne; ++i) {
        t1.emplace_back(c.edges[i][0], i, -1.0); // tail
        t1.emplace_back(c.edges[i][1], i, 1.0);  // head
    }
    c.b1.resize(nv, ne);
    c.b1.setFromTriplets(t1.begin(), t1.end());

    std::vector<Eigen::Triplet<double>> t2;
    t2.reserve(static_cast<std::size_t>(nf) * 3);
    for (int j = 0; j < nf; ++j) {
        const auto& f = c.faces[j];
        for (int i = 0; i < 3; ++i) {
            const int u = f[i], v = f[(i + 1) % 3];
            const int e = c.edge_index(u, v);
            if (e < 0) throw StructuralError("face references missing edge");
            // +1 when the traversal direction agrees with the canonical low->high
            // orientation of the edge, -1 otherwise.
            t2.emplace_back(e, j, u < v ? 1.0 : -1.0);
        }
    }
    c.b2.resize(ne, nf);
    c.b2.setFromTriplets(t2.begin(), t2.end());

    c.adjacency.assign(nv, {});
    for (const auto& e : c.edges) {
        c.adjacency[e[0]].push_back(e[1]);
        c.adjacency[e[1]].push_back(e[0]);
    }
    for (auto& nbrs : c.adjacency) std::sort(nbrs.begin(), nbrs.end());

    return c;
}

SurfaceComplex parse_obj(const std::string& text) {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> faces;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;

        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw ParseError("vertex record needs three coordinates", lineno);
            vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                // accept "i", "i/j", "i/j/k", "i//k"; only the vertex index matters
                const std::string head = tok.substr(0, tok.find('/'));
                int v = 0;
                try {
                    std::size_t used = 0;
                    v = std::stoi(head, &used);
                    if (used != head.size()) throw std::invalid_argument(head);
                } catch (const std::exception&) {
                    throw ParseError("bad face index '" + tok + "'", lineno);
                }
                if (v < 1 || v > static_cast<int>(vertices.size()))
                    throw StructuralError("face index " + std::to_string(v) +
                                          " out of range at line " + std::to_string(lineno));
                idx.push_back(v - 1);
            }
            if (idx.size() < 3)
                throw ParseError("face record needs at least three indices", lineno);
            // fan triangulation from the first vertex
            for (std::size_t i = 1; i + 1 < idx.size(); ++i)
                faces.push_back({idx[0], idx[i], idx[i + 1]});
        }
        // vt / vn / o / g / s / usemtl / mtllib and anything else: ignored
    }
    return build_complex(std::move(vertices), std::move(faces));
}

std::string to_obj(const SurfaceComplex& complex) {
    std::ostringstream out;
    char buf[96];
    for (const auto& v : complex.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& f : complex.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    return out.str();
}

std::string describe_complex(const SurfaceComplex& complex) {
    std::ostringstream out;
    out << "vertices " << complex.vertex_count()
        << " edges " << complex.edge_count()
        << " faces " << complex.face_count() << '\n';
    for (int i = 0; i < complex.edge_count(); ++i)
        out << "e " << complex.edges[i][0] << ' ' << complex.edges[i][1] << '\n';
    for (const auto& f : complex.faces)
        out << "f " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    return out.str();
}

SurfaceComplex build_knn_graph(const std::vector<Eigen::Vector3d>& points, int k) {
    const int n = static_cast<int>(points.size());
    if (n < 2) throw ParameterError("k-NN graph needs at least two points");
    if (k < 1) throw ParameterError("k must be positive");
    if (k >= n) throw ParameterError("k must be less than the point count");

    std::vector<std::array<int, 2>> edges;
    std::vector<std::pair<double, int>> dist(n - 1);
    for (int i = 0; i < n; ++i) {
        dist.clear();
        for (int j = 0; j < n; ++j)
            if (j != i) dist.emplace_back((points[i] - points[j]).squaredNorm(), j);
        // ties broken by lower index
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        for (int m = 0; m < k; ++m) {
            const int j = dist[m].second;
            edges.push_back({std::min(i, j), std::max(i, j)});
        }
    }
    return build_complex(points, {}, edges);
}

std::pair<SpMat, SpMat> boundary_operators(const SurfaceComplex& complex) {
    const SpMat& b1 = complex.b1;
    const SpMat& b2 = complex.b2;

    for (int e = 0; e < b1.outerSize(); ++e) {
        int plus = 0, minus = 0, other = 0;
        for (SpMat::InnerIterator it(b1, e); it; ++it) {
            if (it.value() == 1.0) ++plus;
            else if (it.value() == -1.0) ++minus;
            else ++other;
        }
        if (plus != 1 || minus != 1 || other != 0)
            throw StructuralError("edge column " + std::to_string(e) +
                                  " of b1 is not a signed vertex pair");
    }
    for (const auto& f : complex.faces)
        for (int i = 0; i < 3; ++i)
            if (complex.edge_index(f[i], f[(i + 1) % 3]) < 0)
                throw StructuralError("face references missing edge");

    if (complex.face_count() > 0) {
        SpMat prod = (complex.b1 * complex.b2).pruned(1.0, 1e-300);
        if (prod.nonZeros() != 0)
            throw StructuralError("b1 * b2 is not identically zero");
    }
    return {b1, b2};
}

HodgeLaplacians hodge_laplacians(const SurfaceComplex& complex) {
    HodgeLaplacians h;
    h.l0 = complex.b1 * SpMat(complex.b1.transpose());
    h.l1 = SpMat(complex.b1.transpose()) * complex.b1 +
           complex.b2 * SpMat(complex.b2.transpose());
    h.l2 = SpMat(complex.b2.transpose()) * complex.b2;
    return h;
}

} // namespace spectop
