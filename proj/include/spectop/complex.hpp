#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spectop/errors.hpp"

namespace spectop {

using SpMat = Eigen::SparseMatrix<double>;

/// A simplicial 2-complex over a 3D vertex set: vertices, canonically oriented
/// edges (low index -> high index), oriented triangular faces, and the signed
/// incidence operators b1 (|V| x |E|) and b2 (|E| x |F|). Satisfies b1*b2 = 0.
///
/// Immutable once built; safe for concurrent reads.
struct SurfaceComplex {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 2>> edges;   // sorted lexicographically, each (lo, hi)
    std::vector<std::array<int, 3>> faces;   // vertex triples, orientation as given
    SpMat b1;
    SpMat b2;
    std::vector<std::vector<int>> adjacency; // sorted neighbor lists

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }

    /// Index of the canonical edge {u, v}, or -1 if absent.
    int edge_index(int u, int v) const;

    std::unordered_map<std::uint64_t, int> edge_lookup; // internal, keyed lo<<32|hi
};

/// Vertex, edge, and face Laplacians of a surface complex:
///   l0 = b1 b1^T,  l1 = b1^T b1 + b2 b2^T,  l2 = b2^T b2.
/// All symmetric positive semidefinite.
struct HodgeLaplacians {
    SpMat l0;
    SpMat l1;
    SpMat l2;
};

/// Assemble a complex from vertices, faces, and optional extra (face-free) edges.
/// Edges are derived from faces, merged with extras, deduplicated, and stored in
/// canonical low->high orientation sorted lexicographically.
SurfaceComplex build_complex(std::vector<Eigen::Vector3d> vertices,
                             std::vector<std::array<int, 3>> faces,
                             const std::vector<std::array<int, 2>>& extra_edges = {});

/// Parse ASCII OBJ text. Supports `v` and `f` records with 1-based indices;
/// faces with more than three vertices are fan-triangulated from their first
/// vertex; vt/vn/material/group records are ignored.
///
/// Throws ParseError (with line number) on malformed records and
/// StructuralError on out-of-range face indices.
SurfaceComplex parse_obj(const std::string& text);

/// Serialize vertices and faces back to OBJ text (inverse of parse_obj on
/// vertex/face combinatorics).
std::string to_obj(const SurfaceComplex& complex);

/// Plain-text edge/face listing for debugging.
std::string describe_complex(const SurfaceComplex& complex);

/// Symmetrized k-nearest-neighbor graph (faces empty). An edge {i, j} is
/// present iff j is among the k nearest of i or vice versa; distance ties are
/// broken by lower index. Requires 2 <= n and 1 <= k < n.
SurfaceComplex build_knn_graph(const std::vector<Eigen::Vector3d>& points, int k);

/// Validate and return copies of the signed boundary operators. Checks that
/// every edge column of b1 has exactly one -1 and one +1, that every face edge
/// exists, and that b1*b2 vanishes identically.
std::pair<SpMat, SpMat> boundary_operators(const SurfaceComplex& complex);

HodgeLaplacians hodge_laplacians(const SurfaceComplex& complex);

} // namespace spectop
