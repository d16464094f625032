#pragma once

#include <cstdint>
#include <vector>

namespace sptree::tree {

/// Parameters of a sparse spherically homogeneous tree.
///
/// The tree branches only at the given sparse positions; at position n the
/// forward branching number is floor(n^((1-gamma)/gamma)), elsewhere it is 1.
/// The canonical position rule is n = 2^(n^n) (see paper_positions); desk-scale
/// experiments substitute a milder explicit sequence.
struct TreeParams {
    double gamma = 0.5;                          // in (0,1)
    std::vector<std::int64_t> sparse_positions;  // strictly increasing, >= 1
    int depth = 1;                               // truncation shell index D >= 1

    void validate() const;
    bool is_sparse_position(std::int64_t n) const;
};

/// Finite truncation of a spherically homogeneous tree, described by its
/// forward branching sequence g and shell cardinalities alpha.
struct ShTree {
    std::vector<std::int64_t> g;              // g[0..D-1], forward branching per shell
    std::vector<std::int64_t> alpha;          // alpha[0..D], shell sizes, alpha[0] = 1
    std::vector<std::int64_t> shell_offset;   // prefix sums of alpha (size D+2)
    std::int64_t vertex_count = 0;

    int depth() const { return static_cast<int>(g.size()); }

    /// Shell index and position within shell of a shell-major vertex index.
    std::pair<int, std::int64_t> locate(std::int64_t v) const;
    /// Shell-major index of the parent vertex; requires shell >= 1.
    std::int64_t parent(std::int64_t v) const;
    /// Vertex degree in the truncated tree (leaves have degree 1).
    std::int64_t degree(std::int64_t v) const;
};

/// Sparse symmetric matrix H = D - A of the truncated tree, in coordinate
/// layout (upper triangle stored once, diagonal separate).
struct SparseLaplacian {
    std::int64_t dimension = 0;
    std::vector<double> diag;                              // vertex degree
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;  // (parent, child), value -1
};

/// floor(n^e) with integer-exact arithmetic for integer and small-rational
/// exponents, and a guarded long-double fallback that rounds down on ties.
std::int64_t floor_power(std::int64_t n, double e);

/// Branching number at shell n: floor(n^((1-gamma)/gamma)) at sparse
/// positions, otherwise 1. Shell 0 always yields 1.
std::int64_t sparse_branching(const TreeParams& params, std::int64_t n);

/// The positions 2^(m^m), m = 1, 2, ..., not exceeding limit.
std::vector<std::int64_t> paper_positions(std::int64_t limit);

ShTree build_tree(const TreeParams& params);

SparseLaplacian assemble_laplacian(const ShTree& t);

/// Graph distance between two shell-major vertex indices.
std::int64_t tree_distance(const ShTree& t, std::int64_t u, std::int64_t v);

} // namespace sptree::tree
