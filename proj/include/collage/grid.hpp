/**
 * Grid geometry and arrangements.
 *
 * A collage places K images on an n-by-n grid (K = n*n). Cells are indexed
 * 0..K-1 row-major from the top-left corner. An Arrangement assigns each
 * image a cell: index_of[j] is the cell holding image j, and the whole
 * vector is a permutation of {0..K-1}. The adjacency matrix connects images
 * whose cells are 4-neighbors; diagonal neighbors never share an edge.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "collage/errors.hpp"

namespace collage {

struct CellCoord {
    int r = 0;
    int c = 0;
    bool operator==(const CellCoord&) const = default;
};

struct GridSpec {
    int k = 0;  // image count
    int n = 0;  // side length

    static GridSpec from_side(int n);
    static GridSpec from_count(int k);
};

struct Arrangement {
    // index_of[j] = cell of image j.
    std::vector<int> index_of;

    int size() const { return static_cast<int>(index_of.size()); }
    bool operator==(const Arrangement&) const = default;
    bool operator<(const Arrangement& other) const { return index_of < other.index_of; }

    static Arrangement identity(int k);
    /// cell -> image lookup (inverse permutation). Arrangement must be valid.
    std::vector<int> image_at_cell() const;
};

enum class ArrangementFault {
    Ok,
    WrongLength,
    DuplicateCell,
    CellOutOfRange,
    MissingCell,
};

struct ArrangementCheck {
    ArrangementFault fault = ArrangementFault::Ok;
    std::string message;

    bool ok() const { return fault == ArrangementFault::Ok; }
};

/// Cell index -> (row, col) for an n-by-n grid. Throws ConfigError out of range.
CellCoord pos_to_rc(int cell, int n);

/// (row, col) -> cell index. Inverse of pos_to_rc.
int rc_to_pos(int r, int c, int n);

/// Checks that `a` is a permutation of {0..k-1}; faults reported distinctly.
ArrangementCheck validate_arrangement(const Arrangement& a, int k);

/// Throwing form of validate_arrangement.
void ensure_valid_arrangement(const Arrangement& a, int k);

class AdjacencyMatrix {
public:
    AdjacencyMatrix() = default;
    explicit AdjacencyMatrix(int k) : k_(k), a_(static_cast<size_t>(k) * k, 0) {}

    int size() const { return k_; }
    uint8_t at(int p, int q) const { return a_[static_cast<size_t>(p) * k_ + q]; }
    void set_edge(int p, int q) {
        a_[static_cast<size_t>(p) * k_ + q] = 1;
        a_[static_cast<size_t>(q) * k_ + p] = 1;
    }

    int degree(int p) const;
    /// Undirected edges as (p, q) pairs with p < q, lexicographically sorted.
    std::vector<std::pair<int, int>> edges() const;
    int directed_entry_count() const;

    bool operator==(const AdjacencyMatrix&) const = default;

private:
    int k_ = 0;
    std::vector<uint8_t> a_;
};

/// A[p][q] = 1 iff images p and q occupy 4-neighbor cells under `a`.
AdjacencyMatrix adjacency_from_arrangement(const Arrangement& a, const GridSpec& spec);

}  // namespace collage
