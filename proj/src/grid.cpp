#include "collage/grid.hpp"

#include <cmath>
#include <numeric>

namespace collage {

GridSpec GridSpec::from_side(int n) {
    if (n < 1) throw ConfigError("grid side must be positive, got " + std::to_string(n));
    return GridSpec{n * n, n};
}

GridSpec GridSpec::from_count(int k) {
    if (k < 1) throw ConfigError("image count must be positive, got " + std::to_string(k));
    int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(k))));
    if (n * n != k)
        throw ConfigError("image count " + std::to_string(k) + " is not a perfect square");
    return GridSpec{k, n};
}

Arrangement Arrangement::identity(int k) {
    Arrangement a;
    a.index_of.resize(static_cast<size_t>(k));
    std::iota(a.index_of.begin(), a.index_of.end(), 0);
    return a;
}

std::vector<int> Arrangement::image_at_cell() const {
    std::vector<int> inv(index_of.size(), -1);
    for (int j = 0; j < size(); ++j) inv[static_cast<size_t>(index_of[static_cast<size_t>(j)])] = j;
    return inv;
}

CellCoord pos_to_rc(int cell, int n) {
    if (n < 1) throw ConfigError("grid side must be positive, got " + std::to_string(n));
    if (cell < 0 || cell >= n * n)
        throw ConfigError("cell index " + std::to_string(cell) + " out of range for side " +
                          std::to_string(n));
    return CellCoord{cell / n, cell % n};
}

int rc_to_pos(int r, int c, int n) {
    if (n < 1) throw ConfigError("grid side must be positive, got " + std::to_string(n));
    if (r < 0 || r >= n || c < 0 || c >= n)
        throw ConfigError("cell (" + std::to_string(r) + "," + std::to_string(c) +
                          ") out of range for side " + std::to_string(n));
    return r * n + c;
}

ArrangementCheck validate_arrangement(const Arrangement& a, int k) {
    if (a.size() != k)
        return {ArrangementFault::WrongLength, "arrangement has " + std::to_string(a.size()) +
                                                   " entries, expected " + std::to_string(k)};
    std::vector<uint8_t> seen(static_cast<size_t>(k), 0);
    for (int j = 0; j < k; ++j) {
        int cell = a.index_of[static_cast<size_t>(j)];
        if (cell < 0 || cell >= k)
            return {ArrangementFault::CellOutOfRange,
                    "image " + std::to_string(j) + " assigned cell " + std::to_string(cell) +
                        ", valid range is 0.." + std::to_string(k - 1)};
        if (seen[static_cast<size_t>(cell)])
            return {ArrangementFault::DuplicateCell,
                    "cell " + std::to_string(cell) + " assigned to more than one image"};
        seen[static_cast<size_t>(cell)] = 1;
    }
    for (int cell = 0; cell < k; ++cell) {
        if (!seen[static_cast<size_t>(cell)])
            return {ArrangementFault::MissingCell,
                    "cell " + std::to_string(cell) + " not assigned to any image"};
    }
    return {};
}

void ensure_valid_arrangement(const Arrangement& a, int k) {
    ArrangementCheck check = validate_arrangement(a, k);
    if (!check.ok()) throw ValidationError(check.message);
}

int AdjacencyMatrix::degree(int p) const {
    int d = 0;
    for (int q = 0; q < k_; ++q) d += at(p, q);
    return d;
}

std::vector<std::pair<int, int>> AdjacencyMatrix::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int p = 0; p < k_; ++p)
        for (int q = p + 1; q < k_; ++q)
            if (at(p, q)) out.emplace_back(p, q);
    return out;
}

int AdjacencyMatrix::directed_entry_count() const {
    int total = 0;
    for (int p = 0; p < k_; ++p)
        for (int q = 0; q < k_; ++q) total += at(p, q);
    return total;
}

AdjacencyMatrix adjacency_from_arrangement(const Arrangement& a, const GridSpec& spec) {
    if (spec.k != spec.n * spec.n)
        throw ConfigError("grid spec k=" + std::to_string(spec.k) +
                          " does not match side n=" + std::to_string(spec.n));
    if (spec.n < 2)
        throw ConfigError("graph construction requires side >= 2, got " + std::to_string(spec.n));
    ensure_valid_arrangement(a, spec.k);

    AdjacencyMatrix adj(spec.k);
    std::vector<int> image_of_cell = a.image_at_cell();
    for (int cell = 0; cell < spec.k; ++cell) {
        CellCoord rc = pos_to_rc(cell, spec.n);
        // Right and down neighbors are enough; set_edge writes both directions.
        if (rc.c + 1 < spec.n) {
            int other = rc_to_pos(rc.r, rc.c + 1, spec.n);
            adj.set_edge(image_of_cell[static_cast<size_t>(cell)],
                         image_of_cell[static_cast<size_t>(other)]);
        }
        if (rc.r + 1 < spec.n) {
            int other = rc_to_pos(rc.r + 1, rc.c, spec.n);
            adj.set_edge(image_of_cell[static_cast<size_t>(cell)],
                         image_of_cell[static_cast<size_t>(other)]);
        }
    }
    return adj;
}

}  // namespace collage
