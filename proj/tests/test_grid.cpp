#include <doctest.h>

#include <algorithm>
#include <set>

#include "collage/grid.hpp"
#include "collage/rng.hpp"

using namespace collage;

namespace {

// Independent oracle: images p, q are adjacent iff their cells sit at
// Manhattan distance 1. Used to cross-check adjacency_from_arrangement.
std::set<std::pair<int, int>> brute_force_edges(const Arrangement& a, int n) {
    std::set<std::pair<int, int>> edges;
    int k = n * n;
    for (int p = 0; p < k; ++p) {
        for (int q = p + 1; q < k; ++q) {
            CellCoord cp = pos_to_rc(a.index_of[static_cast<size_t>(p)], n);
            CellCoord cq = pos_to_rc(a.index_of[static_cast<size_t>(q)], n);
            int dist = std::abs(cp.r - cq.r) + std::abs(cp.c - cq.c);
            if (dist == 1) edges.insert({p, q});
        }
    }
    return edges;
}

std::set<std::pair<int, int>> edge_set(const AdjacencyMatrix& adj) {
    auto edges = adj.edges();
    return {edges.begin(), edges.end()};
}

std::vector<Arrangement> all_arrangements(int k) {
    std::vector<Arrangement> out;
    Arrangement a = Arrangement::identity(k);
    do {
        out.push_back(a);
    } while (std::next_permutation(a.index_of.begin(), a.index_of.end()));
    return out;
}

Arrangement random_arrangement(int k, SeededRng& rng) { return Arrangement{rng.permutation(k)}; }

}  // namespace

TEST_CASE("pos_to_rc maps row-major from the top-left origin") {
    CHECK(pos_to_rc(0, 3) == CellCoord{0, 0});
    CHECK(pos_to_rc(4, 3) == CellCoord{1, 1});
    CHECK(pos_to_rc(8, 3) == CellCoord{2, 2});
    CHECK_THROWS_AS(pos_to_rc(9, 3), ConfigError);
    CHECK_THROWS_AS(pos_to_rc(-1, 3), ConfigError);
}

TEST_CASE("rc_to_pos is the row-major index") {
    CHECK(rc_to_pos(0, 0, 2) == 0);
    CHECK(rc_to_pos(1, 1, 2) == 3);
    CHECK(rc_to_pos(2, 0, 3) == 6);
    CHECK_THROWS_AS(rc_to_pos(2, 0, 2), ConfigError);
}

TEST_CASE("pos_to_rc and rc_to_pos are mutually inverse for n in 2..5") {
    for (int n = 2; n <= 5; ++n) {
        std::set<std::pair<int, int>> seen;
        for (int cell = 0; cell < n * n; ++cell) {
            CellCoord rc = pos_to_rc(cell, n);
            CHECK(rc_to_pos(rc.r, rc.c, n) == cell);
            seen.insert({rc.r, rc.c});
        }
        CHECK(seen.size() == static_cast<size_t>(n * n));  // bijective
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                CellCoord rc = pos_to_rc(rc_to_pos(r, c, n), n);
                CHECK(rc == CellCoord{r, c});
            }
    }
}

TEST_CASE("validate_arrangement reports each fault distinctly") {
    CHECK(validate_arrangement(Arrangement{{0, 1, 2, 3}}, 4).ok());
    CHECK(validate_arrangement(Arrangement{{3, 2, 1, 0}}, 4).ok());
    CHECK(validate_arrangement(Arrangement{{0, 0, 2, 3}}, 4).fault ==
          ArrangementFault::DuplicateCell);
    CHECK(validate_arrangement(Arrangement{{0, 1, 2}}, 4).fault == ArrangementFault::WrongLength);
    CHECK(validate_arrangement(Arrangement{{0, 1, 2, 4}}, 4).fault ==
          ArrangementFault::CellOutOfRange);
    CHECK_THROWS_AS(ensure_valid_arrangement(Arrangement{{0, 0, 2, 3}}, 4), ValidationError);
}

TEST_CASE("adjacency of the identity 2x2 arrangement is the 4-cycle") {
    GridSpec spec = GridSpec::from_side(2);
    AdjacencyMatrix adj = adjacency_from_arrangement(Arrangement::identity(4), spec);
    CHECK(edge_set(adj) == std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    CHECK(adj.directed_entry_count() == 8);
}

TEST_CASE("adjacency follows the arrangement, not image order") {
    GridSpec spec = GridSpec::from_side(2);
    Arrangement a{{0, 3, 1, 2}};
    AdjacencyMatrix adj = adjacency_from_arrangement(a, spec);
    CHECK(edge_set(adj) == brute_force_edges(a, 2));
    CHECK(edge_set(adj) == std::set<std::pair<int, int>>{{0, 2}, {0, 3}, {1, 2}, {1, 3}});
}

TEST_CASE("identity 3x3 adjacency has 12 edges with grid degrees") {
    GridSpec spec = GridSpec::from_side(3);
    AdjacencyMatrix adj = adjacency_from_arrangement(Arrangement::identity(9), spec);
    CHECK(edge_set(adj) == brute_force_edges(Arrangement::identity(9), 3));
    CHECK(adj.edges().size() == 12);
    CHECK(adj.directed_entry_count() == 24);
    CHECK(adj.degree(4) == 4);  // center
    for (int corner : {0, 2, 6, 8}) CHECK(adj.degree(corner) == 2);
}

TEST_CASE("adjacency equals the brute-force oracle for all 24 arrangements at n=2") {
    GridSpec spec = GridSpec::from_side(2);
    for (const Arrangement& a : all_arrangements(4)) {
        AdjacencyMatrix adj = adjacency_from_arrangement(a, spec);
        CHECK(edge_set(adj) == brute_force_edges(a, 2));
        CHECK(adj.directed_entry_count() == 8);
        for (int p = 0; p < 4; ++p) CHECK(adj.at(p, p) == 0);
    }
}

TEST_CASE("adjacency equals the brute-force oracle on random 3x3 arrangements") {
    GridSpec spec = GridSpec::from_side(3);
    SeededRng rng(20240611);
    for (int trial = 0; trial < 1000; ++trial) {
        Arrangement a = random_arrangement(9, rng);
        AdjacencyMatrix adj = adjacency_from_arrangement(a, spec);
        CHECK(edge_set(adj) == brute_force_edges(a, 3));
        CHECK(adj.directed_entry_count() == 24);
        // symmetry + zero diagonal
        for (int p = 0; p < 9; ++p) {
            CHECK(adj.at(p, p) == 0);
            for (int q = 0; q < 9; ++q) CHECK(adj.at(p, q) == adj.at(q, p));
        }
    }
}

TEST_CASE("relabeling images conjugates the adjacency matrix") {
    // If images are relabeled by pi and the arrangement composed to match,
    // A'[pi(p)][pi(q)] == A[p][q].
    SeededRng rng(77);
    GridSpec spec = GridSpec::from_side(3);
    for (int trial = 0; trial < 200; ++trial) {
        Arrangement a = random_arrangement(9, rng);
        std::vector<int> pi = rng.permutation(9);
        Arrangement relabeled;
        relabeled.index_of.resize(9);
        for (int j = 0; j < 9; ++j)
            relabeled.index_of[static_cast<size_t>(pi[static_cast<size_t>(j)])] =
                a.index_of[static_cast<size_t>(j)];
        AdjacencyMatrix base = adjacency_from_arrangement(a, spec);
        AdjacencyMatrix conj = adjacency_from_arrangement(relabeled, spec);
        for (int p = 0; p < 9; ++p)
            for (int q = 0; q < 9; ++q)
                CHECK(conj.at(pi[static_cast<size_t>(p)], pi[static_cast<size_t>(q)]) ==
                      base.at(p, q));
    }
}

TEST_CASE("invalid arrangements propagate validation errors") {
    GridSpec spec = GridSpec::from_side(2);
    CHECK_THROWS_AS(adjacency_from_arrangement(Arrangement{{0, 0, 1, 2}}, spec), ValidationError);
    CHECK_THROWS_AS(adjacency_from_arrangement(Arrangement{{0, 1, 2}}, spec), ValidationError);
}

TEST_CASE("grid spec rejects non-square counts and degenerate sides") {
    CHECK_THROWS_AS(GridSpec::from_count(5), ConfigError);
    CHECK_THROWS_AS(GridSpec::from_side(0), ConfigError);
    CHECK(GridSpec::from_count(9).n == 3);
    CHECK(GridSpec::from_side(4).k == 16);
}
