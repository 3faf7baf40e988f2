/**
 * Collage graph: the (adjacency, features) pair fed to the predictor.
 * Row j of feats is the feature of image j; node_ids records which image
 * each row stands for so order-sensitive operations (top-k tie breaks)
 * stay invariant when rows are permuted.
 */
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "collage/feature_store.hpp"
#include "collage/grid.hpp"

namespace collage {

struct CollageGraph {
    AdjacencyMatrix adj;
    Eigen::MatrixXd feats;       // K x dim
    std::vector<int> node_ids;   // row -> image identity, iota by construction

    int node_count() const { return static_cast<int>(feats.rows()); }
};

/// Builds the graph for `a` with feats row j = store[ids[j]].
CollageGraph build_collage_graph(const Arrangement& a, const std::vector<std::string>& ids,
                                 const FeatureStore& store);

}  // namespace collage
