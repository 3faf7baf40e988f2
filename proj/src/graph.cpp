#include "collage/graph.hpp"

#include <numeric>

#include "collage/errors.hpp"

namespace collage {

CollageGraph build_collage_graph(const Arrangement& a, const std::vector<std::string>& ids,
                                 const FeatureStore& store) {
    GridSpec spec = GridSpec::from_count(static_cast<int>(ids.size()));
    CollageGraph graph;
    graph.adj = adjacency_from_arrangement(a, spec);
    graph.feats.resize(spec.k, store.dim());
    for (int j = 0; j < spec.k; ++j) {
        const std::vector<float>& feature = store.at(ids[static_cast<size_t>(j)]);
        for (int d = 0; d < store.dim(); ++d)
            graph.feats(j, d) = static_cast<double>(feature[static_cast<size_t>(d)]);
    }
    graph.node_ids.resize(static_cast<size_t>(spec.k));
    std::iota(graph.node_ids.begin(), graph.node_ids.end(), 0);
    return graph;
}

}  // namespace collage
