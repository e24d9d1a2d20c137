#pragma once

#include <optional>
#include <string>
#include <vector>

#include "portspill/complexity.hpp"

namespace portspill {

struct GraphNode {
  std::string id;  // HS4 code
  double size = 0.0;  // pooled export value over the proximity window
  std::optional<int> leamer;
};

struct GraphEdge {
  std::size_t source = 0;  // node index, source < target
  std::size_t target = 0;
  double weight = 0.0;
  bool mst = false;
};

// Backbone of a proximity matrix: maximum spanning forest over
// positive-proximity components plus every edge at or above the threshold.
struct ProductSpaceGraph {
  ProximityKind kind = ProximityKind::Production;
  double threshold = 0.0;
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;  // sorted by (source, target)
};

ProductSpaceGraph build_product_space(const ProximityMatrix& prox, const ExportPanel& panel, double edge_threshold);

// {"kind", "threshold", "nodes": [{id, size, leamer}], "edges": [{source,
// target, weight, mst}]}; leamer is null when unknown.
std::string graph_to_json(const ProductSpaceGraph& graph);
std::string graph_to_graphml(const ProductSpaceGraph& graph);

}  // namespace portspill
