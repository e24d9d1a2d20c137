#include "portspill/product_space.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "portspill/csv.hpp"
#include "portspill/error.hpp"

namespace portspill {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

ProductSpaceGraph build_product_space(const ProximityMatrix& prox, const ExportPanel& panel, double edge_threshold) {
  if (!(edge_threshold >= 0.0 && edge_threshold <= 1.0))
    throw Error(ErrorKind::InvalidSpec, "edge threshold must lie in [0, 1]");
  const auto n = static_cast<std::size_t>(prox.values.rows());
  ProductSpaceGraph g;
  g.kind = prox.kind;
  g.threshold = edge_threshold;
  g.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (prox.products) {
      g.nodes[i].id = prox.products->at(i).hs4;
      g.nodes[i].leamer = prox.products->at(i).leamer;
    } else {
      g.nodes[i].id = std::to_string(i);
    }
  }
  for (const auto& [key, value] : panel.cells)
    if (prox.window.contains(key.year) && static_cast<std::size_t>(key.product) < n)
      g.nodes[static_cast<std::size_t>(key.product)].size += value;

  struct Candidate {
    double weight;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = prox.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w > 0.0) candidates.push_back({w, i, j});
    }
  // Heaviest first; equal weights in lexicographic (i, j) order.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });

  DisjointSets sets(n);
  for (const auto& c : candidates) {
    const bool tree = sets.unite(c.i, c.j);
    if (tree || c.weight >= edge_threshold) g.edges.push_back({c.i, c.j, c.weight, tree});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.source, a.target) < std::tie(b.source, b.target); });
  return g;
}

std::string graph_to_json(const ProductSpaceGraph& graph) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(graph.kind));
  j["threshold"] = graph.threshold;
  auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : graph.nodes) {
    nlohmann::ordered_json node;
    node["id"] = n.id;
    node["size"] = n.size;
    node["leamer"] = n.leamer ? nlohmann::ordered_json(*n.leamer) : nlohmann::ordered_json(nullptr);
    nodes.push_back(std::move(node));
  }
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : graph.edges) {
    nlohmann::ordered_json edge;
    edge["source"] = graph.nodes[e.source].id;
    edge["target"] = graph.nodes[e.target].id;
    edge["weight"] = e.weight;
    edge["mst"] = e.mst;
    edges.push_back(std::move(edge));
  }
  return j.dump(2) + "\n";
}

std::string graph_to_graphml(const ProductSpaceGraph& graph) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n"
      << "  <key id=\"leamer\" for=\"node\" attr.name=\"leamer\" attr.type=\"int\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <key id=\"mst\" for=\"edge\" attr.name=\"mst\" attr.type=\"boolean\"/>\n"
      << "  <graph id=\"" << to_string(graph.kind) << "\" edgedefault=\"undirected\">\n";
  for (const auto& n : graph.nodes) {
    out << "    <node id=\"p" << n.id << "\">\n"
        << "      <data key=\"size\">" << csv::format_double(n.size) << "</data>\n";
    if (n.leamer) out << "      <data key=\"leamer\">" << *n.leamer << "</data>\n";
    out << "    </node>\n";
  }
  for (const auto& e : graph.edges) {
    out << "    <edge source=\"p" << graph.nodes[e.source].id << "\" target=\"p" << graph.nodes[e.target].id << "\">\n"
        << "      <data key=\"weight\">" << csv::format_double(e.weight) << "</data>\n"
        << "      <data key=\"mst\">" << (e.mst ? "true" : "false") << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

}  // namespace portspill
