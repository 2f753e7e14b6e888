#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cfbench {

using NodeIndex = std::uint32_t;
using ClassLabel = int;  // binary: 0 or 1

// Undirected edge stored with u < v.
struct Edge {
    NodeIndex u = 0;
    NodeIndex v = 0;

    Edge() = default;
    Edge(NodeIndex a, NodeIndex b) : u(a < b ? a : b), v(a < b ? b : a) {}

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Number of unordered node pairs on n nodes.
constexpr std::size_t slot_count(std::size_t n) { return n * (n - 1) / 2; }

// Lexicographic index of the pair {u,v} among all pairs on n nodes. Slot order
// coincides with lexicographic Edge order.
std::size_t edge_to_slot(Edge e, std::size_t n);
Edge slot_to_edge(std::size_t slot, std::size_t n);

// One labeled, undirected, unweighted graph. Immutable once constructed; the
// edge list is kept sorted and duplicate-free, which is also its canonical
// serialized form.
class GraphInstance {
public:
    // Validates: num_nodes >= 1, endpoints in range, no self-loops, no
    // duplicate pairs, label in {0,1}. Edges may be given in any order or
    // orientation.
    GraphInstance(std::uint64_t id, std::size_t num_nodes, std::vector<Edge> edges,
                  ClassLabel label);

    std::uint64_t id() const { return id_; }
    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    std::span<const Edge> edges() const { return edges_; }
    ClassLabel label() const { return label_; }

    bool has_edge(NodeIndex u, NodeIndex v) const;

    GraphInstance with_label(ClassLabel label) const;
    GraphInstance with_id(std::uint64_t id) const;

    // Adjacency lists, rebuilt on each call.
    std::vector<std::vector<NodeIndex>> adjacency() const;

    friend bool operator==(const GraphInstance&, const GraphInstance&) = default;

private:
    struct Trusted {};
    GraphInstance(Trusted, std::uint64_t id, std::size_t num_nodes,
                  std::vector<Edge> sorted_edges, ClassLabel label)
        : id_(id), num_nodes_(num_nodes), edges_(std::move(sorted_edges)), label_(label) {}

    friend GraphInstance flip_edge(const GraphInstance&, NodeIndex, NodeIndex);

    std::uint64_t id_;
    std::size_t num_nodes_;
    std::vector<Edge> edges_;
    ClassLabel label_;
};

// Edit distance under identity node alignment: node-count difference plus the
// size of the symmetric difference of the edge sets.
std::size_t ged(const GraphInstance& a, const GraphInstance& b);

bool has_cycle(const GraphInstance& g);

std::size_t connected_components(const GraphInstance& g);

// Copy of g with {u,v} toggled. Throws ValidationError if u == v or an index
// is out of range.
GraphInstance flip_edge(const GraphInstance& g, NodeIndex u, NodeIndex v);

// |G| used by sparsity: nodes plus edges.
std::size_t feature_count(const GraphInstance& g);

nlohmann::json to_json(const GraphInstance& g);

// Throws DatasetError naming the offending instance id on schema violations.
GraphInstance graph_from_json(const nlohmann::json& j);

}  // namespace cfbench
