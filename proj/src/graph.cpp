#include "cfbench/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "cfbench/error.hpp"

namespace cfbench {

std::size_t edge_to_slot(Edge e, std::size_t n) {
    // Pairs (u, *) for rows before u, then the offset within row u.
    const std::size_t u = e.u;
    return u * (2 * n - u - 1) / 2 + (e.v - u - 1);
}

Edge slot_to_edge(std::size_t slot, std::size_t n) {
    std::size_t u = 0;
    std::size_t row = n - 1;
    while (slot >= row) {
        slot -= row;
        ++u;
        --row;
    }
    return Edge(static_cast<NodeIndex>(u), static_cast<NodeIndex>(u + 1 + slot));
}

GraphInstance::GraphInstance(std::uint64_t id, std::size_t num_nodes, std::vector<Edge> edges,
                             ClassLabel label)
    : id_(id), num_nodes_(num_nodes), edges_(std::move(edges)), label_(label) {
    if (num_nodes_ == 0)
        throw ValidationError(fmt::format("instance {}: num_nodes must be at least 1", id_));
    if (label_ != 0 && label_ != 1)
        throw ValidationError(fmt::format("instance {}: label {} is not binary", id_, label_));
    for (const Edge& e : edges_) {
        if (e.u == e.v)
            throw ValidationError(fmt::format("instance {}: self-loop [{},{}]", id_, e.u, e.v));
        if (e.v >= num_nodes_)
            throw ValidationError(fmt::format("instance {}: edge [{},{}] out of range for {} nodes",
                                              id_, e.u, e.v, num_nodes_));
    }
    std::sort(edges_.begin(), edges_.end());
    auto dup = std::adjacent_find(edges_.begin(), edges_.end());
    if (dup != edges_.end())
        throw ValidationError(
            fmt::format("instance {}: duplicate edge [{},{}]", id_, dup->u, dup->v));
}

bool GraphInstance::has_edge(NodeIndex u, NodeIndex v) const {
    if (u == v) return false;
    return std::binary_search(edges_.begin(), edges_.end(), Edge(u, v));
}

GraphInstance GraphInstance::with_label(ClassLabel label) const {
    if (label != 0 && label != 1)
        throw ValidationError(fmt::format("instance {}: label {} is not binary", id_, label));
    return GraphInstance(Trusted{}, id_, num_nodes_, edges_, label);
}

GraphInstance GraphInstance::with_id(std::uint64_t id) const {
    return GraphInstance(Trusted{}, id, num_nodes_, edges_, label_);
}

std::vector<std::vector<NodeIndex>> GraphInstance::adjacency() const {
    std::vector<std::vector<NodeIndex>> adj(num_nodes_);
    for (const Edge& e : edges_) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    return adj;
}

std::size_t ged(const GraphInstance& a, const GraphInstance& b) {
    const std::size_t node_diff = a.num_nodes() > b.num_nodes() ? a.num_nodes() - b.num_nodes()
                                                                : b.num_nodes() - a.num_nodes();
    auto ea = a.edges();
    auto eb = b.edges();
    std::size_t common = 0;
    auto i = ea.begin();
    auto j = eb.begin();
    while (i != ea.end() && j != eb.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    return node_diff + (ea.size() - common) + (eb.size() - common);
}

namespace {

// Iterative DFS; a non-tree edge to an already visited vertex (other than the
// parent edge) closes a cycle. Simple graphs have no parallel edges, so the
// parent check is by vertex.
bool dfs_finds_cycle(const std::vector<std::vector<NodeIndex>>& adj, NodeIndex root,
                     std::vector<char>& visited) {
    struct Frame {
        NodeIndex node;
        NodeIndex parent;
        std::size_t next;
    };
    std::vector<Frame> stack{{root, root, 0}};
    visited[root] = 1;
    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next == adj[top.node].size()) {
            stack.pop_back();
            continue;
        }
        NodeIndex w = adj[top.node][top.next++];
        if (w == top.parent && top.node != top.parent) continue;
        if (visited[w]) return true;
        visited[w] = 1;
        stack.push_back({w, top.node, 0});
    }
    return false;
}

}  // namespace

bool has_cycle(const GraphInstance& g) {
    const auto adj = g.adjacency();
    std::vector<char> visited(g.num_nodes(), 0);
    for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
        if (!visited[v] && dfs_finds_cycle(adj, v, visited)) return true;
    }
    return false;
}

std::size_t connected_components(const GraphInstance& g) {
    const auto adj = g.adjacency();
    std::vector<char> seen(g.num_nodes(), 0);
    std::vector<NodeIndex> stack;
    std::size_t count = 0;
    for (NodeIndex s = 0; s < g.num_nodes(); ++s) {
        if (seen[s]) continue;
        ++count;
        seen[s] = 1;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeIndex v = stack.back();
            stack.pop_back();
            for (NodeIndex w : adj[v]) {
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
    }
    return count;
}

GraphInstance flip_edge(const GraphInstance& g, NodeIndex u, NodeIndex v) {
    if (u == v) throw ValidationError(fmt::format("flip_edge: self-loop [{},{}]", u, v));
    if (u >= g.num_nodes() || v >= g.num_nodes())
        throw ValidationError(fmt::format("flip_edge: [{},{}] out of range for {} nodes", u, v,
                                          g.num_nodes()));
    const Edge e(u, v);
    std::vector<Edge> edges(g.edges_);
    auto it = std::lower_bound(edges.begin(), edges.end(), e);
    if (it != edges.end() && *it == e)
        edges.erase(it);
    else
        edges.insert(it, e);
    return GraphInstance(GraphInstance::Trusted{}, g.id(), g.num_nodes(), std::move(edges),
                         g.label());
}

std::size_t feature_count(const GraphInstance& g) { return g.num_nodes() + g.num_edges(); }

nlohmann::json to_json(const GraphInstance& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
    return {{"id", g.id()}, {"num_nodes", g.num_nodes()}, {"label", g.label()}, {"edges", edges}};
}

GraphInstance graph_from_json(const nlohmann::json& j) {
    std::string where = "instance ?";
    try {
        if (!j.is_object()) throw DatasetError("instance record is not a JSON object");
        for (const char* key : {"id", "num_nodes", "label", "edges"}) {
            if (!j.contains(key)) {
                if (j.contains("id") && j["id"].is_number_unsigned())
                    where = fmt::format("instance {}", j["id"].get<std::uint64_t>());
                throw DatasetError(fmt::format("{}: missing field '{}'", where, key));
            }
        }
        if (j.size() != 4) throw DatasetError("instance record has unexpected fields");
        if (!j["id"].is_number_unsigned()) throw DatasetError("instance id must be a non-negative integer");
        const auto id = j["id"].get<std::uint64_t>();
        where = fmt::format("instance {}", id);
        if (!j["num_nodes"].is_number_unsigned())
            throw DatasetError(where + ": num_nodes must be a non-negative integer");
        if (!j["label"].is_number_integer()) throw DatasetError(where + ": label must be an integer");
        if (!j["edges"].is_array()) throw DatasetError(where + ": edges must be an array");
        const auto n = j["num_nodes"].get<std::size_t>();
        std::vector<Edge> edges;
        edges.reserve(j["edges"].size());
        for (const auto& pair : j["edges"]) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() ||
                !pair[1].is_number_unsigned())
                throw DatasetError(where + ": edge entries must be [u,v] pairs of node indices");
            const auto u = pair[0].get<std::uint64_t>();
            const auto v = pair[1].get<std::uint64_t>();
            if (u == v) throw DatasetError(fmt::format("{}: self-loop [{},{}]", where, u, v));
            if (u >= n || v >= n)
                throw DatasetError(
                    fmt::format("{}: edge [{},{}] out of range for {} nodes", where, u, v, n));
            edges.emplace_back(static_cast<NodeIndex>(u), static_cast<NodeIndex>(v));
        }
        return GraphInstance(id, n, std::move(edges), j["label"].get<int>());
    } catch (const ValidationError& e) {
        throw DatasetError(e.what());
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(fmt::format("{}: {}", where, e.what()));
    }
}

}  // namespace cfbench
