#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rfsl/error.hpp"
#include "rfsl/geometry.hpp"

namespace rfsl {

// Sensing graph: nodes on the perimeter of a rectangular area at height H,
// plus the set of ordered links and its adjacency matrix. Immutable after
// construction; build through make_graph / build_perimeter_network.
struct NetworkGraph {
    std::vector<Vec3> node_positions;
    std::vector<std::pair<int, int>> links; // ordered (u, v), u != v
    std::vector<std::uint8_t> adjacency;    // row-major |V| x |V|
    double node_height = 0.0;
    Rect area;

    std::vector<std::vector<int>> neighbors; // ascending node index per row
    std::vector<int> link_lookup;            // (u,v) -> link index, -1 if absent

    int node_count() const { return static_cast<int>(node_positions.size()); }
    int link_count() const { return static_cast<int>(links.size()); }

    bool adjacent(int u, int v) const {
        return adjacency[static_cast<std::size_t>(u) * node_positions.size() + v] != 0;
    }

    int link_index(int u, int v) const {
        return link_lookup[static_cast<std::size_t>(u) * node_positions.size() + v];
    }

    int max_degree() const {
        int m = 0;
        for (const auto& nb : neighbors) m = std::max(m, static_cast<int>(nb.size()));
        return m;
    }

    double link_length(int link) const {
        const auto [u, v] = links[link];
        return (node_positions[v] - node_positions[u]).norm();
    }

    double link_azimuth(int link) const {
        const auto [u, v] = links[link];
        const Vec3 d = node_positions[v] - node_positions[u];
        return std::atan2(d.y, d.x);
    }

    Vec2 link_midpoint(int link) const {
        const auto [u, v] = links[link];
        const Vec3 m = (node_positions[u] + node_positions[v]) * 0.5;
        return m.floor_projection();
    }
};

inline NetworkGraph make_graph(std::vector<Vec3> nodes, std::vector<std::pair<int, int>> links,
                               double node_height, Rect area) {
    NetworkGraph g;
    g.node_positions = std::move(nodes);
    g.links = std::move(links);
    g.node_height = node_height;
    g.area = area;

    const std::size_t n = g.node_positions.size();
    g.adjacency.assign(n * n, 0);
    g.link_lookup.assign(n * n, -1);
    g.neighbors.assign(n, {});
    for (int i = 0; i < g.link_count(); ++i) {
        const auto [u, v] = g.links[i];
        if (u < 0 || v < 0 || u >= static_cast<int>(n) || v >= static_cast<int>(n))
            fail("unknown-node-id", "link endpoint out of range: (" + std::to_string(u) + "," +
                                        std::to_string(v) + ")");
        if (u == v) fail("invalid-graph", "self-loop at node " + std::to_string(u));
        g.adjacency[static_cast<std::size_t>(u) * n + v] = 1;
        g.link_lookup[static_cast<std::size_t>(u) * n + v] = i;
        g.neighbors[u].push_back(v);
    }
    for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
    return g;
}

inline std::vector<std::pair<int, int>> all_pairs_links(int n_nodes) {
    std::vector<std::pair<int, int>> links;
    links.reserve(static_cast<std::size_t>(n_nodes) * (n_nodes - 1));
    for (int u = 0; u < n_nodes; ++u)
        for (int v = 0; v < n_nodes; ++v)
            if (u != v) links.emplace_back(u, v);
    return links;
}

namespace detail {

// Nodes per side, starting at each side's origin corner; the far corner
// belongs to the next side, so corners are never duplicated.
inline std::vector<Vec3> place_perimeter_nodes(double area_w, double area_h,
                                               const int per_side[4], double node_height) {
    const Vec2 corner[4] = {{0, 0}, {area_w, 0}, {area_w, area_h}, {0, area_h}};
    const Vec2 dir[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const double len[4] = {area_w, area_h, area_w, area_h};

    std::vector<Vec3> nodes;
    for (int s = 0; s < 4; ++s) {
        if (per_side[s] <= 0) continue;
        const double step = len[s] / per_side[s];
        for (int j = 0; j < per_side[s]; ++j) {
            const Vec2 p = corner[s] + dir[s] * (step * j);
            nodes.push_back({p.x, p.y, node_height});
        }
    }
    return nodes;
}

inline NetworkGraph finish_perimeter(std::vector<Vec3> nodes, double area_w, double area_h,
                                     double node_height,
                                     const std::vector<std::pair<int, int>>* custom_links) {
    if (nodes.size() < 2) fail("invalid-spacing", "perimeter layout yields fewer than 2 nodes");
    auto links = custom_links ? *custom_links : all_pairs_links(static_cast<int>(nodes.size()));
    return make_graph(std::move(nodes), std::move(links), node_height, Rect{area_w, area_h});
}

} // namespace detail

// Evenly spaced perimeter placement with nodes_per_side = round(side / spacing).
inline NetworkGraph build_perimeter_network(double area_w, double area_h, double spacing,
                                            double node_height,
                                            const std::vector<std::pair<int, int>>* custom_links = nullptr) {
    if (area_w <= 0 || area_h <= 0) fail("invalid-config", "area dimensions must be positive");
    if (spacing <= 0 || spacing >= std::min(area_w, area_h))
        fail("invalid-spacing", "spacing must lie in (0, min(area_w, area_h))");
    const int per_side[4] = {
        std::max(1, static_cast<int>(std::lround(area_w / spacing))),
        std::max(1, static_cast<int>(std::lround(area_h / spacing))),
        std::max(1, static_cast<int>(std::lround(area_w / spacing))),
        std::max(1, static_cast<int>(std::lround(area_h / spacing))),
    };
    return detail::finish_perimeter(detail::place_perimeter_nodes(area_w, area_h, per_side, node_height),
                                    area_w, area_h, node_height, custom_links);
}

// Explicit total node count, distributed as evenly as possible over the four
// sides (first sides take the remainder). Covers configurations like 25 nodes
// on a square room where no uniform spacing reproduces the count.
inline NetworkGraph build_perimeter_network_nodes(double area_w, double area_h, int total_nodes,
                                                  double node_height,
                                                  const std::vector<std::pair<int, int>>* custom_links = nullptr) {
    if (area_w <= 0 || area_h <= 0) fail("invalid-config", "area dimensions must be positive");
    if (total_nodes < 2) fail("invalid-spacing", "need at least 2 nodes");
    int per_side[4];
    for (int s = 0; s < 4; ++s) per_side[s] = total_nodes / 4 + (s < total_nodes % 4 ? 1 : 0);
    return detail::finish_perimeter(detail::place_perimeter_nodes(area_w, area_h, per_side, node_height),
                                    area_w, area_h, node_height, custom_links);
}

} // namespace rfsl
