#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "rfsl/diffraction.hpp"
#include "rfsl/matrix.hpp"
#include "rfsl/network.hpp"
#include "rfsl/rng.hpp"
#include "rfsl/scene.hpp"

namespace rfsl {

enum class ModelKind { mam, cmam, measured };

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::mam: return "mam";
        case ModelKind::cmam: return "cmam";
        default: return "measured";
    }
}

// Per-node feature rows: node_features(u, j) is the attenuation of the link
// from u to its j-th neighbor (ascending node index), zero-padded on the
// right up to max_u |N(u)|.
struct AttenuationSnapshot {
    Matrix node_features;
    int timestamp = 0;
    ModelKind model_kind = ModelKind::mam;
};

namespace detail {

// Both multi-body models compose nonnegative per-target contributions: the
// quadrature can land a fraction of a dB below zero for bodies near the
// region boundary (diffraction-gain ripple), which would let a sum fall
// under a max and break the dominance ordering between the models.
inline double target_contribution_db(const LinkGeometry& geom, const TargetParams& target,
                                     double wavelength, const QuadratureConfig& quad) {
    return std::max(0.0, single_target_attenuation(geom, target, wavelength, quad));
}

} // namespace detail

// Sum of the individual single-obstacle attenuations of every target,
// regardless of Fresnel-region membership.
inline double mam_link_attenuation(int link, const NetworkGraph& graph,
                                   const std::vector<TargetParams>& targets, double wavelength,
                                   const QuadratureConfig& quad) {
    const LinkGeometry geom = LinkGeometry::from_link(link, graph);
    double total = 0.0;
    for (const auto& t : targets) total += detail::target_contribution_db(geom, t, wavelength, quad);
    return total;
}

// Single-obstacle attenuation gated on Fresnel-region membership; exactly 0
// for non-members.
inline double cmam_target_attenuation(int link, const NetworkGraph& graph,
                                      const TargetParams& target, double wavelength,
                                      const QuadratureConfig& quad, const MembershipConfig& cfg) {
    if (!fresnel_membership(target, link, graph, wavelength, cfg)) return 0.0;
    return detail::target_contribution_db(LinkGeometry::from_link(link, graph), target, wavelength,
                                          quad);
}

// Dominant member rule: the link value is the largest member attenuation,
// 0 when no target is a member. Ties keep the lower target index.
inline double cmam_link_attenuation(int link, const NetworkGraph& graph,
                                    const std::vector<TargetParams>& targets, double wavelength,
                                    const QuadratureConfig& quad, const MembershipConfig& cfg) {
    double best = 0.0;
    bool any = false;
    for (const auto& t : targets) {
        if (!fresnel_membership(t, link, graph, wavelength, cfg)) continue;
        const double a = detail::target_contribution_db(LinkGeometry::from_link(link, graph), t,
                                                        wavelength, quad);
        if (!any || a > best) best = a;
        any = true;
    }
    return any ? best : 0.0;
}

namespace detail {

// Shared per-scene evaluator; attenuation is symmetric in the endpoints, so
// ordered links are computed once per unordered pair.
class LinkAttenuationCache {
public:
    LinkAttenuationCache(const NetworkGraph& graph, const std::vector<TargetParams>& targets,
                         ModelKind kind, double wavelength, const QuadratureConfig& quad,
                         const MembershipConfig& membership)
        : graph_(graph), targets_(targets), kind_(kind), wavelength_(wavelength), quad_(quad),
          membership_(membership), index_(graph, wavelength) {
        if (kind_ == ModelKind::cmam) {
            member_pts_.reserve(targets.size());
            for (const auto& t : targets_) {
                auto pts = footprint_sample_points(t, membership_.footprint_samples);
                const double reach = footprint_reach(pts, t.position);
                member_pts_.push_back({std::move(pts), reach});
            }
            need_ = membership_quorum(membership_.overlap_threshold, membership_.footprint_samples);
        }
    }

    double link_value(int link) {
        const auto [u, v] = graph_.links[link];
        const auto key = std::minmax(u, v);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double value = compute(link);
        cache_.emplace(key, value);
        return value;
    }

private:
    double compute(int link) const {
        const LinkGeometry geom = LinkGeometry::from_link(link, graph_);
        if (kind_ == ModelKind::mam) {
            double total = 0.0;
            for (const auto& t : targets_)
                total += target_contribution_db(geom, t, wavelength_, quad_);
            return total;
        }
        double best = 0.0;
        bool any = false;
        for (std::size_t n = 0; n < targets_.size(); ++n) {
            const auto& [pts, reach] = member_pts_[n];
            if (!index_.member(pts, targets_[n].position, reach, link, need_)) continue;
            const double a = target_contribution_db(geom, targets_[n], wavelength_, quad_);
            if (!any || a > best) best = a;
            any = true;
        }
        return any ? best : 0.0;
    }

    const NetworkGraph& graph_;
    const std::vector<TargetParams>& targets_;
    ModelKind kind_;
    double wavelength_;
    QuadratureConfig quad_;
    MembershipConfig membership_;
    FresnelRegionIndex index_;
    std::vector<std::pair<std::vector<Vec2>, double>> member_pts_;
    int need_ = 0;
    std::map<std::pair<int, int>, double> cache_;
};

} // namespace detail

// One full network snapshot under the chosen model. Entries are clamped at
// 0 dB: the quadrature can land at -1e-9 for far-away bodies.
inline AttenuationSnapshot snapshot(const NetworkGraph& graph,
                                    const std::vector<TargetParams>& targets, ModelKind kind,
                                    double wavelength, const QuadratureConfig& quad,
                                    const MembershipConfig& membership, int timestamp = 0) {
    if (kind == ModelKind::measured)
        fail("invalid-config", "measured snapshots come from ingestion, not simulation");
    validate(membership);
    AttenuationSnapshot snap;
    snap.timestamp = timestamp;
    snap.model_kind = kind;
    snap.node_features = Matrix(graph.node_count(), graph.max_degree());

    detail::LinkAttenuationCache cache(graph, targets, kind, wavelength, quad, membership);
    for (int u = 0; u < graph.node_count(); ++u) {
        const auto& nb = graph.neighbors[u];
        for (std::size_t j = 0; j < nb.size(); ++j) {
            const int link = graph.link_index(u, nb[j]);
            snap.node_features(u, static_cast<int>(j)) = std::max(0.0, cache.link_value(link));
        }
    }
    return snap;
}

inline double snapshot_link_value(const AttenuationSnapshot& snap, const NetworkGraph& graph,
                                  int link) {
    const auto [u, v] = graph.links[link];
    const auto& nb = graph.neighbors[u];
    const auto it = std::lower_bound(nb.begin(), nb.end(), v);
    return snap.node_features(u, static_cast<int>(it - nb.begin()));
}

struct NoiseConfig {
    double sigma_db = 0.0;
    bool enabled = false;
};

struct RssSnapshot {
    std::vector<double> link_power;       // dBm, graph link order
    std::vector<double> free_space_power; // dBm
};

// Received power per link: P = P(empty) - A + w, with w a zero-mean
// Gaussian dB-domain disturbance shared by the empty and occupied cases.
inline RssSnapshot simulate_rss(const AttenuationSnapshot& snap, const NetworkGraph& graph,
                                const std::vector<double>& free_space_power,
                                const NoiseConfig& noise, std::uint64_t seed) {
    if (static_cast<int>(free_space_power.size()) != graph.link_count())
        fail("missing-free-space-reference", "free-space table does not cover all links");
    RssSnapshot out;
    out.free_space_power = free_space_power;
    out.link_power.resize(graph.link_count());
    Rng rng(seed);
    for (int l = 0; l < graph.link_count(); ++l) {
        const double a = snapshot_link_value(snap, graph, l);
        const double w = noise.enabled ? rng.gaussian(0.0, noise.sigma_db) : 0.0;
        out.link_power[l] = free_space_power[l] - a + w;
    }
    return out;
}

} // namespace rfsl
