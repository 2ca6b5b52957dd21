#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rfsl/error.hpp"
#include "rfsl/geometry.hpp"
#include "rfsl/network.hpp"
#include "rfsl/rng.hpp"

namespace rfsl {

// One subject: floor position, orientation of the anteroposterior axis, and
// body dimensions. The footprint is the ellipse with semi-axes width_ap/2
// (along the orientation) and width_lat/2.
struct TargetParams {
    Vec2 position;
    double orientation = 0.0; // radians
    double height = 0.0;      // m
    double width_ap = 0.0;    // anteroposterior, m
    double width_lat = 0.0;   // lateral, m
};

struct SubjectProfile {
    std::string name;
    double height = 0.0;
    double width_ap = 0.0;
    double width_lat = 0.0;

    static SubjectProfile subject_a() { return {"A", 2.0, 0.65, 0.25}; }
    static SubjectProfile subject_b() { return {"B", 1.6, 0.55, 0.25}; }
    static SubjectProfile subject_c() { return {"C", 1.4, 0.55, 0.25}; }
};

inline TargetParams make_target(const SubjectProfile& p, Vec2 position, double orientation) {
    return {position, orientation, p.height, p.width_ap, p.width_lat};
}

struct MembershipConfig {
    double overlap_threshold = 0.5; // fraction of the footprint that must be covered
    int footprint_samples = 256;
};

inline void validate(const MembershipConfig& cfg) {
    if (cfg.footprint_samples < 32) fail("invalid-config", "footprint_samples must be >= 32");
    if (cfg.overlap_threshold <= 0.0 || cfg.overlap_threshold > 1.0)
        fail("invalid-config", "overlap_threshold must lie in (0, 1]");
}

// Floor projection of the first Fresnel ellipsoid of a link: foci at the
// endpoint projections, semi-major (d + lambda/2)/2.
inline Ellipse2D fresnel_floor_ellipse(int link, const NetworkGraph& graph, double wavelength) {
    const double d = graph.link_length(link);
    const double a = 0.5 * (d + 0.5 * wavelength);
    const double b = std::sqrt(std::max(0.0, a * a - 0.25 * d * d));
    return {graph.link_midpoint(link), a, b, graph.link_azimuth(link)};
}

inline Ellipse2D footprint_ellipse(const TargetParams& t) {
    return {t.position, 0.5 * t.width_ap, 0.5 * t.width_lat, t.orientation};
}

// Projected footprint width across the link direction; bounded by
// [width_lat, width_ap] for any relative angle.
inline double effective_width(const TargetParams& t, double link_azimuth) {
    const double psi = t.orientation - link_azimuth;
    const double a = 0.5 * t.width_ap, b = 0.5 * t.width_lat;
    const double sa = a * std::sin(psi), cb = b * std::cos(psi);
    return 2.0 * std::sqrt(sa * sa + cb * cb);
}

// Deterministic sunflower layout over the unit disk, mapped through the
// footprint's affine frame; count is exactly n.
inline std::vector<Vec2> footprint_sample_points(const TargetParams& t, int n) {
    if (n < 1) fail("invalid-config", "footprint_samples must be >= 1");
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    const double a = 0.5 * t.width_ap, b = 0.5 * t.width_lat;
    const double c = std::cos(t.orientation), s = std::sin(t.orientation);
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double r = std::sqrt((i + 0.5) / n);
        const double th = golden * i;
        const double u = a * r * std::cos(th);
        const double v = b * r * std::sin(th);
        pts.push_back({t.position.x + c * u - s * v, t.position.y + s * u + c * v});
    }
    return pts;
}

namespace detail {

// Per-link ellipse frame with the inverse squared axes folded in.
struct EllipseFrame {
    double cx, cy, c, s, a, b, inv_a2, inv_b2;
};

inline EllipseFrame make_frame(const Ellipse2D& e) {
    return {e.center.x,        e.center.y,
            std::cos(e.azimuth), std::sin(e.azimuth),
            e.semi_major,      e.semi_minor,
            1.0 / (e.semi_major * e.semi_major), 1.0 / (e.semi_minor * e.semi_minor)};
}

// Smallest count k such that k/n >= threshold; membership is inclusive at
// the threshold.
inline int membership_quorum(double threshold, int n) {
    int k = static_cast<int>(std::ceil(threshold * n));
    while (k > 0 && static_cast<double>(k - 1) >= threshold * n) --k;
    while (static_cast<double>(k) < threshold * n) ++k;
    return k;
}

// Shared membership decision. centroid/reach give a conservative bounding
// disk for the sample points, used to reject far ellipses cheaply; the
// rejection can never flip a positive decision.
inline bool frame_member(const EllipseFrame& f, const std::vector<Vec2>& pts, Vec2 centroid,
                         double reach, int need) {
    const double dx = centroid.x - f.cx, dy = centroid.y - f.cy;
    const double u = f.c * dx + f.s * dy;
    const double v = -f.s * dx + f.c * dy;
    if (std::abs(u) > f.a + reach || std::abs(v) > f.b + reach) return false;

    const int n = static_cast<int>(pts.size());
    if (need <= 0) return true;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        const double px = pts[i].x - f.cx, py = pts[i].y - f.cy;
        const double pu = f.c * px + f.s * py;
        const double pv = -f.s * px + f.c * py;
        if (pu * pu * f.inv_a2 + pv * pv * f.inv_b2 <= 1.0) {
            if (++inside >= need) return true;
        } else if (n - (i + 1 - inside) < need) {
            return false; // quorum unreachable
        }
    }
    return false;
}

inline double footprint_reach(const std::vector<Vec2>& pts, Vec2 centroid) {
    double reach = 0.0;
    for (const auto& p : pts) reach = std::max(reach, (p - centroid).norm());
    return reach;
}

} // namespace detail

// True iff at least overlap_threshold of the footprint sample points fall
// inside the link's Fresnel floor ellipse.
inline bool fresnel_membership(const TargetParams& t, int link, const NetworkGraph& graph,
                               double wavelength, const MembershipConfig& cfg) {
    validate(cfg);
    const auto frame = detail::make_frame(fresnel_floor_ellipse(link, graph, wavelength));
    const auto pts = footprint_sample_points(t, cfg.footprint_samples);
    const int need = detail::membership_quorum(cfg.overlap_threshold, cfg.footprint_samples);
    return detail::frame_member(frame, pts, t.position, detail::footprint_reach(pts, t.position),
                                need);
}

// Precomputed per-link ellipse frames for one (graph, wavelength); the hot
// path of link-set and bound computation. Decisions are identical to
// fresnel_membership by construction.
class FresnelRegionIndex {
public:
    FresnelRegionIndex(const NetworkGraph& graph, double wavelength) {
        frames_.reserve(graph.link_count());
        for (int l = 0; l < graph.link_count(); ++l)
            frames_.push_back(detail::make_frame(fresnel_floor_ellipse(l, graph, wavelength)));
    }

    int link_count() const { return static_cast<int>(frames_.size()); }

    bool member(const std::vector<Vec2>& pts, Vec2 centroid, double reach, int link,
                int need) const {
        return detail::frame_member(frames_[link], pts, centroid, reach, need);
    }

    std::vector<int> link_set(const TargetParams& t, const MembershipConfig& cfg) const {
        validate(cfg);
        const auto pts = footprint_sample_points(t, cfg.footprint_samples);
        const double reach = detail::footprint_reach(pts, t.position);
        const int need = detail::membership_quorum(cfg.overlap_threshold, cfg.footprint_samples);
        std::vector<int> q;
        for (int l = 0; l < link_count(); ++l)
            if (detail::frame_member(frames_[l], pts, t.position, reach, need)) q.push_back(l);
        return q;
    }

private:
    std::vector<detail::EllipseFrame> frames_;
};

// n i.i.d. targets: positions uniform over the area interior, orientations
// uniform over [0, 2pi); fixed draw order per target (x, y, phi).
inline std::vector<TargetParams> sample_targets(int n, Rect area, const SubjectProfile& profile,
                                                std::uint64_t seed) {
    std::vector<TargetParams> out;
    out.reserve(std::max(0, n));
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(0.0, area.width);
        const double y = rng.uniform(0.0, area.height);
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        out.push_back(make_target(profile, {x, y}, phi));
    }
    return out;
}

} // namespace rfsl
