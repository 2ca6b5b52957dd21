#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

#include "rfsl/error.hpp"
#include "rfsl/geometry.hpp"
#include "rfsl/network.hpp"
#include "rfsl/scene.hpp"

namespace rfsl {

struct LinkGeometry {
    Vec3 tx_position;
    Vec3 rx_position;

    double length_d() const { return (rx_position - tx_position).norm(); }

    double horizontal_azimuth() const {
        const Vec3 d = rx_position - tx_position;
        return std::atan2(d.y, d.x);
    }

    static LinkGeometry from_link(int link, const NetworkGraph& graph) {
        const auto [u, v] = graph.links[link];
        return {graph.node_positions[u], graph.node_positions[v]};
    }
};

// Vertical absorbing rectangle. The plane normal lies in the horizontal
// plane at normal_azimuth; the sheet spans [-width/2, width/2] across it
// and z in [0, height]. center.z is ignored.
struct AbsorbingSheet {
    Vec3 center;
    double width = 0.0;
    double height = 0.0;
    double normal_azimuth = 0.0;
};

struct QuadratureConfig {
    double step_fraction = 0.125;               // grid step = step_fraction * lambda
    std::int64_t max_elements = 50'000'000;
};

inline void validate(const QuadratureConfig& q) {
    if (!(q.step_fraction > 0.0 && q.step_fraction <= 0.25))
        fail("invalid-config", "step_fraction must lie in (0, 0.25]");
    if (q.max_elements < 10'000) fail("invalid-config", "max_elements must be >= 10000");
}

// Received-field ratio E(with sheet) / E(free space); 1 for an empty sheet.
struct FieldRatio {
    std::complex<double> value{1.0, 0.0};

    double magnitude() const { return std::abs(value); }
};

// Huygens-source integral over the sheet: midpoint rule on a uniform grid
// with cell size <= step_fraction * lambda in both directions. The loop
// order is fixed, so the sum is bit-stable across runs; each element's term
// is symmetric in (r1, r2), so swapping TX and RX moves the result only by
// summation-order rounding.
inline FieldRatio field_ratio(const LinkGeometry& link, const AbsorbingSheet& sheet,
                              double wavelength, const QuadratureConfig& quad) {
    if (wavelength <= 0.0) fail("invalid-config", "wavelength must be positive");
    validate(quad);
    if (sheet.width == 0.0 || sheet.height == 0.0) return FieldRatio{};
    if (sheet.width < 0.0 || sheet.height < 0.0)
        fail("invalid-config", "sheet dimensions must be nonnegative");

    const Vec3 tx = link.tx_position, rx = link.rx_position;
    const double d = link.length_d();
    if (d <= 0.0) fail("degenerate-geometry", "link endpoints coincide");

    // signed horizontal distances of the endpoints from the sheet plane
    const double nx = std::cos(sheet.normal_azimuth), ny = std::sin(sheet.normal_azimuth);
    const double s_tx = (tx.x - sheet.center.x) * nx + (tx.y - sheet.center.y) * ny;
    const double s_rx = (rx.x - sheet.center.x) * nx + (rx.y - sheet.center.y) * ny;
    if (std::abs(s_tx) < 1e-9 || std::abs(s_rx) < 1e-9)
        fail("degenerate-geometry", "sheet plane contains a link endpoint");

    const double step = quad.step_fraction * wavelength;
    const std::int64_t n_w = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(sheet.width / step)));
    const std::int64_t n_h = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(sheet.height / step)));
    if (n_w > quad.max_elements / n_h)
        fail("quadrature-overflow", "sheet needs " + std::to_string(n_w) + "x" +
                                        std::to_string(n_h) + " elements, cap is " +
                                        std::to_string(quad.max_elements));

    const double cw = sheet.width / static_cast<double>(n_w);
    const double ch = sheet.height / static_cast<double>(n_h);
    const double cell_area = cw * ch;
    const double k = 2.0 * kPi / wavelength;

    // lateral direction within the sheet plane
    const double lx = -ny, ly = nx;
    const double x0 = sheet.center.x + lx * (-0.5 * sheet.width);
    const double y0 = sheet.center.y + ly * (-0.5 * sheet.width);

    double acc_re = 0.0, acc_im = 0.0;
    for (std::int64_t iz = 0; iz < n_h; ++iz) {
        const double z = (iz + 0.5) * ch;
        const double dz_tx = z - tx.z, dz_rx = z - rx.z;
        for (std::int64_t iw = 0; iw < n_w; ++iw) {
            const double t = (iw + 0.5) * cw;
            const double px = x0 + lx * t, py = y0 + ly * t;
            const double ax = px - tx.x, ay = py - tx.y;
            const double bx = px - rx.x, by = py - rx.y;
            const double r1 = std::sqrt(ax * ax + ay * ay + dz_tx * dz_tx);
            const double r2 = std::sqrt(bx * bx + by * by + dz_rx * dz_rx);
            const double phase = -k * (r1 + r2 - d);
            const double w = cell_area / (r1 * r2);
            acc_re += w * std::cos(phase);
            acc_im += w * std::sin(phase);
        }
    }

    // 1 - j (d / lambda) * acc
    const double scale = d / wavelength;
    return FieldRatio{{1.0 + scale * acc_im, -scale * acc_re}};
}

// -10 log10 |ratio|^2, with |ratio| floored at 1e-6 (120 dB) so composed
// pipelines never see infinities; the raw ratio stays in FieldRatio.
inline double attenuation_db(const FieldRatio& ratio) {
    const double mag = std::max(ratio.magnitude(), 1e-6);
    return -20.0 * std::log10(mag);
}

// Sheet construction for one subject on one link: width is the footprint
// projection across the link, the plane is perpendicular to the horizontal
// LOS projection and centered at the subject position.
inline AbsorbingSheet sheet_from_target(const LinkGeometry& link, const TargetParams& target) {
    const double azimuth = link.horizontal_azimuth();
    return {{target.position.x, target.position.y, 0.0},
            effective_width(target, azimuth),
            target.height,
            azimuth};
}

inline double single_target_attenuation(const LinkGeometry& link, const TargetParams& target,
                                        double wavelength, const QuadratureConfig& quad) {
    const Vec2 tx = link.tx_position.floor_projection();
    const Vec2 rx = link.rx_position.floor_projection();
    if ((target.position - tx).norm() < 1e-9 || (target.position - rx).norm() < 1e-9)
        fail("degenerate-geometry", "target coincides with a link endpoint projection");
    const AbsorbingSheet sheet = sheet_from_target(link, target);
    if (sheet.width == 0.0 || sheet.height == 0.0) return 0.0;
    return attenuation_db(field_ratio(link, sheet, wavelength, quad));
}

namespace detail {

// Fresnel cosine/sine integrals by composite Simpson; plenty for the
// validation ranges used here (|x| up to ~60).
inline void fresnel_cs(double x, double& c_out, double& s_out) {
    const double ax = std::abs(x);
    if (ax == 0.0) {
        c_out = s_out = 0.0;
        return;
    }
    const int panels = ax <= 4.0 ? (1 << 14) : (1 << 17);
    const double h = ax / (2 * panels);
    double sc = 0.0, ss = 0.0;
    for (int i = 0; i <= 2 * panels; ++i) {
        const double t = i * h;
        const double arg = 0.5 * kPi * t * t;
        const double w = (i == 0 || i == 2 * panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sc += w * std::cos(arg);
        ss += w * std::sin(arg);
    }
    const double f = h / 3.0;
    c_out = std::copysign(f * sc, x);
    s_out = std::copysign(f * ss, x);
}

} // namespace detail

// Classical knife-edge loss from the Fresnel-integral field
// F(nu) = (1+j)/2 * integral_nu^inf exp(-j pi t^2 / 2) dt; validation oracle
// for the sheet quadrature, evaluated independently of it.
inline double knife_edge_oracle(double nu) {
    double c = 0.0, s = 0.0;
    detail::fresnel_cs(nu, c, s);
    const double re = 0.5 - c;
    const double im = 0.5 - s;
    const double mag2 = 0.5 * (re * re + im * im);
    return -10.0 * std::log10(mag2);
}

} // namespace rfsl
