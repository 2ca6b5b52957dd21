#include "doctest.h"

#include <cmath>
#include <complex>

#include "rfsl/diffraction.hpp"
#include "rfsl/rng.hpp"

using namespace rfsl;

namespace {

constexpr double kLambda = 0.125;
constexpr double kD = 4.0;

// Half-plane sheet emulating a knife edge: the sheet top edge sits at
// (LOS height + clearance). The minimum extent for the grazing case is
// 20 sqrt(lambda d); deep-shadow sweeps need a larger reach because the
// residual field is small against the rim contribution of the truncated
// kernel.
struct KnifeSetup {
    LinkGeometry link;
    AbsorbingSheet sheet;
};

KnifeSetup knife_setup(double edge_offset, double reach = 20.0 * std::sqrt(kLambda * kD)) {
    const double h = std::ceil(reach * 10.0) / 10.0 + 0.1;
    KnifeSetup s;
    s.link = {{0, 0, h}, {kD, 0, h}};
    s.sheet = {{kD / 2, 0, 0}, 2.0 * (reach + 0.1), h + edge_offset, 0.0};
    return s;
}

// nu for an edge at clearance e above the LOS, mid-link
double nu_of_offset(double e) { return e * std::sqrt(2.0 * kD / (kLambda * (kD / 2) * (kD / 2))); }

} // namespace

TEST_CASE("attenuation_db arithmetic") {
    CHECK(attenuation_db(FieldRatio{{1.0, 0.0}}) == doctest::Approx(0.0));
    CHECK(attenuation_db(FieldRatio{{0.5, 0.0}}) == doctest::Approx(6.0206).epsilon(1e-4));
    CHECK(attenuation_db(FieldRatio{{0.1, 0.0}}) == doctest::Approx(20.0));
    CHECK(attenuation_db(FieldRatio{{0.0, 0.0}}) == doctest::Approx(120.0)); // floored
}

TEST_CASE("knife edge oracle reference values") {
    // |F(0)| = 1/2
    CHECK(knife_edge_oracle(0.0) == doctest::Approx(6.0206).epsilon(1e-3));
    // unobstructed limit
    CHECK(std::abs(knife_edge_oracle(-50.0)) < 0.1);
    // tabulated Fresnel integrals: C(1) = 0.779893, S(1) = 0.438259
    {
        const double re = 0.5 - 0.779893, im = 0.5 - 0.438259;
        const double expected = -10.0 * std::log10(0.5 * (re * re + im * im));
        CHECK(knife_edge_oracle(1.0) == doctest::Approx(expected).epsilon(1e-4));
        CHECK(expected == doctest::Approx(13.86).epsilon(1e-2));
    }
    // deep shadow grows monotonically
    CHECK(knife_edge_oracle(2.0) > knife_edge_oracle(1.0));
    CHECK(knife_edge_oracle(1.0) > knife_edge_oracle(0.0));
}

TEST_CASE("zero-area sheet leaves the field untouched") {
    const LinkGeometry link{{0, 0, 1}, {4, 0, 1}};
    const QuadratureConfig quad;
    const auto r = field_ratio(link, {{2, 0, 0}, 0.0, 2.0, 0.0}, kLambda, quad);
    CHECK(r.value.real() == 1.0);
    CHECK(r.value.imag() == 0.0);
    CHECK(attenuation_db(r) == 0.0);
}

TEST_CASE("half-plane sheet reproduces the grazing knife edge") {
    const auto s = knife_setup(0.0);
    const QuadratureConfig quad;
    const auto r = field_ratio(s.link, s.sheet, kLambda, quad);
    CHECK(r.magnitude() == doctest::Approx(0.5).epsilon(0.02)); // |ratio| = 0.5 +- 0.01
    CHECK(std::abs(r.magnitude() - 0.5) < 0.01);
    CHECK(attenuation_db(r) == doctest::Approx(6.02).epsilon(0.05));
}

TEST_CASE("quadrature matches the knife-edge oracle across the sweep") {
    const QuadratureConfig quad;
    // Inside the lit-to-shadow transition the engine tracks the classical
    // curve tightly; in the deep shadow (nu >= 1.5) the exact spherical
    // kernel departs from the paraxial oracle by up to ~0.35 dB at this
    // short range, so that regime gets the looser bound.
    for (double nu : {-2.0, -1.0, -0.5, 0.5, 1.0, 1.25}) {
        const auto s = knife_setup(nu / nu_of_offset(1.0), 45.0);
        const double got = attenuation_db(field_ratio(s.link, s.sheet, kLambda, quad));
        CHECK(std::abs(got - knife_edge_oracle(nu)) < 0.3);
    }
    for (double nu : {1.5, 2.0}) {
        const auto s = knife_setup(nu / nu_of_offset(1.0), 45.0);
        const double got = attenuation_db(field_ratio(s.link, s.sheet, kLambda, quad));
        CHECK(std::abs(got - knife_edge_oracle(nu)) < 0.5);
    }
}

TEST_CASE("sheet far off the LOS barely attenuates") {
    const LinkGeometry link{{0, 0, 1}, {4, 0, 1}};
    const double lateral = 5.0 * std::sqrt(kLambda * kD);
    const AbsorbingSheet sheet{{2.0, lateral, 0}, 0.25, 2.0, 0.0};
    CHECK(attenuation_db(field_ratio(link, sheet, kLambda, {0.125, 50'000'000})) < 0.5);
    // high-resolution check of the same geometry
    CHECK(attenuation_db(field_ratio(link, sheet, kLambda, {0.05, 50'000'000})) < 0.5);
}

TEST_CASE("single target attenuation: centered body vs far body") {
    const LinkGeometry link{{0, 0, 1}, {4, 0, 1}};
    const QuadratureConfig quad;

    // facing across the link: effective width = width_ap
    const auto centered = make_target(SubjectProfile::subject_a(), {2, 0}, kPi / 2);
    CHECK(single_target_attenuation(link, centered, kLambda, quad) > 6.0);

    const auto far_off = make_target(SubjectProfile::subject_a(), {2, 10}, kPi / 2);
    CHECK(single_target_attenuation(link, far_off, kLambda, quad) < 0.1);

    const auto degenerate = make_target({"w0", 2.0, 0.0, 0.0}, {2, 0.5}, 0.0);
    CHECK(single_target_attenuation(link, degenerate, kLambda, quad) == 0.0);
}

TEST_CASE("swapping TX and RX is exactly symmetric") {
    const QuadratureConfig quad;
    Rng rng(321);
    for (int i = 0; i < 10; ++i) {
        const LinkGeometry fwd{{rng.uniform(0.0, 1.0), rng.uniform(0.0, 5.0), 1.0},
                               {rng.uniform(3.0, 6.0), rng.uniform(0.0, 5.0), 1.0}};
        const LinkGeometry rev{fwd.rx_position, fwd.tx_position};
        const auto t = make_target(SubjectProfile::subject_b(),
                                   {rng.uniform(1.0, 4.0), rng.uniform(0.0, 5.0)},
                                   rng.uniform(0.0, 2 * kPi));
        const double a = single_target_attenuation(fwd, t, kLambda, quad);
        // sheet azimuth flips by pi between directions; the plane and the
        // element grid traversal are the same up to lateral mirroring
        const double b = single_target_attenuation(rev, t, kLambda, quad);
        CHECK(std::abs(a - b) < 1e-9);
    }
}

TEST_CASE("halving the step moves the result by less than 0.1 dB") {
    const LinkGeometry link{{0, 0, 1}, {4, 0, 1}};
    for (double offset : {0.0, 0.2, 0.4}) {
        const auto t = make_target(SubjectProfile::subject_a(), {2, offset}, kPi / 2);
        const double coarse = single_target_attenuation(link, t, kLambda, {0.125, 50'000'000});
        const double fine = single_target_attenuation(link, t, kLambda, {0.0625, 50'000'000});
        CHECK(std::abs(coarse - fine) < 0.1);
    }
}

TEST_CASE("centered sheet blockage grows with width inside the first zone") {
    const LinkGeometry link{{0, 0, 1.5}, {4, 0, 1.5}};
    const QuadratureConfig quad;
    // |1 - ratio| peaks at nu ~= 1.22; test the monotone run before it
    const double r_fresnel = std::sqrt(kLambda * 2.0 * 2.0 / kD); // first-zone radius mid-link
    double prev = -1.0;
    for (double w = 0.05; w <= 2.0 * r_fresnel * 1.2 / std::sqrt(2.0); w += 0.05) {
        const AbsorbingSheet sheet{{2, 0, 0}, w, 3.0, 0.0};
        const auto ratio = field_ratio(link, sheet, kLambda, quad);
        const double blocked = std::abs(std::complex<double>(1.0, 0.0) - ratio.value);
        CHECK(blocked >= prev - 1e-3);
        prev = blocked;
    }
}

TEST_CASE("centered body sheets never amplify") {
    const LinkGeometry link{{0, 0, 1}, {4, 0, 1}};
    const QuadratureConfig quad;
    Rng rng(77);
    for (int i = 0; i < 8; ++i) {
        const AbsorbingSheet sheet{{rng.uniform(0.5, 3.5), 0, 0}, rng.uniform(0.1, 0.7),
                                   rng.uniform(1.2, 2.0), 0.0};
        CHECK(field_ratio(link, sheet, kLambda, quad).magnitude() <= 1.0 + 1e-6);
    }
}

TEST_CASE("quadrature overflow and degenerate geometry are reported") {
    const LinkGeometry link{{0, 0, 1}, {4, 0, 1}};
    CHECK_THROWS_WITH_AS(
        (void)field_ratio(link, {{2, 0, 0}, 50.0, 50.0, 0.0}, kLambda, {0.125, 10'000}),
        doctest::Contains("quadrature-overflow"), error);

    // sheet plane through the TX
    CHECK_THROWS_WITH_AS((void)field_ratio(link, {{0, 0, 0}, 1.0, 2.0, 0.0}, kLambda, {}),
                         doctest::Contains("degenerate-geometry"), error);

    const auto on_endpoint = make_target(SubjectProfile::subject_a(), {0, 0}, 0.0);
    CHECK_THROWS_AS((void)single_target_attenuation(link, on_endpoint, kLambda, {}), error);
}
