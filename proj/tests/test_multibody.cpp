#include "doctest.h"

#include <cmath>
#include <vector>

#include "rfsl/io.hpp"
#include "rfsl/multibody.hpp"
#include "rfsl/rng.hpp"

using namespace rfsl;

namespace {

constexpr double kLambda = 0.125;

NetworkGraph small_graph(int nodes = 6) {
    return build_perimeter_network_nodes(5.0, 5.0, nodes, 1.0);
}

} // namespace

TEST_CASE("mam: empty sum, single term, additivity") {
    const auto g = small_graph();
    const QuadratureConfig quad;
    CHECK(mam_link_attenuation(0, g, {}, kLambda, quad) == 0.0);

    const auto t1 = make_target(SubjectProfile::subject_a(), {2.3, 0.1}, 0.3);
    const auto t2 = make_target(SubjectProfile::subject_a(), {1.0, 0.4}, 1.2);
    const LinkGeometry geom = LinkGeometry::from_link(0, g);
    // the models compose nonnegative contributions
    const double a1 = std::max(0.0, single_target_attenuation(geom, t1, kLambda, quad));
    const double a2 = std::max(0.0, single_target_attenuation(geom, t2, kLambda, quad));
    REQUIRE(a1 > 0.0);

    CHECK(mam_link_attenuation(0, g, {t1}, kLambda, quad) == a1);
    CHECK(mam_link_attenuation(0, g, {t1, t2}, kLambda, quad) ==
          doctest::Approx(a1 + a2).epsilon(1e-12));
}

TEST_CASE("cmam gating: members keep the single-obstacle value, others vanish") {
    const auto g = small_graph();
    const QuadratureConfig quad;
    const MembershipConfig cfg;

    const auto member = make_target(SubjectProfile::subject_a(), {1.25, 0.0}, kPi / 2);
    REQUIRE(fresnel_membership(member, 0, g, kLambda, cfg));
    const double single =
        single_target_attenuation(LinkGeometry::from_link(0, g), member, kLambda, quad);
    REQUIRE(single > 0.0);
    CHECK(cmam_target_attenuation(0, g, member, kLambda, quad, cfg) == single);

    const auto outsider = make_target(SubjectProfile::subject_a(), {2.5, 4.0}, kPi / 2);
    REQUIRE_FALSE(fresnel_membership(outsider, 0, g, kLambda, cfg));
    CHECK(cmam_target_attenuation(0, g, outsider, kLambda, quad, cfg) == 0.0);
}

TEST_CASE("cmam link value is the max over members") {
    const auto g = small_graph();
    const QuadratureConfig quad;
    const MembershipConfig cfg;

    // both on the first link's LOS, different effective widths
    const auto big = make_target(SubjectProfile::subject_a(), {1.25, 0.0}, kPi / 2);
    const auto small = make_target(SubjectProfile::subject_a(), {0.6, 0.0}, 0.0);
    const double a_big = cmam_target_attenuation(0, g, big, kLambda, quad, cfg);
    const double a_small = cmam_target_attenuation(0, g, small, kLambda, quad, cfg);
    REQUIRE(a_big > 0.0);
    REQUIRE(a_small > 0.0);

    const double link_value = cmam_link_attenuation(0, g, {big, small}, kLambda, quad, cfg);
    CHECK(link_value == std::max(a_big, a_small));

    CHECK(cmam_link_attenuation(0, g, {}, kLambda, quad, cfg) == 0.0);
}

TEST_CASE("co-located members do not stack under cmam") {
    const auto g = small_graph();
    const QuadratureConfig quad;
    const MembershipConfig cfg;

    const auto t = make_target(SubjectProfile::subject_a(), {1.25, 0.0}, kPi / 2);
    std::vector<TargetParams> crowd(10, t);
    const double one = cmam_target_attenuation(0, g, t, kLambda, quad, cfg);
    const double cmam = cmam_link_attenuation(0, g, crowd, kLambda, quad, cfg);
    const double mam = mam_link_attenuation(0, g, crowd, kLambda, quad);
    CHECK(cmam == one);
    CHECK(mam == doctest::Approx(10.0 * one).epsilon(1e-9));
    CHECK(cmam <= mam);
}

TEST_CASE("dominance: cmam never exceeds mam on random scenes") {
    const auto g = small_graph();
    const QuadratureConfig quad;
    const MembershipConfig cfg;
    for (int scene = 0; scene < 4; ++scene) {
        const auto targets =
            sample_targets(3, g.area, SubjectProfile::subject_b(), derive_seed(9000, scene));
        for (int link = 0; link < g.link_count(); link += 7) {
            const double mam = mam_link_attenuation(link, g, targets, kLambda, quad);
            const double cmam = cmam_link_attenuation(link, g, targets, kLambda, quad, cfg);
            CHECK(cmam <= mam + 1e-9);
        }
    }
}

TEST_CASE("targets outside every region contribute nothing to cmam") {
    const auto g = small_graph();
    const QuadratureConfig quad;
    const MembershipConfig cfg;

    const auto inside = make_target(SubjectProfile::subject_a(), {2.5, 2.5}, 0.4);
    // outside the area, far from every ellipse
    const auto stray = make_target(SubjectProfile::subject_a(), {20.0, 20.0}, 0.0);
    const auto strayed = make_target(SubjectProfile::subject_a(), {20.0, 20.001}, 0.0);

    for (int link = 0; link < g.link_count(); link += 5) {
        const double base = cmam_link_attenuation(link, g, {inside}, kLambda, quad, cfg);
        CHECK(cmam_link_attenuation(link, g, {inside, stray}, kLambda, quad, cfg) == base);
        CHECK(cmam_link_attenuation(link, g, {inside, strayed}, kLambda, quad, cfg) == base);
    }
}

TEST_CASE("target order does not change either model") {
    const auto g = small_graph();
    const QuadratureConfig quad;
    const MembershipConfig cfg;
    const auto targets = sample_targets(4, g.area, SubjectProfile::subject_a(), 51);
    std::vector<TargetParams> reversed(targets.rbegin(), targets.rend());

    for (int link = 0; link < g.link_count(); link += 6) {
        CHECK(mam_link_attenuation(link, g, targets, kLambda, quad) ==
              doctest::Approx(mam_link_attenuation(link, g, reversed, kLambda, quad)).epsilon(1e-12));
        CHECK(cmam_link_attenuation(link, g, targets, kLambda, quad, cfg) ==
              cmam_link_attenuation(link, g, reversed, kLambda, quad, cfg));
    }
}

TEST_CASE("adding a target never lowers the cmam link value") {
    const auto g = small_graph();
    const QuadratureConfig quad;
    const MembershipConfig cfg;
    const auto base_targets = sample_targets(2, g.area, SubjectProfile::subject_a(), 77);
    const auto extra = make_target(SubjectProfile::subject_a(), {2.5, 0.05}, kPi / 2);

    auto with_extra = base_targets;
    with_extra.push_back(extra);
    for (int link = 0; link < g.link_count(); link += 4) {
        const double before = cmam_link_attenuation(link, g, base_targets, kLambda, quad, cfg);
        const double after = cmam_link_attenuation(link, g, with_extra, kLambda, quad, cfg);
        CHECK(after >= before);
    }
}

TEST_CASE("snapshot shape and empty-room content") {
    const auto g = build_perimeter_network_nodes(5.0, 5.0, 20, 1.0);
    const auto snap = snapshot(g, {}, ModelKind::mam, kLambda, {}, {});
    CHECK(snap.node_features.rows() == 20);
    CHECK(snap.node_features.cols() == 19);
    for (double v : snap.node_features.data()) CHECK(v == 0.0);
}

TEST_CASE("mam snapshot dominates cmam snapshot entrywise") {
    const auto g = small_graph(8);
    const QuadratureConfig quad;
    const MembershipConfig cfg;
    for (int scene = 0; scene < 3; ++scene) {
        const auto targets =
            sample_targets(3, g.area, SubjectProfile::subject_a(), derive_seed(31337, scene));
        const auto mam = snapshot(g, targets, ModelKind::mam, kLambda, quad, cfg);
        const auto cmam = snapshot(g, targets, ModelKind::cmam, kLambda, quad, cfg);
        REQUIRE(mam.node_features.rows() == cmam.node_features.rows());
        for (std::size_t i = 0; i < mam.node_features.data().size(); ++i)
            CHECK(cmam.node_features.data()[i] <= mam.node_features.data()[i] + 1e-9);
    }
}

TEST_CASE("simulate_rss arithmetic with noise disabled") {
    const auto g = small_graph();
    auto snap = snapshot(g, {}, ModelKind::mam, kLambda, {}, {});
    // plant a 5 dB attenuation on link 0 in both feature positions
    const auto [u, v] = g.links[0];
    for (int link = 0; link < g.link_count(); ++link) {
        const auto [a, b] = g.links[link];
        if ((a == u && b == v) || (a == v && b == u)) {
            const auto& nb = g.neighbors[a];
            for (std::size_t j = 0; j < nb.size(); ++j)
                if (nb[j] == b) snap.node_features(a, static_cast<int>(j)) = 5.0;
        }
    }
    const auto rss = simulate_rss(snap, g, constant_free_space(g, -50.0), {0.0, false}, 1);
    CHECK(rss.link_power[0] == doctest::Approx(-55.0));
    // untouched links ride at the free-space level
    bool saw_free = false;
    for (int l = 1; l < g.link_count(); ++l) {
        const auto [a, b] = g.links[l];
        if ((a == u && b == v) || (a == v && b == u)) continue;
        CHECK(rss.link_power[l] == doctest::Approx(-50.0));
        saw_free = true;
    }
    CHECK(saw_free);
}

TEST_CASE("simulate_rss noise statistics") {
    const auto g = build_perimeter_network_nodes(10.0, 10.0, 52, 1.0); // 52*51 = 2652 links
    const auto snap = snapshot(g, {}, ModelKind::mam, kLambda, {}, {});
    const auto p0 = constant_free_space(g, -50.0);

    double sum = 0.0, sq = 0.0;
    int n = 0;
    for (int rep = 0; rep < 4; ++rep) {
        const auto rss = simulate_rss(snap, g, p0, {1.0, true}, derive_seed(5, rep));
        for (double p : rss.link_power) {
            const double w = p + 50.0;
            sum += w;
            sq += w * w;
            ++n;
        }
    }
    REQUIRE(n >= 10000);
    const double mean = sum / n;
    const double stdev = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) < 0.05);
    CHECK(stdev > 0.95);
    CHECK(stdev < 1.05);

    // disabled noise is exactly deterministic
    const auto a = simulate_rss(snap, g, p0, {1.0, false}, 1);
    const auto b = simulate_rss(snap, g, p0, {1.0, false}, 2);
    CHECK(a.link_power == b.link_power);
}
