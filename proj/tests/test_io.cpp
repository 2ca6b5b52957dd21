#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rfsl/config.hpp"
#include "rfsl/countnet.hpp"
#include "rfsl/io.hpp"
#include "rfsl/multibody.hpp"
#include "rfsl/rng.hpp"

using namespace rfsl;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("rfsl_test_" + name)).string();
}

Matrix random_features(int rows, int cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng rng(seed);
    for (double& v : m.data()) v = rng.uniform(0.0, 9.0);
    return m;
}

} // namespace

TEST_CASE("config: defaults, overrides, strict keys, hashing") {
    ExperimentConfig cfg;
    CHECK(get_config_value(cfg, "rf.frequency_hz") == "2400000000");
    set_config_value(cfg, "rf.frequency_hz", "5.8e9");
    CHECK(cfg.frequency_hz == 5.8e9);
    set_config_value(cfg, "noise.enabled", "true");
    CHECK(cfg.noise_enabled);
    set_config_value(cfg, "bounds.variant", "literal-guarded");
    CHECK(config_bounds(cfg).variant == BoundVariant::literal_guarded);

    CHECK_THROWS_WITH_AS(set_config_value(cfg, "no.such.key", "1"),
                         doctest::Contains("valid keys"), error);
    CHECK_THROWS_AS(set_config_value(cfg, "membership.samples", "many"), error);

    const ExperimentConfig base;
    CHECK(config_hash(base) == config_hash(ExperimentConfig{}));
    CHECK(config_hash(base) != config_hash(cfg));
}

TEST_CASE("config file round trip") {
    ExperimentConfig cfg;
    cfg.area_width = 7.0;
    cfg.net_nodes = 20;
    cfg.bounds_tau = 0.4;
    cfg.seed = 99;
    const auto path = temp_path("config.cfg");
    write_config_file(path, cfg);
    const auto back = read_config_file(path);
    CHECK(resolved_text(back) == resolved_text(cfg));
    std::remove(path.c_str());
}

TEST_CASE("config parser accepts comments and rejects junk") {
    std::istringstream ok("# comment\n\narea.width = 8\nseed=4\n");
    const auto cfg = parse_config_stream(ok, "inline");
    CHECK(cfg.area_width == 8.0);
    CHECK(cfg.seed == 4);

    std::istringstream bad("area.width 8\n");
    CHECK_THROWS_WITH_AS((void)parse_config_stream(bad, "inline"),
                         doctest::Contains("parse-error"), error);
}

TEST_CASE("graph document round trip") {
    const auto g = build_perimeter_network_nodes(5.0, 4.0, 10, 1.2);
    const auto back = graph_from_json(graph_to_json(g));
    CHECK(back.node_count() == g.node_count());
    CHECK(back.links == g.links);
    CHECK(back.node_height == g.node_height);
    CHECK(back.area.width == g.area.width);
    for (int i = 0; i < g.node_count(); ++i) {
        CHECK(back.node_positions[i].x == g.node_positions[i].x);
        CHECK(back.node_positions[i].y == g.node_positions[i].y);
        CHECK(back.node_positions[i].z == g.node_positions[i].z);
    }
}

TEST_CASE("dataset round trip is record-wise identical") {
    Dataset ds;
    ds.graph = build_perimeter_network_nodes(5.0, 5.0, 8, 1.0);
    ds.generation_config = {{"model.kind", "mam"}, {"seed", "3"}};
    for (int i = 0; i < 5; ++i)
        ds.records.push_back({random_features(8, ds.graph.max_degree(), i + 40), i});
    ds.records.push_back({random_features(8, ds.graph.max_degree(), 99), -1}); // unlabeled

    const auto path = temp_path("dataset.jsonl");
    write_dataset(path, ds);
    const auto back = read_dataset(path);
    REQUIRE(back.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(back.records[i].label == ds.records[i].label);
        CHECK(back.records[i].features == ds.records[i].features);
    }
    CHECK(back.generation_config == ds.generation_config);
    std::remove(path.c_str());
}

TEST_CASE("dataset reader rejects mismatched shapes and bad schema") {
    const auto path = temp_path("bad.jsonl");
    {
        std::ofstream out(path);
        out << R"({"schema":"rfsl.dataset.v1","graph":)"
            << graph_to_json(build_perimeter_network_nodes(5.0, 5.0, 8, 1.0)).dump()
            << R"(,"config":{}})" << "\n";
        out << R"({"label":1,"features":[[1,2],[3,4]]})" << "\n";
    }
    CHECK_THROWS_WITH_AS((void)read_dataset(path), doctest::Contains("schema-mismatch"), error);
    {
        std::ofstream out(path);
        out << R"({"schema":"other.v9"})" << "\n";
    }
    CHECK_THROWS_AS((void)read_dataset(path), error);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint reloads to bit-identical predictions") {
    const auto g = build_perimeter_network_nodes(5.0, 5.0, 12, 1.0);
    const auto adj = normalized_adjacency(g);
    auto params = init_params(GcnArchitecture{}, 12, g.max_degree(), 7);
    Rng rng(8);
    params.norm_mean.assign(params.feature_width, 0.25);
    for (auto& [ptr, n] : tensor_views(params))
        for (std::size_t i = 0; i < n; ++i) ptr[i] += 0.01 * rng.uniform();

    const auto path = temp_path("model.ckpt.json");
    write_checkpoint(path, params);
    auto back = read_checkpoint(path);

    const auto feats = random_features(12, g.max_degree(), 9);
    CHECK(estimate(back, adj, feats) == estimate(params, adj, feats));

    auto va = tensor_views(params), vb = tensor_views(back);
    REQUIRE(va.size() == vb.size());
    for (std::size_t t = 0; t < va.size(); ++t)
        for (std::size_t i = 0; i < va[t].second; ++i) CHECK(va[t].first[i] == vb[t].first[i]);
    std::remove(path.c_str());
}

TEST_CASE("rss csv parsing: header, comments, malformed rows") {
    std::istringstream ok("timestamp_ms,tx_id,rx_id,rssi_dbm,channel\n"
                          "0,0,1,-51.25,12\n"
                          "# comment\n"
                          "60,1,0,-50.5,12\n");
    const auto records = parse_rss_csv(ok);
    REQUIRE(records.size() == 2);
    CHECK(records[0].timestamp_ms == 0);
    CHECK(records[0].rssi_dbm == -51.25);
    CHECK(records[1].tx_id == 1);

    std::istringstream bad("0,0,1,-51.25\n");
    CHECK_THROWS_WITH_AS((void)parse_rss_csv(bad), doctest::Contains("parse-error"), error);
}

TEST_CASE("ingest groups windows, last record wins, order-insensitive") {
    const auto g = build_perimeter_network_nodes(5.0, 5.0, 4, 1.0);
    std::vector<RssRecord> recs = {
        {10, 0, 1, -50.0, 0},  {59, 0, 1, -52.0, 0}, // same window: -52 wins
        {65, 0, 1, -53.0, 0},                        // next window
        {10, 1, 2, -48.0, 0},
    };
    const auto windows = ingest_rss(recs, g, 60);
    REQUIRE(windows.size() == 2);
    const int l01 = g.link_index(0, 1);
    const int l12 = g.link_index(1, 2);
    const int l20 = g.link_index(2, 0);
    CHECK(windows[0].power[l01] == -52.0);
    CHECK(windows[0].present[l12] == 1);
    CHECK(windows[0].present[l20] == 0); // absent, not zero
    CHECK(windows[1].power[l01] == -53.0);
    CHECK(windows[1].present[l12] == 0);

    // out-of-order input gives the same windows
    std::vector<RssRecord> shuffled = {recs[2], recs[0], recs[3], recs[1]};
    const auto again = ingest_rss(shuffled, g, 60);
    REQUIRE(again.size() == windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        CHECK(again[w].power == windows[w].power);
        CHECK(again[w].present == windows[w].present);
    }
}

TEST_CASE("ingest rejects unknown nodes and empty streams") {
    const auto g = build_perimeter_network_nodes(5.0, 5.0, 4, 1.0);
    CHECK_THROWS_WITH_AS((void)ingest_rss({{0, 9, 1, -50.0, 0}}, g, 60),
                         doctest::Contains("unknown-node-id"), error);
    CHECK_THROWS_WITH_AS((void)ingest_rss({}, g, 60), doctest::Contains("empty-stream"), error);
}

TEST_CASE("a 38-node combined network with 342 links fills a 38x37 snapshot") {
    // hub node 0 hears all 37 peers; distinct ordered links fill the rest
    std::vector<std::pair<int, int>> links;
    for (int v = 1; v < 38; ++v) links.emplace_back(0, v);
    for (int offset = 1; static_cast<int>(links.size()) < 342; ++offset)
        for (int u = 1; u < 38 && static_cast<int>(links.size()) < 342; ++u)
            links.emplace_back(u, ((u - 1 + offset) % 37) + 1);
    std::vector<Vec3> nodes;
    for (int i = 0; i < 38; ++i)
        nodes.push_back({static_cast<double>(i % 19), i < 19 ? 0.0 : 9.0, 1.0});
    const auto g = make_graph(nodes, links, 1.0, Rect{19, 9});
    REQUIRE(g.link_count() == 342);
    REQUIRE(g.max_degree() == 37);

    std::vector<RssRecord> recs;
    for (int l = 0; l < g.link_count(); ++l)
        recs.push_back({5, g.links[l].first, g.links[l].second, -50.0, 14});
    const auto windows = ingest_rss(recs, g, 60);
    const auto est = estimate_attenuation(windows, g, constant_free_space(g, -50.0), 10);
    REQUIRE(est.snapshots.size() == 1);
    CHECK(est.snapshots[0].node_features.rows() == 38);
    CHECK(est.snapshots[0].node_features.cols() == 37);
}

TEST_CASE("attenuation estimation arithmetic and flooring") {
    const auto g = build_perimeter_network_nodes(5.0, 5.0, 4, 1.0);
    const int l01 = g.link_index(0, 1);

    std::vector<LinkPowerSnapshot> windows(1);
    windows[0].window_index = 0;
    windows[0].power.assign(g.link_count(), 0.0);
    windows[0].present.assign(g.link_count(), 0);
    windows[0].power[l01] = -55.0;
    windows[0].present[l01] = 1;

    const auto est = estimate_attenuation(windows, g, constant_free_space(g, -50.0), 10);
    REQUIRE(est.snapshots.size() == 1);
    const auto& nb = g.neighbors[0];
    const int j01 = static_cast<int>(std::find(nb.begin(), nb.end(), 1) - nb.begin());
    CHECK(est.snapshots[0].node_features(0, j01) == doctest::Approx(5.0));

    // louder than free space: floored at 0 with the raw value preserved
    windows[0].power[l01] = -47.0;
    const auto floored = estimate_attenuation(windows, g, constant_free_space(g, -50.0), 10);
    CHECK(floored.snapshots[0].node_features(0, j01) == 0.0);
    CHECK(floored.raw[0](0, j01) == doctest::Approx(-3.0));
}

TEST_CASE("attenuation estimation is shift equivariant") {
    const auto g = build_perimeter_network_nodes(5.0, 5.0, 6, 1.0);
    Rng rng(12);
    std::vector<LinkPowerSnapshot> windows(3);
    for (std::size_t w = 0; w < windows.size(); ++w) {
        windows[w].window_index = static_cast<std::int64_t>(w);
        windows[w].power.assign(g.link_count(), 0.0);
        windows[w].present.assign(g.link_count(), 1);
        for (auto& p : windows[w].power) p = -50.0 - rng.uniform(0.0, 10.0);
    }
    const double shift = 7.5;
    auto shifted = windows;
    for (auto& w : shifted)
        for (auto& p : w.power) p += shift;

    const auto base = estimate_attenuation(windows, g, constant_free_space(g, -50.0), 2);
    const auto moved = estimate_attenuation(shifted, g, constant_free_space(g, -50.0 + shift), 2);
    for (std::size_t t = 0; t < base.snapshots.size(); ++t)
        for (std::size_t i = 0; i < base.snapshots[t].node_features.data().size(); ++i)
            CHECK(moved.snapshots[t].node_features.data()[i] ==
                  doctest::Approx(base.snapshots[t].node_features.data()[i]).epsilon(1e-12));
}

TEST_CASE("simulate -> ingest -> estimate recovers the snapshot exactly") {
    const auto g = build_perimeter_network_nodes(5.0, 5.0, 8, 1.0);
    const auto targets = sample_targets(2, g.area, SubjectProfile::subject_a(), 5);
    const auto snap = snapshot(g, targets, ModelKind::cmam, 0.125, {}, {});
    const auto p0 = constant_free_space(g, -50.0);
    const auto rss = simulate_rss(snap, g, p0, {0.0, false}, 1);

    std::vector<RssRecord> recs;
    for (int l = 0; l < g.link_count(); ++l)
        recs.push_back({0, g.links[l].first, g.links[l].second, rss.link_power[l], 0});
    const auto windows = ingest_rss(recs, g, 60);
    const auto est = estimate_attenuation(windows, g, p0, 10);
    REQUIRE(est.snapshots.size() == 1);
    for (std::size_t i = 0; i < snap.node_features.data().size(); ++i)
        CHECK(std::abs(est.snapshots[0].node_features.data()[i] - snap.node_features.data()[i]) <
              1e-9);
}

TEST_CASE("missing free-space reference is an error") {
    const auto g = build_perimeter_network_nodes(5.0, 5.0, 4, 1.0);
    auto p0 = constant_free_space(g, -50.0);
    p0[g.link_index(0, 1)] = std::numeric_limits<double>::quiet_NaN();

    std::vector<LinkPowerSnapshot> windows(1);
    windows[0].power.assign(g.link_count(), -55.0);
    windows[0].present.assign(g.link_count(), 1);
    CHECK_THROWS_WITH_AS((void)estimate_attenuation(windows, g, p0, 5),
                         doctest::Contains("missing-free-space-reference"), error);
}
