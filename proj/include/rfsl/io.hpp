#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "rfsl/countnet.hpp"
#include "rfsl/error.hpp"
#include "rfsl/matrix.hpp"
#include "rfsl/multibody.hpp"
#include "rfsl/network.hpp"

namespace rfsl {

using json = nlohmann::json;

inline constexpr double kSpeedOfLight = 299792458.0;

inline double wavelength_from_frequency(double frequency_hz) {
    if (frequency_hz <= 0.0) fail("invalid-config", "frequency must be positive");
    return kSpeedOfLight / frequency_hz;
}

// ---------------------------------------------------------------------------
// graph document

inline json graph_to_json(const NetworkGraph& g) {
    json nodes = json::array();
    for (const auto& p : g.node_positions) nodes.push_back({p.x, p.y, p.z});
    json links = json::array();
    for (const auto& [u, v] : g.links) links.push_back({u, v});
    return json{{"schema", "rfsl.graph.v1"},
                {"area", {{"width", g.area.width}, {"height", g.area.height}}},
                {"node_height", g.node_height},
                {"nodes", nodes},
                {"links", links}};
}

inline NetworkGraph graph_from_json(const json& j) {
    if (!j.is_object() || j.value("schema", "") != "rfsl.graph.v1")
        fail("schema-mismatch", "expected rfsl.graph.v1 document");
    std::vector<Vec3> nodes;
    for (const auto& n : j.at("nodes")) nodes.push_back({n.at(0), n.at(1), n.at(2)});
    std::vector<std::pair<int, int>> links;
    for (const auto& l : j.at("links")) links.emplace_back(l.at(0), l.at(1));
    const Rect area{j.at("area").at("width"), j.at("area").at("height")};
    return make_graph(std::move(nodes), std::move(links), j.at("node_height"), area);
}

inline void write_graph_file(const std::string& path, const NetworkGraph& g) {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    out << graph_to_json(g).dump() << "\n";
}

inline NetworkGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("parse-error", path + ": " + e.what());
    }
    return graph_from_json(j);
}

// ---------------------------------------------------------------------------
// dataset file: one JSON header line, one JSON record per following line

struct Dataset {
    NetworkGraph graph;
    json generation_config = json::object();
    std::vector<LabeledGraphSample> records; // label -1 marks unlabeled snapshots
};

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(j.at(0).size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (static_cast<int>(row.size()) != cols)
            fail("schema-mismatch", "ragged feature matrix");
        for (int c = 0; c < cols; ++c) m(i, c) = row.at(c);
    }
    return m;
}

inline void write_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    json header{{"schema", "rfsl.dataset.v1"},
                {"graph", graph_to_json(ds.graph)},
                {"config", ds.generation_config}};
    out << header.dump() << "\n";
    for (const auto& rec : ds.records) {
        json r{{"features", matrix_to_json(rec.features)}};
        if (rec.label >= 0) r["label"] = rec.label;
        out << r.dump() << "\n";
    }
}

inline Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) fail("parse-error", path + ": empty dataset file");

    Dataset ds;
    try {
        const json header = json::parse(line);
        if (header.value("schema", "") != "rfsl.dataset.v1")
            fail("schema-mismatch", path + ": expected rfsl.dataset.v1 header");
        ds.graph = graph_from_json(header.at("graph"));
        ds.generation_config = header.value("config", json::object());
    } catch (const json::exception& e) {
        fail("parse-error", path + " line 1: " + e.what());
    }

    const int want_rows = ds.graph.node_count();
    const int want_cols = ds.graph.max_degree();
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json r = json::parse(line);
            LabeledGraphSample sample;
            sample.features = matrix_from_json(r.at("features"));
            sample.label = r.contains("label") && !r.at("label").is_null()
                               ? r.at("label").get<int>()
                               : -1;
            if (sample.features.rows() != want_rows || sample.features.cols() != want_cols)
                fail("schema-mismatch", path + " line " + std::to_string(line_no) +
                                            ": feature shape does not match the header graph");
            ds.records.push_back(std::move(sample));
        } catch (const json::exception& e) {
            fail("parse-error", path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// model checkpoint

inline json checkpoint_to_json(const ModelParams& p) {
    auto mat = [](const Matrix& m) {
        return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
    };
    json gcn_w = json::array();
    for (const auto& w : p.gcn_w) gcn_w.push_back(mat(w));
    json arch{{"widths", p.arch.widths},
              {"conv1_filters", p.arch.conv1_filters},
              {"conv2_filters", p.arch.conv2_filters},
              {"conv2_kernel", p.arch.conv2_kernel},
              {"pool_width", p.arch.pool_width},
              {"pool_stride", p.arch.pool_stride},
              {"dense1_units", p.arch.dense1_units},
              {"clamp_lo", p.arch.clamp_lo},
              {"clamp_hi", p.arch.clamp_hi},
              {"include_sort_channel", p.arch.include_sort_channel}};
    return json{{"schema", "rfsl.checkpoint.v1"},
                {"arch", arch},
                {"n_nodes", p.n_nodes},
                {"feature_width", p.feature_width},
                {"norm_mean", p.norm_mean},
                {"norm_std", p.norm_std},
                {"tensors",
                 {{"gcn_w", gcn_w},
                  {"gcn_b", p.gcn_b},
                  {"conv1_w", mat(p.conv1_w)},
                  {"conv1_b", p.conv1_b},
                  {"conv2_w", mat(p.conv2_w)},
                  {"conv2_b", p.conv2_b},
                  {"dense1_w", mat(p.dense1_w)},
                  {"dense1_b", p.dense1_b},
                  {"dense2_w", p.dense2_w},
                  {"dense2_b", p.dense2_b}}}};
}

inline ModelParams checkpoint_from_json(const json& j) {
    if (j.value("schema", "") != "rfsl.checkpoint.v1")
        fail("schema-mismatch", "expected rfsl.checkpoint.v1 document");
    auto mat = [](const json& mj) {
        Matrix m(mj.at("rows").get<int>(), mj.at("cols").get<int>());
        const auto data = mj.at("data").get<std::vector<double>>();
        if (data.size() != m.data().size()) fail("schema-mismatch", "tensor size mismatch");
        m.data() = data;
        return m;
    };
    ModelParams p;
    const json& a = j.at("arch");
    p.arch.widths = a.at("widths").get<std::vector<int>>();
    p.arch.conv1_filters = a.at("conv1_filters");
    p.arch.conv2_filters = a.at("conv2_filters");
    p.arch.conv2_kernel = a.at("conv2_kernel");
    p.arch.pool_width = a.at("pool_width");
    p.arch.pool_stride = a.at("pool_stride");
    p.arch.dense1_units = a.at("dense1_units");
    p.arch.clamp_lo = a.at("clamp_lo");
    p.arch.clamp_hi = a.at("clamp_hi");
    p.arch.include_sort_channel = a.at("include_sort_channel");
    p.n_nodes = j.at("n_nodes");
    p.feature_width = j.at("feature_width");
    p.norm_mean = j.at("norm_mean").get<std::vector<double>>();
    p.norm_std = j.at("norm_std").get<std::vector<double>>();
    const json& t = j.at("tensors");
    for (const auto& wj : t.at("gcn_w")) p.gcn_w.push_back(mat(wj));
    p.gcn_b = t.at("gcn_b").get<std::vector<std::vector<double>>>();
    p.conv1_w = mat(t.at("conv1_w"));
    p.conv1_b = t.at("conv1_b").get<std::vector<double>>();
    p.conv2_w = mat(t.at("conv2_w"));
    p.conv2_b = t.at("conv2_b").get<std::vector<double>>();
    p.dense1_w = mat(t.at("dense1_w"));
    p.dense1_b = t.at("dense1_b").get<std::vector<double>>();
    p.dense2_w = t.at("dense2_w").get<std::vector<double>>();
    p.dense2_b = t.at("dense2_b");
    return p;
}

inline void write_checkpoint(const std::string& path, const ModelParams& p) {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    out << checkpoint_to_json(p).dump() << "\n";
}

inline ModelParams read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("parse-error", path + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

// ---------------------------------------------------------------------------
// RSS ingestion

struct RssRecord {
    std::int64_t timestamp_ms = 0;
    int tx_id = 0;
    int rx_id = 0;
    double rssi_dbm = 0.0;
    int channel = 0;
};

// Per-window received power for every graph link; links without a record in
// the window are marked absent, not zero.
struct LinkPowerSnapshot {
    std::int64_t window_index = 0;
    std::vector<double> power;         // dBm, graph link order
    std::vector<std::uint8_t> present;
};

inline std::vector<RssRecord> parse_rss_csv(std::istream& in) {
    std::vector<RssRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!fields.empty() && fields[0] == "timestamp_ms") continue; // header row
        if (fields.size() != 5)
            fail("parse-error", "line " + std::to_string(line_no) + ": expected 5 CSV fields "
                                "(timestamp_ms,tx_id,rx_id,rssi_dbm,channel)");
        try {
            RssRecord r;
            std::size_t used = 0;
            r.timestamp_ms = std::stoll(fields[0], &used);
            if (used != fields[0].size()) throw std::invalid_argument(fields[0]);
            r.tx_id = std::stoi(fields[1], &used);
            if (used != fields[1].size()) throw std::invalid_argument(fields[1]);
            r.rx_id = std::stoi(fields[2], &used);
            if (used != fields[2].size()) throw std::invalid_argument(fields[2]);
            r.rssi_dbm = std::stod(fields[3], &used);
            if (used != fields[3].size()) throw std::invalid_argument(fields[3]);
            r.channel = std::stoi(fields[4], &used);
            if (used != fields[4].size()) throw std::invalid_argument(fields[4]);
            records.push_back(r);
        } catch (const std::exception&) {
            fail("parse-error", "line " + std::to_string(line_no) + ": malformed RSS record");
        }
    }
    return records;
}

// Groups records into consecutive windows of window_ms; within a window the
// last record per link wins (records are stably sorted by timestamp first,
// so out-of-order input does not change the result).
inline std::vector<LinkPowerSnapshot> ingest_rss(std::vector<RssRecord> records,
                                                 const NetworkGraph& graph,
                                                 std::int64_t window_ms = 60) {
    if (window_ms <= 0) fail("invalid-config", "window_ms must be positive");
    if (records.empty()) fail("empty-stream", "no RSS records");

    for (const auto& r : records) {
        if (r.tx_id < 0 || r.tx_id >= graph.node_count() || r.rx_id < 0 ||
            r.rx_id >= graph.node_count())
            fail("unknown-node-id", "record references node " +
                                        std::to_string(r.tx_id < 0 || r.tx_id >= graph.node_count()
                                                           ? r.tx_id
                                                           : r.rx_id));
        if (graph.link_index(r.tx_id, r.rx_id) < 0)
            fail("unknown-link", "(" + std::to_string(r.tx_id) + "," + std::to_string(r.rx_id) +
                                     ") is not a link of the graph");
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const RssRecord& a, const RssRecord& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });

    auto window_of = [window_ms](std::int64_t ts) {
        std::int64_t w = ts / window_ms;
        if (ts < 0 && ts % window_ms != 0) --w;
        return w;
    };

    const std::int64_t first = window_of(records.front().timestamp_ms);
    const std::int64_t last = window_of(records.back().timestamp_ms);
    std::vector<LinkPowerSnapshot> windows(static_cast<std::size_t>(last - first + 1));
    for (std::size_t i = 0; i < windows.size(); ++i) {
        windows[i].window_index = first + static_cast<std::int64_t>(i);
        windows[i].power.assign(graph.link_count(), 0.0);
        windows[i].present.assign(graph.link_count(), 0);
    }
    for (const auto& r : records) {
        auto& w = windows[static_cast<std::size_t>(window_of(r.timestamp_ms) - first)];
        const int link = graph.link_index(r.tx_id, r.rx_id);
        w.power[link] = r.rssi_dbm;
        w.present[link] = 1;
    }
    return windows;
}

inline std::vector<double> constant_free_space(const NetworkGraph& graph, double p0_dbm) {
    return std::vector<double>(graph.link_count(), p0_dbm);
}

struct EstimatedAttenuation {
    std::vector<AttenuationSnapshot> snapshots; // floored at 0 dB
    std::vector<Matrix> raw;                    // unfloored estimates, same layout
};

// A_hat = P(empty) - moving mean of the received power over the last
// averaging_window windows (present samples only). Links never observed in
// the current window history are treated as free space.
inline EstimatedAttenuation estimate_attenuation(const std::vector<LinkPowerSnapshot>& windows,
                                                 const NetworkGraph& graph,
                                                 const std::vector<double>& free_space_power,
                                                 int averaging_window) {
    if (averaging_window < 1) fail("invalid-config", "averaging_window must be >= 1");
    if (static_cast<int>(free_space_power.size()) != graph.link_count())
        fail("missing-free-space-reference", "free-space table does not cover all links");

    const int n_links = graph.link_count();
    for (const auto& w : windows)
        for (int l = 0; l < n_links; ++l)
            if (w.present[l] && !std::isfinite(free_space_power[l]))
                fail("missing-free-space-reference",
                     "no free-space power for observed link " + std::to_string(l));

    EstimatedAttenuation out;
    std::vector<std::deque<double>> history(n_links);

    for (std::size_t t = 0; t < windows.size(); ++t) {
        for (int l = 0; l < n_links; ++l) {
            if (!windows[t].present[l]) continue;
            history[l].push_back(windows[t].power[l]);
            if (static_cast<int>(history[l].size()) > averaging_window) history[l].pop_front();
        }

        Matrix features(graph.node_count(), graph.max_degree());
        Matrix raw(graph.node_count(), graph.max_degree());
        for (int u = 0; u < graph.node_count(); ++u) {
            const auto& nb = graph.neighbors[u];
            for (std::size_t j = 0; j < nb.size(); ++j) {
                const int link = graph.link_index(u, nb[j]);
                double est = 0.0;
                if (!history[link].empty()) {
                    double s = 0.0;
                    for (double v : history[link]) s += v;
                    est = free_space_power[link] - s / static_cast<double>(history[link].size());
                }
                raw(u, static_cast<int>(j)) = est;
                features(u, static_cast<int>(j)) = std::max(0.0, est);
            }
        }
        AttenuationSnapshot snap;
        snap.node_features = std::move(features);
        snap.timestamp = static_cast<int>(t);
        snap.model_kind = ModelKind::measured;
        out.snapshots.push_back(std::move(snap));
        out.raw.push_back(std::move(raw));
    }
    return out;
}

// Free-space power table from a CSV of tx_id,rx_id,p0_dbm rows; links not
// listed stay NaN (missing).
inline std::vector<double> read_free_space_csv(const std::string& path, const NetworkGraph& graph) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    std::vector<double> table(graph.link_count(), std::numeric_limits<double>::quiet_NaN());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
            fail("parse-error", path + " line " + std::to_string(line_no));
        if (line_no == 1 && a == "tx_id") continue;
        try {
            const int u = std::stoi(a), v = std::stoi(b);
            const double p0 = std::stod(c);
            if (u < 0 || u >= graph.node_count() || v < 0 || v >= graph.node_count())
                fail("unknown-node-id", path + " line " + std::to_string(line_no));
            const int link = graph.link_index(u, v);
            if (link < 0) fail("unknown-link", path + " line " + std::to_string(line_no));
            table[link] = p0;
        } catch (const error&) {
            throw;
        } catch (const std::exception&) {
            fail("parse-error", path + " line " + std::to_string(line_no));
        }
    }
    return table;
}

// RSS CSV emission for simulated snapshots; one row per link.
inline void append_rss_csv(std::ostream& out, const NetworkGraph& graph, const RssSnapshot& rss,
                           std::int64_t timestamp_ms, int channel = 0) {
    char buf[160];
    for (int l = 0; l < graph.link_count(); ++l) {
        const auto [u, v] = graph.links[l];
        std::snprintf(buf, sizeof buf, "%lld,%d,%d,%.17g,%d\n",
                      static_cast<long long>(timestamp_ms), u, v, rss.link_power[l], channel);
        out << buf;
    }
}

} // namespace rfsl
