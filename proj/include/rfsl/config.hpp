#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "rfsl/bounds.hpp"
#include "rfsl/countnet.hpp"
#include "rfsl/diffraction.hpp"
#include "rfsl/error.hpp"
#include "rfsl/io.hpp"
#include "rfsl/multibody.hpp"
#include "rfsl/network.hpp"
#include "rfsl/scene.hpp"

namespace rfsl {

// Every tunable of the experiment pipeline, as a flat key=value document.
// Unknown keys are a hard error; the key table below is the documentation.
struct ExperimentConfig {
    double area_width = 10.0;
    double area_height = 10.0;
    double net_spacing = 0.0; // used when net_nodes == 0
    int net_nodes = 0;        // explicit total node count, overrides spacing
    double net_height = 1.0;
    std::string net_graph_file; // load a graph document instead of building

    double frequency_hz = 2.4e9;

    std::string subject_name = "A"; // A | B | C | custom
    double subject_height = 2.0;
    double subject_width_ap = 0.65;
    double subject_width_lat = 0.25;

    std::string model_kind = "mam"; // mam | cmam

    double quad_step_fraction = 0.125;
    std::int64_t quad_max_elements = 50'000'000;

    double membership_threshold = 0.5;
    int membership_samples = 256;

    double bounds_tau = 0.2;
    std::string bounds_variant = "cluster-consistent";
    int bounds_trials = 500;
    int bounds_n_min = 1;
    int bounds_n_max = 20;

    double noise_sigma_db = 0.0;
    bool noise_enabled = false;

    double rss_p0_dbm = -50.0;
    std::string rss_p0_file;
    std::int64_t rss_window_ms = 60;
    int rss_averaging_window = 10;

    int sim_n_targets = 3;
    int sim_snapshots = 10;
    bool sim_emit_rss = false;

    int data_samples_per_n = 200;
    int data_n_min = 1;
    int data_n_max = 6;
    std::string data_path;

    double train_learning_rate = 1e-3;
    int train_batch_size = 32;
    int train_max_epochs = 200;
    int train_patience = 10;
    double train_val_fraction = 0.15;
    std::string train_checkpoint;

    std::string ingest_csv;
    int ingest_label = -1;

    std::string sweep_grid; // e.g. "bounds.tau=0.2,0.4;rf.frequency_hz=2.48e9,5.8e9"

    std::uint64_t seed = 1;
    int jobs = 0; // 0 = hardware concurrency
};

namespace detail {

struct ConfigKey {
    const char* name;
    std::variant<double ExperimentConfig::*, int ExperimentConfig::*, bool ExperimentConfig::*,
                 std::string ExperimentConfig::*, std::uint64_t ExperimentConfig::*,
                 std::int64_t ExperimentConfig::*>
        member;
};

inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"area.width", &ExperimentConfig::area_width},
        {"area.height", &ExperimentConfig::area_height},
        {"net.spacing", &ExperimentConfig::net_spacing},
        {"net.nodes", &ExperimentConfig::net_nodes},
        {"net.height", &ExperimentConfig::net_height},
        {"net.graph_file", &ExperimentConfig::net_graph_file},
        {"rf.frequency_hz", &ExperimentConfig::frequency_hz},
        {"subject.name", &ExperimentConfig::subject_name},
        {"subject.height", &ExperimentConfig::subject_height},
        {"subject.width_ap", &ExperimentConfig::subject_width_ap},
        {"subject.width_lat", &ExperimentConfig::subject_width_lat},
        {"model.kind", &ExperimentConfig::model_kind},
        {"quad.step_fraction", &ExperimentConfig::quad_step_fraction},
        {"quad.max_elements", &ExperimentConfig::quad_max_elements},
        {"membership.threshold", &ExperimentConfig::membership_threshold},
        {"membership.samples", &ExperimentConfig::membership_samples},
        {"bounds.tau", &ExperimentConfig::bounds_tau},
        {"bounds.variant", &ExperimentConfig::bounds_variant},
        {"bounds.trials", &ExperimentConfig::bounds_trials},
        {"bounds.n_min", &ExperimentConfig::bounds_n_min},
        {"bounds.n_max", &ExperimentConfig::bounds_n_max},
        {"noise.sigma_db", &ExperimentConfig::noise_sigma_db},
        {"noise.enabled", &ExperimentConfig::noise_enabled},
        {"rss.p0_dbm", &ExperimentConfig::rss_p0_dbm},
        {"rss.p0_file", &ExperimentConfig::rss_p0_file},
        {"rss.window_ms", &ExperimentConfig::rss_window_ms},
        {"rss.averaging_window", &ExperimentConfig::rss_averaging_window},
        {"sim.n_targets", &ExperimentConfig::sim_n_targets},
        {"sim.snapshots", &ExperimentConfig::sim_snapshots},
        {"sim.emit_rss", &ExperimentConfig::sim_emit_rss},
        {"data.samples_per_n", &ExperimentConfig::data_samples_per_n},
        {"data.n_min", &ExperimentConfig::data_n_min},
        {"data.n_max", &ExperimentConfig::data_n_max},
        {"data.path", &ExperimentConfig::data_path},
        {"train.learning_rate", &ExperimentConfig::train_learning_rate},
        {"train.batch_size", &ExperimentConfig::train_batch_size},
        {"train.max_epochs", &ExperimentConfig::train_max_epochs},
        {"train.patience", &ExperimentConfig::train_patience},
        {"train.val_fraction", &ExperimentConfig::train_val_fraction},
        {"train.checkpoint", &ExperimentConfig::train_checkpoint},
        {"ingest.csv", &ExperimentConfig::ingest_csv},
        {"ingest.label", &ExperimentConfig::ingest_label},
        {"sweep.grid", &ExperimentConfig::sweep_grid},
        {"seed", &ExperimentConfig::seed},
        {"jobs", &ExperimentConfig::jobs},
    };
    return keys;
}

inline std::string valid_key_list() {
    std::string s;
    for (const auto& k : config_keys()) {
        if (!s.empty()) s += ", ";
        s += k.name;
    }
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    std::istringstream ss(value);
    T out{};
    ss >> out;
    if (ss.fail() || !(ss >> std::ws).eof())
        fail("invalid-config", "cannot parse value '" + value + "' for key " + key);
    return out;
}

inline bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    fail("invalid-config", "cannot parse boolean '" + value + "' for key " + key);
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline void set_config_value(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
    // documented ISM presets for the carrier
    if (key == "rf.frequency_hz") {
        if (value == "2.4GHz") {
            cfg.frequency_hz = 2.4e9;
            return;
        }
        if (value == "2.48GHz") {
            cfg.frequency_hz = 2.48e9;
            return;
        }
        if (value == "5.8GHz") {
            cfg.frequency_hz = 5.8e9;
            return;
        }
    }
    for (const auto& k : detail::config_keys()) {
        if (key != k.name) continue;
        std::visit(
            [&](auto member) {
                using T = std::remove_cv_t<std::remove_reference_t<decltype(cfg.*member)>>;
                if constexpr (std::is_same_v<T, bool>) {
                    cfg.*member = detail::parse_bool(value, key);
                } else if constexpr (std::is_same_v<T, std::string>) {
                    cfg.*member = value;
                } else {
                    cfg.*member = detail::parse_number<T>(value, key);
                }
            },
            k.member);
        return;
    }
    fail("invalid-config", "unknown key '" + key + "'; valid keys: " + detail::valid_key_list());
}

inline std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
    for (const auto& k : detail::config_keys()) {
        if (key != k.name) continue;
        return std::visit(
            [&](auto member) -> std::string {
                using T = std::remove_cv_t<std::remove_reference_t<decltype(cfg.*member)>>;
                if constexpr (std::is_same_v<T, bool>) {
                    return cfg.*member ? "true" : "false";
                } else if constexpr (std::is_same_v<T, std::string>) {
                    return cfg.*member;
                } else if constexpr (std::is_same_v<T, double>) {
                    return detail::format_double(cfg.*member);
                } else {
                    return std::to_string(cfg.*member);
                }
            },
            k.member);
    }
    fail("invalid-config", "unknown key '" + key + "'");
}

// key=value lines sorted by key; the canonical resolved form used for
// logging, dataset headers, and hashing.
inline std::vector<std::pair<std::string, std::string>> resolved_pairs(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& k : detail::config_keys()) pairs.emplace_back(k.name, get_config_value(cfg, k.name));
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

inline std::string resolved_text(const ExperimentConfig& cfg) {
    std::string s;
    for (const auto& [k, v] : resolved_pairs(cfg)) s += k + "=" + v + "\n";
    return s;
}

inline json config_to_json(const ExperimentConfig& cfg) {
    json j = json::object();
    for (const auto& [k, v] : resolved_pairs(cfg)) j[k] = v;
    return j;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
    // FNV-1a over the canonical resolved text
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : resolved_text(cfg)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// "# comment" and blank lines allowed; everything else must be key=value
// with a known key.
inline ExperimentConfig parse_config_stream(std::istream& in, const std::string& origin) {
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail("parse-error", origin + " line " + std::to_string(line_no) + ": expected key=value");
        set_config_value(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    return cfg;
}

inline ExperimentConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    return parse_config_stream(in, path);
}

inline void write_config_file(const std::string& path, const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    out << resolved_text(cfg);
}

// --------------------------------------------------------------------------
// derived objects

inline double config_wavelength(const ExperimentConfig& cfg) {
    return wavelength_from_frequency(cfg.frequency_hz);
}

inline SubjectProfile config_subject(const ExperimentConfig& cfg) {
    if (cfg.subject_name == "A") return SubjectProfile::subject_a();
    if (cfg.subject_name == "B") return SubjectProfile::subject_b();
    if (cfg.subject_name == "C") return SubjectProfile::subject_c();
    if (cfg.subject_name == "custom")
        return {"custom", cfg.subject_height, cfg.subject_width_ap, cfg.subject_width_lat};
    fail("invalid-config", "subject.name must be A, B, C or custom");
}

inline ModelKind config_model_kind(const ExperimentConfig& cfg) {
    if (cfg.model_kind == "mam") return ModelKind::mam;
    if (cfg.model_kind == "cmam") return ModelKind::cmam;
    fail("invalid-config", "model.kind must be mam or cmam");
}

inline BoundConfig config_bounds(const ExperimentConfig& cfg) {
    BoundConfig b;
    b.tau = cfg.bounds_tau;
    if (cfg.bounds_variant == "literal-guarded") {
        b.variant = BoundVariant::literal_guarded;
    } else if (cfg.bounds_variant == "cluster-consistent") {
        b.variant = BoundVariant::cluster_consistent;
    } else {
        fail("invalid-config", "bounds.variant must be literal-guarded or cluster-consistent");
    }
    return b;
}

inline MembershipConfig config_membership(const ExperimentConfig& cfg) {
    return {cfg.membership_threshold, cfg.membership_samples};
}

inline QuadratureConfig config_quadrature(const ExperimentConfig& cfg) {
    return {cfg.quad_step_fraction, cfg.quad_max_elements};
}

inline NoiseConfig config_noise(const ExperimentConfig& cfg) {
    return {cfg.noise_sigma_db, cfg.noise_enabled};
}

inline NetworkGraph config_graph(const ExperimentConfig& cfg) {
    if (!cfg.net_graph_file.empty()) return read_graph_file(cfg.net_graph_file);
    if (cfg.net_nodes > 0)
        return build_perimeter_network_nodes(cfg.area_width, cfg.area_height, cfg.net_nodes,
                                             cfg.net_height);
    if (cfg.net_spacing > 0.0)
        return build_perimeter_network(cfg.area_width, cfg.area_height, cfg.net_spacing,
                                       cfg.net_height);
    fail("invalid-config", "set net.nodes, net.spacing or net.graph_file");
}

inline TrainConfig config_train(const ExperimentConfig& cfg) {
    TrainConfig t;
    t.learning_rate = cfg.train_learning_rate;
    t.batch_size = cfg.train_batch_size;
    t.max_epochs = cfg.train_max_epochs;
    t.early_stop_patience = cfg.train_patience;
    t.val_fraction = cfg.train_val_fraction;
    t.rng_seed = cfg.seed;
    t.jobs = cfg.jobs;
    return t;
}

} // namespace rfsl
