// Command-line front end: simulation, resolvability bounds, dataset
// generation, training, evaluation, RSS ingestion, and config-grid sweeps.
// Outputs are plain CSV / JSONL documents; identical inputs always produce
// byte-identical outputs.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rfsl/rfsl.hpp"

namespace {

using namespace rfsl;

int log_level() {
    const char* env = std::getenv("RFSL_LOG");
    if (!env) return 1;
    const std::string v = env;
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void log_config(const ExperimentConfig& cfg) {
    if (log_level() < 1) return;
    std::cerr << "rfsl: config_hash=" << config_hash(cfg) << " seed=" << cfg.seed << "\n";
    for (const auto& [k, v] : resolved_pairs(cfg)) std::cerr << "rfsl:   " << k << "=" << v << "\n";
}

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    std::int64_t seed = -1;
    int jobs = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "config file (key=value lines)");
    cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set bounds.tau=0.4")
        ->take_all();
    cmd->add_option("--out", opts.out_path, "output path");
    cmd->add_option("--seed", opts.seed, "override the base seed");
    cmd->add_option("--jobs", opts.jobs, "worker threads (0 = hardware)");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = read_config_file(opts.config_path);
    for (const auto& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) fail("invalid-config", "--set expects key=value, got " + kv);
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.jobs >= 0) cfg.jobs = static_cast<int>(opts.jobs);
    log_config(cfg);
    return cfg;
}

void require_out(const CommonOpts& opts) {
    if (opts.out_path.empty()) fail("invalid-config", "--out is required for this subcommand");
}

std::ofstream open_out(const std::string& path) {
    if (path.empty()) fail("invalid-config", "--out is required for this subcommand");
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// --------------------------------------------------------------------------

Dataset generate_records(const ExperimentConfig& cfg, const NetworkGraph& graph,
                         const std::vector<std::pair<int, int>>& label_runs) {
    DatasetGenSpec spec;
    spec.label_runs = label_runs;
    spec.kind = config_model_kind(cfg);
    spec.wavelength = config_wavelength(cfg);
    spec.quad = config_quadrature(cfg);
    spec.membership = config_membership(cfg);
    spec.profile = config_subject(cfg);
    spec.seed = cfg.seed;
    spec.jobs = cfg.jobs;
    Dataset ds = generate_labeled_dataset(graph, spec);
    ds.generation_config = config_to_json(cfg);
    return ds;
}

int cmd_simulate(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    require_out(opts);
    const auto graph = config_graph(cfg);
    const auto ds = generate_records(cfg, graph, {{cfg.sim_n_targets, cfg.sim_snapshots}});
    write_dataset(opts.out_path, ds);

    if (cfg.sim_emit_rss) {
        const auto p0 = cfg.rss_p0_file.empty() ? constant_free_space(graph, cfg.rss_p0_dbm)
                                                : read_free_space_csv(cfg.rss_p0_file, graph);
        std::ofstream rss_out(opts.out_path + ".rss.csv");
        if (!rss_out) fail("io-error", "cannot open RSS output");
        rss_out << "# config_hash=" << config_hash(cfg) << "\n";
        rss_out << "timestamp_ms,tx_id,rx_id,rssi_dbm,channel\n";
        for (std::size_t t = 0; t < ds.records.size(); ++t) {
            AttenuationSnapshot snap{ds.records[t].features, static_cast<int>(t),
                                     config_model_kind(cfg)};
            const auto rss = simulate_rss(snap, graph, p0, config_noise(cfg),
                                          derive_seed(cfg.seed, 0x5555 + t));
            append_rss_csv(rss_out, graph, rss, static_cast<std::int64_t>(t) * cfg.rss_window_ms);
        }
    }
    return 0;
}

const char* kBoundsHeader = "N,accuracy,n_hat_mean,tau,frequency_hz,nodes,area_sqm,variant";

// data rows of the bounds sweep for one resolved config
std::string bounds_rows(const ExperimentConfig& cfg) {
    const auto graph = config_graph(cfg);
    const double lambda = config_wavelength(cfg);
    const auto bcfg = config_bounds(cfg);
    const auto membership = config_membership(cfg);
    const auto profile = config_subject(cfg);

    std::ostringstream csv;
    for (int n = cfg.bounds_n_min; n <= cfg.bounds_n_max; ++n) {
        const auto stats = bound_trials(graph, n, profile, bcfg, lambda, cfg.bounds_trials,
                                        derive_seed(cfg.seed, static_cast<std::uint64_t>(n)),
                                        membership, cfg.jobs);
        csv << n << "," << fmt(stats.accuracy) << "," << fmt(stats.n_hat_mean) << ","
            << fmt(cfg.bounds_tau) << "," << fmt(cfg.frequency_hz) << "," << graph.node_count()
            << "," << fmt(graph.area.width * graph.area.height) << "," << cfg.bounds_variant
            << "\n";
    }
    return csv.str();
}

int cmd_bounds(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    auto out = open_out(opts.out_path);
    out << "# config_hash=" << config_hash(cfg) << "\n" << kBoundsHeader << "\n"
        << bounds_rows(cfg);
    return 0;
}

int cmd_gen_data(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    require_out(opts);
    if (cfg.data_n_min < 0 || cfg.data_n_max < cfg.data_n_min || cfg.data_n_max > 20)
        fail("invalid-config", "data.n_min..data.n_max must be a nonempty range within [0, 20]");
    const auto graph = config_graph(cfg);
    std::vector<std::pair<int, int>> runs;
    for (int n = cfg.data_n_min; n <= cfg.data_n_max; ++n)
        runs.emplace_back(n, cfg.data_samples_per_n);
    const auto ds = generate_records(cfg, graph, runs);
    write_dataset(opts.out_path, ds);
    return 0;
}

int cmd_train(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    require_out(opts);
    if (cfg.data_path.empty()) fail("invalid-config", "set data.path to the training dataset");
    const auto ds = read_dataset(cfg.data_path);
    for (const auto& r : ds.records)
        if (r.label < 0 || r.label > 20)
            fail("invalid-config", "training labels must lie in [0, 20]");

    const auto adj = normalized_adjacency(ds.graph);
    const auto result = train(ds.records, adj, GcnArchitecture{}, config_train(cfg));

    write_checkpoint(opts.out_path, result.params);

    std::ofstream hist(opts.out_path + ".history.csv");
    if (!hist) fail("io-error", "cannot open history output");
    hist << "# config_hash=" << config_hash(cfg) << "\n";
    hist << "epoch,train_loss,val_loss\n";
    for (const auto& e : result.history)
        hist << e.epoch << "," << fmt(e.train_loss) << "," << fmt(e.val_loss) << "\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    if (cfg.data_path.empty()) fail("invalid-config", "set data.path to the evaluation dataset");
    if (cfg.train_checkpoint.empty()) fail("invalid-config", "set train.checkpoint to a model file");
    const auto ds = read_dataset(cfg.data_path);
    const auto params = read_checkpoint(cfg.train_checkpoint);
    const auto adj = normalized_adjacency(ds.graph);

    std::vector<LabeledGraphSample> labeled;
    for (const auto& r : ds.records)
        if (r.label >= 0) labeled.push_back(r);
    if (labeled.empty()) fail("invalid-config", "evaluation dataset has no labeled records");

    const auto rep = evaluate(params, adj, labeled, cfg.jobs);
    auto out = open_out(opts.out_path);
    out << "# config_hash=" << config_hash(cfg) << "\n";
    out << "N,samples,accuracy\n";
    for (const auto& [label, cell] : rep.per_label)
        out << label << "," << cell.first << ","
            << fmt(static_cast<double>(cell.second) / cell.first) << "\n";
    out << "overall," << labeled.size() << "," << fmt(rep.overall) << "\n";
    return 0;
}

int cmd_ingest(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    require_out(opts);
    if (cfg.ingest_csv.empty()) fail("invalid-config", "set ingest.csv to the RSS capture");
    const auto graph = config_graph(cfg);
    std::ifstream in(cfg.ingest_csv);
    if (!in) fail("io-error", "cannot open " + cfg.ingest_csv);
    const auto records = parse_rss_csv(in);
    const auto windows = ingest_rss(records, graph, cfg.rss_window_ms);
    const auto p0 = cfg.rss_p0_file.empty() ? constant_free_space(graph, cfg.rss_p0_dbm)
                                            : read_free_space_csv(cfg.rss_p0_file, graph);
    const auto est = estimate_attenuation(windows, graph, p0, cfg.rss_averaging_window);

    Dataset ds;
    ds.graph = graph;
    ds.generation_config = config_to_json(cfg);
    for (const auto& snap : est.snapshots)
        ds.records.push_back({snap.node_features, cfg.ingest_label});
    write_dataset(opts.out_path, ds);
    return 0;
}

// grid cells: "key=v1,v2;key2=w1,w2" -> cartesian product of overrides
std::vector<std::vector<std::string>> sweep_cells(const std::string& grid) {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    std::istringstream gs(grid);
    std::string axis;
    while (std::getline(gs, axis, ';')) {
        const auto eq = axis.find('=');
        if (eq == std::string::npos) fail("invalid-config", "sweep.grid axis needs key=v1,v2,...");
        std::vector<std::string> values;
        std::istringstream vs(axis.substr(eq + 1));
        std::string v;
        while (std::getline(vs, v, ',')) values.push_back(v);
        if (values.empty()) fail("invalid-config", "sweep.grid axis has no values");
        axes.emplace_back(axis.substr(0, eq), values);
    }
    if (axes.empty()) fail("invalid-config", "sweep.grid is empty");

    std::vector<std::vector<std::string>> cells{{}};
    for (const auto& [key, values] : axes) {
        std::vector<std::vector<std::string>> next;
        for (const auto& cell : cells)
            for (const auto& v : values) {
                auto c = cell;
                c.push_back(key + "=" + v);
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }
    return cells;
}

int cmd_sweep(const CommonOpts& opts) {
    const auto base_cfg = resolve_config(opts);
    const auto cells = sweep_cells(base_cfg.sweep_grid);

    // independent, individually configured cells run in parallel up to the
    // --jobs limit; each cell computes its trials single-threaded and writes
    // its own output slot, so the emitted CSV is schedule-independent
    std::vector<ExperimentConfig> cell_cfgs;
    for (const auto& cell : cells) {
        ExperimentConfig c = base_cfg;
        for (const auto& kv : cell) {
            const auto eq = kv.find('=');
            set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
        }
        c.jobs = 1;
        cell_cfgs.push_back(std::move(c));
    }
    std::vector<std::string> cell_rows(cells.size());
    parallel_for(static_cast<int>(cells.size()), base_cfg.jobs,
                 [&](int i) { cell_rows[i] = bounds_rows(cell_cfgs[i]); });

    auto out = open_out(opts.out_path);
    out << "# config_hash=" << config_hash(base_cfg) << "\n" << kBoundsHeader << "\n";
    for (const auto& rows : cell_rows) out << rows;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RF sensing link-graph simulator, resolvability bounds and graph counting network"};
    app.require_subcommand(1);

    CommonOpts opts[7];
    auto* simulate = app.add_subcommand("simulate", "emit attenuation snapshots for one scene size");
    auto* bounds = app.add_subcommand("bounds", "Monte Carlo resolvability accuracy sweep (CSV)");
    auto* gen = app.add_subcommand("gen-data", "labeled training dataset over a range of counts");
    auto* train = app.add_subcommand("train", "train the counting network on a dataset");
    auto* eval = app.add_subcommand("eval", "per-count accuracy of a checkpoint on a dataset");
    auto* ingest = app.add_subcommand("ingest", "RSS CSV capture -> attenuation snapshot dataset");
    auto* sweep = app.add_subcommand("sweep", "bounds over a config grid, one row block per cell");
    CLI::App* cmds[7] = {simulate, bounds, gen, train, eval, ingest, sweep};
    for (int i = 0; i < 7; ++i) add_common(cmds[i], opts[i]);

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(opts[0]);
        if (bounds->parsed()) return cmd_bounds(opts[1]);
        if (gen->parsed()) return cmd_gen_data(opts[2]);
        if (train->parsed()) return cmd_train(opts[3]);
        if (eval->parsed()) return cmd_eval(opts[4]);
        if (ingest->parsed()) return cmd_ingest(opts[5]);
        if (sweep->parsed()) return cmd_sweep(opts[6]);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const rfsl::error& e) {
        std::cerr << "error:" << e.category() << ": " << e.detail() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error:internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
