#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rfsl/io.hpp"
#include "rfsl/multibody.hpp"
#include "rfsl/parallel.hpp"
#include "rfsl/scene.hpp"

namespace rfsl {

struct DatasetGenSpec {
    std::vector<std::pair<int, int>> label_runs; // (target count, snapshots)
    ModelKind kind = ModelKind::mam;
    double wavelength = 0.125;
    QuadratureConfig quad;
    MembershipConfig membership;
    SubjectProfile profile = SubjectProfile::subject_a();
    std::uint64_t seed = 1;
    int jobs = 0;
};

// Labeled snapshot records over fixed target counts. Scenes derive their
// seeds from the global record index, so the records are identical for any
// thread count or schedule.
inline Dataset generate_labeled_dataset(const NetworkGraph& graph, const DatasetGenSpec& spec) {
    struct Item {
        int label;
        std::uint64_t seed;
    };
    std::vector<Item> items;
    std::uint64_t index = 0;
    for (const auto& [label, count] : spec.label_runs)
        for (int i = 0; i < count; ++i) items.push_back({label, derive_seed(spec.seed, index++)});

    Dataset ds;
    ds.graph = graph;
    ds.records.resize(items.size());
    parallel_for(static_cast<int>(items.size()), spec.jobs, [&](int i) {
        const auto targets =
            sample_targets(items[i].label, graph.area, spec.profile, items[i].seed);
        auto snap = snapshot(graph, targets, spec.kind, spec.wavelength, spec.quad,
                             spec.membership, i);
        ds.records[i] = {std::move(snap.node_features), items[i].label};
    });
    return ds;
}

} // namespace rfsl
