#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "rr/features.hpp"
#include "rr/graph.hpp"

namespace rr::features {

// Synthetic breach-corpus generator. Sites get correlated features
// (category clusters, URL families, security tiers, per-category content
// mixtures) and per-pair account statistics whose reuse rate rises with a
// category match and with the pair's combined security weakness, and falls
// with the security-tier gap.
struct SynthConfig {
    int n_sites = 1000;
    int k = 5;  // intended federation size; only feasibility-checked here
    uint64_t seed = 1;
    double category_affinity = 0.03;
    double security_gap_penalty = 0.3;
    double security_weakness_bonus = 1.0;
    double base_reuse = 0.03;
    double noise = 0.02;
    int users_min = 60;
    int users_max = 200;
    int partners_per_site = 12;

    nlohmann::json to_json() const;
    static SynthConfig from_json(const nlohmann::json& j);
};

struct SynthOutput {
    graph::Graph graph;  // unlabeled admins (-1); edges carry account stats
    std::map<int, FeatureRecord> records;
};

SynthOutput synth_generate(const SynthConfig& cfg, double tau_gt, int64_t min_shared);

// Writes the graph and snapshot files for a generated corpus.
void synth_generate_files(const SynthConfig& cfg, double tau_gt, int64_t min_shared,
                          const std::string& graph_path, const std::string& snapshot_path);

}  // namespace rr::features
