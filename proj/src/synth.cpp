#include "rr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rr::features {

nlohmann::json SynthConfig::to_json() const {
    return {{"n_sites", n_sites},
            {"k", k},
            {"seed", seed},
            {"category_affinity", category_affinity},
            {"security_gap_penalty", security_gap_penalty},
            {"security_weakness_bonus", security_weakness_bonus},
            {"base_reuse", base_reuse},
            {"noise", noise},
            {"users_per_pair_range", {users_min, users_max}},
            {"partners_per_site", partners_per_site}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
    SynthConfig c;
    c.n_sites = j.value("n_sites", c.n_sites);
    c.k = j.value("k", c.k);
    c.seed = j.value("seed", c.seed);
    c.category_affinity = j.value("category_affinity", c.category_affinity);
    c.security_gap_penalty = j.value("security_gap_penalty", c.security_gap_penalty);
    c.security_weakness_bonus = j.value("security_weakness_bonus", c.security_weakness_bonus);
    c.base_reuse = j.value("base_reuse", c.base_reuse);
    c.noise = j.value("noise", c.noise);
    if (j.contains("users_per_pair_range")) {
        c.users_min = j["users_per_pair_range"][0].get<int>();
        c.users_max = j["users_per_pair_range"][1].get<int>();
    }
    c.partners_per_site = j.value("partners_per_site", c.partners_per_site);
    return c;
}

namespace {

const char* kUrlFamilies[kCategoryCount] = {
    "news",   "mail",   "shop",   "bank",   "game",  "forum", "video", "music", "travel", "food",
    "sports", "health", "social", "photo",  "cloud", "learn", "gov",   "dev",   "dating", "crypto"};

SecurityPosture posture_for_tier(int tier, std::mt19937_64& rng) {
    SecurityPosture s;
    // tier 0: hardened, tier 1: average, tier 2: weak
    s.software_count = std::floor(uniform_real(rng, 1.0, 4.0)) + tier * 4.0;
    s.avg_cves = tier * 2.0 + uniform_real(rng, 0.0, 1.0);
    s.avg_cvss = std::min(10.0, tier * 3.0 + uniform_real(rng, 0.0, 2.0));
    s.max_cvss = std::min(10.0, s.avg_cvss + uniform_real(rng, 0.0, 10.0 - s.avg_cvss));
    s.https_ok = tier == 2 ? (uniform_real(rng, 0.0, 1.0) < 0.4 ? 1.0 : 0.0) : 1.0;
    s.cert_errors = tier == 2 ? std::floor(uniform_real(rng, 0.0, 3.0)) : 0.0;
    return s;
}

}  // namespace

SynthOutput synth_generate(const SynthConfig& cfg, double tau_gt, int64_t min_shared) {
    if (cfg.n_sites < 2 * cfg.k || cfg.n_sites < 2)
        throw std::invalid_argument("synth_generate: n_sites must be at least 2K");
    if (cfg.users_min < 1 || cfg.users_max < cfg.users_min)
        throw std::invalid_argument("synth_generate: bad users_per_pair_range");

    auto rng = make_rng(cfg.seed, "synth");

    // per-category content mixture means
    std::vector<std::vector<double>> content_mean(kCategoryCount,
                                                  std::vector<double>(kContentDim));
    for (auto& mu : content_mean)
        for (double& v : mu) v = 0.35 * gaussian(rng);

    SynthOutput out;
    out.graph.num_nodes = cfg.n_sites;
    out.graph.admin.assign(static_cast<size_t>(cfg.n_sites), -1);

    std::vector<int> category(static_cast<size_t>(cfg.n_sites));
    std::vector<int> tier(static_cast<size_t>(cfg.n_sites));
    std::vector<std::vector<int>> by_category(kCategoryCount);
    for (int i = 0; i < cfg.n_sites; ++i) {
        const int c = static_cast<int>(uniform_int(rng, 0, kCategoryCount - 1));
        const int t = static_cast<int>(uniform_int(rng, 0, 2));
        category[static_cast<size_t>(i)] = c;
        tier[static_cast<size_t>(i)] = t;
        by_category[static_cast<size_t>(c)].push_back(i);

        FeatureRecord r;
        // subnet loosely follows the category; host part random
        r.ip = (static_cast<uint32_t>(10 + c) << 24) |
               (static_cast<uint32_t>(uniform_int(rng, 0, 255)) << 16) |
               (static_cast<uint32_t>(uniform_int(rng, 0, 255)) << 8) |
               static_cast<uint32_t>(uniform_int(rng, 1, 254));
        r.category = c;
        r.url = std::string("www.") + kUrlFamilies[c] + "-" + std::to_string(i) + ".example";
        r.content.resize(kContentDim);
        for (int d = 0; d < kContentDim; ++d)
            r.content[static_cast<size_t>(d)] =
                content_mean[static_cast<size_t>(c)][static_cast<size_t>(d)] + 0.35 * gaussian(rng);
        r.security = posture_for_tier(t, rng);
        out.records.emplace(i, std::move(r));
    }

    // candidate pairs: a mix of same-category and random partners
    std::set<std::pair<int, int>> pairs;
    for (int i = 0; i < cfg.n_sites; ++i) {
        const auto& mates = by_category[static_cast<size_t>(category[static_cast<size_t>(i)])];
        for (int p = 0; p < cfg.partners_per_site; ++p) {
            int j;
            if (uniform_real(rng, 0.0, 1.0) < 0.5 && mates.size() > 1) {
                j = mates[static_cast<size_t>(uniform_int(rng, 0, static_cast<int64_t>(mates.size()) - 1))];
            } else {
                j = static_cast<int>(uniform_int(rng, 0, cfg.n_sites - 1));
            }
            if (j == i) continue;
            pairs.emplace(std::min(i, j), std::max(i, j));
        }
    }

    std::vector<graph::PairStats> stats;
    stats.reserve(pairs.size());
    // Convex per-tier weakness: weak sites (tier 2) dominate the reuse signal.
    const double kTierWeakness[3] = {0.0, 0.05, 0.45};
    for (const auto& [u, v] : pairs) {
        const bool same_cat = category[static_cast<size_t>(u)] == category[static_cast<size_t>(v)];
        const int gap = std::abs(tier[static_cast<size_t>(u)] - tier[static_cast<size_t>(v)]);
        const double weakness =
            kTierWeakness[tier[static_cast<size_t>(u)]] + kTierWeakness[tier[static_cast<size_t>(v)]];
        double p = cfg.base_reuse + (same_cat ? cfg.category_affinity : 0.0) +
                   cfg.security_weakness_bonus * weakness -
                   cfg.security_gap_penalty * gap / 2.0 + cfg.noise * gaussian(rng);
        p = std::clamp(p, 0.02, 0.98);
        graph::PairStats s;
        s.u = u;
        s.v = v;
        s.shared_users = uniform_int(rng, cfg.users_min, cfg.users_max);
        int64_t reusing = 0;
        for (int64_t a = 0; a < s.shared_users; ++a)
            if (uniform_real(rng, 0.0, 1.0) < p) ++reusing;
        s.reusing_users = reusing;
        stats.push_back(s);
    }

    out.graph.edges = graph::label_edges(stats, tau_gt, min_shared);
    out.graph.rebuild_adjacency();
    return out;
}

void synth_generate_files(const SynthConfig& cfg, double tau_gt, int64_t min_shared,
                          const std::string& graph_path, const std::string& snapshot_path) {
    SynthOutput out = synth_generate(cfg, tau_gt, min_shared);
    nlohmann::json meta = cfg.to_json();
    meta["tau_gt"] = tau_gt;
    meta["min_shared"] = min_shared;
    graph::save_graph(graph_path, out.graph, meta.dump());
    save_snapshot(snapshot_path, out.records, meta.dump());
}

}  // namespace rr::features
