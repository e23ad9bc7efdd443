#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rr/rng.hpp"

namespace rr::graph {

// Per-pair account statistics; the raw material edges are labeled from.
struct PairStats {
    int u = 0;
    int v = 0;
    int64_t shared_users = 0;
    int64_t reusing_users = 0;
};

struct ReuseEdge {
    int u = 0;  // canonical: u < v
    int v = 0;
    int64_t shared_users = 0;
    int64_t reusing_users = 0;
    double reuse_rate = 0.0;
    bool positive = false;
    bool cross_admin = false;  // set by partition()
};

// Undirected labeled password-reuse graph. Adjacency indexes only positive
// local edges: negatives are supervision targets and cross-admin edges are
// never used for message passing.
struct Graph {
    int num_nodes = 0;
    std::vector<int> admin;              // admin id per node, -1 before partitioning
    std::vector<ReuseEdge> edges;        // canonical order: sorted by (u, v)
    std::vector<std::vector<int>> adj;   // positive local adjacency, sorted neighbor lists

    void rebuild_adjacency();
    const std::vector<int>& neighbors(int v) const;
};

// Pairs with shared_users < min_shared emit no edge; otherwise the edge is
// positive iff reuse_rate > tau_gt (strict).
std::vector<ReuseEdge> label_edges(const std::vector<PairStats>& stats, double tau_gt,
                                   int64_t min_shared);

// Assign every node to exactly one of K admins (contiguous blocks of a
// seeded shuffle when sizes are given, near-equal blocks otherwise), mark
// straddling edges cross-admin, and rebuild the local adjacency.
void partition(Graph& g, int k, const std::vector<int>& sizes, uint64_t seed);

struct SplitPlan {
    std::vector<int> train;  // edge indices, local only
    std::vector<int> valid;  // cross-admin, between valid_pair
    std::vector<int> test;   // remaining cross-admin
    int valid_admin_a = -1;
    int valid_admin_b = -1;
};

SplitPlan make_split(const Graph& g, int valid_admin_a, int valid_admin_b);

// Induced L-hop computation subgraph around a batch of edges. Node order is
// ascending node id; adjacency is restricted to the subgraph's node set.
struct Subgraph {
    std::vector<int> nodes;                  // ascending original ids
    std::vector<int> local_index;            // original id -> position, -1 if absent
    std::vector<std::vector<int>> adj;       // positions, per position
    int hops = 0;                            // BFS depth this subgraph covers
    int index_of(int node_id) const { return local_index[static_cast<size_t>(node_id)]; }
};

Subgraph extract_subgraph(const Graph& g, const std::vector<int>& edge_indices, int hops);

// Whole local graph of one admin, as a subgraph (used at evaluation time).
Subgraph admin_subgraph(const Graph& g, int admin_id);

// --- file formats ----------------------------------------------------------
// Graph file: line-delimited JSON; a header record, then node and edge
// records. Split file: JSON with three edge-index arrays.
void save_graph(const std::string& path, const Graph& g, const std::string& config_json);
Graph load_graph(const std::string& path, double tau_gt, int64_t min_shared);
void save_split(const std::string& path, const SplitPlan& plan, const std::string& config_json);
SplitPlan load_split(const std::string& path);

}  // namespace rr::graph
