#include "rr/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace rr::graph {

void Graph::rebuild_adjacency() {
    adj.assign(static_cast<size_t>(num_nodes), {});
    for (const ReuseEdge& e : edges) {
        if (!e.positive || e.cross_admin) continue;
        adj[static_cast<size_t>(e.u)].push_back(e.v);
        adj[static_cast<size_t>(e.v)].push_back(e.u);
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());
}

const std::vector<int>& Graph::neighbors(int v) const {
    if (v < 0 || v >= num_nodes) throw std::out_of_range("neighbors: unknown node");
    return adj[static_cast<size_t>(v)];
}

std::vector<ReuseEdge> label_edges(const std::vector<PairStats>& stats, double tau_gt,
                                   int64_t min_shared) {
    std::vector<ReuseEdge> out;
    for (const PairStats& s : stats) {
        if (s.u == s.v) throw std::invalid_argument("label_edges: self-loop in account stats");
        if (s.reusing_users > s.shared_users || s.reusing_users < 0 || s.shared_users < 0)
            throw std::invalid_argument("label_edges: inconsistent counts");
        if (s.shared_users < min_shared) continue;
        ReuseEdge e;
        e.u = std::min(s.u, s.v);
        e.v = std::max(s.u, s.v);
        e.shared_users = s.shared_users;
        e.reusing_users = s.reusing_users;
        e.reuse_rate = static_cast<double>(s.reusing_users) / static_cast<double>(s.shared_users);
        e.positive = e.reuse_rate > tau_gt;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const ReuseEdge& a, const ReuseEdge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    return out;
}

void partition(Graph& g, int k, const std::vector<int>& sizes, uint64_t seed) {
    if (k < 1) throw std::invalid_argument("partition: K must be >= 1");
    std::vector<int> want = sizes;
    if (want.empty()) {
        // near-equal blocks: first n % K admins get one extra node
        const int base = g.num_nodes / k, extra = g.num_nodes % k;
        for (int i = 0; i < k; ++i) want.push_back(base + (i < extra ? 1 : 0));
    }
    if (static_cast<int>(want.size()) != k ||
        std::accumulate(want.begin(), want.end(), 0) != g.num_nodes)
        throw std::invalid_argument("partition: sizes must sum to the node count");

    std::vector<int> order(static_cast<size_t>(g.num_nodes));
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, "partition");
    for (int i = g.num_nodes - 1; i > 0; --i)
        std::swap(order[static_cast<size_t>(i)],
                  order[static_cast<size_t>(uniform_int(rng, 0, i))]);

    g.admin.assign(static_cast<size_t>(g.num_nodes), -1);
    int pos = 0;
    for (int a = 0; a < k; ++a)
        for (int c = 0; c < want[static_cast<size_t>(a)]; ++c)
            g.admin[static_cast<size_t>(order[static_cast<size_t>(pos++)])] = a;

    for (ReuseEdge& e : g.edges)
        e.cross_admin = g.admin[static_cast<size_t>(e.u)] != g.admin[static_cast<size_t>(e.v)];
    g.rebuild_adjacency();
}

SplitPlan make_split(const Graph& g, int valid_admin_a, int valid_admin_b) {
    if (valid_admin_a == valid_admin_b) throw std::invalid_argument("make_split: validation admins must differ");
    SplitPlan plan;
    plan.valid_admin_a = std::min(valid_admin_a, valid_admin_b);
    plan.valid_admin_b = std::max(valid_admin_a, valid_admin_b);
    int cross_total = 0;
    for (int i = 0; i < static_cast<int>(g.edges.size()); ++i) {
        const ReuseEdge& e = g.edges[static_cast<size_t>(i)];
        if (!e.cross_admin) {
            plan.train.push_back(i);
            continue;
        }
        ++cross_total;
        const int a = std::min(g.admin[static_cast<size_t>(e.u)], g.admin[static_cast<size_t>(e.v)]);
        const int b = std::max(g.admin[static_cast<size_t>(e.u)], g.admin[static_cast<size_t>(e.v)]);
        if (a == plan.valid_admin_a && b == plan.valid_admin_b)
            plan.valid.push_back(i);
        else
            plan.test.push_back(i);
    }
    if (cross_total > 0 && plan.valid.empty())
        throw std::invalid_argument("make_split: validation admin pair has no cross edges");
    return plan;
}

Subgraph extract_subgraph(const Graph& g, const std::vector<int>& edge_indices, int hops) {
    std::vector<char> seen(static_cast<size_t>(g.num_nodes), 0);
    std::deque<std::pair<int, int>> frontier;  // (node, depth)
    for (int ei : edge_indices) {
        const ReuseEdge& e = g.edges.at(static_cast<size_t>(ei));
        for (int n : {e.u, e.v}) {
            if (!seen[static_cast<size_t>(n)]) {
                seen[static_cast<size_t>(n)] = 1;
                frontier.emplace_back(n, 0);
            }
        }
    }
    while (!frontier.empty()) {
        auto [n, d] = frontier.front();
        frontier.pop_front();
        if (d >= hops) continue;
        for (int u : g.neighbors(n)) {
            if (!seen[static_cast<size_t>(u)]) {
                seen[static_cast<size_t>(u)] = 1;
                frontier.emplace_back(u, d + 1);
            }
        }
    }
    Subgraph sg;
    sg.hops = hops;
    sg.local_index.assign(static_cast<size_t>(g.num_nodes), -1);
    for (int n = 0; n < g.num_nodes; ++n)
        if (seen[static_cast<size_t>(n)]) {
            sg.local_index[static_cast<size_t>(n)] = static_cast<int>(sg.nodes.size());
            sg.nodes.push_back(n);
        }
    sg.adj.resize(sg.nodes.size());
    for (size_t i = 0; i < sg.nodes.size(); ++i)
        for (int u : g.neighbors(sg.nodes[i]))
            if (sg.local_index[static_cast<size_t>(u)] >= 0)
                sg.adj[i].push_back(sg.local_index[static_cast<size_t>(u)]);
    return sg;
}

Subgraph admin_subgraph(const Graph& g, int admin_id) {
    Subgraph sg;
    sg.hops = std::numeric_limits<int>::max();
    sg.local_index.assign(static_cast<size_t>(g.num_nodes), -1);
    for (int n = 0; n < g.num_nodes; ++n)
        if (g.admin[static_cast<size_t>(n)] == admin_id) {
            sg.local_index[static_cast<size_t>(n)] = static_cast<int>(sg.nodes.size());
            sg.nodes.push_back(n);
        }
    sg.adj.resize(sg.nodes.size());
    for (size_t i = 0; i < sg.nodes.size(); ++i)
        for (int u : g.neighbors(sg.nodes[i]))
            if (sg.local_index[static_cast<size_t>(u)] >= 0)
                sg.adj[i].push_back(sg.local_index[static_cast<size_t>(u)]);
    return sg;
}

void save_graph(const std::string& path, const Graph& g, const std::string& config_json) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open graph file for writing: " + path);
    nlohmann::json header{{"kind", "header"}, {"record", "password_reuse_graph"}, {"nodes", g.num_nodes}};
    if (!config_json.empty()) header["config"] = nlohmann::json::parse(config_json);
    os << header.dump() << '\n';
    for (int n = 0; n < g.num_nodes; ++n) {
        nlohmann::json j{{"kind", "node"}, {"id", n}};
        j["admin"] = g.admin.empty() ? -1 : g.admin[static_cast<size_t>(n)];
        os << j.dump() << '\n';
    }
    for (const ReuseEdge& e : g.edges) {
        nlohmann::json j{{"kind", "edge"},
                         {"u", e.u},
                         {"v", e.v},
                         {"shared", e.shared_users},
                         {"reusing", e.reusing_users}};
        os << j.dump() << '\n';
    }
    if (!os) throw std::runtime_error("graph file write failed: " + path);
}

Graph load_graph(const std::string& path, double tau_gt, int64_t min_shared) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open graph file: " + path);
    Graph g;
    std::vector<PairStats> stats;
    std::vector<std::pair<int, int>> node_admin;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& ex) {
            throw std::runtime_error("graph file parse error at line " + std::to_string(lineno));
        }
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "header") continue;
        if (kind == "node") {
            node_admin.emplace_back(j.at("id").get<int>(), j.value("admin", -1));
        } else if (kind == "edge") {
            PairStats s;
            s.u = j.at("u").get<int>();
            s.v = j.at("v").get<int>();
            s.shared_users = j.at("shared").get<int64_t>();
            s.reusing_users = j.at("reusing").get<int64_t>();
            stats.push_back(s);
        } else {
            throw std::runtime_error("unknown record kind at line " + std::to_string(lineno));
        }
    }
    std::sort(node_admin.begin(), node_admin.end());
    for (size_t i = 0; i < node_admin.size(); ++i)
        if (node_admin[i].first != static_cast<int>(i))
            throw std::runtime_error("graph file: node ids must be 0..n-1 without duplicates");
    g.num_nodes = static_cast<int>(node_admin.size());
    g.admin.resize(node_admin.size());
    for (size_t i = 0; i < node_admin.size(); ++i) g.admin[i] = node_admin[i].second;
    g.edges = label_edges(stats, tau_gt, min_shared);
    for (ReuseEdge& e : g.edges) {
        if (e.u >= g.num_nodes || e.v >= g.num_nodes)
            throw std::runtime_error("graph file: edge endpoint out of range");
        e.cross_admin = g.admin[static_cast<size_t>(e.u)] >= 0 &&
                        g.admin[static_cast<size_t>(e.u)] != g.admin[static_cast<size_t>(e.v)];
    }
    g.rebuild_adjacency();
    return g;
}

void save_split(const std::string& path, const SplitPlan& plan, const std::string& config_json) {
    nlohmann::json j;
    j["train"] = plan.train;
    j["valid"] = plan.valid;
    j["test"] = plan.test;
    j["valid_pair"] = {plan.valid_admin_a, plan.valid_admin_b};
    if (!config_json.empty()) j["config"] = nlohmann::json::parse(config_json);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open split file for writing: " + path);
    os << j.dump(2) << '\n';
}

SplitPlan load_split(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open split file: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    SplitPlan plan;
    plan.train = j.at("train").get<std::vector<int>>();
    plan.valid = j.at("valid").get<std::vector<int>>();
    plan.test = j.at("test").get<std::vector<int>>();
    plan.valid_admin_a = j.at("valid_pair")[0].get<int>();
    plan.valid_admin_b = j.at("valid_pair")[1].get<int>();
    return plan;
}

}  // namespace rr::graph
