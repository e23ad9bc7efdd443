#include "rr/predict.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rr/fl.hpp"

namespace rr::predict {

bool classify(double p_hat, double tau_pred) {
    if (!(tau_pred > 0.0 && tau_pred < 1.0)) throw std::invalid_argument("tau_pred must be in (0,1)");
    return p_hat >= tau_pred;  // boundary counts as positive
}

ClassificationMetrics classification_metrics(const std::vector<Prediction>& preds) {
    if (preds.empty()) throw std::invalid_argument("classification_metrics: no predictions");
    ClassificationMetrics m;
    for (const Prediction& p : preds) {
        if (p.decision && p.truth) ++m.tp;
        else if (p.decision && !p.truth) ++m.fp;
        else if (!p.decision && p.truth) ++m.fn;
        else ++m.tn;
    }
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

RankingMetrics ranking_metrics(const std::vector<Prediction>& preds, int k) {
    if (k < 1) throw std::invalid_argument("ranking_metrics: k must be >= 1");
    // group candidates per node; an edge is a candidate for both endpoints
    std::map<int, std::vector<const Prediction*>> per_node;
    for (const Prediction& p : preds) {
        per_node[p.u].push_back(&p);
        per_node[p.v].push_back(&p);
    }
    RankingMetrics out;
    out.k = k;
    double prec_sum = 0.0, ndcg_sum = 0.0;
    for (auto& [node, cands] : per_node) {
        if (static_cast<int>(cands.size()) < k) continue;
        std::sort(cands.begin(), cands.end(), [](const Prediction* a, const Prediction* b) {
            if (a->p_hat != b->p_hat) return a->p_hat > b->p_hat;
            return a->edge_index < b->edge_index;
        });
        int tp = 0;
        double dcg = 0.0;
        for (int i = 0; i < k; ++i) {
            if (cands[static_cast<size_t>(i)]->truth) ++tp;
            dcg += cands[static_cast<size_t>(i)]->reuse_rate / std::log2(static_cast<double>(i) + 2.0);
        }
        std::vector<double> rels;
        rels.reserve(cands.size());
        for (const Prediction* p : cands) rels.push_back(p->reuse_rate);
        std::sort(rels.begin(), rels.end(), std::greater<>());
        double idcg = 0.0;
        for (int i = 0; i < k; ++i) idcg += rels[static_cast<size_t>(i)] / std::log2(static_cast<double>(i) + 2.0);
        prec_sum += static_cast<double>(tp) / k;
        ndcg_sum += idcg > 0.0 ? dcg / idcg : 1.0;  // all-zero relevance: any order is ideal
        ++out.nodes_evaluated;
    }
    if (out.nodes_evaluated == 0)
        throw std::invalid_argument("ranking_metrics: k exceeds every node's candidate count");
    out.precision_at_k = prec_sum / out.nodes_evaluated;
    out.ndcg_at_k = ndcg_sum / out.nodes_evaluated;
    return out;
}

RiskScores risk_scores(const std::vector<Prediction>& preds) {
    RiskScores out;
    std::map<int, std::pair<double, int>> acc;
    double se = 0.0;
    for (const Prediction& p : preds) {
        acc[p.u].first += p.p_hat;
        acc[p.u].second += 1;
        acc[p.v].first += p.p_hat;
        acc[p.v].second += 1;
        se += (p.p_hat - p.reuse_rate) * (p.p_hat - p.reuse_rate);
    }
    for (const auto& [node, sc] : acc) out.node_risk[node] = sc.first / sc.second;
    out.mse = preds.empty() ? 0.0 : se / static_cast<double>(preds.size());
    return out;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void emit_report(const Report& report, const std::string& out_dir, const nlohmann::json& config) {
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);

    nlohmann::json j;
    j["config"] = config;
    j["metrics"] = {{"precision", report.classification.precision},
                    {"recall", report.classification.recall},
                    {"f1", report.classification.f1},
                    {"mse", report.risk.mse}};
    nlohmann::json rank = nlohmann::json::array();
    for (const RankingMetrics& r : report.ranking)
        rank.push_back({{"k", r.k},
                        {"precision_at_k", r.precision_at_k},
                        {"ndcg_at_k", r.ndcg_at_k},
                        {"nodes_evaluated", r.nodes_evaluated}});
    j["ranking"] = rank;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [node, risk] : report.risk.node_risk)
        nodes.push_back({{"node_id", node}, {"risk_score", risk}});
    j["nodes"] = nodes;
    nlohmann::json edges = nlohmann::json::array();
    for (const Prediction& p : report.predictions)
        edges.push_back({{"u", p.u},
                         {"v", p.v},
                         {"p_hat", p.p_hat},
                         {"decision", p.decision ? "positive" : "negative"},
                         {"truth", p.truth ? "positive" : "negative"},
                         {"reuse_rate", p.reuse_rate}});
    j["edges"] = edges;
    {
        std::ofstream os(dir / "report.json");
        if (!os) throw std::runtime_error("cannot write report to " + out_dir);
        os << j.dump(2) << '\n';
    }
    {
        std::ofstream os(dir / "edges.csv");
        os << "u,v,p_hat,decision,truth,reuse_rate\n";
        for (const Prediction& p : report.predictions)
            os << p.u << ',' << p.v << ',' << fmt(p.p_hat) << ',' << (p.decision ? 1 : 0) << ','
               << (p.truth ? 1 : 0) << ',' << fmt(p.reuse_rate) << '\n';
    }
    {
        std::ofstream os(dir / "nodes.csv");
        os << "node_id,risk_score\n";
        for (const auto& [node, risk] : report.risk.node_risk) os << node << ',' << fmt(risk) << '\n';
    }
    {
        std::ofstream os(dir / "ranking.csv");
        os << "k,precision_at_k,ndcg_at_k,nodes_evaluated\n";
        for (const RankingMetrics& r : report.ranking)
            os << r.k << ',' << fmt(r.precision_at_k) << ',' << fmt(r.ndcg_at_k) << ','
               << r.nodes_evaluated << '\n';
    }
}

}  // namespace rr::predict
