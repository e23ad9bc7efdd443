#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace rr::fl {
struct Prediction;
}

namespace rr::predict {

using fl::Prediction;

bool classify(double p_hat, double tau_pred);

struct ClassificationMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int tp = 0, fp = 0, tn = 0, fn = 0;
};

ClassificationMetrics classification_metrics(const std::vector<Prediction>& preds);

struct RankingMetrics {
    int k = 0;
    double precision_at_k = 0.0;
    double ndcg_at_k = 0.0;
    int nodes_evaluated = 0;
};

// Per-node ranking quality: candidates sorted by p_hat descending (ties by
// edge id ascending); precision@k over binary truth, nDCG@k with the
// ground-truth reuse rate as linear relevance gain; averaged over nodes
// with at least k candidates. Errors when no node has k candidates.
RankingMetrics ranking_metrics(const std::vector<Prediction>& preds, int k);

struct RiskScores {
    std::map<int, double> node_risk;  // mean p_hat over a node's evaluated edges
    double mse = 0.0;                 // edge-level MSE of p_hat vs. reuse rate
};

RiskScores risk_scores(const std::vector<Prediction>& preds);

struct Report {
    ClassificationMetrics classification;
    std::vector<RankingMetrics> ranking;
    RiskScores risk;
    std::vector<Prediction> predictions;
};

// Deterministic JSON + CSV renderings (report.json, edges.csv, nodes.csv,
// ranking.csv) under the given directory.
void emit_report(const Report& report, const std::string& out_dir, const nlohmann::json& config);

}  // namespace rr::predict
