#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rr/features.hpp"
#include "rr/gnn.hpp"
#include "rr/graph.hpp"
#include "rr/optim.hpp"
#include "rr/params.hpp"

namespace rr::fl {

struct TrainConfig {
    int rounds = 200;       // T (max; early stopping may end sooner)
    int local_steps = 0;    // 0 = one full pass over the client's train edges per round
    int batch_size = 1024;
    double max_lr = 1e-3;
    double warmup_fraction = 0.1;
    int patience = 40;      // rounds without validation improvement
    double tau_pred = 0.5;
    int start_round = 0;    // resume offset into the schedule
    uint64_t seed = 1;
    bool weighted_avg = false;  // |E_k|-proportional averaging instead of a plain mean
    bool use_sgd = false;       // plain SGD instead of Adam for the local update
    double weight_decay = 0.0;  // decoupled L2 decay on the Adam path
    double pos_weight = 1.0;    // loss weight on positive edges
    int bytes_per_scalar = 8;   // b

    nlohmann::json to_json() const;
};

struct ClientState {
    int admin_id = 0;
    ParamStore local;                            // w_k
    std::map<std::string, nd::AdamState> adam;   // client-local, never averaged
    std::vector<int> train_edges;                // indices into the shared graph's edge list
    std::mt19937_64 rng;
};

struct CostLedger {
    uint64_t uploaded_bytes = 0;
    uint64_t downloaded_bytes = 0;
    uint64_t embedding_bytes = 0;  // inference-time node-embedding traffic
};

// Closed-form communication costs; overflow-checked.
uint64_t cost_train(uint64_t b, uint64_t w, uint64_t k, uint64_t t);
uint64_t cost_infer(uint64_t delta, uint64_t b, uint64_t d, uint64_t q);

// One local optimization step on a batch of the client's train edges.
// Returns the batch loss.
double local_step(ClientState& client, const graph::Graph& g,
                  const std::map<int, features::FeatureRecord>& feats,
                  const std::vector<int>& batch, double lr, const TrainConfig& tc,
                  const gnn::ModelConfig& mc);

// Unweighted elementwise mean of client parameter sets, summed in the order
// given (callers pass clients sorted by admin_id).
ParamStore fedavg(const std::vector<const ParamStore*>& client_params,
                  const std::vector<double>& weights = {});

struct RoundResult {
    std::vector<double> client_loss;
    double mean_loss = 0.0;
};

RoundResult run_round(ParamStore& global, std::vector<ClientState>& clients,
                      const graph::Graph& g, const std::map<int, features::FeatureRecord>& feats,
                      double lr, const TrainConfig& tc, const gnn::ModelConfig& mc,
                      CostLedger& ledger, bool aggregate = true);

struct Prediction {
    int edge_index = -1;
    int u = 0;
    int v = 0;
    double p_hat = 0.0;
    bool decision = false;
    bool truth = false;
    double reuse_rate = 0.0;
};

// Frozen-parameter scoring of an edge set: per-admin full forward pass on
// each local graph with running-stat batch norm, then the symmetrized edge
// head. Also reports the embedding bytes the cross-admin exchange costs.
std::vector<Prediction> score_edges(const ParamStore& params, const graph::Graph& g,
                                    const std::map<int, features::FeatureRecord>& feats,
                                    const std::vector<int>& edge_indices, double tau_pred,
                                    const gnn::ModelConfig& mc, CostLedger* ledger = nullptr,
                                    int delta = 2, int bytes_per_scalar = 8);

struct RoundLog {
    int round = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    std::vector<double> per_client_loss;
    double valid_f1 = -1.0;
    uint64_t cum_upload_bytes = 0;
    uint64_t cum_download_bytes = 0;
};

struct TrainResult {
    ParamStore best;
    ParamStore last;
    std::vector<RoundLog> log;
    int rounds_run = 0;
    int best_round = -1;
    double best_valid_f1 = -1.0;
    CostLedger ledger;
};

// Full federated loop: schedule-driven rounds, per-round validation F1 on
// the cross-admin validation edges, early stopping, cost accounting. With
// `federated = false` the single client's weights are used directly and no
// aggregation happens (the centralized trainer).
TrainResult train(const graph::Graph& g, const std::map<int, features::FeatureRecord>& feats,
                  const graph::SplitPlan& split, const TrainConfig& tc,
                  const gnn::ModelConfig& mc, bool federated = true,
                  const ParamStore* resume_from = nullptr);

void save_train_log(const std::string& path, const TrainResult& result,
                    const nlohmann::json& config);

}  // namespace rr::fl
