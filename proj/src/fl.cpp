#include "rr/fl.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "rr/predict.hpp"

namespace rr::fl {

using nd::Tensor;

nlohmann::json TrainConfig::to_json() const {
    return {{"rounds", rounds},
            {"local_steps", local_steps},
            {"batch_size", batch_size},
            {"max_lr", max_lr},
            {"warmup_fraction", warmup_fraction},
            {"patience", patience},
            {"tau_pred", tau_pred},
            {"start_round", start_round},
            {"seed", seed},
            {"weighted_avg", weighted_avg},
            {"use_sgd", use_sgd},
            {"weight_decay", weight_decay},
            {"pos_weight", pos_weight},
            {"bytes_per_scalar", bytes_per_scalar}};
}

namespace {

uint64_t checked_mul(uint64_t a, uint64_t b) {
    if (a != 0 && b > std::numeric_limits<uint64_t>::max() / a)
        throw std::overflow_error("communication cost overflow");
    return a * b;
}

const features::FeatureRecord* feature_of(const std::map<int, features::FeatureRecord>& feats,
                                          int node) {
    auto it = feats.find(node);
    if (it == feats.end())
        throw std::runtime_error("missing feature record for node " + std::to_string(node));
    return &it->second;
}

std::vector<const features::FeatureRecord*> subgraph_features(
    const graph::Subgraph& sg, const std::map<int, features::FeatureRecord>& feats) {
    std::vector<const features::FeatureRecord*> out(sg.nodes.size());
    for (size_t i = 0; i < sg.nodes.size(); ++i) out[i] = feature_of(feats, sg.nodes[i]);
    return out;
}

}  // namespace

uint64_t cost_train(uint64_t b, uint64_t w, uint64_t k, uint64_t t) {
    return checked_mul(checked_mul(checked_mul(2, b), w), checked_mul(k, t));
}

uint64_t cost_infer(uint64_t delta, uint64_t b, uint64_t d, uint64_t q) {
    return checked_mul(checked_mul(delta, b), checked_mul(d, q));
}

double local_step(ClientState& client, const graph::Graph& g,
                  const std::map<int, features::FeatureRecord>& feats,
                  const std::vector<int>& batch, double lr, const TrainConfig& tc,
                  const gnn::ModelConfig& mc) {
    if (batch.empty()) throw std::invalid_argument("local_step: empty batch");
    nd::Tape tape;
    gnn::ParamBind pb{tape, client.local, {}};
    graph::Subgraph sg = graph::extract_subgraph(g, batch, mc.layers);
    // Mask the supervision targets out of the message-passing adjacency so the
    // model cannot read an edge's own presence; evaluation-time edges are
    // never in the adjacency either.
    for (int ei : batch) {
        const graph::ReuseEdge& e = g.edges.at(static_cast<size_t>(ei));
        const int lu = sg.index_of(e.u), lv = sg.index_of(e.v);
        auto drop = [&sg](int from, int to) {
            auto& n = sg.adj[static_cast<size_t>(from)];
            n.erase(std::remove(n.begin(), n.end(), to), n.end());
        };
        drop(lu, lv);
        drop(lv, lu);
    }
    auto sg_feats = subgraph_features(sg, feats);
    gnn::BnMode bn{true, true};
    std::vector<nd::Tape::Id> reps = gnn::node_representations(pb, sg, sg_feats, mc, bn);

    // Positive-class reweighted mean cross-entropy (pos_weight 1 = plain mean).
    std::vector<nd::Tape::Id> losses;
    losses.reserve(batch.size());
    double weight_total = 0.0;
    for (int ei : batch) {
        const graph::ReuseEdge& e = g.edges.at(static_cast<size_t>(ei));
        nd::Tape::Id p = gnn::edge_probability(pb, reps[static_cast<size_t>(sg.index_of(e.u))],
                                               reps[static_cast<size_t>(sg.index_of(e.v))], mc);
        nd::Tape::Id l = tape.bce(p, e.positive ? 1.0 : 0.0);
        const double w = e.positive ? tc.pos_weight : 1.0;
        if (w != 1.0) l = tape.scale(l, w);
        losses.push_back(l);
        weight_total += w;
    }
    nd::Tape::Id loss = tape.mean(losses);
    if (weight_total != static_cast<double>(batch.size()))
        loss = tape.scale(loss, static_cast<double>(batch.size()) / weight_total);
    const double loss_value = tape.val(loss).data[0];
    tape.backward(loss);

    std::map<std::string, Tensor> grads;
    pb.collect_grads(grads);
    for (auto& [name, grad] : grads) {
        if (client.local.frozen.count(name)) continue;
        Tensor& param = client.local.at(name);
        if (tc.use_sgd)
            nd::sgd_step(param, grad, lr);
        else
            nd::adam_step(param, grad, client.adam[name], lr, tc.weight_decay);
    }
    return loss_value;
}

ParamStore fedavg(const std::vector<const ParamStore*>& client_params,
                  const std::vector<double>& weights) {
    if (client_params.empty()) throw std::invalid_argument("fedavg: no clients");
    const ParamStore& first = *client_params.front();
    for (const ParamStore* ps : client_params)
        if (!ps->compatible_with(first))
            throw std::invalid_argument("fedavg: incompatible parameter collections");
    std::vector<double> w = weights;
    if (w.empty()) w.assign(client_params.size(), 1.0 / static_cast<double>(client_params.size()));
    if (w.size() != client_params.size()) throw std::invalid_argument("fedavg: weight count mismatch");

    ParamStore out;
    out.frozen = first.frozen;
    for (const auto& [name, t0] : first.tensors) {
        Tensor acc = Tensor::zeros(t0.shape);
        for (size_t c = 0; c < client_params.size(); ++c) {
            const Tensor& tc = client_params[c]->at(name);
            for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += w[c] * tc.data[i];
        }
        out.tensors.emplace(name, std::move(acc));
    }
    return out;
}

RoundResult run_round(ParamStore& global, std::vector<ClientState>& clients,
                      const graph::Graph& g, const std::map<int, features::FeatureRecord>& feats,
                      double lr, const TrainConfig& tc, const gnn::ModelConfig& mc,
                      CostLedger& ledger, bool aggregate) {
    RoundResult rr;
    const uint64_t model_bytes =
        checked_mul(static_cast<uint64_t>(tc.bytes_per_scalar), static_cast<uint64_t>(global.scalar_count()));
    for (ClientState& client : clients) {
        // download the current global weights
        client.local = global;
        ledger.downloaded_bytes += model_bytes;

        std::vector<int> order = client.train_edges;
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)],
                      order[static_cast<size_t>(uniform_int(client.rng, 0, i))]);

        const int bs = std::max(1, tc.batch_size);
        const int epoch_batches =
            static_cast<int>((order.size() + static_cast<size_t>(bs) - 1) / static_cast<size_t>(bs));
        const int steps = tc.local_steps > 0 ? tc.local_steps : epoch_batches;

        double loss_sum = 0.0;
        for (int s = 0; s < steps; ++s) {
            const int b0 = (s % epoch_batches) * bs;
            const int b1 = std::min<int>(b0 + bs, static_cast<int>(order.size()));
            std::vector<int> batch(order.begin() + b0, order.begin() + b1);
            loss_sum += local_step(client, g, feats, batch, lr, tc, mc);
        }
        rr.client_loss.push_back(loss_sum / steps);

        // upload the updated local weights
        ledger.uploaded_bytes += model_bytes;
    }
    for (double l : rr.client_loss) rr.mean_loss += l;
    rr.mean_loss /= static_cast<double>(rr.client_loss.size());

    if (aggregate) {
        std::vector<const ParamStore*> locals;
        std::vector<double> weights;
        double total_edges = 0.0;
        for (const ClientState& c : clients) {
            locals.push_back(&c.local);
            total_edges += static_cast<double>(c.train_edges.size());
        }
        if (tc.weighted_avg)
            for (const ClientState& c : clients)
                weights.push_back(static_cast<double>(c.train_edges.size()) / total_edges);
        global = fedavg(locals, weights);
    } else {
        global = clients.front().local;
    }
    return rr;
}

std::vector<Prediction> score_edges(const ParamStore& params, const graph::Graph& g,
                                    const std::map<int, features::FeatureRecord>& feats,
                                    const std::vector<int>& edge_indices, double tau_pred,
                                    const gnn::ModelConfig& mc, CostLedger* ledger, int delta,
                                    int bytes_per_scalar) {
    if (!(tau_pred > 0.0 && tau_pred < 1.0)) throw std::invalid_argument("tau_pred must be in (0,1)");
    // which admins are touched
    std::set<int> admins;
    for (int ei : edge_indices) {
        const graph::ReuseEdge& e = g.edges.at(static_cast<size_t>(ei));
        admins.insert(g.admin.at(static_cast<size_t>(e.u)));
        admins.insert(g.admin.at(static_cast<size_t>(e.v)));
    }
    // per-admin frozen forward over the full local graph
    std::map<int, Tensor> embedding;  // node -> fused representation values
    ParamStore frozen = params;
    for (int a : admins) {
        graph::Subgraph sg = graph::admin_subgraph(g, a);
        if (sg.nodes.empty()) continue;
        nd::Tape tape;
        gnn::ParamBind pb{tape, frozen, {}};
        auto sg_feats = subgraph_features(sg, feats);
        gnn::BnMode bn{false, false};
        std::vector<nd::Tape::Id> reps = gnn::node_representations(pb, sg, sg_feats, mc, bn);
        for (size_t i = 0; i < sg.nodes.size(); ++i) embedding[sg.nodes[i]] = tape.val(reps[i]);
    }

    std::vector<Prediction> out;
    out.reserve(edge_indices.size());
    uint64_t cross_count = 0;
    for (int ei : edge_indices) {
        const graph::ReuseEdge& e = g.edges.at(static_cast<size_t>(ei));
        nd::Tape tape;
        gnn::ParamBind pb{tape, frozen, {}};
        nd::Tape::Id hu = tape.constant(embedding.at(e.u));
        nd::Tape::Id hv = tape.constant(embedding.at(e.v));
        nd::Tape::Id p = gnn::edge_probability(pb, hu, hv, mc);
        Prediction pr;
        pr.edge_index = ei;
        pr.u = e.u;
        pr.v = e.v;
        pr.p_hat = tape.val(p).data[0];
        pr.decision = pr.p_hat >= tau_pred;
        pr.truth = e.positive;
        pr.reuse_rate = e.reuse_rate;
        out.push_back(pr);
        if (e.cross_admin) ++cross_count;
    }
    if (ledger)
        ledger->embedding_bytes += cost_infer(static_cast<uint64_t>(delta),
                                              static_cast<uint64_t>(bytes_per_scalar),
                                              static_cast<uint64_t>(mc.hidden), cross_count);
    return out;
}

TrainResult train(const graph::Graph& g, const std::map<int, features::FeatureRecord>& feats,
                  const graph::SplitPlan& split, const TrainConfig& tc,
                  const gnn::ModelConfig& mc, bool federated, const ParamStore* resume_from) {
    if (tc.rounds < 0) throw std::invalid_argument("train: rounds must be >= 0");
    if (tc.start_round < 0 || tc.start_round > tc.rounds)
        throw std::invalid_argument("train: start_round must be in [0, rounds]");

    // clients ordered by admin id
    std::set<int> admin_set;
    for (int a : g.admin) {
        if (a < 0) throw std::invalid_argument("train: graph is not partitioned");
        admin_set.insert(a);
    }
    std::vector<ClientState> clients;
    for (int a : admin_set) {
        ClientState c;
        c.admin_id = a;
        c.rng = make_rng(tc.seed, "client:" + std::to_string(a));
        clients.push_back(std::move(c));
    }
    std::map<int, size_t> admin_pos;
    for (size_t i = 0; i < clients.size(); ++i) admin_pos[clients[i].admin_id] = i;
    for (int ei : split.train) {
        const graph::ReuseEdge& e = g.edges.at(static_cast<size_t>(ei));
        if (e.cross_admin) throw std::invalid_argument("train: cross-admin edge in the train split");
        clients[admin_pos.at(g.admin.at(static_cast<size_t>(e.u)))].train_edges.push_back(ei);
    }
    for (auto& c : clients)
        if (c.train_edges.empty())
            throw std::runtime_error("train: client " + std::to_string(c.admin_id) +
                                     " has no local train edges");

    TrainResult result;
    ParamStore global = resume_from ? *resume_from : gnn::init_params(mc, tc.seed);
    if (resume_from && !global.compatible_with(gnn::init_params(mc, tc.seed)))
        throw std::invalid_argument("train: resume checkpoint is incompatible with the model config");

    nd::OneCycleSchedule sched{tc.max_lr, std::max(1, tc.rounds), tc.warmup_fraction};
    int rounds_since_best = 0;
    result.best = global;
    result.last = global;

    for (int t = tc.start_round; t < tc.rounds; ++t) {
        const double lr = sched.lr(t);
        RoundResult rr = run_round(global, clients, g, feats, lr, tc, mc, result.ledger, federated);

        RoundLog log;
        log.round = t;
        log.lr = lr;
        log.mean_loss = rr.mean_loss;
        log.per_client_loss = rr.client_loss;
        log.cum_upload_bytes = result.ledger.uploaded_bytes;
        log.cum_download_bytes = result.ledger.downloaded_bytes;

        if (!split.valid.empty()) {
            auto preds = score_edges(global, g, feats, split.valid, tc.tau_pred, mc);
            log.valid_f1 = predict::classification_metrics(preds).f1;
        }
        result.log.push_back(log);
        result.rounds_run = t + 1;
        result.last = global;

        if (!split.valid.empty()) {
            if (log.valid_f1 > result.best_valid_f1) {
                result.best_valid_f1 = log.valid_f1;
                result.best = global;
                result.best_round = t;
                rounds_since_best = 0;
            } else {
                ++rounds_since_best;
                if (rounds_since_best > tc.patience) break;
            }
        } else {
            result.best = global;
            result.best_round = t;
        }
    }
    if (split.valid.empty()) result.best = result.last;
    return result;
}

void save_train_log(const std::string& path, const TrainResult& result,
                    const nlohmann::json& config) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open training log for writing: " + path);
    os << nlohmann::json{{"kind", "header"}, {"config", config}}.dump() << '\n';
    for (const RoundLog& l : result.log) {
        nlohmann::json j{{"round", l.round},
                         {"lr", l.lr},
                         {"mean_loss", l.mean_loss},
                         {"per_client_loss", l.per_client_loss},
                         {"valid_f1", l.valid_f1},
                         {"cum_upload_bytes", l.cum_upload_bytes},
                         {"cum_download_bytes", l.cum_download_bytes}};
        os << j.dump() << '\n';
    }
}

}  // namespace rr::fl
