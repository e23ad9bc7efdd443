// Operator CLI for the password-reuse risk pipeline: generate/ingest data,
// partition into administrator domains, train (federated or centralized),
// evaluate, rank, report, and account communication costs.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rr/checkpoint.hpp"
#include "rr/features.hpp"
#include "rr/fl.hpp"
#include "rr/gnn.hpp"
#include "rr/graph.hpp"
#include "rr/predict.hpp"
#include "rr/synth.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kRuntimeError = 4;

// One flat option bag shared by every subcommand; each subcommand registers
// only the flags it uses. Precedence: CLI flag > --config file > defaults.
struct Opts {
    // paths
    std::string config_path;
    std::string graph_path;
    std::string snapshot_path;
    std::string split_path;
    std::string checkpoint_path;
    std::string resume_path;
    std::string log_path;
    std::string in_path;
    std::string out_path;

    // graph labeling / partitioning
    double tau_gt = 0.5;
    double tau_pred = 0.5;
    int64_t min_shared = 30;
    int clients = 5;
    uint64_t seed = 1;
    std::vector<int> valid_admins;

    // training
    int rounds = 200;
    int local_steps = 0;
    int batch = 1024;
    double max_lr = 1e-3;
    double warmup = 0.1;
    int patience = 40;
    bool weighted_avg = false;
    bool use_sgd = false;
    double weight_decay = 0.0;
    double pos_weight = 1.0;
    bool centralized = false;
    int bytes_per_scalar = 8;

    // model
    int dim = 256;
    int layers = 2;
    int cat_dim = 256;
    int url_hidden = 256;
    int url_char_dim = 32;
    bool mean_pool = false;
    bool no_modality_attn = false;
    std::string modalities;  // comma-separated subset, empty = all

    // generator
    int sites = 1000;
    double affinity = 0.03;
    double gap_penalty = 0.3;
    double weakness_bonus = 1.0;
    double base_reuse = 0.03;
    double noise = 0.02;
    int users_min = 60;
    int users_max = 200;
    int partners = 12;

    // evaluation / cost
    std::string eval_set = "test";  // train | valid | test
    std::string ks = "1,3,5,10";
    int k = 5;
    bool tune_threshold = false;
    int delta = 2;
    uint64_t queries = 0;
    int64_t param_count = 0;  // cost: explicit |w| instead of a checkpoint

    std::string clients_list = "2,5,10";
};

void apply_config_file(Opts& o, const nlohmann::json& j) {
    o.graph_path = j.value("graph", o.graph_path);
    o.snapshot_path = j.value("snapshot", o.snapshot_path);
    o.split_path = j.value("split", o.split_path);
    o.checkpoint_path = j.value("checkpoint", o.checkpoint_path);
    o.log_path = j.value("log", o.log_path);
    o.out_path = j.value("out", o.out_path);
    o.tau_gt = j.value("tau_gt", o.tau_gt);
    o.tau_pred = j.value("tau_pred", o.tau_pred);
    o.min_shared = j.value("min_shared", o.min_shared);
    o.clients = j.value("clients", o.clients);
    o.seed = j.value("seed", o.seed);
    o.rounds = j.value("rounds", o.rounds);
    o.local_steps = j.value("local_steps", o.local_steps);
    o.batch = j.value("batch", o.batch);
    o.max_lr = j.value("max_lr", o.max_lr);
    o.warmup = j.value("warmup", o.warmup);
    o.patience = j.value("patience", o.patience);
    o.weighted_avg = j.value("weighted_avg", o.weighted_avg);
    o.use_sgd = j.value("use_sgd", o.use_sgd);
    o.weight_decay = j.value("weight_decay", o.weight_decay);
    o.pos_weight = j.value("pos_weight", o.pos_weight);
    o.centralized = j.value("centralized", o.centralized);
    o.bytes_per_scalar = j.value("bytes_per_scalar", o.bytes_per_scalar);
    o.dim = j.value("dim", o.dim);
    o.layers = j.value("layers", o.layers);
    o.cat_dim = j.value("cat_dim", o.cat_dim);
    o.url_hidden = j.value("url_hidden", o.url_hidden);
    o.url_char_dim = j.value("url_char_dim", o.url_char_dim);
    o.mean_pool = j.value("mean_pool", o.mean_pool);
    o.no_modality_attn = j.value("no_modality_attn", o.no_modality_attn);
    o.modalities = j.value("modalities", o.modalities);
    o.sites = j.value("sites", o.sites);
    o.affinity = j.value("affinity", o.affinity);
    o.gap_penalty = j.value("gap_penalty", o.gap_penalty);
    o.weakness_bonus = j.value("weakness_bonus", o.weakness_bonus);
    o.base_reuse = j.value("base_reuse", o.base_reuse);
    o.noise = j.value("noise", o.noise);
    o.users_min = j.value("users_min", o.users_min);
    o.users_max = j.value("users_max", o.users_max);
    o.partners = j.value("partners", o.partners);
    o.eval_set = j.value("eval_set", o.eval_set);
    o.ks = j.value("ks", o.ks);
    o.k = j.value("k", o.k);
    o.tune_threshold = j.value("tune_threshold", o.tune_threshold);
    o.delta = j.value("delta", o.delta);
    o.clients_list = j.value("clients_list", o.clients_list);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw CLI::ValidationError("empty integer list: " + s);
    return out;
}

rr::gnn::ModelConfig model_config(const Opts& o) {
    rr::gnn::ModelConfig mc;
    mc.hidden = o.dim;
    mc.layers = o.layers;
    mc.cat_dim = o.cat_dim;
    mc.url_hidden = o.url_hidden;
    mc.url_char_dim = o.url_char_dim;
    mc.mean_pool = o.mean_pool;
    mc.concat_features = o.no_modality_attn;
    if (!o.modalities.empty()) {
        mc.modalities.clear();
        std::stringstream ss(o.modalities);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) mc.modalities.push_back(rr::gnn::modality_from_name(tok));
        if (mc.modalities.empty()) throw CLI::ValidationError("empty modality list");
    }
    return mc;
}

rr::fl::TrainConfig train_config(const Opts& o) {
    rr::fl::TrainConfig tc;
    tc.rounds = o.rounds;
    tc.local_steps = o.local_steps;
    tc.batch_size = o.batch;
    tc.max_lr = o.max_lr;
    tc.warmup_fraction = o.warmup;
    tc.patience = o.patience;
    tc.tau_pred = o.tau_pred;
    tc.seed = o.seed;
    tc.weighted_avg = o.weighted_avg;
    tc.use_sgd = o.use_sgd;
    tc.weight_decay = o.weight_decay;
    tc.pos_weight = o.pos_weight;
    tc.bytes_per_scalar = o.bytes_per_scalar;
    return tc;
}

// Effective configuration, embedded verbatim into every output file.
nlohmann::json run_config(const std::string& command, const Opts& o) {
    nlohmann::json j;
    j["command"] = command;
    j["graph"] = o.graph_path;
    j["snapshot"] = o.snapshot_path;
    j["split"] = o.split_path;
    j["checkpoint"] = o.checkpoint_path;
    j["tau_gt"] = o.tau_gt;
    j["tau_pred"] = o.tau_pred;
    j["min_shared"] = o.min_shared;
    j["clients"] = o.clients;
    j["seed"] = o.seed;
    j["train"] = train_config(o).to_json();
    j["model"] = model_config(o).to_json();
    j["centralized"] = o.centralized;
    return j;
}

rr::features::SynthConfig synth_config(const Opts& o) {
    rr::features::SynthConfig sc;
    sc.n_sites = o.sites;
    sc.k = o.clients;
    sc.seed = o.seed;
    sc.category_affinity = o.affinity;
    sc.security_gap_penalty = o.gap_penalty;
    sc.security_weakness_bonus = o.weakness_bonus;
    sc.base_reuse = o.base_reuse;
    sc.noise = o.noise;
    sc.users_min = o.users_min;
    sc.users_max = o.users_max;
    sc.partners_per_site = o.partners;
    return sc;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_generate(const Opts& o) {
    rr::features::synth_generate_files(synth_config(o), o.tau_gt, o.min_shared, o.graph_path,
                                       o.snapshot_path);
    std::cout << "wrote " << o.graph_path << " and " << o.snapshot_path << "\n";
    return kOk;
}

int cmd_ingest(const Opts& o) {
    auto records = rr::features::ingest_snapshot(o.in_path);
    rr::features::save_snapshot(o.out_path, records, run_config("ingest", o).dump());
    std::cout << "ingested " << records.size() << " sites -> " << o.out_path << "\n";
    return kOk;
}

// First cross-admin edge in canonical order decides the default validation
// admin pair.
std::pair<int, int> default_valid_pair(const rr::graph::Graph& g) {
    for (const auto& e : g.edges)
        if (e.cross_admin) {
            int a = g.admin[static_cast<size_t>(e.u)];
            int b = g.admin[static_cast<size_t>(e.v)];
            return {std::min(a, b), std::max(a, b)};
        }
    return {-1, -1};
}

int cmd_partition(const Opts& o) {
    rr::graph::Graph g = rr::graph::load_graph(o.graph_path, o.tau_gt, o.min_shared);
    rr::graph::partition(g, o.clients, {}, o.seed);
    int va = -1, vb = -1;
    if (o.valid_admins.size() == 2) {
        va = o.valid_admins[0];
        vb = o.valid_admins[1];
    } else if (!o.valid_admins.empty()) {
        throw CLI::ValidationError("--valid-admins needs exactly two ids");
    } else {
        std::tie(va, vb) = default_valid_pair(g);
    }
    rr::graph::SplitPlan plan = rr::graph::make_split(g, va, vb);
    const std::string cfg = run_config("partition", o).dump();
    rr::graph::save_graph(o.out_path, g, cfg);
    rr::graph::save_split(o.split_path, plan, cfg);
    std::cout << "partitioned " << g.num_nodes << " nodes into " << o.clients
              << " domains; train/valid/test edges = " << plan.train.size() << "/"
              << plan.valid.size() << "/" << plan.test.size() << "\n";
    return kOk;
}

void write_loss_csv(const std::string& path, const rr::fl::TrainResult& r) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "round,lr,mean_loss,valid_f1\n";
    os.precision(17);
    for (const auto& l : r.log)
        os << l.round << ',' << l.lr << ',' << l.mean_loss << ',' << l.valid_f1 << '\n';
}

int cmd_train(const Opts& o) {
    rr::graph::Graph g = rr::graph::load_graph(o.graph_path, o.tau_gt, o.min_shared);
    auto feats = rr::features::ingest_snapshot(o.snapshot_path);
    rr::graph::SplitPlan split = rr::graph::load_split(o.split_path);
    rr::fl::TrainConfig tc = train_config(o);
    rr::gnn::ModelConfig mc = model_config(o);

    std::optional<rr::Checkpoint> resume;
    if (!o.resume_path.empty()) {
        resume = rr::load_checkpoint(o.resume_path);
        tc.start_round = resume->meta.value("rounds_run", 0);
    }
    rr::fl::TrainResult result = rr::fl::train(g, feats, split, tc, mc, !o.centralized,
                                               resume ? &resume->params : nullptr);

    nlohmann::json cfg = run_config("train", o);
    nlohmann::json meta = cfg;
    meta["rounds_run"] = result.rounds_run;
    meta["best_round"] = result.best_round;
    meta["best_valid_f1"] = result.best_valid_f1;
    meta["uploaded_bytes"] = result.ledger.uploaded_bytes;
    meta["downloaded_bytes"] = result.ledger.downloaded_bytes;
    meta["param_scalars"] = result.best.scalar_count();
    rr::save_checkpoint(o.checkpoint_path, result.best, meta);
    if (!o.log_path.empty()) {
        rr::fl::save_train_log(o.log_path, result, cfg);
        write_loss_csv(o.log_path + ".csv", result);
    }
    std::cout << "trained " << result.rounds_run << " rounds; best round " << result.best_round
              << " valid F1 " << result.best_valid_f1 << "; uploaded "
              << result.ledger.uploaded_bytes << " B, downloaded "
              << result.ledger.downloaded_bytes << " B\n";
    return kOk;
}

struct EvalBundle {
    rr::graph::Graph g;
    std::map<int, rr::features::FeatureRecord> feats;
    rr::graph::SplitPlan split;
    rr::Checkpoint ckpt;
    rr::gnn::ModelConfig mc;
};

EvalBundle load_eval_inputs(const Opts& o) {
    EvalBundle b{rr::graph::load_graph(o.graph_path, o.tau_gt, o.min_shared),
                 rr::features::ingest_snapshot(o.snapshot_path),
                 rr::graph::load_split(o.split_path), rr::load_checkpoint(o.checkpoint_path), {}};
    if (!b.ckpt.meta.contains("model"))
        throw std::runtime_error("checkpoint lacks a model config block");
    b.mc = rr::gnn::ModelConfig::from_json(b.ckpt.meta["model"]);
    return b;
}

const std::vector<int>& pick_edge_set(const rr::graph::SplitPlan& split, const std::string& name) {
    if (name == "train") return split.train;
    if (name == "valid") return split.valid;
    if (name == "test") return split.test;
    throw CLI::ValidationError("--set must be train, valid, or test");
}

double tuned_threshold(const EvalBundle& b, const Opts& o) {
    auto preds = rr::fl::score_edges(b.ckpt.params, b.g, b.feats, b.split.valid, 0.5, b.mc);
    double best_tau = o.tau_pred, best_f1 = -1.0;
    for (int i = 1; i < 100; ++i) {
        const double tau = i / 100.0;
        for (auto& p : preds) p.decision = rr::predict::classify(p.p_hat, tau);
        double f1 = rr::predict::classification_metrics(preds).f1;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_tau = tau;
        }
    }
    return best_tau;
}

int evaluate_impl(const Opts& o, bool full_report) {
    EvalBundle b = load_eval_inputs(o);
    const std::vector<int>& edges = pick_edge_set(b.split, o.eval_set);
    if (edges.empty()) throw std::runtime_error("selected edge set '" + o.eval_set + "' is empty");

    double tau = o.tau_pred;
    if (o.tune_threshold) tau = tuned_threshold(b, o);

    rr::fl::CostLedger ledger;
    rr::predict::Report report;
    report.predictions = rr::fl::score_edges(b.ckpt.params, b.g, b.feats, edges, tau, b.mc,
                                             &ledger, o.delta, o.bytes_per_scalar);
    report.classification = rr::predict::classification_metrics(report.predictions);
    report.risk = rr::predict::risk_scores(report.predictions);
    for (int k : parse_int_list(o.ks)) {
        try {
            report.ranking.push_back(rr::predict::ranking_metrics(report.predictions, k));
        } catch (const std::invalid_argument&) {
            if (full_report) throw;  // explicit ks must be satisfiable in report mode
        }
    }

    nlohmann::json cfg = run_config(full_report ? "report" : "evaluate", o);
    cfg["tau_pred_effective"] = tau;
    cfg["embedding_bytes"] = ledger.embedding_bytes;
    if (!o.out_path.empty()) rr::predict::emit_report(report, o.out_path, cfg);

    nlohmann::json summary{{"set", o.eval_set},
                           {"edges", report.predictions.size()},
                           {"tau_pred", tau},
                           {"precision", report.classification.precision},
                           {"recall", report.classification.recall},
                           {"f1", report.classification.f1},
                           {"mse", report.risk.mse},
                           {"embedding_bytes", ledger.embedding_bytes}};
    std::cout << summary.dump(2) << "\n";
    return kOk;
}

int cmd_rank(const Opts& o) {
    EvalBundle b = load_eval_inputs(o);
    const std::vector<int>& edges = pick_edge_set(b.split, o.eval_set);
    auto preds = rr::fl::score_edges(b.ckpt.params, b.g, b.feats, edges, o.tau_pred, b.mc);
    rr::predict::RankingMetrics rm = rr::predict::ranking_metrics(preds, o.k);
    nlohmann::json out{{"k", rm.k},
                       {"precision_at_k", rm.precision_at_k},
                       {"ndcg_at_k", rm.ndcg_at_k},
                       {"nodes_evaluated", rm.nodes_evaluated}};
    std::cout << out.dump(2) << "\n";
    if (!o.out_path.empty()) {
        rr::predict::Report report;
        report.predictions = std::move(preds);
        report.classification = rr::predict::classification_metrics(report.predictions);
        report.risk = rr::predict::risk_scores(report.predictions);
        report.ranking.push_back(rm);
        rr::predict::emit_report(report, o.out_path, run_config("rank", o));
    }
    return kOk;
}

int cmd_cost(const Opts& o) {
    uint64_t w = static_cast<uint64_t>(o.param_count);
    uint64_t d = static_cast<uint64_t>(o.dim);
    nlohmann::json out;
    if (!o.checkpoint_path.empty()) {
        rr::Checkpoint ckpt = rr::load_checkpoint(o.checkpoint_path);
        w = static_cast<uint64_t>(ckpt.params.scalar_count());
        if (ckpt.meta.contains("model"))
            d = static_cast<uint64_t>(
                rr::gnn::ModelConfig::from_json(ckpt.meta["model"]).hidden);
        out["checkpoint"] = o.checkpoint_path;
    }
    if (w == 0) throw CLI::ValidationError("cost needs --params or --checkpoint");
    const uint64_t b = static_cast<uint64_t>(o.bytes_per_scalar);
    const uint64_t train_bytes = rr::fl::cost_train(b, w, static_cast<uint64_t>(o.clients),
                                                    static_cast<uint64_t>(o.rounds));
    const uint64_t infer_bytes =
        rr::fl::cost_infer(static_cast<uint64_t>(o.delta), b, d, o.queries);
    out["config"] = run_config("cost", o);
    out["param_scalars"] = w;
    out["train_bytes"] = train_bytes;
    out["infer_bytes"] = infer_bytes;
    out["total_bytes"] = train_bytes + infer_bytes;
    std::cout << out.dump(2) << "\n";
    return kOk;
}

// Federation-size study. The test set is fixed across K values: it is the
// cross-admin test split under the largest K, and those edges are withheld
// (marked cross-admin) from every smaller federation before training.
int cmd_sweep(const Opts& o) {
    std::vector<int> k_list = parse_int_list(o.clients_list);
    std::sort(k_list.begin(), k_list.end());
    const int k_max = k_list.back();

    auto feats = rr::features::ingest_snapshot(o.snapshot_path);

    rr::graph::Graph g_max = rr::graph::load_graph(o.graph_path, o.tau_gt, o.min_shared);
    rr::graph::partition(g_max, k_max, {}, o.seed);
    auto [va, vb] = default_valid_pair(g_max);
    rr::graph::SplitPlan split_max = rr::graph::make_split(g_max, va, vb);
    std::set<int> fixed_test(split_max.test.begin(), split_max.test.end());

    nlohmann::json rows = nlohmann::json::array();
    for (int k : k_list) {
        rr::graph::Graph g = rr::graph::load_graph(o.graph_path, o.tau_gt, o.min_shared);
        rr::graph::partition(g, k, {}, o.seed);
        for (int ei : fixed_test) g.edges[static_cast<size_t>(ei)].cross_admin = true;
        g.rebuild_adjacency();

        rr::graph::SplitPlan plan;
        if (k == 1) {
            for (size_t i = 0; i < g.edges.size(); ++i)
                if (!fixed_test.count(static_cast<int>(i)))
                    plan.train.push_back(static_cast<int>(i));
        } else {
            auto [a, b] = default_valid_pair(g);
            rr::graph::SplitPlan raw = rr::graph::make_split(g, a, b);
            plan.valid_admin_a = raw.valid_admin_a;
            plan.valid_admin_b = raw.valid_admin_b;
            for (int ei : raw.train)
                if (!fixed_test.count(ei)) plan.train.push_back(ei);
            for (int ei : raw.valid)
                if (!fixed_test.count(ei)) plan.valid.push_back(ei);
        }
        plan.test.assign(fixed_test.begin(), fixed_test.end());

        rr::fl::TrainConfig tc = train_config(o);
        rr::gnn::ModelConfig mc = model_config(o);
        rr::fl::TrainResult r = rr::fl::train(g, feats, plan, tc, mc, k > 1);
        auto preds = rr::fl::score_edges(r.best, g, feats, plan.test, tc.tau_pred, mc);
        auto cm = rr::predict::classification_metrics(preds);
        auto rs = rr::predict::risk_scores(preds);
        rows.push_back({{"clients", k},
                        {"rounds_run", r.rounds_run},
                        {"best_valid_f1", r.best_valid_f1},
                        {"test_f1", cm.f1},
                        {"test_precision", cm.precision},
                        {"test_recall", cm.recall},
                        {"test_mse", rs.mse},
                        {"uploaded_bytes", r.ledger.uploaded_bytes},
                        {"downloaded_bytes", r.ledger.downloaded_bytes}});
        std::cout << "K=" << k << " test F1 " << cm.f1 << " MSE " << rs.mse << "\n";
    }

    if (!o.out_path.empty()) {
        std::filesystem::create_directories(o.out_path);
        nlohmann::json j{{"config", run_config("sweep", o)}, {"rows", rows}};
        std::ofstream os(std::filesystem::path(o.out_path) / "sweep.json");
        os << j.dump(2) << "\n";
        std::ofstream csv(std::filesystem::path(o.out_path) / "sweep.csv");
        csv << "clients,rounds_run,best_valid_f1,test_f1,test_precision,test_recall,test_mse\n";
        csv.precision(17);
        for (const auto& r : rows)
            csv << r["clients"].get<int>() << ',' << r["rounds_run"].get<int>() << ','
                << r["best_valid_f1"].get<double>() << ',' << r["test_f1"].get<double>() << ','
                << r["test_precision"].get<double>() << ',' << r["test_recall"].get<double>()
                << ',' << r["test_mse"].get<double>() << '\n';
    }
    return kOk;
}

// --- wiring -------------------------------------------------------------

void add_common(CLI::App* c, Opts& o) {
    c->add_option("--config", o.config_path, "JSON config file (CLI flags override it)");
    c->add_option("--seed", o.seed, "root seed");
}

void add_label_opts(CLI::App* c, Opts& o) {
    c->add_option("--tau-gt", o.tau_gt, "ground-truth reuse-rate threshold")
        ->check(CLI::Range(0.0, 1.0));
    c->add_option("--min-shared", o.min_shared, "minimum shared users per pair");
}

void add_model_opts(CLI::App* c, Opts& o) {
    c->add_option("--dim", o.dim, "node representation width");
    c->add_option("--layers", o.layers, "message-passing layers");
    c->add_option("--cat-dim", o.cat_dim, "category embedding width");
    c->add_option("--url-hidden", o.url_hidden, "URL encoder hidden width");
    c->add_option("--url-char-dim", o.url_char_dim, "URL character embedding width");
    c->add_flag("--mean-pool", o.mean_pool, "mean-pooling aggregation ablation");
    c->add_flag("--no-modality-attn", o.no_modality_attn, "feature-concatenation ablation");
    c->add_option("--modalities", o.modalities, "comma-separated modality subset");
}

void add_train_opts(CLI::App* c, Opts& o) {
    c->add_option("--rounds", o.rounds, "federated rounds (T)");
    c->add_option("--local-steps", o.local_steps, "local steps per round (0 = one epoch)");
    c->add_option("--batch", o.batch, "edge batch size");
    c->add_option("--max-lr", o.max_lr, "1-cycle peak learning rate");
    c->add_option("--warmup", o.warmup, "warmup fraction")->check(CLI::Range(0.0, 1.0));
    c->add_option("--patience", o.patience, "early-stopping patience in rounds");
    c->add_flag("--weighted-avg", o.weighted_avg, "weight averaging by local edge count");
    c->add_flag("--sgd", o.use_sgd, "plain SGD instead of Adam");
    c->add_option("--weight-decay", o.weight_decay, "decoupled weight decay");
    c->add_option("--pos-weight", o.pos_weight, "loss weight on positive edges");
    c->add_flag("--centralized", o.centralized, "single-domain training, no aggregation");
    c->add_option("--bytes-per-scalar", o.bytes_per_scalar, "wire bytes per parameter scalar");
}

void add_eval_opts(CLI::App* c, Opts& o) {
    c->add_option("--tau-pred", o.tau_pred, "decision threshold")->check(CLI::Range(0.0, 1.0));
    c->add_option("--set", o.eval_set, "edge set: train, valid, or test");
    c->add_option("--delta", o.delta, "embedding exchange factor (cost model)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Privacy-preserving credential-stuffing risk predictor"};
    app.require_subcommand(1);
    Opts o;

    // Pre-scan for --config so file values become defaults the flags override.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream is(argv[i + 1]);
            if (!is) {
                std::cerr << "error: cannot open config file " << argv[i + 1] << "\n";
                return kConfigError;
            }
            try {
                apply_config_file(o, nlohmann::json::parse(is));
            } catch (const std::exception& ex) {
                std::cerr << "error: bad config file: " << ex.what() << "\n";
                return kConfigError;
            }
        }
    }

    auto* gen = app.add_subcommand("generate", "synthesize a breach corpus");
    add_common(gen, o);
    add_label_opts(gen, o);
    gen->add_option("--graph", o.graph_path, "output graph file")->required();
    gen->add_option("--snapshot", o.snapshot_path, "output snapshot file")->required();
    gen->add_option("--sites", o.sites, "number of sites");
    gen->add_option("--clients", o.clients, "intended federation size");
    gen->add_option("--affinity", o.affinity, "category affinity knob");
    gen->add_option("--gap-penalty", o.gap_penalty, "security-gap penalty knob");
    gen->add_option("--weakness-bonus", o.weakness_bonus, "combined-weakness reuse knob");
    gen->add_option("--base-reuse", o.base_reuse, "baseline reuse rate");
    gen->add_option("--noise", o.noise, "reuse-rate noise scale");
    gen->add_option("--users-min", o.users_min, "minimum shared users per pair");
    gen->add_option("--users-max", o.users_max, "maximum shared users per pair");
    gen->add_option("--partners", o.partners, "partner sites sampled per site");

    auto* ing = app.add_subcommand("ingest", "validate and canonicalize a snapshot");
    add_common(ing, o);
    ing->add_option("--in", o.in_path, "raw snapshot file")->required();
    ing->add_option("--out", o.out_path, "canonical snapshot output")->required();

    auto* part = app.add_subcommand("partition", "assign admins and split edges");
    add_common(part, o);
    add_label_opts(part, o);
    part->add_option("--graph", o.graph_path, "input graph file")->required();
    part->add_option("--clients", o.clients, "federation size K");
    part->add_option("--out", o.out_path, "partitioned graph output")->required();
    part->add_option("--split", o.split_path, "split plan output")->required();
    part->add_option("--valid-admins", o.valid_admins, "validation admin pair")->expected(2);

    auto* tr = app.add_subcommand("train", "federated or centralized training");
    add_common(tr, o);
    add_label_opts(tr, o);
    add_model_opts(tr, o);
    add_train_opts(tr, o);
    tr->add_option("--tau-pred", o.tau_pred, "validation decision threshold")
        ->check(CLI::Range(0.0, 1.0));
    tr->add_option("--graph", o.graph_path, "partitioned graph file")->required();
    tr->add_option("--snapshot", o.snapshot_path, "snapshot file")->required();
    tr->add_option("--split", o.split_path, "split plan file")->required();
    tr->add_option("--checkpoint", o.checkpoint_path, "checkpoint output")->required();
    tr->add_option("--log", o.log_path, "training log output (ldjson + csv)");
    tr->add_option("--resume", o.resume_path, "checkpoint to resume from");

    auto* ev = app.add_subcommand("evaluate", "classification and risk metrics");
    add_common(ev, o);
    add_label_opts(ev, o);
    add_eval_opts(ev, o);
    ev->add_option("--graph", o.graph_path, "partitioned graph file")->required();
    ev->add_option("--snapshot", o.snapshot_path, "snapshot file")->required();
    ev->add_option("--split", o.split_path, "split plan file")->required();
    ev->add_option("--checkpoint", o.checkpoint_path, "trained checkpoint")->required();
    ev->add_option("--out", o.out_path, "report directory");
    ev->add_option("--ks", o.ks, "ranking cutoffs to attempt");
    ev->add_flag("--tune-threshold", o.tune_threshold, "pick tau_pred by validation F1");
    ev->add_option("--bytes-per-scalar", o.bytes_per_scalar, "wire bytes per scalar");

    auto* rk = app.add_subcommand("rank", "ranking metrics at one cutoff");
    add_common(rk, o);
    add_label_opts(rk, o);
    add_eval_opts(rk, o);
    rk->add_option("--graph", o.graph_path, "partitioned graph file")->required();
    rk->add_option("--snapshot", o.snapshot_path, "snapshot file")->required();
    rk->add_option("--split", o.split_path, "split plan file")->required();
    rk->add_option("--checkpoint", o.checkpoint_path, "trained checkpoint")->required();
    rk->add_option("--k", o.k, "cutoff")->required();
    rk->add_option("--out", o.out_path, "report directory");

    auto* rep = app.add_subcommand("report", "full risk report (metrics + tables)");
    add_common(rep, o);
    add_label_opts(rep, o);
    add_eval_opts(rep, o);
    rep->add_option("--graph", o.graph_path, "partitioned graph file")->required();
    rep->add_option("--snapshot", o.snapshot_path, "snapshot file")->required();
    rep->add_option("--split", o.split_path, "split plan file")->required();
    rep->add_option("--checkpoint", o.checkpoint_path, "trained checkpoint")->required();
    rep->add_option("--out", o.out_path, "report directory")->required();
    rep->add_option("--ks", o.ks, "ranking cutoffs");
    rep->add_flag("--tune-threshold", o.tune_threshold, "pick tau_pred by validation F1");
    rep->add_option("--bytes-per-scalar", o.bytes_per_scalar, "wire bytes per scalar");

    auto* cost = app.add_subcommand("cost", "closed-form communication costs");
    add_common(cost, o);
    cost->add_option("--checkpoint", o.checkpoint_path, "checkpoint to size");
    cost->add_option("--params", o.param_count, "parameter scalar count |w|");
    cost->add_option("--clients", o.clients, "federation size K");
    cost->add_option("--rounds", o.rounds, "rounds T");
    cost->add_option("--bytes-per-scalar", o.bytes_per_scalar, "bytes per scalar b");
    cost->add_option("--delta", o.delta, "embedding exchange factor");
    cost->add_option("--dim", o.dim, "embedding width d");
    cost->add_option("--queries", o.queries, "inference queries |Q|");

    auto* sw = app.add_subcommand("sweep", "federation-size study on a fixed test set");
    add_common(sw, o);
    add_label_opts(sw, o);
    add_model_opts(sw, o);
    add_train_opts(sw, o);
    sw->add_option("--tau-pred", o.tau_pred)->check(CLI::Range(0.0, 1.0));
    sw->add_option("--graph", o.graph_path, "unpartitioned graph file")->required();
    sw->add_option("--snapshot", o.snapshot_path, "snapshot file")->required();
    sw->add_option("--clients-list", o.clients_list, "comma-separated K values");
    sw->add_option("--out", o.out_path, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (gen->parsed()) return cmd_generate(o);
        if (ing->parsed()) return cmd_ingest(o);
        if (part->parsed()) return cmd_partition(o);
        if (tr->parsed()) return cmd_train(o);
        if (ev->parsed()) return evaluate_impl(o, false);
        if (rk->parsed()) return cmd_rank(o);
        if (rep->parsed()) return evaluate_impl(o, true);
        if (cost->parsed()) return cmd_cost(o);
        if (sw->parsed()) return cmd_sweep(o);
    } catch (const CLI::Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kConfigError;
    } catch (const std::runtime_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kDataError;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kRuntimeError;
    }
    return kConfigError;
}
