#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rr/fl.hpp"
#include "rr/predict.hpp"
#include "rr/rng.hpp"

using namespace rr;
using fl::Prediction;

namespace {

Prediction mk(int idx, int u, int v, double p, bool truth, double rate, double tau = 0.5) {
    Prediction pr;
    pr.edge_index = idx;
    pr.u = u;
    pr.v = v;
    pr.p_hat = p;
    pr.decision = predict::classify(p, tau);
    pr.truth = truth;
    pr.reuse_rate = rate;
    return pr;
}

}  // namespace

TEST_CASE("classify: strict domain on tau, inclusive boundary on p") {
    CHECK(predict::classify(0.5, 0.5));        // p == tau counts as positive
    CHECK(predict::classify(0.51, 0.5));
    CHECK_FALSE(predict::classify(0.49, 0.5));
    CHECK_THROWS(predict::classify(0.3, 0.0));
    CHECK_THROWS(predict::classify(0.3, 1.0));
    CHECK_THROWS(predict::classify(0.3, -0.1));
}

TEST_CASE("classification metrics: hand-counted confusion matrix") {
    std::vector<Prediction> preds = {
        mk(0, 0, 1, 0.9, true, 0.8),    // tp
        mk(1, 0, 2, 0.8, true, 0.7),    // tp
        mk(2, 1, 2, 0.7, false, 0.2),   // fp
        mk(3, 1, 3, 0.2, true, 0.6),    // fn
        mk(4, 2, 3, 0.1, false, 0.1),   // tn
        mk(5, 0, 3, 0.3, false, 0.05),  // tn
    };
    auto m = predict::classification_metrics(preds);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 2);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS(predict::classification_metrics({}));
}

TEST_CASE("f1 value oracle and degenerate cases") {
    // build a prediction set with exact precision 0.9425, recall 0.8896:
    // scale to integers — tp = 89_96? use tp, fp, fn rationally.
    // precision = tp/(tp+fp), recall = tp/(tp+fn); choose tp = 942500*88960...
    // simpler: F1 = 2PR/(P+R) checked directly on the published figures.
    const double p = 0.9425, r = 0.8896;
    const double f1 = 2.0 * p * r / (p + r);
    CHECK(f1 == doctest::Approx(0.9153).epsilon(0.0005 / 0.9153));

    // the implementation agrees with the closed form on a synthetic matrix
    // with precision ~0.9425 and recall ~0.8896 (tp=8896, fp=543, fn=1104):
    // precision = 8896/9439 = 0.94247..., recall = 8896/10000 = 0.8896
    std::vector<Prediction> preds;
    int idx = 0;
    for (int i = 0; i < 8896; ++i) preds.push_back(mk(idx++, 0, 1, 0.9, true, 0.8));
    for (int i = 0; i < 543; ++i) preds.push_back(mk(idx++, 0, 1, 0.9, false, 0.1));
    for (int i = 0; i < 1104; ++i) preds.push_back(mk(idx++, 0, 1, 0.1, true, 0.8));
    auto m = predict::classification_metrics(preds);
    CHECK(m.precision == doctest::Approx(8896.0 / 9439.0).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(0.8896).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(0.9153).epsilon(0.0005 / 0.9153));

    // all-negative predictions: zero precision and recall yield f1 = 0
    auto z = predict::classification_metrics({mk(0, 0, 1, 0.1, true, 0.9)});
    CHECK(z.f1 == 0.0);
    CHECK(z.precision == 0.0);
    CHECK(z.recall == 0.0);
}

TEST_CASE("ranking metrics agree with exhaustive brute force on small candidate sets") {
    // random prediction sets over few nodes; brute-force the definition
    auto rng = make_rng(99, "rank-test");
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Prediction> preds;
        int n_nodes = static_cast<int>(uniform_int(rng, 3, 5));
        int idx = 0;
        for (int u = 0; u < n_nodes; ++u)
            for (int v = u + 1; v < n_nodes; ++v) {
                if (uniform_real(rng, 0.0, 1.0) < 0.25) continue;  // sparse
                double rate = uniform_real(rng, 0.0, 1.0);
                preds.push_back(mk(idx++, u, v, uniform_real(rng, 0.01, 0.99), rate > 0.5, rate));
            }
        if (preds.empty()) continue;
        for (int k = 1; k <= 3; ++k) {
            // brute force
            double sum_p = 0.0, sum_ndcg = 0.0;
            int evaluated = 0;
            for (int node = 0; node < n_nodes; ++node) {
                std::vector<const Prediction*> cand;
                for (const auto& pr : preds)
                    if (pr.u == node || pr.v == node) cand.push_back(&pr);
                if (static_cast<int>(cand.size()) < k) continue;
                std::sort(cand.begin(), cand.end(), [](const Prediction* a, const Prediction* b) {
                    if (a->p_hat != b->p_hat) return a->p_hat > b->p_hat;
                    return a->edge_index < b->edge_index;
                });
                int hits = 0;
                double dcg = 0.0;
                for (int i = 0; i < k; ++i) {
                    hits += cand[size_t(i)]->truth;
                    dcg += cand[size_t(i)]->reuse_rate / std::log2(i + 2.0);
                }
                std::vector<double> rel;
                for (const auto* c : cand) rel.push_back(c->reuse_rate);
                std::sort(rel.rbegin(), rel.rend());
                double idcg = 0.0;
                for (int i = 0; i < k; ++i) idcg += rel[size_t(i)] / std::log2(i + 2.0);
                sum_p += double(hits) / k;
                sum_ndcg += idcg == 0.0 ? 1.0 : dcg / idcg;
                ++evaluated;
            }
            if (evaluated == 0) {
                CHECK_THROWS(predict::ranking_metrics(preds, k));
                continue;
            }
            auto rm = predict::ranking_metrics(preds, k);
            CHECK(rm.k == k);
            CHECK(rm.nodes_evaluated == evaluated);
            CHECK(rm.precision_at_k == doctest::Approx(sum_p / evaluated).epsilon(1e-12));
            CHECK(rm.ndcg_at_k == doctest::Approx(sum_ndcg / evaluated).epsilon(1e-12));
        }
    }
}

TEST_CASE("ranking metrics: perfect and worst orderings") {
    // node 0 with 3 candidates; model ranks exactly by relevance
    std::vector<Prediction> good = {
        mk(0, 0, 1, 0.9, true, 0.9),
        mk(1, 0, 2, 0.6, true, 0.6),
        mk(2, 0, 3, 0.1, false, 0.1),
    };
    auto g2 = predict::ranking_metrics(good, 2);
    CHECK(g2.precision_at_k == doctest::Approx(1.0));
    CHECK(g2.ndcg_at_k == doctest::Approx(1.0));

    // inverted ranking: nDCG drops below 1, precision@2 = 0.5
    std::vector<Prediction> bad = {
        mk(0, 0, 1, 0.1, true, 0.9),
        mk(1, 0, 2, 0.4, true, 0.6),
        mk(2, 0, 3, 0.9, false, 0.1),
    };
    auto b2 = predict::ranking_metrics(bad, 2);
    CHECK(b2.precision_at_k == doctest::Approx(0.5));
    double dcg = 0.1 / std::log2(2.0) + 0.6 / std::log2(3.0);
    double idcg = 0.9 / std::log2(2.0) + 0.6 / std::log2(3.0);
    // node 0 is the only node with >= 2 candidates
    CHECK(b2.nodes_evaluated == 1);
    CHECK(b2.ndcg_at_k == doctest::Approx(dcg / idcg).epsilon(1e-12));

    CHECK_THROWS(predict::ranking_metrics(good, 4));  // nobody has 4 candidates
    CHECK_THROWS(predict::ranking_metrics({}, 1));
}

TEST_CASE("risk scores: per-node means and edge MSE") {
    std::vector<Prediction> preds = {
        mk(0, 0, 1, 0.8, true, 0.7),
        mk(1, 0, 2, 0.4, false, 0.3),
        mk(2, 1, 2, 0.6, true, 0.6),
    };
    auto rs = predict::risk_scores(preds);
    CHECK(rs.node_risk.at(0) == doctest::Approx((0.8 + 0.4) / 2.0));
    CHECK(rs.node_risk.at(1) == doctest::Approx((0.8 + 0.6) / 2.0));
    CHECK(rs.node_risk.at(2) == doctest::Approx((0.4 + 0.6) / 2.0));
    double mse = (0.1 * 0.1 + 0.1 * 0.1 + 0.0) / 3.0;
    CHECK(rs.mse == doctest::Approx(mse).epsilon(1e-12));
}

TEST_CASE("emit_report: deterministic files, JSON and CSV agree") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "rr_report_test";
    fs::remove_all(dir);

    predict::Report rep;
    rep.predictions = {
        mk(0, 0, 1, 0.9, true, 0.8),
        mk(1, 0, 2, 0.3, false, 0.2),
        mk(2, 1, 2, 0.7, true, 0.65),
    };
    rep.classification = predict::classification_metrics(rep.predictions);
    rep.ranking = {predict::ranking_metrics(rep.predictions, 1),
                   predict::ranking_metrics(rep.predictions, 2)};
    rep.risk = predict::risk_scores(rep.predictions);

    predict::emit_report(rep, dir.string(), nlohmann::json{{"run", "test"}});
    for (const char* f : {"report.json", "edges.csv", "nodes.csv", "ranking.csv"})
        CHECK(fs::exists(dir / f));

    std::ifstream is(dir / "report.json");
    nlohmann::json j = nlohmann::json::parse(is);
    CHECK(j["config"]["run"] == "test");
    CHECK(j["metrics"]["f1"].get<double>() == doctest::Approx(rep.classification.f1));
    CHECK(j["edges"].size() == 3);
    CHECK(j["edges"][0]["p_hat"].get<double>() == 0.9);  // precision preserved
    CHECK(j["nodes"].size() == 3);

    // edges.csv row count and a spot value
    std::ifstream ec(dir / "edges.csv");
    std::string line;
    std::getline(ec, line);  // header
    CHECK(line.find("p_hat") != std::string::npos);
    int rows = 0;
    std::vector<std::string> body;
    while (std::getline(ec, line)) {
        body.push_back(line);
        ++rows;
    }
    CHECK(rows == 3);

    // byte-identical on a second emission
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    std::string first = slurp(dir / "report.json") + slurp(dir / "edges.csv") +
                        slurp(dir / "nodes.csv") + slurp(dir / "ranking.csv");
    predict::emit_report(rep, dir.string(), nlohmann::json{{"run", "test"}});
    std::string second = slurp(dir / "report.json") + slurp(dir / "edges.csv") +
                         slurp(dir / "nodes.csv") + slurp(dir / "ranking.csv");
    CHECK(first == second);
    fs::remove_all(dir);
}
