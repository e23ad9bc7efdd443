#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cli;  // path to the rrcli binary, from argv[1]
fs::path g_dir;     // scratch directory shared by the pipeline cases

// Runs rrcli with `dir` as the working directory; files on the command line
// are given as relative paths so the configs recorded in file headers are
// location-free and comparable across reruns in different directories.
int run_in(const fs::path& dir, const std::string& args) {
    std::string cmd = "cd " + dir.string() + " && " + g_cli + " " + args + " > " +
                      (g_dir / "stdout.txt").string() + " 2> " + (g_dir / "stderr.txt").string();
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

int run(const std::string& args) { return run_in(g_dir, args); }

std::string last_stdout() {
    std::ifstream f(g_dir / "stdout.txt");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path pf(const char* name) { return g_dir / name; }

nlohmann::json parse_file(const fs::path& p) {
    std::ifstream is(p);
    return nlohmann::json::parse(is);
}

// A deliberately tiny model so the whole file runs in seconds.
const std::string kTiny =
    " --dim 4 --cat-dim 4 --url-hidden 3 --url-char-dim 2 --layers 1 --batch 64";

const std::string kData = " --graph part.ldjson --snapshot snap.ldjson --split split.json";

}  // namespace

TEST_CASE("exit codes: usage, config and data errors") {
    CHECK(run("") == 2);  // no subcommand
    CHECK(run("--help") == 0);
    CHECK(run("generate") == 2);  // missing required outputs
    CHECK(run("nonsense --graph x") == 2);
    CHECK(run("generate --graph g --snapshot s --sites -4") == 2);
    // missing input file is a data error, not a usage error
    CHECK(run("ingest --in absent.ldjson --out out.ldjson") == 3);
    CHECK(run("partition --graph absent.ldjson --out x --split y") == 3);
}

TEST_CASE("pipeline: generate, ingest, partition, train, evaluate, rank, report, cost") {
    CHECK(run("generate --graph graph.ldjson --snapshot snap.ldjson --sites 60 --clients 3 "
              "--seed 5") == 0);
    CHECK(fs::exists(pf("graph.ldjson")));
    CHECK(fs::exists(pf("snap.ldjson")));

    // ingest round-trips the generated records unchanged (headers differ:
    // each file carries its own run config)
    CHECK(run("ingest --in snap.ldjson --out snap2.ldjson") == 0);
    auto body = [&](const char* n) {
        std::string s = slurp(pf(n));
        return s.substr(s.find('\n') + 1);
    };
    CHECK(body("snap2.ldjson") == body("snap.ldjson"));

    CHECK(run("partition --graph graph.ldjson --clients 3 --seed 5 --out part.ldjson "
              "--split split.json") == 0);
    nlohmann::json split = parse_file(pf("split.json"));
    CHECK(split["train"].size() > 0);
    CHECK(split["valid"].size() > 0);
    CHECK(split["test"].size() > 0);

    // a couple of federated rounds on a tiny model
    CHECK(run("train" + kData + kTiny +
              " --rounds 2 --seed 5 --checkpoint model.ckpt --log train.ldjson") == 0);
    CHECK(fs::exists(pf("model.ckpt")));
    CHECK(fs::exists(pf("train.ldjson")));
    CHECK(fs::exists(pf("train.ldjson.csv")));
    {
        std::ifstream log(pf("train.ldjson"));
        std::string line;
        int rounds = -1;  // header line
        while (std::getline(log, line)) ++rounds;
        CHECK(rounds == 2);
    }

    CHECK(run("evaluate" + kData + " --checkpoint model.ckpt --set test --out eval") ==
          0);
    nlohmann::json rep = parse_file(pf("eval") / "report.json");
    CHECK(rep["metrics"].contains("f1"));
    CHECK(rep["metrics"].contains("mse"));
    CHECK(last_stdout().find("f1") != std::string::npos);

    CHECK(run("rank" + kData + " --checkpoint model.ckpt --k 1 --set test") == 0);
    CHECK(last_stdout().find("ndcg") != std::string::npos);

    CHECK(run("report" + kData + " --checkpoint model.ckpt --set test --out report") ==
          0);
    for (const char* f : {"report.json", "edges.csv", "nodes.csv", "ranking.csv"})
        CHECK(fs::exists(pf("report") / f));

    CHECK(run("cost --params 1000 --clients 2 --rounds 2 --bytes-per-scalar 8 --dim 4 "
              "--queries 10") == 0);
    nlohmann::json cost = nlohmann::json::parse(last_stdout());
    CHECK(cost["train_bytes"].get<uint64_t>() == 2ull * 8 * 1000 * 2 * 2);
    CHECK(cost["infer_bytes"].get<uint64_t>() == 2ull * 8 * 4 * 10);

    CHECK(run("cost --checkpoint model.ckpt --clients 2 --rounds 2") == 0);
    nlohmann::json cost2 = nlohmann::json::parse(last_stdout());
    CHECK(cost2["param_scalars"].get<uint64_t>() > 0);
}

TEST_CASE("pipeline is byte-identical across reruns") {
    REQUIRE(fs::exists(pf("model.ckpt")));
    fs::path dir2 = g_dir / "rerun";
    fs::create_directories(dir2);

    CHECK(run_in(dir2, "generate --graph graph.ldjson --snapshot snap.ldjson --sites 60 "
                       "--clients 3 --seed 5") == 0);
    CHECK(run_in(dir2, "partition --graph graph.ldjson --clients 3 --seed 5 --out part.ldjson "
                       "--split split.json") == 0);
    CHECK(run_in(dir2, "train" + kData + kTiny + " --rounds 2 --seed 5 --checkpoint model.ckpt") ==
          0);

    for (const char* f : {"graph.ldjson", "snap.ldjson", "part.ldjson", "split.json",
                          "model.ckpt"})
        CHECK(slurp(dir2 / f) == slurp(g_dir / f));
}

TEST_CASE("train: zero rounds, resume, and config-file defaults") {
    REQUIRE(fs::exists(pf("part.ldjson")));

    // zero rounds: valid run that saves the initialization
    CHECK(run("train" + kData + kTiny + " --rounds 0 --seed 5 --checkpoint init.ckpt") == 0);
    CHECK(fs::exists(pf("init.ckpt")));

    // resume: 2 rounds already done, 2 more against a 4-round schedule
    CHECK(run("train" + kData + kTiny +
              " --rounds 4 --seed 5 --checkpoint resumed.ckpt --resume model.ckpt") == 0);
    CHECK(last_stdout().find("trained") != std::string::npos);

    // resuming past the end of the schedule is a config error
    CHECK(run("train" + kData + kTiny +
              " --rounds 1 --seed 5 --checkpoint x.ckpt --resume model.ckpt") == 2);

    // model flags incompatible with the resume checkpoint are rejected
    CHECK(run("train" + kData +
              " --dim 6 --rounds 4 --seed 5 --checkpoint x.ckpt --resume model.ckpt") != 0);

    // config file supplies defaults, flags still win
    {
        std::ofstream cfg(pf("run.json"));
        cfg << nlohmann::json{{"rounds", 1},       {"dim", 4},    {"cat_dim", 4},
                              {"url_hidden", 3},   {"layers", 1}, {"url_char_dim", 2},
                              {"batch", 64},       {"seed", 5}}
                   .dump();
    }
    CHECK(run("train" + kData + " --config run.json --checkpoint cfg.ckpt") == 0);
    CHECK(fs::exists(pf("cfg.ckpt")));
    CHECK(run("train" + kData + " --config absent.json --checkpoint z.ckpt") == 2);
}

TEST_CASE("evaluate: threshold tuning and bad set name") {
    REQUIRE(fs::exists(pf("model.ckpt")));
    CHECK(run("evaluate" + kData +
              " --checkpoint model.ckpt --set valid --tune-threshold") == 0);
    nlohmann::json j = nlohmann::json::parse(last_stdout());
    double tau = j["tau_pred"].get<double>();
    CHECK(tau > 0.0);
    CHECK(tau < 1.0);
    CHECK(run("evaluate" + kData + " --checkpoint model.ckpt --set bogus") == 2);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-rrcli> [doctest args]\n");
        return 1;
    }
    g_cli = fs::absolute(argv[1]).string();
    g_dir = fs::temp_directory_path() / "rr_cli_test";
    fs::remove_all(g_dir);
    fs::create_directories(g_dir);
    doctest::Context ctx;
    int rc = ctx.run();
    fs::remove_all(g_dir);
    return rc;
}
