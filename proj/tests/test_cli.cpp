#include "doctest.h"
#include "helpers.hpp"

#include "opdyn/cli.hpp"
#include "opdyn/config.hpp"
#include "opdyn/io.hpp"

#include "json.hpp"

#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

using namespace opdyn;
using namespace testing;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path config_file(const fs::path& dir, const std::string& text) {
    const auto p = dir / "run.cfg";
    write_text(p, text);
    return p;
}

const char* kSmall = R"(seed = 5
[population]
n = 300
mean_degree = 6
[kernel]
family = combined
[schedule]
observations = 3
)";

json load_json(const fs::path& p) { return json::parse(read_text(p)); }

} // namespace

TEST_CASE("analyze on a three-agent fixture") {
    const auto dir = scratch_dir("cli_analyze");
    write_text(dir / "data/edges.csv", "src,dst\na,b\nb,c\nc,a\n");
    write_text(dir / "data/snapshot_1.csv", "agent_id,opinion\na,0.30\nb,0.45\nc,0.90\n");
    write_text(dir / "data/snapshot_2.csv", "agent_id,opinion\na,0.50\nb,0.45\nc,0.70\n");
    const auto cfg = config_file(dir, "seed = 1\n");
    const auto r = run({"analyze", "--config", cfg.string(), "--dataset", (dir / "data").string(), "--out",
                        (dir / "out").string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto s = load_json(dir / "out/epoc_summary.json");
    const auto& all = s["transitions"][0]["all"];
    CHECK(all["identity_holds"] == true);
    CHECK(all["population"] == 3);
    CHECK(all["remarkable"] == 2);
    CHECK(all["positive_skip"].get<int>() + all["positive_nonskip"].get<int>() + all["negative"].get<int>() +
              all["unaligned"].get<int>() ==
          2);
    CHECK(fs::exists(dir / "out/t1_t2/epoc_curves.csv"));
    CHECK(fs::exists(dir / "out/t1_t2/figures/manifest.json"));
    const auto m = load_json(dir / "out/manifest.json");
    CHECK(m["seed"] == 1);
    CHECK(m["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("simulate is byte-for-byte deterministic") {
    const auto dir = scratch_dir("cli_simulate");
    const auto cfg = config_file(dir, kSmall);
    REQUIRE(run({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()}).code == 0);
    REQUIRE(run({"simulate", "--config", cfg.string(), "--out", (dir / "b").string()}).code == 0);
    for (const char* f : {"snapshot_0.csv", "snapshot_1.csv", "snapshot_2.csv", "edges.csv", "simulate_summary.json"}) {
        INFO(f);
        CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));
    }
    CHECK_FALSE(fs::exists(dir / "a/snapshot_3.csv"));
    REQUIRE(run({"simulate", "--config", cfg.string(), "--seed", "6", "--out", (dir / "c").string()}).code == 0);
    CHECK(read_text(dir / "a/snapshot_2.csv") != read_text(dir / "c/snapshot_2.csv"));
    // Seeds do not enter the config hash.
    CHECK(load_json(dir / "a/manifest.json")["config_hash"] == load_json(dir / "c/manifest.json")["config_hash"]);
}

TEST_CASE("generate then analyze --homophily recovers the null row") {
    const auto dir = scratch_dir("cli_homophily");
    const auto cfg = config_file(dir, R"(seed = 3
[population]
n = 10000
fractions = 0.08, 0.19, 0.53, 0.16, 0.04
mean_degree = 10
)");
    REQUIRE(run({"generate", "--config", cfg.string(), "--out", (dir / "gen").string()}).code == 0);
    // analyze needs two snapshots; repeat the initial one.
    fs::copy_file(dir / "gen/snapshot_0.csv", dir / "gen/snapshot_1.csv");
    const auto r = run({"analyze", "--config", cfg.string(), "--dataset", (dir / "gen").string(), "--out",
                        (dir / "an").string(), "--homophily"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto s = load_json(dir / "an/epoc_summary.json");
    const auto& null_row = s["homophily"].back();
    CHECK(null_row["group"] == "null");
    const double expected[] = {0.08, 0.19, 0.53, 0.16, 0.04};
    int k = 0;
    for (const char* g : {"SL", "L", "M", "C", "SC"}) {
        CHECK(null_row[g].get<double>() == doctest::Approx(expected[k++]).epsilon(0.01));
    }
    CHECK(fs::exists(dir / "an/homophily.csv"));
    CHECK(s["transitions"][0]["all"]["remarkable"] == 0);
}

TEST_CASE("report writes populations and movement maps") {
    const auto dir = scratch_dir("cli_report");
    const auto cfg = config_file(dir, kSmall);
    REQUIRE(run({"simulate", "--config", cfg.string(), "--out", (dir / "sim").string()}).code == 0);
    const auto r = run({"report", "--config", cfg.string(), "--dataset", (dir / "sim").string(), "--out",
                        (dir / "rep").string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto s = load_json(dir / "rep/report.json");
    CHECK(s["populations"].size() == 3);
    CHECK(s["transitions"].size() == 2);
    CHECK(fs::exists(dir / "rep/movement_map_t2_t3.csv"));
    std::int64_t in = 0, out = 0;
    for (const auto& [g, v] : s["transitions"][0]["income"].items()) in += v.get<std::int64_t>();
    for (const auto& [g, v] : s["transitions"][0]["outcome"].items()) out += v.get<std::int64_t>();
    CHECK(in == out);
}

TEST_CASE("observe writes latent and observed datasets") {
    const auto dir = scratch_dir("cli_observe");
    const auto cfg = config_file(dir, R"(seed = 9
[population]
n = 300
mean_degree = 6
[observer]
sources = 11
min_subscriptions = 1
)");
    const auto r = run({"observe", "--config", cfg.string(), "--out", (dir / "obs").string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "obs/latent/snapshot_1.csv"));
    CHECK(fs::exists(dir / "obs/observed/edges.csv"));
    CHECK(fs::exists(dir / "obs/confusion.csv"));
    CHECK(fs::exists(dir / "obs/figures/figure4.csv"));
}

TEST_CASE("exit codes and error lines") {
    const auto dir = scratch_dir("cli_errors");
    const auto out = (dir / "out").string();

    const auto no_seed = run({"simulate", "--config", config_file(dir, "[population]\nn = 100\n").string(), "--out", out});
    CHECK(no_seed.code == 2);
    CHECK(json::parse(no_seed.err)["error"] == "config");

    const auto unknown = run({"simulate", "--config", config_file(dir, "seed = 1\nspeed = 3\n").string(), "--out", out});
    CHECK(unknown.code == 2);
    CHECK(json::parse(unknown.err)["message"].get<std::string>().find("run.cfg:2") != std::string::npos);

    CHECK(run({"simulate", "--config", (dir / "nope.cfg").string(), "--out", out}).code == 3);
    CHECK(run({"simulate"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);

    const auto cfg = config_file(dir, "seed = 1\n");
    const auto missing = run({"analyze", "--config", cfg.string(), "--dataset", (dir / "none").string(), "--out", out});
    CHECK(missing.code == 3);
    CHECK(json::parse(missing.err)["error"] == "io");

    write_text(dir / "bad/edges.csv", "src,dst\na,b\n");
    write_text(dir / "bad/snapshot_1.csv", "agent_id,opinion\na,0.1\nb,7\n");
    CHECK(run({"analyze", "--config", cfg.string(), "--dataset", (dir / "bad").string(), "--out", out}).code == 3);

    // Degree sequence that cannot be realised is a model error.
    const auto infeasible = config_file(dir, "seed = 1\n[population]\nn = 30\nmean_degree = 28\n");
    const auto r = run({"generate", "--config", infeasible.string(), "--out", out});
    CHECK(r.code == 4);
    CHECK(json::parse(r.err)["error"] == "model");
}

TEST_CASE("config hash tracks parameters") {
    const auto a = parse_config("seed = 1\n[kernel]\nfamily = linear_positive\ngain = 0.3\n");
    const auto b = parse_config("seed = 2\n[kernel]\nfamily = linear_positive\ngain = 0.3\n");
    const auto c = parse_config("seed = 1\n[kernel]\nfamily = linear_positive\ngain = 0.4\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
    CHECK(a.canonical().find("gain=0.3") != std::string::npos);
    CHECK_THROWS_AS(parse_config("seed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = 1\n[kernel]\nfamily = linear_positive\nepsilon = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = 1\n[nowhere]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = 1\n[kernel]\nfamily = linear_positive\ngain = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = x\n"), ConfigError);
}

TEST_CASE("installed binary reports exit codes") {
    const std::string cli = OPDYN_CLI_PATH;
    const auto dir = scratch_dir("cli_binary");
    write_text(dir / "bad.cfg", "seed = 1\n[schedule]\nmode = sideways\n");
    const std::string cmd = cli + " simulate --config " + (dir / "bad.cfg").string() + " --out " +
                            (dir / "o").string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 2);
    write_text(dir / "ok.cfg", "seed = 1\n[population]\nn = 50\nmean_degree = 4\n");
    const int ok = std::system((cli + " generate --config " + (dir / "ok.cfg").string() + " --out " +
                                (dir / "o").string() + " >/dev/null")
                                   .c_str());
    CHECK(WEXITSTATUS(ok) == 0);
}
