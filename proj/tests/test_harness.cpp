// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "irssim/harness.hpp"

using namespace irssim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// Small, fast campaign config.
std::string small_cfg_text(const std::string& out) {
    std::ostringstream ss;
    ss << "[system]\nN_IRS = 40\nN_IRS_w = 10\nN_IRS_h = 4\nN_G = 10\n"
       << "[run]\nstrategy = RA\nM_list = 2,4\nT_reconf_list = 100e-6\n"
       << "n_episodes = 6\nn_blocks = 5\nseed = 3\nthreads = 2\nout_dir = " << out << "\n";
    return ss.str();
}

}  // namespace

TEST_CASE("grand_stats against a two-pass oracle") {
    Rng rng(1);
    std::vector<double> xs(1000);
    for (auto& x : xs) x = rng.normal(3.0, 2.0);
    const Stats s = grand_stats(xs);
    // independent two-pass oracle
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (xs.size() - 1);
    CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    CHECK(s.n == 1000);
}

TEST_CASE("grand_stats degenerate cases") {
    CHECK(grand_stats({}).n == 0);
    const Stats one = grand_stats({5.0});
    CHECK(one.mean == 5.0);
    CHECK(one.stddev == 0.0);
    const Stats sym = grand_stats({2.5, -2.5});
    CHECK(sym.mean == 0.0);
}

TEST_CASE("per_timestep_stats") {
    // two episodes, symmetric rates cancel
    const std::vector<std::vector<double>> per_ep = {{1.0, 2.0, 3.0}, {-1.0, -2.0, -3.0}};
    const auto ts = per_timestep_stats(per_ep);
    REQUIRE(ts.size() == 3);
    for (const auto& s : ts) {
        CHECK(s.mean == 0.0);
        CHECK(s.n == 2);
    }
    CHECK_THROWS_AS(per_timestep_stats({{1.0}, {1.0, 2.0}}), std::invalid_argument);
    SUBCASE("single episode passes through") {
        const auto one = per_timestep_stats({{4.0, 5.0}});
        CHECK(one[0].mean == 4.0);
        CHECK(one[1].mean == 5.0);
        CHECK(one[0].stddev == 0.0);
    }
}

TEST_CASE("moving_average") {
    SUBCASE("constant series") {
        const std::vector<double> xs(250, 7.5);
        for (double v : moving_average(xs, 100)) CHECK(v == doctest::Approx(7.5).epsilon(1e-12));
    }
    SUBCASE("ramp matches the closed form") {
        std::vector<double> xs(1000);
        for (int i = 0; i < 1000; ++i) xs[i] = i + 1.0;  // 1..1000
        const auto ma = moving_average(xs, 100);
        for (int e = 0; e < 1000; ++e) {
            const int lo = std::max(1, e + 1 - 99);  // 1-based window start
            const int hi = e + 1;
            const double want = 0.5 * (lo + hi);
            CHECK(ma[e] == doctest::Approx(want).epsilon(1e-12));
        }
    }
    SUBCASE("window 1 is the identity") {
        const std::vector<double> xs = {3.0, 1.0, 4.0};
        const auto ma = moving_average(xs, 1);
        CHECK(ma == xs);
    }
    CHECK_THROWS_AS(moving_average({1.0}, 0), std::invalid_argument);
}

TEST_CASE("episode ids are seed-derived and stable") {
    const std::string a = episode_id(1, 2, 3);
    CHECK(a.size() == 16);
    CHECK(a == episode_id(1, 2, 3));
    CHECK(a != episode_id(1, 2, 4));
    CHECK(a != episode_id(2, 2, 3));
}

TEST_CASE("config parsing") {
    SUBCASE("defaults survive an empty config") {
        const RunConfig cfg = RunConfig::parse("");
        CHECK(cfg.f_hz == 5.195e9);
        CHECK(cfg.n_bs == 5);
        CHECK(cfg.p_dbm == 20.0);
        CHECK(cfg.rho() == doctest::Approx(0.9492).epsilon(1e-3));
    }
    SUBCASE("values and lists are read") {
        const RunConfig cfg = RunConfig::parse(
            "[system]\nP_dBm = 17\n[run]\nM_list = 1, 2,8\nT_reconf_list = 20e-6,150e-6\n"
            "strategy = RVQ\nseed = 42\n[channel]\nrho = 1.0\nv_UE_kmh = 0\n");
        CHECK(cfg.p_dbm == 17.0);
        CHECK(cfg.m_list == std::vector<int>{1, 2, 8});
        CHECK(cfg.t_reconf_list.size() == 2);
        CHECK(cfg.seed == 42);
        CHECK(cfg.rho() == 1.0);
        CHECK(cfg.v_ue_mps() == 0.0);
    }
    SUBCASE("unknown keys are hard errors") {
        CHECK_THROWS(RunConfig::parse("[system]\nP_dBmm = 17\n"));
        CHECK_THROWS(RunConfig::parse("frequency = 1\n"));
    }
    SUBCASE("malformed input is rejected") {
        CHECK_THROWS(RunConfig::parse("[system\nP_dBm = 17\n"));
        CHECK_THROWS(RunConfig::parse("[system]\nP_dBm\n"));
        CHECK_THROWS(RunConfig::parse("[system]\nP_dBm = twenty\n"));
        CHECK_THROWS(RunConfig::parse("[run]\nstrategy = GREEDY\n"));
        CHECK_THROWS(RunConfig::parse("[run]\nM_list = 0\n"));
        CHECK_THROWS(RunConfig::parse("[system]\nN_G = 7\n"));  // must divide N_IRS_w
        CHECK_THROWS(RunConfig::parse("[system]\nP_dBm = 1\nP_dBm = 2\n"));
    }
    SUBCASE("echo reparses to the same configuration") {
        RunConfig cfg = RunConfig::parse("[run]\nM_list = 2,4\nseed = 9\n[channel]\nrho = 0.9\n");
        const RunConfig again = RunConfig::parse(cfg.echo());
        CHECK(again.m_list == cfg.m_list);
        CHECK(again.seed == cfg.seed);
        CHECK(again.rho() == cfg.rho());
        CHECK(again.echo() == cfg.echo());
    }
}

TEST_CASE("campaign writes the documented artifact set deterministically") {
    TempDir dir_a("irssim_camp_a");
    TempDir dir_b("irssim_camp_b");
    const RunConfig cfg_a = RunConfig::parse(small_cfg_text(dir_a.path.string()));
    run_campaign(cfg_a);

    for (const char* name : {"manifest.txt", "run.log", "plot_results.py", "episode_summary.csv",
                             "timestep_rate.csv", "rate_vs_M.csv", "effrate_vs_M.csv"})
        CHECK(fs::exists(dir_a.path / name));

    const std::string timestep = slurp(dir_a.path / "timestep_rate.csv");
    CHECK(count_lines(timestep) == 1 + 2 * 5);  // header + 2 cells x 5 blocks
    const std::string episodes = slurp(dir_a.path / "episode_summary.csv");
    CHECK(count_lines(episodes) == 1 + 2 * 6);
    const std::string rate_m = slurp(dir_a.path / "rate_vs_M.csv");
    CHECK(count_lines(rate_m) == 1 + 2);

    // Rerunning the identical config elsewhere reproduces every CSV byte.
    RunConfig cfg_b = cfg_a;
    cfg_b.out_dir = dir_b.path.string();
    cfg_b.threads = 1;  // thread count must not matter
    run_campaign(cfg_b);
    for (const char* name :
         {"episode_summary.csv", "timestep_rate.csv", "rate_vs_M.csv", "effrate_vs_M.csv"})
        CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
}

TEST_CASE("aggregated CSV values match an independent reduction of episode rows") {
    TempDir dir("irssim_camp_c");
    RunConfig cfg = RunConfig::parse(small_cfg_text(dir.path.string()));
    cfg.m_list = {4};
    cfg.dump_blocks = true;
    run_campaign(cfg);

    // Recompute the grand mean from blocks.csv and compare with rate_vs_M.
    std::ifstream blocks(dir.path / "blocks.csv");
    std::string line;
    std::getline(blocks, line);  // header
    double acc = 0.0;
    int n = 0;
    while (std::getline(blocks, line)) {
        // column 8 (0-based 7) is rate_true
        std::istringstream ls(line);
        std::string tok;
        for (int i = 0; i < 8; ++i) std::getline(ls, tok, ',');
        acc += std::stod(tok);
        ++n;
    }
    CHECK(n == 6 * 5);
    std::ifstream ratem(dir.path / "rate_vs_M.csv");
    std::getline(ratem, line);
    std::getline(ratem, line);
    std::istringstream ls(line);
    std::string tok;
    for (int i = 0; i < 4; ++i) std::getline(ls, tok, ',');
    const double reported = std::stod(tok);
    CHECK(reported == doctest::Approx(acc / n).epsilon(1e-9));
}

TEST_CASE("unwritable output fails before any simulation") {
    RunConfig cfg = RunConfig::parse(small_cfg_text("/proc/definitely/not/writable"));
    CHECK_THROWS(run_campaign(cfg));
}

TEST_CASE("DPIC utilization without a checkpoint is rejected up front") {
    TempDir dir("irssim_camp_d");
    RunConfig cfg = RunConfig::parse(small_cfg_text(dir.path.string()));
    cfg.strategy = "MDPIC";
    CHECK_THROWS_WITH_AS(run_campaign(cfg), doctest::Contains("checkpoint"), std::runtime_error);
}

TEST_CASE("training campaign writes a curve and a checkpoint that utilization can load") {
    TempDir dir("irssim_camp_e");
    RunConfig cfg = RunConfig::parse(small_cfg_text(dir.path.string()));
    cfg.strategy = "RA_SDPIC";
    cfg.phase = "train";
    cfg.m_list = {2};
    cfg.n_episodes = 3;
    cfg.n_blocks = 6;
    cfg.l1 = 12;
    cfg.l2 = 12;
    cfg.k_directions = 16;
    cfg.checkpoint = (dir.path / "agents.ckpt").string();
    run_campaign(cfg);

    CHECK(fs::exists(dir.path / "training_curve.csv"));
    const std::string curve = slurp(dir.path / "training_curve.csv");
    CHECK(count_lines(curve) == 1 + 3);
    REQUIRE(fs::exists(dir.path / "agents.ckpt"));

    RunConfig util = cfg;
    util.phase = "utilize";
    util.out_dir = (dir.path / "util").string();
    util.n_episodes = 4;
    run_campaign(util);
    CHECK(fs::exists(dir.path / "util" / "rate_vs_M.csv"));
    const std::string episodes = slurp(dir.path / "util" / "episode_summary.csv");
    CHECK(count_lines(episodes) == 1 + 4);
}
