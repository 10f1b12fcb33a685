// End-to-end runs of the conlab binary.

#include "consensus_lab/consensus_lab.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using consensus_lab::json;

namespace {

struct Invocation {
    int status;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("conlab_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    Invocation run(const std::string& args) const {
        const auto out = path("stdout.txt"), err = path("stderr.txt");
        const std::string cmd = std::string(CONLAB_BIN) + " " + args + " > " + out + " 2> " + err;
        const int raw = std::system(cmd.c_str());
        return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
};

const std::string data_dir = CONLAB_DATA;

} // namespace

TEST_F(Cli, GenerateThenStationary) {
    auto g = run("generate --family drift_line --n 3 --delta 0.3333333333 -o " + path("m.smat"));
    ASSERT_EQ(g.status, 0) << g.err;
    auto s = run("stationary -i " + path("m.smat") + " --method direct");
    ASSERT_EQ(s.status, 0) << s.err;
    auto j = json::parse(s.out);
    EXPECT_NEAR(j["weights"][0].get<double>(), 4.0 / 7.0, 1e-9);
    EXPECT_NEAR(j["weights"][1].get<double>(), 2.0 / 7.0, 1e-9);
    EXPECT_NEAR(j["weights"][2].get<double>(), 1.0 / 7.0, 1e-9);
}

TEST_F(Cli, ScanHomophilyCsvAndJson) {
    auto r = run("scan --family lazy_torus --dim 2 --tau 0.1 --perturb " + data_dir + "/homophily.pert" +
                 " --lambda 100 --n 2:10 --track 0,0 -o " + path("fig.csv") + " --json " + path("fig.json"));
    ASSERT_EQ(r.status, 0) << r.err;
    std::ifstream csv(path("fig.csv"));
    auto table = consensus_lab::read_scan_csv(csv);
    ASSERT_EQ(table.records.size(), 9u);
    for (std::size_t k = 3; k < table.records.size(); ++k)
        EXPECT_LT(table.records[k].max_weight, table.records[k - 1].max_weight);

    // Re-emitting the parsed CSV reproduces the file byte for byte.
    std::ostringstream again;
    consensus_lab::write_scan_csv(again, table.records, table.tracked);
    EXPECT_EQ(again.str(), slurp(path("fig.csv")));

    auto summary = json::parse(slurp(path("fig.json")));
    EXPECT_EQ(summary["records"].size(), 9u);
    EXPECT_EQ(summary["perturbation"]["payload"]["lambda"].get<double>(), 100.0);
    EXPECT_EQ(summary.dump(2) + "\n", slurp(path("fig.json")));
}

TEST_F(Cli, ScanIsIndependentOfThreads) {
    const std::string args = "scan --fam " + data_dir + "/torus.fam --perturb " + data_dir + "/homophily.pert --n 2:7 --track 1,1";
    auto one = run(args + " --threads 1");
    auto many = run(args + " --threads 3");
    ASSERT_EQ(one.status, 0) << one.err;
    EXPECT_EQ(one.out, many.out);
    auto env = run("scan --fam " + data_dir + "/torus.fam --n 2:3");
    EXPECT_EQ(env.status, 0);
}

TEST_F(Cli, VerifyKacOnInput) {
    ASSERT_EQ(run("generate --family drift_cycle --delta 0.75 --perturb-zero --n 20 -o " + path("c.smat")).status, 0);
    auto v = run("verify kac -i " + path("c.smat") + " --nodes all --tol 1e-8");
    EXPECT_EQ(v.status, 0) << v.out << v.err;
    auto report = json::parse(v.out);
    EXPECT_EQ(report[0]["status"], "pass");
}

TEST_F(Cli, VerifyDegreeBoundSkipsNonSrw) {
    ASSERT_EQ(run("generate --family drift_line --delta 0.3 --n 6 -o " + path("d.smat")).status, 0);
    auto v = run("verify degree-bound -i " + path("d.smat"));
    EXPECT_EQ(v.status, 0);
    auto report = json::parse(v.out);
    EXPECT_EQ(report[0]["status"], "skip");
    EXPECT_TRUE(report[0].contains("reason"));
}

TEST_F(Cli, HittingAndReturn) {
    ASSERT_EQ(run("generate --family drift_line --delta 0.3333333333333333 --n 3 -o " + path("m.smat")).status, 0);
    auto ret = run("hitting -i " + path("m.smat") + " --return 0");
    ASSERT_EQ(ret.status, 0) << ret.err;
    EXPECT_NEAR(json::parse(ret.out)["value"].get<double>(), 1.75, 1e-12);
    auto hit = run("hitting -i " + path("m.smat") + " --target 0 --start 2");
    ASSERT_EQ(hit.status, 0) << hit.err;
    auto j = json::parse(hit.out);
    EXPECT_GT(j["value"].get<double>(), 2.0);
    EXPECT_TRUE(j.contains("residual"));
    EXPECT_TRUE(j.contains("method"));
}

TEST_F(Cli, SimulateReproducibleAndReportsSeed) {
    ASSERT_EQ(run("generate --family grid --dim 2 --n 2 --tau 0.1 -o " + path("g.smat")).status, 0);
    auto a = run("simulate -i " + path("g.smat") + " --node 12 --samples 3000 --seed 17");
    auto b = run("simulate -i " + path("g.smat") + " --node 12 --samples 3000 --seed 17 --threads 2");
    ASSERT_EQ(a.status, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    auto fresh = json::parse(run("simulate -i " + path("g.smat") + " --node 0 --samples 10").out);
    EXPECT_TRUE(fresh["seed"].is_number_unsigned());
    auto occ = run("simulate -i " + path("g.smat") + " --occupation --steps 30000 --burn-in 100 --seed 3");
    ASSERT_EQ(occ.status, 0) << occ.err;
    EXPECT_EQ(json::parse(occ.out)["weights"].size(), 25u);
}

TEST_F(Cli, PerturbWritesMatrix) {
    auto r = run("perturb --fam " + data_dir + "/torus.fam --n 3 --spec " + data_dir + "/homophily.pert -o " + path("h.smat"));
    ASSERT_EQ(r.status, 0) << r.err;
    auto m = consensus_lab::read_smat_file(path("h.smat"));
    EXPECT_EQ(m.dimension(), 49u);
    auto base = consensus_lab::lazy_torus(2, 3, 0.1);
    auto member = consensus_lab::GraphFamily::torus(2, 0.1).generate(3);
    auto expected = consensus_lab::homophily(base, consensus_lab::lattice_box_indices(member, -1, 1), 100.0);
    EXPECT_EQ(m, expected);
}

TEST_F(Cli, UsageAndFormatErrorsExitTwo) {
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("generate --family grid --n 2 --bogus").status, 2);
    EXPECT_EQ(run("stationary -i " + path("missing.smat")).status, 2);
    EXPECT_EQ(run("scan --family grid --n 5:2").status, 2);
    EXPECT_EQ(run("generate --family grid --dim 2 --n 2 --tau 1.5").status, 2);

    std::ofstream(path("bad.smat")) << "SMAT 1 2\n0 0 0.5\n0 1 0.4\n1 1 1\nEND\n";
    auto bad = run("verify kac -i " + path("bad.smat"));
    EXPECT_EQ(bad.status, 2);
    EXPECT_NE(bad.err.find("not row-stochastic"), std::string::npos);
    EXPECT_EQ(bad.err.find('\n'), bad.err.size() - 1);
}

TEST_F(Cli, ComputationErrorsExitOneWithJson) {
    std::ofstream(path("red.smat")) << "SMAT 1 2\n0 0 1\n1 0 0.5\n1 1 0.5\nEND\n";
    auto r = run("stationary -i " + path("red.smat"));
    EXPECT_EQ(r.status, 1);
    auto err = json::parse(r.err);
    EXPECT_EQ(err["error"], "reducible_chain");
    EXPECT_EQ(err["components"].size(), 2u);

    auto power = run("stationary --family drift_line --delta 0.75 --n 40 --method power --tol 1e-15 --max-iter 3");
    EXPECT_EQ(power.status, 1);
    EXPECT_EQ(json::parse(power.err)["error"], "convergence_failure");

    ASSERT_EQ(run("generate --family drift_line --delta 0.75 --n 30 -o " + path("l.smat")).status, 0);
    auto cap = run("simulate -i " + path("l.smat") + " --node 0 --samples 20 --seed 1 --step-cap 5");
    EXPECT_EQ(cap.status, 1);
    auto capj = json::parse(cap.err);
    EXPECT_EQ(capj["error"], "step_cap_exceeded");
    EXPECT_GT(capj["step_cap_hits"].get<int>(), 0);
}
