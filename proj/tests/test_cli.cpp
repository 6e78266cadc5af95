#include "test_util.hpp"

#include "tsd/cli.hpp"
#include "tsd/io.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tsd;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("tsd_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return cli::run(args, out_, err_);
    }

    json report() const { return json::parse(out_.str()); }

    static std::string slurp(const std::string& p) {
        std::ifstream is(p, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, SynthIsDeterministic) {
    ASSERT_EQ(run({"synth", "--shape", "3,4,2", "--rank", "2", "--seed", "9", "--out", path("a.tsr")}), 0);
    ASSERT_EQ(run({"synth", "--shape", "3,4,2", "--rank", "2", "--seed", "9", "--out", path("b.tsr")}), 0);
    EXPECT_EQ(slurp(path("a.tsr")), slurp(path("b.tsr")));
    EXPECT_EQ(slurp(path("a.tsr.net")), slurp(path("b.tsr.net")));
}

TEST_F(Cli, SynthMatchesInMemoryReconstruction) {
    ASSERT_EQ(run({"synth", "--shape", "3,4,2", "--rank", "2", "--ring", "3", "--seed", "5", "--out",
                   path("x.tsr")}), 0);
    std::mt19937_64 rng(5);
    const auto net = random_network({3, 4, 2}, RankProfile::uniform(3, 2, 3), rng);
    EXPECT_EQ(io::read_network(path("x.tsr.net")), net);
    EXPECT_EQ(io::read_tensor(path("x.tsr")), reconstruct(net));
    const auto r = report();
    EXPECT_EQ(r["config"]["seed"], 5);
    EXPECT_EQ(r["config"]["profile"]["L"], json::array({3, 3, 3}));
    EXPECT_EQ(r["result"]["param_count"], param_count(net));
}

TEST_F(Cli, SynthRankOneIsScaledOuterProduct) {
    ASSERT_EQ(run({"synth", "--shape", "2,3,2", "--rank", "1", "--out", path("x.tsr")}), 0);
    const auto net = io::read_network(path("x.tsr.net"));
    const auto x = io::read_tensor(path("x.tsr"));
    const double c = net.cores[0][0] * net.cores[1][0] * net.cores[2][0];
    tsd::testing::for_each_index(x.shape(), [&](const std::vector<std::size_t>& i) {
        EXPECT_NEAR(x[tsd::testing::offset_of(i, x.shape())],
                    c * net.factors[0][i[0]] * net.factors[1][i[1]] * net.factors[2][i[2]], 1e-14);
    });
}

TEST_F(Cli, SynthWithProfileFile) {
    std::ofstream(path("p.json")) << R"({"R1": [1, 2, 1], "R2": [2, 1, 1], "L": [1, 1, 2]})";
    ASSERT_EQ(run({"synth", "--shape", "2,3,2", "--profile", path("p.json"), "--out", path("x.tsr")}), 0);
    const auto net = io::read_network(path("x.tsr.net"));
    EXPECT_EQ(net.profile.left, (std::vector<std::size_t>{1, 2, 1}));
    EXPECT_EQ(report()["config"]["profile"]["source"], path("p.json"));
}

TEST_F(Cli, MaskCounts) {
    ASSERT_EQ(run({"mask", "--shape", "3,4,5", "--fraction", "1", "--out", path("m.tsm")}), 0);
    EXPECT_EQ(io::read_mask(path("m.tsm")), ObservationMask::full({3, 4, 5}));
    ASSERT_EQ(run({"mask", "--shape", "200,200,31", "--fraction", "0.1", "--seed", "3", "--out",
                   path("big.tsm")}), 0);
    EXPECT_EQ(report()["result"]["count"], 124000);
    EXPECT_EQ(run({"mask", "--shape", "3,4", "--fraction", "0", "--out", path("z.tsm")}), 1);
}

TEST_F(Cli, DecomposePlantedRankOne) {
    ASSERT_EQ(run({"synth", "--shape", "3,4,3", "--rank", "1", "--seed", "2", "--out", path("x.tsr")}), 0);
    ASSERT_EQ(run({"decompose", path("x.tsr"), "--rank", "1", "--tol", "1e-8", "--out", path("fit.tsn")}), 0);
    const auto r = report();
    EXPECT_LE(r["result"]["final_error"].get<double>(), 1e-3);
    EXPECT_EQ(r["result"]["param_count"], 13);
    for (const char* key : {"input", "profile", "tol", "max_iter", "seed", "svd_cutoff", "out"})
        EXPECT_TRUE(r["config"].contains(key)) << key;
    EXPECT_LE(frobenius_distance(reconstruct(io::read_network(path("fit.tsn"))), io::read_tensor(path("x.tsr"))),
              1e-6 * frobenius_norm(io::read_tensor(path("x.tsr"))));
}

TEST_F(Cli, DecomposeZeroTensor) {
    io::write_tensor(path("z.tsr"), DenseTensor(Shape{3, 3, 3}));
    ASSERT_EQ(run({"decompose", path("z.tsr"), "--rank", "2"}), 0);
    EXPECT_EQ(report()["result"]["final_error"].get<double>(), 0.0);
}

TEST_F(Cli, DecomposeNotConvergedExitCode) {
    std::mt19937_64 rng(1);
    io::write_tensor(path("r.tsr"), tsd::testing::random_tensor({4, 4, 4}, rng));
    EXPECT_EQ(run({"decompose", path("r.tsr"), "--rank", "1", "--max-iter", "2", "--json", path("r.json")}), 2);
    const auto r = json::parse(slurp(path("r.json")));
    EXPECT_EQ(r["result"]["converged"], false);
    EXPECT_EQ(r["result"]["sweeps"], 2);
}

TEST_F(Cli, CorruptHeaderDiagnostic) {
    std::ofstream os(path("bad.tsr"), std::ios::binary);
    os.write("TSR1", 4);
    const char order[8] = {3, 0, 0, 0, 0, 0, 0, 0};
    const char ext[8] = {2, 0, 0, 0, 0, 0, 0, 0};
    os.write(order, 8);
    os.write(ext, 8);
    os.close();
    EXPECT_EQ(run({"decompose", path("bad.tsr"), "--rank", "1"}), 1);
    EXPECT_NE(err_.str().find("order field"), std::string::npos) << err_.str();
}

TEST_F(Cli, CompleteFullyObservedKeepsData) {
    ASSERT_EQ(run({"synth", "--shape", "3,4,3", "--rank", "2", "--out", path("x.tsr")}), 0);
    ASSERT_EQ(run({"mask", "--shape", "3,4,3", "--fraction", "1", "--out", path("m.tsm")}), 0);
    ASSERT_EQ(run({"complete", path("x.tsr"), "--mask", path("m.tsm"), "--rank", "2", "--out", path("y.tsr"),
                   "--truth", path("x.tsr"), "--net", path("y.tsn")}), 0);
    EXPECT_EQ(slurp(path("x.tsr")), slurp(path("y.tsr")));
    const auto r = report();
    for (const char* key : {"input", "mask", "profile", "rho", "tol", "max_iter", "seed", "truth", "out"})
        EXPECT_TRUE(r["config"].contains(key)) << key;
    EXPECT_EQ(r["config"]["rho"].get<double>(), 0.01);
    EXPECT_TRUE(r["result"].contains("metrics"));
    EXPECT_TRUE(fs::exists(path("y.tsn")));
}

TEST_F(Cli, CompleteRejectsMismatchedMask) {
    ASSERT_EQ(run({"synth", "--shape", "3,4,3", "--rank", "1", "--out", path("x.tsr")}), 0);
    ASSERT_EQ(run({"mask", "--shape", "3,4,4", "--fraction", "0.5", "--out", path("m.tsm")}), 0);
    EXPECT_EQ(run({"complete", path("x.tsr"), "--mask", path("m.tsm"), "--rank", "1"}), 1);
    io::write_mask(path("e.tsm"), ObservationMask::none({3, 4, 3}));
    EXPECT_EQ(run({"complete", path("x.tsr"), "--mask", path("e.tsm"), "--rank", "1"}), 1);
    EXPECT_NE(err_.str().find("empty"), std::string::npos);
}

TEST_F(Cli, MetricsCommand) {
    ASSERT_EQ(run({"synth", "--shape", "3,4,3", "--rank", "1", "--out", path("x.tsr")}), 0);
    ASSERT_EQ(run({"metrics", path("x.tsr"), "--truth", path("x.tsr")}), 0);
    const auto r = report();
    EXPECT_EQ(r["result"]["rse_missing"].get<double>(), 0.0);
    EXPECT_EQ(r["result"]["mpsnr"].get<double>(), 100.0);
}

TEST_F(Cli, InspectAndDumpCsv) {
    io::write_tensor(path("t.tsr"), DenseTensor({2}, {1.0, 2.5}));
    ASSERT_EQ(run({"inspect", path("t.tsr"), "--dump-csv"}), 0);
    EXPECT_EQ(out_.str(), "0,1\n1,2.5\n");
    ASSERT_EQ(run({"inspect", path("t.tsr")}), 0);
    EXPECT_EQ(report()["kind"], "tensor");
    io::write_mask(path("m.tsm"), ObservationMask({2}, {1}));
    ASSERT_EQ(run({"inspect", path("m.tsm")}), 0);
    EXPECT_EQ(report()["count"], 1);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({}), 1);
    EXPECT_EQ(run({"bogus"}), 1);
    EXPECT_EQ(run({"synth", "--shape", "2,2,2", "--out", path("x.tsr")}), 1);
    EXPECT_NE(err_.str().find("--rank"), std::string::npos);
    EXPECT_EQ(run({"decompose", path("missing.tsr"), "--rank", "1"}), 1);
    EXPECT_EQ(run({"--help"}), 0);
}
