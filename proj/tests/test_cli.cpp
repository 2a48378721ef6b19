#include "doctest.h"
#include "support.hpp"

#include "stpod/decomposition.hpp"
#include "stpod/io.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

namespace {

int run(const std::string& args, const testing::TempDir& dir) {
    const std::string cmd = "cd '" + dir.path().string() + "' && '" STPOD_CLI_PATH "' " + args + " >out.txt 2>err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate writes a loadable, reproducible file") {
    testing::TempDir dir("cli");
    REQUIRE(run("generate --kind ou --n 1000 --dt 0.1 --seed 7 -o x.stpd", dir) == 0);
    const auto x = stpod::io::load_series(dir / "x.stpd");
    CHECK(x.dim() == 1);
    CHECK(x.length() == 1000);
    CHECK(x.dt() == 0.1);
    REQUIRE(run("generate --kind ou --n 1000 --dt 0.1 --seed 7 -o y.stpd", dir) == 0);
    CHECK(slurp(dir / "x.stpd") == slurp(dir / "y.stpd"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "x.stpd.manifest.json"));
    CHECK(manifest["command"] == "generate");
    CHECK(manifest["seeds"][0] == 7);
    CHECK(manifest.contains("threads"));
    CHECK(manifest["config"]["kind"] == "ou");
}

TEST_CASE("usage errors exit with status 2") {
    testing::TempDir dir("cli");
    CHECK(run("generate --kind bogus -o y.stpd", dir) == 2);
    CHECK(slurp(dir / "err.txt").find("--help") != std::string::npos);
    CHECK(run("", dir) == 2);
    CHECK(run("study --trials 0 -o s", dir) == 2);
    CHECK(run("decompose -i missing.stpd -o m.stpm", dir) == 2);
    CHECK(run("--help", dir) == 0);
}

TEST_CASE("decompose contracts") {
    testing::TempDir dir("cli");
    REQUIRE(run("generate --kind ou --tau 10 --n 500 --dt 0.1 --seed 3 -o x.stpd", dir) == 0);

    REQUIRE(run("decompose --method hankel --d 21 -i x.stpd -o h.stpm", dir) == 0);
    const auto h = stpod::io::load_modes(dir / "h.stpm");
    CHECK(h.rank() == std::min<Eigen::Index>(21, 480));
    CHECK(h.method == stpod::PodMethod::Hankel);
    auto mh = nlohmann::json::parse(slurp(dir / "h.stpm.manifest.json"));
    CHECK(mh["T"].get<double>() == doctest::Approx(2.0));
    CHECK(mh["m_used"] == 480);
    CHECK(std::filesystem::exists(dir / "h.stpm.energies.csv"));

    REQUIRE(run("decompose --method spaced --d 21 --s 10 -i x.stpd -o s.stpm", dir) == 0);
    auto ms = nlohmann::json::parse(slurp(dir / "s.stpm.manifest.json"));
    CHECK(ms["T"].get<double>() == doctest::Approx(2.0));
    CHECK(ms["m_used"] == 48);

    REQUIRE(run("decompose --method toeplitz --d 30 -i x.stpd -o t.stpm", dir) == 0);
    const auto t = stpod::io::load_modes(dir / "t.stpm");
    const auto lib = stpod::spacetime_pod_toeplitz(stpod::io::load_series(dir / "x.stpd"), 30,
                                                   stpod::WeightSpec::uniform(1), 0);
    CHECK(t.energies == lib.energies);
    CHECK(t.modes == lib.modes);

    REQUIRE(run("decompose --method spod --n-fft 32 --window hann --overlap 0.5 -i x.stpd -o f.stpf", dir) == 0);
    CHECK(run("info f.stpf", dir) == 0);
    CHECK(slurp(dir / "out.txt").find("n_fft: 32") != std::string::npos);

    CHECK(run("decompose --method hankel --d 600 -i x.stpd -o bad.stpm", dir) == 2);
    CHECK(slurp(dir / "err.txt").find("series shorter than embedding window") != std::string::npos);
    std::ofstream(dir / "w.txt") << "1,2\n";
    CHECK(run("decompose --method space-only --weight w.txt -i x.stpd -o bad.stpm", dir) == 2);
    std::ofstream(dir / "broken.stpd") << "STPD";
    CHECK(run("decompose -i broken.stpd -o bad.stpm", dir) == 1);
}

TEST_CASE("configuration file with flag overrides") {
    testing::TempDir dir("cli");
    std::ofstream(dir / "gen.cfg") << "# generator\nkind = narrowband\nn = 200\ndt = 0.5\nseed = 4\namplitude = 1,0.5\n";
    REQUIRE(run("generate --config gen.cfg --n 150 -o x.csv", dir) == 0);
    const auto x = stpod::io::load_series(dir / "x.csv");
    CHECK(x.dim() == 2);
    CHECK(x.length() == 150);
    CHECK(x.dt() == 0.5);
    std::ofstream(dir / "bad.cfg") << "nonsense = 1\n";
    CHECK(run("generate --config bad.cfg -o y.csv", dir) == 2);
}

TEST_CASE("study writes long-format CSV deterministically") {
    testing::TempDir dir("cli");
    std::ofstream(dir / "st.cfg") << "type = convergence\ntau = 10\nm = 25,50\nd = 20\ns = 10\n"
                                     "methods = hankel,spaced\ntrials = 4\nseed = 9\n";
    REQUIRE(run("study --config st.cfg -o a", dir) == 0);
    REQUIRE(run("study --config st.cfg --threads 2 -o b", dir) == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    std::ifstream in(dir / "a.csv");
    std::string line;
    int rows = -1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * 2 * 4);
    const auto summary = nlohmann::json::parse(slurp(dir / "a.json"));
    CHECK(summary["cells"].size() == 4);
    const auto manifest = nlohmann::json::parse(slurp(dir / "b.manifest.json"));
    CHECK(manifest["threads"] == 2);
}

TEST_CASE("bench reports timings and slopes") {
    testing::TempDir dir("cli");
    REQUIRE(run("bench --reps 5 --tall-rows 120 --svd-m 20,40 --spaced-columns 80 --toeplitz-m 10 "
                "--toeplitz-nd 40,80 -o bench",
                dir) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "bench.json"));
    CHECK(report["slopes"].size() == 3);
    CHECK(report["timings"].size() == 2 + 2 + 4);
    CHECK(run("bench --reps 3", dir) == 2);
}

}
