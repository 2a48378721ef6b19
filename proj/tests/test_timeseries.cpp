#include "doctest.h"
#include "support.hpp"

#include "stpod/error.hpp"
#include "stpod/io.hpp"
#include "stpod/timeseries.hpp"

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <fstream>
#include <numbers>

using namespace stpod;

namespace {

/// Independent Lyapunov oracle: solves (I (x) A + A (x) I) vec(S) = -vec(B B^T).
Eigen::MatrixXd kronecker_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            k.block(i * n, j * n, n, n) += a(i, j) * id;
            k.block(i * n, j * n, n, n) += id(i, j) * a;
        }
    const Eigen::MatrixXd q = b * b.transpose();
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
    Eigen::VectorXd s = k.fullPivLu().solve(rhs);
    return Eigen::Map<Eigen::MatrixXd>(s.data(), n, n);
}

Eigen::MatrixXd sample_lag_covariance(const Eigen::MatrixXd& q, Eigen::Index lag) {
    const Eigen::Index count = q.cols() - lag;
    return q.rightCols(count) * q.leftCols(count).transpose() / static_cast<double>(count);
}

double centered_variance(const Eigen::RowVectorXd& x) {
    const double mean = x.mean();
    return (x.array() - mean).square().sum() / static_cast<double>(x.size());
}

}  // namespace

TEST_SUITE("timeseries") {

TEST_CASE("series invariants are enforced") {
    CHECK_THROWS_AS(SnapshotSeries(Eigen::MatrixXd(0, 3), 1.0), InputError);
    CHECK_THROWS_WITH_AS(SnapshotSeries(Eigen::MatrixXd(2, 0), 1.0), doctest::Contains("no snapshots"), InputError);
    CHECK_THROWS_AS(SnapshotSeries(Eigen::MatrixXd::Ones(2, 2), 0.0), InputError);
    CHECK_THROWS_AS(SnapshotSeries(Eigen::MatrixXd::Ones(2, 2), -1.0), InputError);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 4);
    bad(1, 3) = std::nan("");
    CHECK_THROWS_WITH_AS(SnapshotSeries(bad, 1.0), doctest::Contains("snapshot 3"), InputError);
    CHECK_THROWS_AS(SnapshotSeries(Eigen::MatrixXd::Ones(2, 2), 1.0, {"u"}), InputError);
    const SnapshotSeries ok(Eigen::MatrixXd::Ones(2, 5), 0.5, {"u", "v"});
    CHECK(ok.dim() == 2);
    CHECK(ok.length() == 5);
    CHECK(ok.head(3).length() == 3);
    CHECK(ok.head(3).dt() == 0.5);
}

TEST_CASE("scalar OU stationary variance, tau = 1, B = sqrt(2), dt = 0.01, n = 1e5") {
    // One series covers 1000 correlation times, so its variance estimate has a
    // standard error near 4.5%; the median over 20 seeds is checked at 5%.
    std::vector<double> variance, lag_ratio;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto q = generate(GeneratorSpec::scalar_ou(1.0, std::sqrt(2.0), seed), 100000, 0.01).values();
        variance.push_back(centered_variance(q.row(0)));
        lag_ratio.push_back(sample_lag_covariance(q, 100)(0, 0) / sample_lag_covariance(q, 0)(0, 0));
    }
    CHECK(testing::median(variance) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(testing::median(lag_ratio) == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("narrowband with zero bandwidth is a pure sinusoid") {
    NarrowbandParams p{2.0 * std::numbers::pi * 0.1, 0.0, Eigen::VectorXd::Ones(1), 0.0};
    const auto q = generate(GeneratorSpec{p, 3, 0}, 100, 1.0).values();
    const double c = 2.0 * std::cos(p.omega0);
    for (Eigen::Index k = 1; k + 1 < q.cols(); ++k) CHECK(q(0, k + 1) + q(0, k - 1) == doctest::Approx(c * q(0, k)));
    Eigen::FFT<double> fft;
    std::vector<double> x(q.data(), q.data() + q.size());
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, x);
    double total = 0.0;
    for (const auto& v : spec) total += std::norm(v);
    CHECK((std::norm(spec[10]) + std::norm(spec[90])) / total > 1.0 - 1e-10);
}

TEST_CASE("OU covariance matches the Lyapunov solution and its lag propagation") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << -1.0, 0.5, -0.5, -2.0;
    b << 1.0, 0.0, 0.5, 1.0;
    const Eigen::MatrixXd s_exact = kronecker_lyapunov(a, b);
    CHECK((ou_stationary_covariance(a, b) - s_exact).norm() <= 1e-10 * s_exact.norm());
    const double dt = 0.05;
    const Eigen::Index lag = 10;
    const Eigen::MatrixXd lag_exact = (a * (static_cast<double>(lag) * dt)).exp() * s_exact;
    CHECK((ou_lag_covariance(a, b, static_cast<double>(lag) * dt) - lag_exact).norm() <= 1e-10 * lag_exact.norm());

    // L >= 1e6 / N.
    const auto q = generate(GeneratorSpec{OuParams{a, b}, 17, 0}, 500000, dt).values();
    const Eigen::MatrixXd c0 = sample_lag_covariance(q, 0);
    const Eigen::MatrixXd ck = sample_lag_covariance(q, lag);
    CHECK((c0 - s_exact).norm() / s_exact.norm() < 0.05);
    CHECK((ck - lag_exact).norm() / lag_exact.norm() < 0.05);
}

TEST_CASE("generator rejects invalid specifications") {
    OuParams unstable{Eigen::MatrixXd::Constant(1, 1, 0.1), Eigen::MatrixXd::Ones(1, 1)};
    CHECK_THROWS_WITH_AS(generate(GeneratorSpec{unstable, 0, 0}, 10, 1.0), doctest::Contains("unstable OU drift"),
                         InputError);
    CHECK_THROWS_AS(generate(GeneratorSpec::scalar_ou(1.0, 1.0, 0), 10, 0.0), InputError);
    CHECK_THROWS_AS(generate(GeneratorSpec::scalar_ou(1.0, 1.0, 0), 10, -0.1), InputError);
    CHECK_THROWS_AS(generate(GeneratorSpec::scalar_ou(1.0, 1.0, 0), 0, 0.1), InputError);
    Lorenz63Params lz;
    lz.observed = {0, 5};
    CHECK_THROWS_AS(generate(GeneratorSpec{lz, 0, 0}, 10, 0.01), InputError);
}

TEST_CASE("generators are deterministic and burn-in drops a prefix") {
    Eigen::MatrixXd a(2, 2);
    a << -0.05, 0.2, -0.2, -0.05;
    const GeneratorSpec ou{OuParams{a, Eigen::MatrixXd::Identity(2, 2)}, 9, 0};
    CHECK(generate(ou, 300, 0.1).values() == generate(ou, 300, 0.1).values());
    GeneratorSpec burned = ou;
    burned.burn_in = 50;
    CHECK(generate(burned, 250, 0.1).values() == generate(ou, 300, 0.1).values().rightCols(250));

    NarrowbandParams nb{0.7, 0.01, Eigen::Vector3d(1.0, 0.5, -0.3), 0.2};
    const GeneratorSpec narrow{nb, 4, 10};
    CHECK(generate(narrow, 200, 1.0).values() == generate(narrow, 200, 1.0).values());

    const GeneratorSpec lorenz{Lorenz63Params{}, 2, 100};
    const auto x = generate(lorenz, 500, 0.01).values();
    CHECK(x == generate(lorenz, 500, 0.01).values());
    CHECK(x.allFinite());
    CHECK(x.cwiseAbs().maxCoeff() < 100.0);
    GeneratorSpec other = lorenz;
    other.seed = 3;
    CHECK(generate(other, 500, 0.01).values() != x);
}

TEST_CASE("lorenz63 observes the requested coordinates") {
    Lorenz63Params p;
    p.observed = {2};
    const GeneratorSpec one{p, 1, 0};
    const GeneratorSpec all{Lorenz63Params{}, 1, 0};
    const auto z = generate(one, 50, 0.02).values();
    const auto xyz = generate(all, 50, 0.02).values();
    REQUIRE(z.rows() == 1);
    CHECK(z.row(0) == xyz.row(2));
    CHECK(xyz(2, 49) > 0.0);
}

TEST_CASE("subtract_temporal_mean examples") {
    {
        const auto [s, mean] = subtract_temporal_mean(SnapshotSeries(Eigen::RowVector2d(1.0, 3.0), 1.0));
        CHECK(s.values() == Eigen::RowVector2d(-1.0, 1.0));
        CHECK(mean == Eigen::VectorXd::Constant(1, 2.0));
    }
    {
        const Eigen::MatrixXd z = (Eigen::MatrixXd(1, 2) << -1.0, 1.0).finished();
        const auto [s, mean] = subtract_temporal_mean(SnapshotSeries(z, 1.0));
        CHECK(s.values() == z);
        CHECK(mean.isZero(0.0));
    }
    {
        Eigen::MatrixXd q(2, 2);
        q << 1, 1, 0, 2;
        const auto [s, mean] = subtract_temporal_mean(SnapshotSeries(q, 1.0));
        Eigen::MatrixXd expected(2, 2);
        expected << 0, 0, -1, 1;
        CHECK(s.values() == expected);
        CHECK(mean == Eigen::Vector2d(1.0, 1.0));
    }
    const auto q = testing::gaussian(3, 101, 5).array() + 7.0;
    const auto [s, mean] = subtract_temporal_mean(SnapshotSeries(q, 1.0));
    CHECK(s.values().rowwise().mean().cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("decorrelation time of a scalar OU process") {
    std::vector<double> measured;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        measured.push_back(decorrelation_time(generate(GeneratorSpec::scalar_ou(10.0, 1.0, seed), 20000, 1.0)));
    CHECK(testing::median(measured) == doctest::Approx(10.0).epsilon(0.15));
}

}

TEST_SUITE("io") {

TEST_CASE("stpd round trip is bit exact") {
    testing::TempDir dir("io");
    const SnapshotSeries x(testing::gaussian(3, 5, 1), 0.1);
    io::save_series(x, dir / "x.stpd");
    const SnapshotSeries y = io::load_series(dir / "x.stpd");
    CHECK(y.values() == x.values());
    CHECK(y.dt() == x.dt());
    CHECK(std::filesystem::file_size(dir / "x.stpd") == 4 + 4 + 8 + 8 + 8 + 15 * 8);
}

TEST_CASE("stpd header layout is little-endian") {
    testing::TempDir dir("io");
    io::save_series(SnapshotSeries(Eigen::MatrixXd::Constant(2, 3, 1.5), 0.25), dir / "h.stpd");
    std::ifstream in(dir / "h.stpd", std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "STPD");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 2);
    CHECK(bytes[16] == 3);
    // 0.25 = 0x3FD0000000000000, most significant byte last.
    CHECK(bytes[31] == 0x3F);
    CHECK(bytes[30] == 0xD0);
}

TEST_CASE("csv round trip") {
    testing::TempDir dir("io");
    const SnapshotSeries x(testing::gaussian(2, 7, 2), 0.3);
    io::save_series(x, dir / "x.csv");
    const SnapshotSeries y = io::load_series(dir / "x.csv");
    CHECK(y.dt() == x.dt());
    CHECK((y.values() - x.values()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("csv errors carry positions") {
    testing::TempDir dir("io");
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return dir / name;
    };
    CHECK_THROWS_WITH_AS(io::load_series(write("row.csv", "dt=1\n1,2\n3,4\n5\n")), doctest::Contains("line 4"),
                         FormatError);
    CHECK_THROWS_WITH_AS(io::load_series(write("empty.csv", "")), doctest::Contains("no snapshots"), FormatError);
    CHECK_THROWS_WITH_AS(io::load_series(write("header.csv", "dt=0.5\n")), doctest::Contains("no snapshots"),
                         FormatError);
    CHECK_THROWS_WITH_AS(io::load_series(write("bad.csv", "time=1\n1\n")), doctest::Contains("malformed header"),
                         FormatError);
    CHECK_THROWS_WITH_AS(io::load_series(write("nan.csv", "dt=1\n1,2\n3,nan\n")),
                         doctest::Contains("line 3, field 2"), FormatError);
    CHECK_THROWS_WITH_AS(io::load_series(write("text.csv", "dt=1\n1,x\n")), doctest::Contains("line 2, field 2"),
                         FormatError);
    CHECK_THROWS_AS(io::load_series(write("neg.csv", "dt=-1\n1\n")), FormatError);
}

TEST_CASE("stpd errors") {
    testing::TempDir dir("io");
    io::save_series(SnapshotSeries(Eigen::MatrixXd::Ones(2, 4), 1.0), dir / "ok.stpd");
    const auto size = std::filesystem::file_size(dir / "ok.stpd");
    std::filesystem::copy_file(dir / "ok.stpd", dir / "short.stpd");
    std::filesystem::resize_file(dir / "short.stpd", size - 8);
    CHECK_THROWS_WITH_AS(io::load_series(dir / "short.stpd"), doctest::Contains("truncated"), FormatError);
    std::ofstream(dir / "magic.stpd") << "NOPE0000000000000000000000000000";
    CHECK_THROWS_WITH_AS(io::load_series(dir / "magic.stpd"), doctest::Contains("bad magic"), FormatError);
    std::ofstream(dir / "empty.stpd") << "";
    CHECK_THROWS_AS(io::load_series(dir / "empty.stpd"), FormatError);

    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(2, 4);
    io::save_series(SnapshotSeries(v, 1.0), dir / "nan.stpd");
    {
        std::fstream f(dir / "nan.stpd", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(32 + 8 * 5);
        const double bad = std::numeric_limits<double>::infinity();
        f.write(reinterpret_cast<const char*>(&bad), 8);
    }
    CHECK_THROWS_WITH_AS(io::load_series(dir / "nan.stpd"), doctest::Contains("component 1, column 2"), FormatError);
}

}
