#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stpod {

struct BenchConfig {
    /// Tall Hankel SVD (N d > m): time against m at fixed N d.
    Eigen::Index tall_rows = 600;
    std::vector<Eigen::Index> svd_m{40, 80, 160, 320};
    /// Hankel (s = 1) against spaced (s = spacing) at equal series length.
    Eigen::Index spacing = 4;
    Eigen::Index spaced_columns = 400;  ///< Hankel width; the spaced matrix has ~1/s of it
    /// Toeplitz eigendecomposition against Hankel SVD at fixed m, N d >> m.
    Eigen::Index toeplitz_m = 40;
    std::vector<Eigen::Index> toeplitz_nd{100, 200, 400, 800};
    Eigen::Index repetitions = 5;
    std::uint64_t seed = 1;
};

struct BenchTiming {
    std::string scenario;
    std::string method;
    Eigen::Index rows = 0;     ///< N d
    Eigen::Index columns = 0;  ///< m
    Eigen::Index spacing = 1;
    double seconds = 0.0;      ///< median over repetitions
    std::vector<double> samples;
};

struct BenchSlope {
    std::string scenario;
    std::string method;
    std::string variable;
    double slope = 0.0;
    double expected = 0.0;
    bool within_band = false;  ///< slope in [expected / 2, 2 expected]
};

struct BenchReport {
    std::vector<BenchTiming> timings;
    std::vector<BenchSlope> slopes;
    double spaced_speedup = 0.0;       ///< Hankel time / spaced time
    Eigen::Index spaced_s = 1;
    std::vector<double> toeplitz_ratio;           ///< Toeplitz time / Hankel time, per toeplitz_nd
    std::vector<double> toeplitz_ratio_predicted; ///< (N d / m)^2 per toeplitz_nd
    Eigen::Index repetitions = 0;
};

/// Median wall-clock seconds of `reps` runs after one warm-up run.
std::vector<double> time_repeated(const std::function<void()>& body, Eigen::Index reps);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

BenchReport run_bench(const BenchConfig& config);

std::string bench_report_csv(const BenchReport& report);
std::string bench_report_json(const BenchReport& report);

}  // namespace stpod
