#include "stpod/bench.hpp"

#include "stpod/correlation.hpp"
#include "stpod/decomposition.hpp"
#include "stpod/error.hpp"
#include "stpod/rng.hpp"
#include "stpod/study.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace stpod {

namespace {

SnapshotSeries white_series(Eigen::Index n, Eigen::Index length, std::uint64_t seed) {
    NormalStream rng(seed, 0);
    Eigen::MatrixXd q(n, length);
    for (Eigen::Index k = 0; k < q.size(); ++k) q.data()[k] = rng.next();
    return SnapshotSeries(std::move(q), 1.0);
}

BenchTiming timed(const std::string& scenario, const std::string& method, Eigen::Index rows, Eigen::Index columns,
                  Eigen::Index spacing, const std::function<void()>& body, Eigen::Index reps) {
    BenchTiming t{scenario, method, rows, columns, spacing, 0.0, time_repeated(body, reps)};
    t.seconds = sample_median(t.samples);
    return t;
}

BenchSlope slope_of(const std::vector<BenchTiming>& timings, const std::string& scenario, const std::string& method,
                    bool against_rows, double expected) {
    std::vector<double> x, y;
    for (const auto& t : timings)
        if (t.scenario == scenario && t.method == method) {
            x.push_back(static_cast<double>(against_rows ? t.rows : t.columns));
            y.push_back(t.seconds);
        }
    BenchSlope s{scenario, method, against_rows ? "Nd" : "m", loglog_slope(x, y), expected, false};
    s.within_band = s.slope >= expected / 2.0 && s.slope <= expected * 2.0;
    return s;
}

}  // namespace

std::vector<double> time_repeated(const std::function<void()>& body, Eigen::Index reps) {
    detail::require(reps >= 1, "repetitions must be at least 1");
    body();
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(reps));
    for (Eigen::Index r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        body();
        const auto stop = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double>(stop - start).count());
    }
    return samples;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    detail::require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
    double mx = 0.0, my = 0.0;
    const auto n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(std::max(y[i], 1e-12));
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(std::max(y[i], 1e-12)) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

BenchReport run_bench(const BenchConfig& config) {
    detail::require(config.repetitions >= 5, "bench needs at least 5 repetitions");
    detail::require(config.svd_m.size() >= 2 && config.toeplitz_nd.size() >= 2, "bench grids need two sizes each");
    detail::require(config.spacing >= 1 && config.tall_rows >= 1 && config.toeplitz_m >= 1, "invalid bench sizes");
    BenchReport report;
    report.repetitions = config.repetitions;
    report.spaced_s = config.spacing;
    const WeightSpec scalar = WeightSpec::uniform(1);

    // Tall SVD: scalar series with d = tall_rows.
    for (Eigen::Index m : config.svd_m) {
        detail::require(config.tall_rows > m, "tall SVD scenario needs N d > m");
        const SnapshotSeries s = white_series(1, m + config.tall_rows - 1, derive_seed(config.seed, 1, m));
        report.timings.push_back(timed(
            "svd-width", "hankel", config.tall_rows, m, 1,
            [&] { (void)spacetime_pod(s, config.tall_rows, 1, scalar); }, config.repetitions));
    }
    report.slopes.push_back(slope_of(report.timings, "svd-width", "hankel", false, 2.0));

    // Hankel vs spaced on the same series.
    {
        const Eigen::Index d = config.tall_rows;
        const Eigen::Index length = config.spaced_columns + d - 1;
        const SnapshotSeries s = white_series(1, length, derive_seed(config.seed, 2));
        const auto hankel = timed(
            "spacing", "hankel", d, config.spaced_columns, 1, [&] { (void)spacetime_pod(s, d, 1, scalar); },
            config.repetitions);
        const auto spaced = timed(
            "spacing", "spaced", d, embedded_columns(length, d, config.spacing), config.spacing,
            [&] { (void)spacetime_pod(s, d, config.spacing, scalar); }, config.repetitions);
        report.spaced_speedup = hankel.seconds / spaced.seconds;
        report.timings.push_back(hankel);
        report.timings.push_back(spaced);
    }

    // Toeplitz vs Hankel with N d >> m.
    for (Eigen::Index nd : config.toeplitz_nd) {
        const Eigen::Index m = config.toeplitz_m;
        const SnapshotSeries s = white_series(1, m + nd - 1, derive_seed(config.seed, 3, nd));
        const auto h = timed(
            "toeplitz", "hankel", nd, m, 1, [&] { (void)spacetime_pod(s, nd, 1, scalar); }, config.repetitions);
        ToeplitzOptions dense;
        dense.dense_limit = std::numeric_limits<Eigen::Index>::max();
        const auto t = timed(
            "toeplitz", "toeplitz", nd, m, 1,
            [&] { (void)spacetime_pod_toeplitz(s, nd, scalar, 0, dense); }, config.repetitions);
        report.toeplitz_ratio.push_back(t.seconds / h.seconds);
        const double r = static_cast<double>(nd) / static_cast<double>(m);
        report.toeplitz_ratio_predicted.push_back(r * r);
        report.timings.push_back(h);
        report.timings.push_back(t);
    }
    report.slopes.push_back(slope_of(report.timings, "toeplitz", "hankel", true, 1.0));
    report.slopes.push_back(slope_of(report.timings, "toeplitz", "toeplitz", true, 3.0));
    return report;
}

std::string bench_report_csv(const BenchReport& report) {
    std::ostringstream out;
    out << std::setprecision(6);
    out << "scenario,method,Nd,m,s,median_seconds,repetitions\n";
    for (const auto& t : report.timings)
        out << t.scenario << ',' << t.method << ',' << t.rows << ',' << t.columns << ',' << t.spacing << ','
            << t.seconds << ',' << t.samples.size() << '\n';
    return out.str();
}

std::string bench_report_json(const BenchReport& report) {
    using nlohmann::json;
    json j;
    j["repetitions"] = report.repetitions;
    j["timings"] = json::array();
    for (const auto& t : report.timings)
        j["timings"].push_back({{"scenario", t.scenario},
                                {"method", t.method},
                                {"Nd", t.rows},
                                {"m", t.columns},
                                {"s", t.spacing},
                                {"median_seconds", t.seconds},
                                {"samples", t.samples}});
    j["slopes"] = json::array();
    for (const auto& s : report.slopes)
        j["slopes"].push_back({{"scenario", s.scenario},
                               {"method", s.method},
                               {"variable", s.variable},
                               {"slope", s.slope},
                               {"expected", s.expected},
                               {"within_2x_band", s.within_band}});
    const double sd = static_cast<double>(report.spaced_s);
    j["spaced_speedup"] = {{"s", report.spaced_s},
                           {"measured", report.spaced_speedup},
                           {"band", {sd, 1.5 * sd * sd}},
                           {"within_band", report.spaced_speedup >= sd && report.spaced_speedup <= 1.5 * sd * sd}};
    j["toeplitz_over_hankel"] = {{"measured", report.toeplitz_ratio}, {"predicted", report.toeplitz_ratio_predicted}};
    return j.dump(2);
}

}  // namespace stpod
