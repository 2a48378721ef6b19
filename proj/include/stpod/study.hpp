#pragma once

#include "stpod/decomposition.hpp"
#include "stpod/timeseries.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace stpod {

enum class StudyMetric { ModeSimilarity, CapturedEnergy, CumulativeEnergy };

std::string to_string(StudyMetric metric);
StudyMetric study_metric_from_string(const std::string& name);

/// Histogram normalized as a density: sum(density * width) == 1.
struct SamplePdf {
    std::vector<double> edges;    ///< bins + 1 entries
    std::vector<double> density;  ///< bins entries
};

/// 50 equal-width bins over [min, max] of the samples.
SamplePdf sample_pdf(const std::vector<double>& samples, std::size_t bins = 50);
double sample_median(std::vector<double> samples);
double sample_mean(const std::vector<double>& samples);

struct StudyCell {
    std::string method;  ///< hankel, spaced, toeplitz, space-only
    Eigen::Index m = 0;
    Eigen::Index d = 1;
    Eigen::Index s = 1;
    Eigen::Index n_space = 1;
    Eigen::Index length = 0;  ///< snapshots consumed per trial
    double window = 0.0;      ///< T
    std::vector<double> samples;
    std::vector<double> aux;  ///< optional per-trial side value, see StudyReport::aux_name
    std::vector<std::uint64_t> seeds;

    double mean = 0.0;
    double median = 0.0;
    SamplePdf pdf;
};

struct ReferenceInfo {
    Eigen::Index d = 1;
    Eigen::Index length = 0;
    std::uint64_t seed_a = 0;
    std::uint64_t seed_b = 0;
    double gate_similarity = 0.0;
    Eigen::VectorXd energies;  ///< leading energies of the kept reference
};

struct StudyReport {
    std::string kind;
    std::string metric;
    std::string aux_name;
    std::string generator;
    double dt = 1.0;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    Eigen::Index metric_k = 1;
    bool subtract_mean = false;
    double decorrelation_time = 0.0;  ///< measured on a reference-length run
    std::vector<StudyCell> cells;
    std::vector<ReferenceInfo> references;
    /// Hankel column factor c per spaced cell: Hankel columns needed to match
    /// the spaced median, over m. NaN when the Hankel grid never reaches it.
    std::vector<std::pair<std::size_t, double>> hankel_factor;

    const StudyCell& cell(const std::string& method, Eigen::Index m, Eigen::Index d, Eigen::Index s = 1) const;
};

/// Grid: every d in d_values, every m in m_values, every method (spaced once
/// per spacing), plus Hankel-only cells for hankel_extra_m. Trials of one
/// (m, d) pair share a series drawn from derive_seed(seed, pair index, trial);
/// each method reads the prefix it needs. Modes are compared against a Hankel
/// reference on reference_factor times the longest series, accepted only if
/// two independent references agree to 0.999 on the leading mode.
struct ConvergenceStudyConfig {
    GeneratorSpec generator;
    double dt = 1.0;
    std::vector<Eigen::Index> m_values;
    std::vector<Eigen::Index> d_values;
    std::vector<Eigen::Index> spacings{1};
    std::vector<std::string> methods{"hankel"};
    std::vector<Eigen::Index> hankel_extra_m;
    StudyMetric metric = StudyMetric::ModeSimilarity;
    Eigen::Index metric_k = 1;  ///< mode count for cumulative energy
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool subtract_mean = false;
    Eigen::Index reference_factor = 100;
    double reference_gate = 0.999;
    WeightSpec weight;  ///< empty means uniform
};

StudyReport convergence_study(const ConvergenceStudyConfig& config);

/// Leading mode of an m_hankel-column Hankel matrix against the leading mode
/// of the spaced matrix built from the same series, per spacing.
struct DownsamplingStudyConfig {
    GeneratorSpec generator;
    double dt = 1.0;
    Eigen::Index m_hankel = 5000;
    Eigen::Index d = 21;
    std::vector<Eigen::Index> spacings{10};
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool subtract_mean = false;
};

StudyReport downsampling_study(const DownsamplingStudyConfig& config);

/// Time-averaged spatial similarity of the leading Hankel space-time mode to
/// the leading space-only mode, for each window in `windows` (d = round(T /
/// dt) + 1). Every window of a trial uses the same series.
struct ShortWindowStudyConfig {
    GeneratorSpec generator;
    double dt = 1.0;
    Eigen::Index length = 10000;
    std::vector<double> windows;
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool subtract_mean = false;
};

StudyReport short_window_study(const ShortWindowStudyConfig& config);

/// Peak-bin energy fraction of the leading Hankel mode's PSD per depth; the
/// folded peak bin index is stored as aux. Every depth of a trial uses the
/// same series.
struct LongWindowStudyConfig {
    GeneratorSpec generator;
    double dt = 1.0;
    Eigen::Index length = 20000;
    std::vector<Eigen::Index> d_values;
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool subtract_mean = false;
};

StudyReport long_window_study(const LongWindowStudyConfig& config);

/// Long format: one row per (cell, trial).
void write_study_csv(const StudyReport& report, const std::filesystem::path& path);
/// JSON summary with per-cell mean, median, PDF and raw samples.
std::string study_summary_json(const StudyReport& report);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must
/// be written to preallocated slots so output is independent of scheduling.
/// The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace stpod
