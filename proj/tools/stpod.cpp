// stpod: generate synthetic series, compute POD / SPOD / space-time POD modes,
// run convergence studies and timing benchmarks.

#include "stpod/analysis.hpp"
#include "stpod/bench.hpp"
#include "stpod/decomposition.hpp"
#include "stpod/error.hpp"
#include "stpod/io.hpp"
#include "stpod/spod.hpp"
#include "stpod/study.hpp"
#include "stpod/timeseries.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct GeneratorOptions {
    std::string kind = "ou";
    double tau = 1.0;
    std::string drift;
    std::string diffusion;
    double omega0 = 0.5;
    double bandwidth = 0.01;
    std::vector<double> amplitude{1.0};
    double noise = 0.0;
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    std::vector<int> observed{0, 1, 2};
    std::uint64_t seed = 1;
    std::size_t burn_in = 0;
};

void add_generator_options(CLI::App* app, GeneratorOptions& g) {
    app->add_option("--kind", g.kind, "Generator kind")->check(CLI::IsMember({"ou", "narrowband", "lorenz63"}));
    app->add_option("--tau", g.tau, "Scalar OU correlation time (drift -1/tau) when --drift is not given")
        ->check(CLI::PositiveNumber);
    app->add_option("--drift", g.drift, "OU drift matrix, rows separated by ';', entries by ','");
    app->add_option("--diffusion", g.diffusion,
                    "OU diffusion matrix in the same syntax; default sqrt(2/tau) (unit variance) or identity");
    app->add_option("--omega0", g.omega0, "Narrowband carrier frequency [rad/time]");
    app->add_option("--bandwidth", g.bandwidth, "Narrowband damping rate [1/time]")->check(CLI::NonNegativeNumber);
    app->add_option("--amplitude", g.amplitude, "Narrowband spatial pattern a(x)")->delimiter(',');
    app->add_option("--noise", g.noise, "Narrowband additive white-noise amplitude")->check(CLI::NonNegativeNumber);
    app->add_option("--sigma", g.sigma, "Lorenz-63 sigma");
    app->add_option("--rho", g.rho, "Lorenz-63 rho");
    app->add_option("--beta", g.beta, "Lorenz-63 beta");
    app->add_option("--observed", g.observed, "Lorenz-63 observed coordinates")->delimiter(',');
    app->add_option("--seed", g.seed, "Seed of the Philox stream");
    app->add_option("--burn-in", g.burn_in, "Samples discarded before the first output snapshot");
}

Eigen::MatrixXd parse_matrix(const std::string& text, const char* what) {
    std::vector<std::vector<double>> rows;
    std::stringstream rs(text);
    std::string row;
    while (std::getline(rs, row, ';')) {
        std::vector<double> values;
        std::stringstream cs(row);
        std::string cell;
        while (std::getline(cs, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw stpod::InputError(std::string("cannot parse ") + what + " entry '" + cell + "'");
            }
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty() || rows.front().empty()) throw stpod::InputError(std::string(what) + " is empty");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw stpod::InputError(std::string(what) + " rows have different lengths");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

stpod::GeneratorSpec make_generator(const GeneratorOptions& g) {
    stpod::GeneratorSpec spec;
    spec.seed = g.seed;
    spec.burn_in = g.burn_in;
    if (g.kind == "ou") {
        stpod::OuParams p;
        if (g.drift.empty()) {
            p.drift = Eigen::MatrixXd::Constant(1, 1, -1.0 / g.tau);
            p.diffusion = g.diffusion.empty() ? Eigen::MatrixXd::Constant(1, 1, std::sqrt(2.0 / g.tau))
                                              : parse_matrix(g.diffusion, "diffusion");
        } else {
            p.drift = parse_matrix(g.drift, "drift");
            p.diffusion = g.diffusion.empty() ? Eigen::MatrixXd::Identity(p.drift.rows(), p.drift.rows())
                                              : parse_matrix(g.diffusion, "diffusion");
        }
        spec.params = std::move(p);
    } else if (g.kind == "narrowband") {
        stpod::NarrowbandParams p;
        p.omega0 = g.omega0;
        p.bandwidth = g.bandwidth;
        p.amplitude = Eigen::Map<const Eigen::VectorXd>(g.amplitude.data(), static_cast<Eigen::Index>(g.amplitude.size()));
        p.noise = g.noise;
        spec.params = std::move(p);
    } else {
        stpod::Lorenz63Params p;
        p.sigma = g.sigma;
        p.rho = g.rho;
        p.beta = g.beta;
        p.observed = g.observed;
        spec.params = std::move(p);
    }
    return spec;
}

/// Resolved value of every option of `app`, explicit or default.
json resolved_options(const CLI::App* app) {
    json out = json::object();
    for (const CLI::Option* opt : app->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        std::vector<std::string> values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
        if (values.empty() && !opt->get_default_str().empty()) values.push_back(opt->get_default_str());
        if (!opt->get_expected_max() && values.empty()) {
            out[name] = false;
            continue;
        }
        if (values.size() == 1)
            out[name] = values.front();
        else
            out[name] = values;
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw stpod::RuntimeFailure("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw stpod::RuntimeFailure("write failed for '" + path.string() + "'");
}

void write_manifest(const fs::path& output, const CLI::App* sub, unsigned threads, json extra) {
    json m;
    m["tool"] = "stpod";
    m["version"] = STPOD_VERSION;
    m["command"] = sub->get_name();
    m["threads"] = threads;
    m["config"] = resolved_options(sub);
    for (auto& [k, v] : extra.items()) m[k] = v;
    fs::path path = output;
    path += ".manifest.json";
    write_text(path, m.dump(2) + "\n");
}

/// Plain key = value lines (no section header) belong to the subcommand being
/// run, except keys naming a top-level option.
class SubcommandConfig : public CLI::ConfigINI {
public:
    explicit SubcommandConfig(const CLI::App* root) : root_(root) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::vector<CLI::ConfigItem> items = CLI::ConfigINI::from_config(input);
        const auto subs = root_->get_subcommands();
        if (subs.empty()) return items;
        for (auto& item : items) {
            if (!item.parents.empty()) continue;
            bool top_level = false;
            for (const CLI::Option* opt : root_->get_options())
                if (opt->check_lname(item.name)) top_level = true;
            if (!top_level) item.parents = {subs.front()->get_name()};
        }
        return items;
    }

private:
    const CLI::App* root_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Space-only, spectral and space-time POD from snapshot data"};
    app.set_version_flag("--version", std::string("stpod ") + STPOD_VERSION);
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.fallthrough();
    app.set_config("--config", "", "Key-value configuration file; command-line flags override it");
    app.config_formatter(std::make_shared<SubcommandConfig>(&app));
    app.allow_config_extras(CLI::config_extras_mode::error);
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads for studies")
        ->envname("STPOD_THREADS")
        ->check(CLI::Range(1u, 1024u));

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic snapshot series");
    GeneratorOptions gen_opts;
    add_generator_options(gen, gen_opts);
    std::size_t gen_n = 1000;
    double gen_dt = 1.0;
    std::string gen_out;
    gen->add_option("--n", gen_n, "Number of snapshots")->check(CLI::PositiveNumber);
    gen->add_option("--dt", gen_dt, "Time step")->check(CLI::PositiveNumber);
    gen->add_option("-o,--output", gen_out, "Output file (.csv or .stpd)")->required();

    // decompose
    auto* dec = app.add_subcommand("decompose", "Compute modes of a snapshot series");
    std::string dec_in, dec_out, dec_method = "hankel", dec_weight, dec_window = "rectangular", dec_energies;
    Eigen::Index dec_d = 1, dec_s = 1, dec_r = 0, dec_nfft = 64;
    double dec_overlap = 0.0;
    bool dec_two_sided = false, dec_subtract_mean = false;
    dec->add_option("-i,--input", dec_in, "Input series (.csv or .stpd)")->required()->check(CLI::ExistingFile);
    dec->add_option("-o,--output", dec_out, "Output mode file (STPM, or STPF for spod)")->required();
    dec->add_option("--method", dec_method, "Decomposition method")
        ->check(CLI::IsMember({"space-only", "hankel", "spaced", "toeplitz", "spod"}));
    dec->add_option("--d", dec_d, "Embedding depth")->check(CLI::PositiveNumber);
    dec->add_option("--s", dec_s, "Column spacing (spaced method)")->check(CLI::PositiveNumber);
    dec->add_option("--r", dec_r, "Modes to keep, 0 for all")->check(CLI::NonNegativeNumber);
    dec->add_option("--weight", dec_weight, "Spatial weight file (N values)")->check(CLI::ExistingFile);
    dec->add_option("--n-fft", dec_nfft, "SPOD block length")->check(CLI::Range(Eigen::Index{2}, Eigen::Index{1} << 40));
    dec->add_option("--overlap", dec_overlap, "SPOD block overlap fraction in [0, 1)");
    dec->add_option("--window", dec_window, "SPOD window")->check(CLI::IsMember({"rectangular", "hann"}));
    dec->add_flag("--two-sided", dec_two_sided, "SPOD: keep every DFT bin instead of folding");
    dec->add_flag("--subtract-mean", dec_subtract_mean, "Remove the temporal mean before decomposing");
    dec->add_option("--energies", dec_energies, "Energy CSV path (default <output>.energies.csv)");

    // study
    auto* stu = app.add_subcommand("study", "Run a seeded convergence or limit study");
    GeneratorOptions stu_gen;
    add_generator_options(stu, stu_gen);
    std::string stu_kind = "convergence", stu_metric = "mode_similarity", stu_out;
    std::vector<Eigen::Index> stu_m{30}, stu_d{30}, stu_s{1}, stu_extra_m;
    std::vector<std::string> stu_methods{"hankel", "toeplitz"};
    std::vector<double> stu_windows{0.5, 1.0, 2.0};
    Eigen::Index stu_k = 1, stu_ref_factor = 100, stu_length = 10000, stu_mh = 5000;
    double stu_dt = 1.0;
    long long stu_trials = 100;
    bool stu_subtract_mean = false;
    stu->add_option("--type", stu_kind, "Study type")
        ->check(CLI::IsMember({"convergence", "downsampling", "short-window", "long-window"}));
    stu->add_option("--dt", stu_dt, "Time step")->check(CLI::PositiveNumber);
    stu->add_option("--m", stu_m, "Column counts")->delimiter(',');
    stu->add_option("--d", stu_d, "Embedding depths")->delimiter(',');
    stu->add_option("--s", stu_s, "Column spacings")->delimiter(',');
    stu->add_option("--methods", stu_methods, "Methods compared")->delimiter(',');
    stu->add_option("--hankel-extra-m", stu_extra_m, "Extra Hankel-only column counts")->delimiter(',');
    stu->add_option("--metric", stu_metric, "Metric")
        ->check(CLI::IsMember({"mode_similarity", "captured_energy", "cumulative_energy"}));
    stu->add_option("--k", stu_k, "Modes summed by cumulative_energy")->check(CLI::PositiveNumber);
    stu->add_option("--trials", stu_trials, "Trials per cell")->check(CLI::PositiveNumber);
    stu->add_option("--reference-factor", stu_ref_factor, "Reference length over the longest trial series")
        ->check(CLI::PositiveNumber);
    stu->add_option("--length", stu_length, "Series length (limit studies)")->check(CLI::PositiveNumber);
    stu->add_option("--m-hankel", stu_mh, "Hankel width (downsampling study)")->check(CLI::PositiveNumber);
    stu->add_option("--windows", stu_windows, "Windows T (short-window study)")->delimiter(',');
    stu->add_flag("--subtract-mean", stu_subtract_mean, "Remove each series' temporal mean");
    stu->add_option("-o,--output", stu_out, "Output prefix: writes <prefix>.csv and <prefix>.json")->required();

    // bench
    auto* ben = app.add_subcommand("bench", "Time the SVD, spaced and Toeplitz paths");
    stpod::BenchConfig bench_cfg;
    std::string ben_out;
    ben->add_option("--reps", bench_cfg.repetitions, "Timed repetitions after one warm-up")
        ->check(CLI::Range(Eigen::Index{5}, Eigen::Index{1000}));
    ben->add_option("--tall-rows", bench_cfg.tall_rows, "N d of the tall SVD scenario")->check(CLI::PositiveNumber);
    ben->add_option("--svd-m", bench_cfg.svd_m, "Widths of the tall SVD scenario")->delimiter(',');
    ben->add_option("--spacing", bench_cfg.spacing, "s of the spaced scenario")->check(CLI::PositiveNumber);
    ben->add_option("--spaced-columns", bench_cfg.spaced_columns, "Hankel width of the spaced scenario")
        ->check(CLI::PositiveNumber);
    ben->add_option("--toeplitz-m", bench_cfg.toeplitz_m, "m of the Toeplitz scenario")->check(CLI::PositiveNumber);
    ben->add_option("--toeplitz-nd", bench_cfg.toeplitz_nd, "N d values of the Toeplitz scenario")->delimiter(',');
    ben->add_option("--seed", bench_cfg.seed, "Seed of the random inputs");
    ben->add_option("-o,--output", ben_out, "Output prefix: writes <prefix>.csv and <prefix>.json");

    // info
    auto* inf = app.add_subcommand("info", "Print the header of a data or mode file");
    std::string inf_path;
    inf->add_option("path", inf_path, "File")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            const stpod::GeneratorSpec spec = make_generator(gen_opts);
            const stpod::SnapshotSeries series = stpod::generate(spec, gen_n, gen_dt);
            stpod::io::save_series(series, gen_out);
            write_manifest(gen_out, gen, threads,
                           {{"seeds", {spec.seed}}, {"N", series.dim()}, {"L", series.length()}, {"dt", series.dt()}});
            std::cout << "wrote " << gen_out << " (N = " << series.dim() << ", L = " << series.length()
                      << ", dt = " << series.dt() << ")\n";
        } else if (*dec) {
            stpod::SnapshotSeries series = stpod::io::load_series(dec_in);
            if (dec_subtract_mean) series = stpod::subtract_temporal_mean(series).first;
            stpod::WeightSpec weight = stpod::WeightSpec::uniform(series.dim());
            if (!dec_weight.empty()) {
                const Eigen::VectorXd w = stpod::io::load_weight_vector(dec_weight);
                if (w.size() != series.dim()) {
                    std::ostringstream msg;
                    msg << "weight file has " << w.size() << " entries but the series has N = " << series.dim();
                    throw stpod::InputError(msg.str());
                }
                weight = stpod::WeightSpec::diagonal(w);
            }
            const fs::path energies_path = dec_energies.empty() ? fs::path(dec_out + ".energies.csv") : fs::path(dec_energies);
            json extra = {{"N", series.dim()}, {"L", series.length()}, {"dt", series.dt()}};
            std::ostringstream csv;
            csv << std::setprecision(std::numeric_limits<double>::max_digits10);
            if (dec_method == "spod") {
                stpod::SpodSpec spec;
                spec.n_fft = dec_nfft;
                spec.overlap = dec_overlap;
                spec.window = stpod::spod_window_from_string(dec_window);
                spec.one_sided = !dec_two_sided;
                const stpod::FrequencyModeSet modes = stpod::spod(series, spec, weight);
                stpod::io::save_frequency_modes(modes, dec_out);
                csv << "bin,omega,k,energy\n";
                for (const auto& bin : modes.bins)
                    for (Eigen::Index k = 0; k < bin.energies.size(); ++k)
                        csv << bin.index << ',' << bin.omega << ',' << k + 1 << ',' << bin.energies(k) << '\n';
                extra["blocks"] = modes.blocks;
                extra["bins"] = modes.bins.size();
                extra["total_energy"] = modes.total_energy();
                std::cout << "wrote " << dec_out << " (" << modes.bins.size() << " bins, " << modes.blocks
                          << " blocks)\n";
            } else {
                stpod::ModeSet modes;
                if (dec_method == "space-only") {
                    modes = stpod::space_only_pod(series, weight);
                } else if (dec_method == "toeplitz") {
                    modes = stpod::spacetime_pod_toeplitz(series, dec_d, weight, dec_r);
                } else {
                    const Eigen::Index s = dec_method == "spaced" ? dec_s : 1;
                    modes = stpod::spacetime_pod(series, dec_d, s, weight);
                }
                if (dec_r > 0 && modes.rank() > dec_r) {
                    modes.modes.conservativeResize(Eigen::NoChange, dec_r);
                    modes.energies.conservativeResize(dec_r);
                }
                stpod::io::save_modes(modes, dec_out);
                csv << "k,energy\n";
                for (Eigen::Index k = 0; k < modes.energies.size(); ++k) csv << k + 1 << ',' << modes.energies(k) << '\n';
                extra["d"] = modes.depth();
                extra["s"] = modes.embedding ? modes.embedding->spacing : 1;
                extra["T"] = modes.window();
                extra["m_used"] = modes.m_used;
                extra["r"] = modes.rank();
                extra["solver"] = modes.diagnostics.solver;
                extra["truncated"] = modes.diagnostics.truncated;
                extra["negative_clamped"] = modes.diagnostics.negative_clamped;
                extra["negative_discarded"] = modes.diagnostics.negative_discarded;
                std::cout << "wrote " << dec_out << " (" << stpod::to_string(modes.method) << ", r = " << modes.rank()
                          << ", m = " << modes.m_used << ", T = " << modes.window() << ")\n";
            }
            write_text(energies_path, csv.str());
            write_manifest(dec_out, dec, threads, extra);
        } else if (*stu) {
            const stpod::GeneratorSpec generator = make_generator(stu_gen);
            stpod::StudyReport report;
            if (stu_kind == "convergence") {
                stpod::ConvergenceStudyConfig c;
                c.generator = generator;
                c.dt = stu_dt;
                c.m_values = stu_m;
                c.d_values = stu_d;
                c.spacings = stu_s;
                c.methods = stu_methods;
                c.hankel_extra_m = stu_extra_m;
                c.metric = stpod::study_metric_from_string(stu_metric);
                c.metric_k = stu_k;
                c.trials = static_cast<std::size_t>(stu_trials);
                c.seed = stu_gen.seed;
                c.threads = threads;
                c.subtract_mean = stu_subtract_mean;
                c.reference_factor = stu_ref_factor;
                report = stpod::convergence_study(c);
            } else if (stu_kind == "downsampling") {
                stpod::DownsamplingStudyConfig c;
                c.generator = generator;
                c.dt = stu_dt;
                c.m_hankel = stu_mh;
                c.d = stu_d.at(0);
                c.spacings = stu_s;
                c.trials = static_cast<std::size_t>(stu_trials);
                c.seed = stu_gen.seed;
                c.threads = threads;
                c.subtract_mean = stu_subtract_mean;
                report = stpod::downsampling_study(c);
            } else if (stu_kind == "short-window") {
                stpod::ShortWindowStudyConfig c;
                c.generator = generator;
                c.dt = stu_dt;
                c.length = stu_length;
                c.windows = stu_windows;
                c.trials = static_cast<std::size_t>(stu_trials);
                c.seed = stu_gen.seed;
                c.threads = threads;
                c.subtract_mean = stu_subtract_mean;
                report = stpod::short_window_study(c);
            } else {
                stpod::LongWindowStudyConfig c;
                c.generator = generator;
                c.dt = stu_dt;
                c.length = stu_length;
                c.d_values = stu_d;
                c.trials = static_cast<std::size_t>(stu_trials);
                c.seed = stu_gen.seed;
                c.threads = threads;
                c.subtract_mean = stu_subtract_mean;
                report = stpod::long_window_study(c);
            }
            stpod::write_study_csv(report, stu_out + ".csv");
            write_text(stu_out + ".json", stpod::study_summary_json(report) + "\n");
            json seeds = json::array();
            seeds.push_back(report.seed);
            for (const auto& r : report.references) {
                seeds.push_back(r.seed_a);
                seeds.push_back(r.seed_b);
            }
            write_manifest(stu_out, stu, threads, {{"seeds", seeds}, {"cells", report.cells.size()}});
            std::cout << std::left << std::setw(10) << "method" << std::setw(8) << "m" << std::setw(6) << "d"
                      << std::setw(6) << "s" << std::setw(10) << "T" << std::setw(14) << "median"
                      << "mean\n";
            for (const auto& cell : report.cells)
                std::cout << std::left << std::setw(10) << cell.method << std::setw(8) << cell.m << std::setw(6)
                          << cell.d << std::setw(6) << cell.s << std::setw(10) << cell.window << std::setw(14)
                          << cell.median << cell.mean << '\n';
        } else if (*ben) {
            const stpod::BenchReport report = stpod::run_bench(bench_cfg);
            std::cout << stpod::bench_report_csv(report);
            for (const auto& s : report.slopes)
                std::cout << "slope " << s.scenario << '/' << s.method << " vs " << s.variable << ": " << s.slope
                          << " (expected " << s.expected << ", " << (s.within_band ? "within" : "outside")
                          << " 2x band)\n";
            std::cout << "spaced speedup at s = " << report.spaced_s << ": " << report.spaced_speedup << '\n';
            for (std::size_t i = 0; i < report.toeplitz_ratio.size(); ++i)
                std::cout << "toeplitz/hankel at Nd = " << bench_cfg.toeplitz_nd[i] << ": " << report.toeplitz_ratio[i]
                          << " (predicted order " << report.toeplitz_ratio_predicted[i] << ")\n";
            if (!ben_out.empty()) {
                write_text(ben_out + ".csv", stpod::bench_report_csv(report));
                write_text(ben_out + ".json", stpod::bench_report_json(report) + "\n");
                write_manifest(ben_out, ben, threads, {{"seeds", {bench_cfg.seed}}});
            }
        } else if (*inf) {
            std::cout << stpod::io::describe_file(inf_path);
        }
    } catch (const stpod::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
