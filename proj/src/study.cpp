#include "stpod/study.hpp"

#include "stpod/analysis.hpp"
#include "stpod/error.hpp"
#include "stpod/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace stpod {

namespace {

constexpr std::uint64_t kReferenceTag = 0x7265660000000000ull;  // "ref"

std::string method_key(const std::string& name) {
    const PodMethod m = pod_method_from_string(name);
    return to_string(m);
}

SnapshotSeries draw(const GeneratorSpec& generator, std::uint64_t seed, Eigen::Index length, double dt) {
    GeneratorSpec spec = generator;
    spec.seed = seed;
    return generate(spec, static_cast<std::size_t>(length), dt);
}

SnapshotSeries prepared(const SnapshotSeries& series, Eigen::Index length, bool subtract_mean) {
    SnapshotSeries head = series.head(length);
    if (!subtract_mean) return head;
    return subtract_temporal_mean(head).first;
}

WeightSpec resolved_weight(const WeightSpec& weight, Eigen::Index n) {
    if (weight.size() == 0) return WeightSpec::uniform(n);
    detail::require(weight.size() == n, "weight dimension does not match the generator dimension");
    return weight;
}

void finish_cell(StudyCell& cell) {
    cell.mean = sample_mean(cell.samples);
    cell.median = sample_median(cell.samples);
    cell.pdf = sample_pdf(cell.samples);
}

void require_trials(std::size_t trials) { detail::require(trials >= 1, "trials must be at least 1"); }

Eigen::Index depth_for_window(double window, double dt) {
    detail::require(window >= 0.0 && std::isfinite(window), "window must be nonnegative");
    return static_cast<Eigen::Index>(std::llround(window / dt)) + 1;
}

}  // namespace

std::string to_string(StudyMetric metric) {
    switch (metric) {
        case StudyMetric::ModeSimilarity: return "mode_similarity";
        case StudyMetric::CapturedEnergy: return "captured_energy";
        case StudyMetric::CumulativeEnergy: return "cumulative_energy";
    }
    return "mode_similarity";
}

StudyMetric study_metric_from_string(const std::string& name) {
    if (name == "mode_similarity" || name == "similarity") return StudyMetric::ModeSimilarity;
    if (name == "captured_energy") return StudyMetric::CapturedEnergy;
    if (name == "cumulative_energy") return StudyMetric::CumulativeEnergy;
    throw InputError("unknown metric '" + name + "' (expected mode_similarity, captured_energy or cumulative_energy)");
}

SamplePdf sample_pdf(const std::vector<double>& samples, std::size_t bins) {
    SamplePdf pdf;
    if (samples.empty() || bins == 0) return pdf;
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    double width = (*hi_it - lo) / static_cast<double>(bins);
    if (!(width > 0.0)) width = std::max(1.0, std::abs(lo)) * 1e-12;
    pdf.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) pdf.edges[b] = lo + width * static_cast<double>(b);
    std::vector<double> counts(bins, 0.0);
    for (double x : samples) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        if (b >= bins) b = bins - 1;
        counts[b] += 1.0;
    }
    pdf.density.resize(bins);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * width);
    for (std::size_t b = 0; b < bins; ++b) pdf.density[b] = counts[b] * norm;
    return pdf;
}

double sample_median(std::vector<double> samples) {
    if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

double sample_mean(const std::vector<double>& samples) {
    if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double x : samples) sum += x;
    return sum / static_cast<double>(samples.size());
}

const StudyCell& StudyReport::cell(const std::string& method, Eigen::Index m, Eigen::Index d, Eigen::Index s) const {
    for (const auto& c : cells)
        if (c.method == method && c.m == m && c.d == d && (method != "spaced" || c.s == s)) return c;
    std::ostringstream msg;
    msg << "no study cell for method " << method << ", m = " << m << ", d = " << d << ", s = " << s;
    throw InputError(msg.str());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::size_t failure_index = count;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (i < failure_index) {
                    failure_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

StudyReport convergence_study(const ConvergenceStudyConfig& config) {
    require_trials(config.trials);
    detail::require(!config.m_values.empty() || !config.hankel_extra_m.empty(), "study grid has no m values");
    detail::require(!config.d_values.empty(), "study grid has no d values");
    detail::require(!config.methods.empty(), "study has no methods");
    detail::require(config.metric_k >= 1, "metric k must be at least 1");
    detail::require(config.reference_factor >= 1, "reference factor must be at least 1");
    for (auto m : config.m_values) detail::require(m >= 1, "m must be at least 1");
    for (auto m : config.hankel_extra_m) detail::require(m >= 1, "m must be at least 1");
    for (auto d : config.d_values) detail::require(d >= 1, "d must be at least 1");
    for (auto s : config.spacings) detail::require(s >= 1, "s must be at least 1");

    std::vector<std::string> methods;
    for (const auto& name : config.methods) {
        const std::string key = method_key(name);
        if (key == "space-only")
            for (auto d : config.d_values) detail::require(d == 1, "space-only cells need d = 1");
        if (std::find(methods.begin(), methods.end(), key) == methods.end()) methods.push_back(key);
    }

    const Eigen::Index n = config.generator.dim();
    const WeightSpec weight = resolved_weight(config.weight, n);

    StudyReport report;
    report.kind = "convergence";
    report.metric = to_string(config.metric);
    report.generator = config.generator.kind();
    report.dt = config.dt;
    report.seed = config.seed;
    report.trials = config.trials;
    report.metric_k = config.metric_k;
    report.subtract_mean = config.subtract_mean;

    struct Pair {
        Eigen::Index m, d;
        std::vector<std::size_t> cells;
        Eigen::Index length = 0;
    };
    std::vector<Pair> pairs;
    auto add_cell = [&](Pair& pair, const std::string& method, Eigen::Index s) {
        StudyCell cell;
        cell.method = method;
        cell.m = pair.m;
        cell.d = pair.d;
        cell.s = s;
        cell.n_space = n;
        cell.length = method == "space-only" ? pair.m : (pair.m - 1) * s + pair.d;
        cell.window = static_cast<double>(pair.d - 1) * config.dt;
        cell.samples.assign(config.trials, 0.0);
        cell.seeds.assign(config.trials, 0);
        pair.length = std::max(pair.length, cell.length);
        pair.cells.push_back(report.cells.size());
        report.cells.push_back(std::move(cell));
    };
    for (auto d : config.d_values) {
        for (auto m : config.m_values) {
            Pair pair{m, d, {}, 0};
            for (const auto& method : methods) {
                if (method == "spaced") {
                    for (auto s : config.spacings) add_cell(pair, method, s);
                } else {
                    add_cell(pair, method, 1);
                }
            }
            pairs.push_back(std::move(pair));
        }
        for (auto m : config.hankel_extra_m) {
            if (std::find(config.m_values.begin(), config.m_values.end(), m) != config.m_values.end() &&
                std::find(methods.begin(), methods.end(), "hankel") != methods.end())
                continue;
            Pair pair{m, d, {}, 0};
            add_cell(pair, "hankel", 1);
            pairs.push_back(std::move(pair));
        }
    }

    // References, one per depth.
    std::map<Eigen::Index, ModeSet> references;
    for (std::size_t di = 0; di < config.d_values.size(); ++di) {
        const Eigen::Index d = config.d_values[di];
        if (references.count(d)) continue;
        Eigen::Index longest = 0;
        for (const auto& p : pairs)
            if (p.d == d) longest = std::max(longest, p.length);
        ReferenceInfo info;
        info.d = d;
        info.length = config.reference_factor * longest;
        info.seed_a = derive_seed(config.seed, kReferenceTag, static_cast<std::uint64_t>(d), 0);
        info.seed_b = derive_seed(config.seed, kReferenceTag, static_cast<std::uint64_t>(d), 1);
        ModeSet refs[2];
        const std::uint64_t seeds[2] = {info.seed_a, info.seed_b};
        parallel_for(2, config.threads, [&](std::size_t i) {
            const SnapshotSeries raw = draw(config.generator, seeds[i], info.length, config.dt);
            const SnapshotSeries series = prepared(raw, raw.length(), config.subtract_mean);
            refs[i] = d == 1 && methods.size() == 1 && methods.front() == "space-only"
                          ? space_only_pod(series, weight)
                          : spacetime_pod(series, d, 1, weight);
            if (i == 0 && di == 0) report.decorrelation_time = decorrelation_time(series);
        });
        info.gate_similarity = mode_similarity(refs[0].modes.col(0), refs[1].modes.col(0), weight);
        if (!(info.gate_similarity >= config.reference_gate)) {
            std::ostringstream msg;
            msg << std::setprecision(6) << "reference convergence failure at d = " << d
                << ": leading-mode similarity between two independent runs of length " << info.length << " is "
                << info.gate_similarity << " < " << config.reference_gate
                << " (increase the reference factor or check that the generator is ergodic)";
            throw RuntimeFailure(msg.str());
        }
        info.energies = refs[0].energies.head(std::min<Eigen::Index>(refs[0].energies.size(), 16));
        report.references.push_back(info);
        references.emplace(d, std::move(refs[0]));
    }

    const std::size_t jobs = pairs.size() * config.trials;
    parallel_for(jobs, config.threads, [&](std::size_t job) {
        const std::size_t p = job / config.trials;
        const std::size_t trial = job % config.trials;
        const Pair& pair = pairs[p];
        const ModeSet& ref = references.at(pair.d);
        const std::uint64_t seed = derive_seed(config.seed, p, trial);
        const SnapshotSeries raw = draw(config.generator, seed, pair.length, config.dt);
        for (std::size_t ci : pair.cells) {
            StudyCell& cell = report.cells[ci];
            const SnapshotSeries series = prepared(raw, cell.length, config.subtract_mean);
            const Eigen::Index need = config.metric == StudyMetric::CumulativeEnergy ? config.metric_k : 1;
            ModeSet modes;
            if (cell.method == "toeplitz")
                modes = spacetime_pod_toeplitz(series, pair.d, weight, std::min(need, n * pair.d));
            else if (cell.method == "space-only")
                modes = space_only_pod(series, weight);
            else
                modes = spacetime_pod(series, pair.d, cell.s, weight);
            double value = 0.0;
            switch (config.metric) {
                case StudyMetric::ModeSimilarity:
                    value = mode_similarity(modes.modes.col(0), ref.modes.col(0), weight);
                    break;
                case StudyMetric::CapturedEnergy: value = captured_energy(modes.modes.col(0), ref); break;
                case StudyMetric::CumulativeEnergy:
                    value = cumulative_energy(modes.modes.leftCols(std::min(need, modes.rank())), ref);
                    break;
            }
            cell.samples[trial] = value;
            cell.seeds[trial] = seed;
        }
    });
    for (auto& cell : report.cells) finish_cell(cell);

    // Hankel column factor for each spaced cell.
    for (std::size_t ci = 0; ci < report.cells.size(); ++ci) {
        const StudyCell& sp = report.cells[ci];
        if (sp.method != "spaced") continue;
        std::vector<std::pair<Eigen::Index, double>> hankel;
        for (const auto& c : report.cells)
            if (c.method == "hankel" && c.d == sp.d) hankel.emplace_back(c.m, c.median);
        std::sort(hankel.begin(), hankel.end());
        double factor = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t h = 0; h < hankel.size(); ++h) {
            if (hankel[h].second < sp.median) continue;
            double columns = static_cast<double>(hankel[h].first);
            if (h > 0 && hankel[h].second > hankel[h - 1].second) {
                const double t = (sp.median - hankel[h - 1].second) / (hankel[h].second - hankel[h - 1].second);
                columns = static_cast<double>(hankel[h - 1].first) +
                          t * static_cast<double>(hankel[h].first - hankel[h - 1].first);
            }
            factor = columns / static_cast<double>(sp.m);
            break;
        }
        report.hankel_factor.emplace_back(ci, factor);
    }
    return report;
}

StudyReport downsampling_study(const DownsamplingStudyConfig& config) {
    require_trials(config.trials);
    detail::require(config.m_hankel >= 1 && config.d >= 1, "m and d must be at least 1");
    detail::require(!config.spacings.empty(), "downsampling study needs at least one spacing");
    for (auto s : config.spacings) detail::require(s >= 1, "s must be at least 1");
    const Eigen::Index n = config.generator.dim();
    const WeightSpec weight = WeightSpec::uniform(n);
    const Eigen::Index length = config.m_hankel + config.d - 1;

    StudyReport report;
    report.kind = "downsampling";
    report.metric = "mode_similarity";
    report.generator = config.generator.kind();
    report.dt = config.dt;
    report.seed = config.seed;
    report.trials = config.trials;
    report.subtract_mean = config.subtract_mean;
    for (auto s : config.spacings) {
        StudyCell cell;
        cell.method = "spaced";
        cell.d = config.d;
        cell.s = s;
        cell.m = embedded_columns(length, config.d, s);
        cell.n_space = n;
        cell.length = length;
        cell.window = static_cast<double>(config.d - 1) * config.dt;
        cell.samples.assign(config.trials, 0.0);
        cell.seeds.assign(config.trials, 0);
        report.cells.push_back(std::move(cell));
    }
    parallel_for(config.trials, config.threads, [&](std::size_t trial) {
        const std::uint64_t seed = derive_seed(config.seed, 0, trial);
        const SnapshotSeries series =
            prepared(draw(config.generator, seed, length, config.dt), length, config.subtract_mean);
        const ModeSet full = spacetime_pod(series, config.d, 1, weight);
        for (auto& cell : report.cells) {
            const ModeSet spaced = spacetime_pod(series, config.d, cell.s, weight);
            cell.samples[trial] = mode_similarity(spaced.modes.col(0), full.modes.col(0), weight);
            cell.seeds[trial] = seed;
        }
    });
    for (auto& cell : report.cells) finish_cell(cell);
    return report;
}

StudyReport short_window_study(const ShortWindowStudyConfig& config) {
    require_trials(config.trials);
    detail::require(!config.windows.empty(), "short-window study needs at least one window");
    const Eigen::Index n = config.generator.dim();
    const WeightSpec weight = WeightSpec::uniform(n);

    StudyReport report;
    report.kind = "short-window";
    report.metric = "time_averaged_spatial_similarity";
    report.generator = config.generator.kind();
    report.dt = config.dt;
    report.seed = config.seed;
    report.trials = config.trials;
    report.subtract_mean = config.subtract_mean;
    for (double window : config.windows) {
        StudyCell cell;
        cell.method = "hankel";
        cell.d = depth_for_window(window, config.dt);
        detail::require(cell.d <= config.length, "window longer than the series");
        cell.m = config.length - cell.d + 1;
        cell.n_space = n;
        cell.length = config.length;
        cell.window = static_cast<double>(cell.d - 1) * config.dt;
        cell.samples.assign(config.trials, 0.0);
        cell.seeds.assign(config.trials, 0);
        report.cells.push_back(std::move(cell));
    }
    parallel_for(config.trials, config.threads, [&](std::size_t trial) {
        const std::uint64_t seed = derive_seed(config.seed, 0, trial);
        const SnapshotSeries series =
            prepared(draw(config.generator, seed, config.length, config.dt), config.length, config.subtract_mean);
        const ModeSet space = space_only_pod(series, weight);
        for (auto& cell : report.cells) {
            const ModeSet st = spacetime_pod(series, cell.d, 1, weight);
            cell.samples[trial] =
                time_averaged_spatial_similarity(st.modes.col(0), space.modes.col(0), cell.d, weight);
            cell.seeds[trial] = seed;
        }
    });
    for (auto& cell : report.cells) finish_cell(cell);
    return report;
}

StudyReport long_window_study(const LongWindowStudyConfig& config) {
    require_trials(config.trials);
    detail::require(!config.d_values.empty(), "long-window study needs at least one depth");
    const Eigen::Index n = config.generator.dim();
    const WeightSpec weight = WeightSpec::uniform(n);

    StudyReport report;
    report.kind = "long-window";
    report.metric = "peak_bin_fraction";
    report.aux_name = "peak_bin";
    report.generator = config.generator.kind();
    report.dt = config.dt;
    report.seed = config.seed;
    report.trials = config.trials;
    report.subtract_mean = config.subtract_mean;
    for (auto d : config.d_values) {
        detail::require(d >= 1 && d <= config.length, "depth must lie in [1, L]");
        StudyCell cell;
        cell.method = "hankel";
        cell.d = d;
        cell.m = config.length - d + 1;
        cell.n_space = n;
        cell.length = config.length;
        cell.window = static_cast<double>(d - 1) * config.dt;
        cell.samples.assign(config.trials, 0.0);
        cell.aux.assign(config.trials, 0.0);
        cell.seeds.assign(config.trials, 0);
        report.cells.push_back(std::move(cell));
    }
    parallel_for(config.trials, config.threads, [&](std::size_t trial) {
        const std::uint64_t seed = derive_seed(config.seed, 0, trial);
        const SnapshotSeries series =
            prepared(draw(config.generator, seed, config.length, config.dt), config.length, config.subtract_mean);
        for (auto& cell : report.cells) {
            const ModeSet st = spacetime_pod(series, cell.d, 1, weight);
            const PeakBin peak = peak_bin_fraction(mode_psd(st.modes.col(0), n, cell.d, weight));
            cell.samples[trial] = peak.fraction;
            cell.aux[trial] = static_cast<double>(peak.bin);
            cell.seeds[trial] = seed;
        }
    });
    for (auto& cell : report.cells) finish_cell(cell);
    return report;
}

void write_study_csv(const StudyReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot open '" + path.string() + "' for writing");
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "kind,metric,cell,method,m,d,s,N,L,T,trial,seed,value";
    if (!report.aux_name.empty()) out << ',' << report.aux_name;
    out << '\n';
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const StudyCell& cell = report.cells[c];
        for (std::size_t t = 0; t < cell.samples.size(); ++t) {
            out << report.kind << ',' << report.metric << ',' << c << ',' << cell.method << ',' << cell.m << ','
                << cell.d << ',' << cell.s << ',' << cell.n_space << ',' << cell.length << ',' << cell.window << ','
                << t << ',' << cell.seeds[t] << ',' << cell.samples[t];
            if (!report.aux_name.empty()) out << ',' << (t < cell.aux.size() ? cell.aux[t] : 0.0);
            out << '\n';
        }
    }
    if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

std::string study_summary_json(const StudyReport& report) {
    using nlohmann::json;
    json j;
    j["kind"] = report.kind;
    j["metric"] = report.metric;
    j["generator"] = report.generator;
    j["dt"] = report.dt;
    j["seed"] = report.seed;
    j["trials"] = report.trials;
    j["metric_k"] = report.metric_k;
    j["subtract_mean"] = report.subtract_mean;
    j["decorrelation_time"] = report.decorrelation_time;
    if (!report.aux_name.empty()) j["aux_name"] = report.aux_name;
    j["references"] = json::array();
    for (const auto& r : report.references) {
        j["references"].push_back({{"d", r.d},
                                   {"length", r.length},
                                   {"seeds", {r.seed_a, r.seed_b}},
                                   {"gate_similarity", r.gate_similarity},
                                   {"energies", std::vector<double>(r.energies.data(),
                                                                    r.energies.data() + r.energies.size())}});
    }
    j["cells"] = json::array();
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const StudyCell& cell = report.cells[c];
        json jc = {{"cell", c},
                   {"method", cell.method},
                   {"m", cell.m},
                   {"d", cell.d},
                   {"s", cell.s},
                   {"N", cell.n_space},
                   {"L", cell.length},
                   {"T", cell.window},
                   {"trials", cell.samples.size()},
                   {"mean", cell.mean},
                   {"median", cell.median},
                   {"pdf", {{"edges", cell.pdf.edges}, {"density", cell.pdf.density}}},
                   {"samples", cell.samples}};
        if (!cell.aux.empty()) jc["aux"] = cell.aux;
        j["cells"].push_back(std::move(jc));
    }
    if (!report.hankel_factor.empty()) {
        j["hankel_factor"] = json::array();
        for (const auto& [cell, factor] : report.hankel_factor)
            j["hankel_factor"].push_back({{"cell", cell}, {"c", std::isfinite(factor) ? json(factor) : json()}});
    }
    return j.dump(2);
}

}  // namespace stpod
