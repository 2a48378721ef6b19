#include "stpod/io.hpp"

#include "stpod/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace stpod::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap_if_needed(T value) {
    if constexpr (std::endian::native == std::endian::big) {
        std::array<unsigned char, sizeof(T)> bytes;
        std::memcpy(bytes.data(), &value, sizeof(T));
        std::reverse(bytes.begin(), bytes.end());
        std::memcpy(&value, bytes.data(), sizeof(T));
    }
    return value;
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw FormatError("cannot open '" + path.string() + "' for writing");
    }
    void magic(const char* tag) { out_.write(tag, 4); }
    template <typename T>
    void put(T value) {
        value = byteswap_if_needed(value);
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }
    void put_doubles(const double* data, std::size_t count) {
        if constexpr (std::endian::native == std::endian::little) {
            out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
        } else {
            for (std::size_t i = 0; i < count; ++i) put(data[i]);
        }
    }
    void finish() {
        out_.flush();
        if (!out_) throw FormatError("write failed for '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw FormatError("cannot open '" + path.string() + "'");
    }
    std::string magic() {
        char tag[4] = {};
        in_.read(tag, 4);
        if (in_.gcount() != 4) fail("file too short for a header");
        return std::string(tag, 4);
    }
    template <typename T>
    T get(const char* what) {
        T value{};
        in_.read(reinterpret_cast<char*>(&value), sizeof(T));
        if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) fail(std::string("truncated while reading ") + what);
        return byteswap_if_needed(value);
    }
    void get_doubles(double* data, std::size_t count, const char* what) {
        const auto bytes = static_cast<std::streamsize>(count * sizeof(double));
        in_.read(reinterpret_cast<char*>(data), bytes);
        if (in_.gcount() != bytes) fail(std::string("payload truncated in ") + what);
        if constexpr (std::endian::native == std::endian::big)
            for (std::size_t i = 0; i < count; ++i) data[i] = byteswap_if_needed(data[i]);
    }
    void expect_end() {
        in_.peek();
        if (!in_.eof()) fail("trailing bytes after payload");
    }
    std::streamoff offset() { return static_cast<std::streamoff>(in_.tellg()); }
    [[noreturn]] void fail(const std::string& what) {
        std::ostringstream msg;
        msg << path_.string() << ": " << what;
        throw FormatError(msg.str());
    }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

void check_finite(const double* data, std::size_t count, std::size_t rows, const std::string& where) {
    for (std::size_t i = 0; i < count; ++i)
        if (!std::isfinite(data[i])) {
            std::ostringstream msg;
            msg << where << ": non-finite value at component " << (i % rows) << ", column " << (i / rows);
            throw FormatError(msg.str());
        }
}

std::uint32_t method_tag(PodMethod method) {
    switch (method) {
        case PodMethod::SpaceOnly: return 0;
        case PodMethod::Hankel: return 1;
        case PodMethod::Spaced: return 2;
        case PodMethod::Toeplitz: return 3;
    }
    return 0;
}

PodMethod method_from_tag(std::uint32_t tag) {
    switch (tag) {
        case 0: return PodMethod::SpaceOnly;
        case 1: return PodMethod::Hankel;
        case 2: return PodMethod::Spaced;
        case 3: return PodMethod::Toeplitz;
        default: throw FormatError("unknown method tag " + std::to_string(tag));
    }
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& value) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    const auto res = std::from_chars(begin, end, value);
    return res.ec == std::errc() && res.ptr == end;
}

SnapshotSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    // Header: first non-blank line.
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw FormatError(path.string() + ": no snapshots");
    const std::string header = trim(line);
    double dt = 0.0;
    if (header.rfind("dt=", 0) != 0 || !parse_double(header.substr(3), dt))
        throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": malformed header, expected dt=<value>");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": dt must be positive");

    std::vector<double> values;
    std::size_t n = 0;
    std::size_t snapshots = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream fields(line);
        std::string field;
        std::size_t column = 0;
        while (std::getline(fields, field, ',')) {
            double v = 0.0;
            if (!parse_double(field, v)) {
                std::ostringstream msg;
                msg << path.string() << ": line " << line_no << ", field " << column + 1 << ": not a number";
                throw FormatError(msg.str());
            }
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << path.string() << ": line " << line_no << ", field " << column + 1 << ": non-finite value";
                throw FormatError(msg.str());
            }
            row.push_back(v);
            ++column;
        }
        if (n == 0) n = row.size();
        if (row.size() != n) {
            std::ostringstream msg;
            msg << path.string() << ": line " << line_no << " (snapshot " << snapshots + 1 << ") has " << row.size()
                << " values, expected " << n;
            throw FormatError(msg.str());
        }
        values.insert(values.end(), row.begin(), row.end());
        ++snapshots;
    }
    if (snapshots == 0) throw FormatError(path.string() + ": no snapshots");
    Eigen::MatrixXd m = Eigen::Map<Eigen::MatrixXd>(values.data(), static_cast<Eigen::Index>(n),
                                                    static_cast<Eigen::Index>(snapshots));
    return SnapshotSeries(std::move(m), dt);
}

void save_csv(const SnapshotSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "dt=" << series.dt() << '\n';
    const Eigen::MatrixXd& q = series.values();
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            if (i) out << ',';
            out << q(i, k);
        }
        out << '\n';
    }
    if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

SnapshotSeries load_stpd(const std::filesystem::path& path) {
    Reader r(path);
    if (r.magic() != "STPD") r.fail("bad magic, expected STPD");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kFormatVersion) r.fail("unsupported version " + std::to_string(version));
    const auto n = r.get<std::uint64_t>("N");
    const auto len = r.get<std::uint64_t>("L");
    const auto dt = r.get<double>("dt");
    if (n == 0) r.fail("header declares N = 0");
    if (len == 0) r.fail("no snapshots");
    if (!(dt > 0.0) || !std::isfinite(dt)) r.fail("header dt must be positive");
    if (n > (1ull << 40) / len) r.fail("header dimensions implausibly large");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(len));
    r.get_doubles(values.data(), static_cast<std::size_t>(values.size()), "snapshot data");
    r.expect_end();
    check_finite(values.data(), static_cast<std::size_t>(values.size()), n, path.string());
    return SnapshotSeries(std::move(values), dt);
}

void save_stpd(const SnapshotSeries& series, const std::filesystem::path& path) {
    Writer w(path);
    w.magic("STPD");
    w.put<std::uint32_t>(kFormatVersion);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(series.dim()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(series.length()));
    w.put<double>(series.dt());
    w.put_doubles(series.values().data(), static_cast<std::size_t>(series.values().size()));
    w.finish();
}

}  // namespace

SeriesFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? SeriesFormat::Csv : SeriesFormat::Stpd;
}

SnapshotSeries load_series(const std::filesystem::path& path, SeriesFormat format) {
    try {
        return format == SeriesFormat::Csv ? load_csv(path) : load_stpd(path);
    } catch (const InputError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

SnapshotSeries load_series(const std::filesystem::path& path) {
    return load_series(path, format_from_path(path));
}

void save_series(const SnapshotSeries& series, const std::filesystem::path& path, SeriesFormat format) {
    if (format == SeriesFormat::Csv)
        save_csv(series, path);
    else
        save_stpd(series, path);
}

void save_series(const SnapshotSeries& series, const std::filesystem::path& path) {
    save_series(series, path, format_from_path(path));
}

void save_modes(const ModeSet& modes, const std::filesystem::path& path) {
    Writer w(path);
    w.magic("STPM");
    w.put<std::uint32_t>(kFormatVersion);
    w.put<std::uint32_t>(method_tag(modes.method));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(modes.n_space));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(modes.depth()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(modes.rank()));
    w.put<double>(modes.dt);
    w.put_doubles(modes.weight.values().data(), static_cast<std::size_t>(modes.weight.size()));
    w.put_doubles(modes.energies.data(), static_cast<std::size_t>(modes.energies.size()));
    w.put_doubles(modes.modes.data(), static_cast<std::size_t>(modes.modes.size()));
    w.finish();
}

ModeSet load_modes(const std::filesystem::path& path) {
    Reader r(path);
    if (r.magic() != "STPM") r.fail("bad magic, expected STPM");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kFormatVersion) r.fail("unsupported version " + std::to_string(version));
    ModeSet out;
    out.method = method_from_tag(r.get<std::uint32_t>("method tag"));
    const auto n = static_cast<Eigen::Index>(r.get<std::uint64_t>("N"));
    const auto d = static_cast<Eigen::Index>(r.get<std::uint64_t>("d"));
    const auto rank = static_cast<Eigen::Index>(r.get<std::uint64_t>("r"));
    out.dt = r.get<double>("dt");
    if (n <= 0 || d <= 0) r.fail("header declares an empty mode shape");
    if (rank > n * d) r.fail("rank exceeds N d");
    Eigen::VectorXd weight(n);
    r.get_doubles(weight.data(), static_cast<std::size_t>(n), "weights");
    out.energies.resize(rank);
    r.get_doubles(out.energies.data(), static_cast<std::size_t>(rank), "energies");
    out.modes.resize(n * d, rank);
    r.get_doubles(out.modes.data(), static_cast<std::size_t>(out.modes.size()), "modes");
    r.expect_end();
    try {
        out.weight = WeightSpec::diagonal(std::move(weight));
    } catch (const InputError& e) {
        r.fail(e.what());
    }
    out.n_space = n;
    if (out.method != PodMethod::SpaceOnly || d > 1) out.embedding = EmbeddingSpec{d, 1};
    return out;
}

void save_frequency_modes(const FrequencyModeSet& modes, const std::filesystem::path& path) {
    Writer w(path);
    w.magic("STPF");
    w.put<std::uint32_t>(kFormatVersion);
    w.put<std::uint32_t>(modes.spec.window == SpodWindow::Hann ? 1u : 0u);
    w.put<std::uint32_t>(modes.spec.one_sided ? 1u : 0u);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(modes.n_space));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(modes.spec.n_fft));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(modes.blocks));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(modes.bins.size()));
    w.put<double>(modes.dt);
    w.put<double>(modes.spec.overlap);
    w.put_doubles(modes.weight.values().data(), static_cast<std::size_t>(modes.weight.size()));
    for (const auto& bin : modes.bins) {
        w.put<std::uint64_t>(static_cast<std::uint64_t>(bin.index));
        w.put<double>(bin.omega);
        w.put<std::uint64_t>(static_cast<std::uint64_t>(bin.energies.size()));
        w.put_doubles(bin.energies.data(), static_cast<std::size_t>(bin.energies.size()));
        // std::complex<double> is layout-compatible with double[2].
        w.put_doubles(reinterpret_cast<const double*>(bin.modes.data()), static_cast<std::size_t>(2 * bin.modes.size()));
    }
    w.finish();
}

FrequencyModeSet load_frequency_modes(const std::filesystem::path& path) {
    Reader r(path);
    if (r.magic() != "STPF") r.fail("bad magic, expected STPF");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kFormatVersion) r.fail("unsupported version " + std::to_string(version));
    FrequencyModeSet out;
    out.spec.window = r.get<std::uint32_t>("window tag") == 1u ? SpodWindow::Hann : SpodWindow::Rectangular;
    out.spec.one_sided = r.get<std::uint32_t>("one-sided flag") != 0u;
    out.n_space = static_cast<Eigen::Index>(r.get<std::uint64_t>("N"));
    out.spec.n_fft = static_cast<Eigen::Index>(r.get<std::uint64_t>("n_fft"));
    out.blocks = static_cast<Eigen::Index>(r.get<std::uint64_t>("blocks"));
    const auto bins = r.get<std::uint64_t>("bin count");
    out.dt = r.get<double>("dt");
    out.spec.overlap = r.get<double>("overlap");
    if (out.n_space <= 0) r.fail("header declares N = 0");
    if (bins > static_cast<std::uint64_t>(out.spec.n_fft)) r.fail("bin count exceeds n_fft");
    Eigen::VectorXd weight(out.n_space);
    r.get_doubles(weight.data(), static_cast<std::size_t>(out.n_space), "weights");
    for (std::uint64_t b = 0; b < bins; ++b) {
        FrequencyBin bin;
        bin.index = static_cast<Eigen::Index>(r.get<std::uint64_t>("bin index"));
        bin.omega = r.get<double>("omega");
        const auto rank = static_cast<Eigen::Index>(r.get<std::uint64_t>("bin rank"));
        if (rank > out.n_space && rank > out.blocks) r.fail("bin rank too large");
        bin.energies.resize(rank);
        r.get_doubles(bin.energies.data(), static_cast<std::size_t>(rank), "bin energies");
        bin.modes.resize(out.n_space, rank);
        r.get_doubles(reinterpret_cast<double*>(bin.modes.data()), static_cast<std::size_t>(2 * bin.modes.size()),
                      "bin modes");
        out.bins.push_back(std::move(bin));
    }
    r.expect_end();
    try {
        out.weight = WeightSpec::diagonal(std::move(weight));
    } catch (const InputError& e) {
        r.fail(e.what());
    }
    return out;
}

std::string describe_file(const std::filesystem::path& path) {
    std::string tag;
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("cannot open '" + path.string() + "'");
        char buf[4] = {};
        in.read(buf, 4);
        tag.assign(buf, static_cast<std::size_t>(in.gcount()));
    }
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    if (tag == "STPD") {
        Reader r(path);
        r.magic();
        const auto version = r.get<std::uint32_t>("version");
        const auto n = r.get<std::uint64_t>("N");
        const auto len = r.get<std::uint64_t>("L");
        const auto dt = r.get<double>("dt");
        out << "format: stpd\nversion: " << version << "\nN: " << n << "\nL: " << len << "\ndt: " << dt << '\n';
    } else if (tag == "STPM") {
        const ModeSet m = load_modes(path);
        out << "format: stpm\nmethod: " << to_string(m.method) << "\nN: " << m.n_space << "\nd: " << m.depth()
            << "\nr: " << m.rank() << "\ndt: " << m.dt << "\nT: " << m.window() << "\nweight: "
            << (m.weight.is_uniform() ? "uniform" : "diagonal") << '\n';
        if (m.rank() > 0) out << "leading energy: " << m.energies(0) << '\n';
    } else if (tag == "STPF") {
        const FrequencyModeSet f = load_frequency_modes(path);
        out << "format: stpf\nN: " << f.n_space << "\nn_fft: " << f.spec.n_fft << "\nblocks: " << f.blocks
            << "\nbins: " << f.bins.size() << "\ndt: " << f.dt << "\nwindow: " << to_string(f.spec.window)
            << "\none-sided: " << (f.spec.one_sided ? "yes" : "no") << "\ntotal energy: " << f.total_energy() << '\n';
    } else {
        const SnapshotSeries s = load_series(path, SeriesFormat::Csv);
        out << "format: csv\nN: " << s.dim() << "\nL: " << s.length() << "\ndt: " << s.dt() << '\n';
    }
    return out.str();
}

Eigen::VectorXd load_weight_vector(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open weight file '" + path.string() + "'");
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            if (trim(field).empty()) continue;
            double v = 0.0;
            if (!parse_double(field, v))
                throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": not a number");
            values.push_back(v);
        }
    }
    if (values.empty()) throw FormatError(path.string() + ": no weights");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace stpod::io
