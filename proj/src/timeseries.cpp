#include "stpod/timeseries.hpp"

#include "stpod/error.hpp"
#include "stpod/rng.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <sstream>

namespace stpod {

namespace {

constexpr std::uint64_t kInitialStream = 0;
constexpr std::uint64_t kDrivingStream = 1;
constexpr std::uint64_t kMeasurementStream = 2;

/// Symmetric square-root factor L with L L^T = S, tolerant of rank deficiency.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()));
    Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

/// Exact one-step transition and noise covariance via Van Loan's block exponential.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> ou_transition(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                          double dt) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = -a * dt;
    block.topRightCorner(n, n) = b * b.transpose() * dt;
    block.bottomRightCorner(n, n) = a.transpose() * dt;
    const Eigen::MatrixXd e = block.exp();
    Eigen::MatrixXd f = e.bottomRightCorner(n, n).transpose();
    Eigen::MatrixXd q = f * e.topRightCorner(n, n);
    q = 0.5 * (q + q.transpose()).eval();
    return {std::move(f), std::move(q)};
}

void check_stable(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> eig(a, false);
    const double worst = eig.eigenvalues().real().maxCoeff();
    if (!(worst < 0.0)) {
        std::ostringstream msg;
        msg << "unstable OU drift: eigenvalue with real part " << worst << " >= 0";
        throw InputError(msg.str());
    }
}

void check_ou(const OuParams& p) {
    detail::require(p.drift.rows() >= 1 && p.drift.rows() == p.drift.cols(), "OU drift must be square and non-empty");
    detail::require(p.diffusion.rows() == p.drift.rows(), "OU diffusion must have as many rows as the drift");
    detail::require(p.drift.allFinite() && p.diffusion.allFinite(), "OU parameters must be finite");
    check_stable(p.drift);
}

Eigen::MatrixXd run_ou(const OuParams& p, std::uint64_t seed, std::size_t total, double dt) {
    check_ou(p);
    const Eigen::Index n = p.drift.rows();
    const auto [f, q] = ou_transition(p.drift, p.diffusion, dt);
    const Eigen::MatrixXd noise_factor = psd_factor(q);
    const Eigen::MatrixXd start_factor = psd_factor(ou_stationary_covariance(p.drift, p.diffusion));

    NormalStream init(seed, kInitialStream);
    NormalStream drive(seed, kDrivingStream);
    Eigen::VectorXd w(n);

    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(total));
    for (Eigen::Index i = 0; i < n; ++i) w(i) = init.next();
    Eigen::VectorXd x = start_factor * w;
    out.col(0) = x;
    for (Eigen::Index k = 1; k < out.cols(); ++k) {
        for (Eigen::Index i = 0; i < n; ++i) w(i) = drive.next();
        x = f * x + noise_factor * w;
        out.col(k) = x;
    }
    return out;
}

Eigen::MatrixXd run_narrowband(const NarrowbandParams& p, std::uint64_t seed, std::size_t total, double dt) {
    detail::require(p.amplitude.size() >= 1, "narrowband amplitude pattern must be non-empty");
    detail::require(p.bandwidth >= 0.0 && std::isfinite(p.bandwidth), "narrowband bandwidth must be >= 0");
    detail::require(std::isfinite(p.omega0), "narrowband carrier frequency must be finite");
    detail::require(p.noise >= 0.0, "narrowband noise level must be >= 0");

    const std::complex<double> pole = std::exp(std::complex<double>(-p.bandwidth * dt, p.omega0 * dt));
    const double innovation = std::sqrt(0.5 * (1.0 - std::exp(-2.0 * p.bandwidth * dt)));

    NormalStream init(seed, kInitialStream);
    NormalStream drive(seed, kDrivingStream);
    NormalStream meas(seed, kMeasurementStream);

    const Eigen::Index n = p.amplitude.size();
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(total));
    const double a = init.next();
    const double b = init.next();
    std::complex<double> z(a / std::sqrt(2.0), b / std::sqrt(2.0));
    for (Eigen::Index k = 0; k < out.cols(); ++k) {
        if (k > 0) {
            z *= pole;
            if (innovation > 0.0) {
                const double re = drive.next();
                const double im = drive.next();
                z += std::complex<double>(innovation * re, innovation * im);
            }
        }
        out.col(k) = p.amplitude * z.real();
        if (p.noise > 0.0)
            for (Eigen::Index i = 0; i < n; ++i) out(i, k) += p.noise * meas.next();
    }
    return out;
}

Eigen::Vector3d lorenz_rhs(const Lorenz63Params& p, const Eigen::Vector3d& x) {
    return {p.sigma * (x(1) - x(0)), x(0) * (p.rho - x(2)) - x(1), x(0) * x(1) - p.beta * x(2)};
}

Eigen::MatrixXd run_lorenz(const Lorenz63Params& p, std::uint64_t seed, std::size_t total, double dt) {
    detail::require(!p.observed.empty(), "lorenz63 needs at least one observed coordinate");
    for (int c : p.observed) detail::require(c >= 0 && c <= 2, "lorenz63 observed coordinates must be in {0,1,2}");

    // Fixed-step RK4 with at least 10 substeps per sample and h <= 0.005.
    const auto substeps = static_cast<int>(std::max(10.0, std::ceil(dt / 0.005)));
    const double h = dt / substeps;

    NormalStream init(seed, kInitialStream);
    Eigen::Vector3d x(1.0 + 0.1 * init.next(), 1.0 + 0.1 * init.next(), 1.0 + 0.1 * init.next());

    Eigen::MatrixXd out(static_cast<Eigen::Index>(p.observed.size()), static_cast<Eigen::Index>(total));
    for (Eigen::Index k = 0; k < out.cols(); ++k) {
        if (k > 0) {
            for (int s = 0; s < substeps; ++s) {
                const Eigen::Vector3d k1 = lorenz_rhs(p, x);
                const Eigen::Vector3d k2 = lorenz_rhs(p, x + 0.5 * h * k1);
                const Eigen::Vector3d k3 = lorenz_rhs(p, x + 0.5 * h * k2);
                const Eigen::Vector3d k4 = lorenz_rhs(p, x + h * k3);
                x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
        }
        for (std::size_t i = 0; i < p.observed.size(); ++i) out(static_cast<Eigen::Index>(i), k) = x(p.observed[i]);
    }
    return out;
}

}  // namespace

SnapshotSeries::SnapshotSeries(Eigen::MatrixXd values, double dt, std::vector<std::string> labels)
    : values_(std::move(values)), dt_(dt), labels_(std::move(labels)) {
    detail::require(values_.rows() >= 1, "series must have at least one component");
    detail::require(values_.cols() >= 1, "no snapshots");
    detail::require(dt_ > 0.0 && std::isfinite(dt_), "time step must be positive and finite");
    detail::require(labels_.empty() || labels_.size() == static_cast<std::size_t>(values_.rows()),
                    "label count must match the series dimension");
    if (!values_.allFinite()) {
        for (Eigen::Index k = 0; k < values_.cols(); ++k)
            for (Eigen::Index i = 0; i < values_.rows(); ++i)
                if (!std::isfinite(values_(i, k))) {
                    std::ostringstream msg;
                    msg << "non-finite value at component " << i << ", snapshot " << k;
                    throw InputError(msg.str());
                }
    }
}

SnapshotSeries SnapshotSeries::head(Eigen::Index count) const {
    detail::require(count >= 1 && count <= length(), "head length out of range");
    return SnapshotSeries(values_.leftCols(count), dt_, labels_);
}

std::string GeneratorSpec::kind() const {
    switch (params.index()) {
        case 0: return "ornstein-uhlenbeck";
        case 1: return "narrowband";
        default: return "lorenz63";
    }
}

Eigen::Index GeneratorSpec::dim() const {
    if (const auto* ou = std::get_if<OuParams>(&params)) return ou->drift.rows();
    if (const auto* nb = std::get_if<NarrowbandParams>(&params)) return nb->amplitude.size();
    return static_cast<Eigen::Index>(std::get<Lorenz63Params>(params).observed.size());
}

GeneratorSpec GeneratorSpec::scalar_ou(double tau, double diffusion, std::uint64_t seed, std::size_t burn_in) {
    detail::require(tau > 0.0, "OU correlation time must be positive");
    OuParams p{Eigen::MatrixXd::Constant(1, 1, -1.0 / tau), Eigen::MatrixXd::Constant(1, 1, diffusion)};
    return GeneratorSpec{std::move(p), seed, burn_in};
}

SnapshotSeries generate(const GeneratorSpec& spec, std::size_t n_snapshots, double dt) {
    detail::require(dt > 0.0 && std::isfinite(dt), "time step must be positive and finite");
    detail::require(n_snapshots >= 1, "n_snapshots must be >= 1");
    const std::size_t total = n_snapshots + spec.burn_in;

    Eigen::MatrixXd raw;
    if (const auto* ou = std::get_if<OuParams>(&spec.params))
        raw = run_ou(*ou, spec.seed, total, dt);
    else if (const auto* nb = std::get_if<NarrowbandParams>(&spec.params))
        raw = run_narrowband(*nb, spec.seed, total, dt);
    else
        raw = run_lorenz(std::get<Lorenz63Params>(spec.params), spec.seed, total, dt);

    return SnapshotSeries(raw.rightCols(static_cast<Eigen::Index>(n_snapshots)), dt);
}

Eigen::MatrixXd ou_stationary_covariance(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion) {
    check_ou(OuParams{drift, diffusion});
    // Smith doubling on the exact discrete-time Lyapunov equation
    // S = F S F^T + Q, whose fixed point equals the continuous solution.
    Eigen::EigenSolver<Eigen::MatrixXd> eig(drift, false);
    const double slowest = -eig.eigenvalues().real().maxCoeff();
    auto [f, q] = ou_transition(drift, diffusion, 1.0 / slowest);
    Eigen::MatrixXd s = q;
    for (int it = 0; it < 64; ++it) {
        Eigen::MatrixXd next = s + f * s * f.transpose();
        f = (f * f).eval();
        const double change = (next - s).norm();
        s = std::move(next);
        if (change <= 1e-16 * s.norm()) break;
    }
    return 0.5 * (s + s.transpose());
}

Eigen::MatrixXd ou_lag_covariance(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion, double lag_time) {
    const Eigen::MatrixXd s = ou_stationary_covariance(drift, diffusion);
    const Eigen::MatrixXd at = drift * lag_time;
    return at.exp() * s;
}

std::pair<SnapshotSeries, Eigen::VectorXd> subtract_temporal_mean(const SnapshotSeries& series) {
    Eigen::VectorXd mean = series.values().rowwise().mean();
    Eigen::MatrixXd centered = series.values().colwise() - mean;
    return {SnapshotSeries(std::move(centered), series.dt(), series.labels()), std::move(mean)};
}

double decorrelation_time(const SnapshotSeries& series, Eigen::Index max_lag) {
    const Eigen::MatrixXd& q = series.values();
    const Eigen::Index len = q.cols();
    if (max_lag < 0) max_lag = 4096;
    max_lag = std::min(max_lag, len - 1);
    const double c0 = q.squaredNorm() / static_cast<double>(len);
    if (c0 == 0.0) return 0.0;
    for (Eigen::Index lag = 1; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k + lag < len; ++k) acc += q.col(k).dot(q.col(k + lag));
        const double c = acc / static_cast<double>(len - lag);
        if (c < c0 * std::exp(-1.0)) return static_cast<double>(lag) * series.dt();
    }
    return static_cast<double>(max_lag) * series.dt();
}

}  // namespace stpod
