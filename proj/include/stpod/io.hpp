#pragma once

#include "stpod/decomposition.hpp"
#include "stpod/spod.hpp"
#include "stpod/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace stpod::io {

enum class SeriesFormat { Csv, Stpd };

constexpr std::uint32_t kFormatVersion = 1;

/// csv for a ".csv" extension, stpd otherwise.
SeriesFormat format_from_path(const std::filesystem::path& path);

/// stpd: "STPD", u32 version, u64 N, u64 L, f64 dt, then N L f64 values
/// column-major; all little-endian.
/// csv: a "dt=<value>" line, then one snapshot per line as N comma-separated
/// values.
SnapshotSeries load_series(const std::filesystem::path& path, SeriesFormat format);
SnapshotSeries load_series(const std::filesystem::path& path);
void save_series(const SnapshotSeries& series, const std::filesystem::path& path, SeriesFormat format);
void save_series(const SnapshotSeries& series, const std::filesystem::path& path);

/// "STPM", u32 version, u32 method tag, u64 N, u64 d, u64 r, f64 dt,
/// N f64 weights, r f64 energies, (N d) r f64 modes column-major.
void save_modes(const ModeSet& modes, const std::filesystem::path& path);
ModeSet load_modes(const std::filesystem::path& path);

/// "STPF", u32 version, u32 window tag, u32 one-sided flag, u64 N, u64 n_fft,
/// u64 blocks, u64 bin count, f64 dt, f64 overlap, N f64 weights; then per
/// bin: u64 index, f64 omega, u64 r, r f64 energies, N r complex modes as
/// interleaved (re, im) f64 pairs, column-major.
void save_frequency_modes(const FrequencyModeSet& modes, const std::filesystem::path& path);
FrequencyModeSet load_frequency_modes(const std::filesystem::path& path);

/// Human-readable header summary of any stpd/STPM/STPF file.
std::string describe_file(const std::filesystem::path& path);

/// One weight per line or comma-separated on one line.
Eigen::VectorXd load_weight_vector(const std::filesystem::path& path);

}  // namespace stpod::io
