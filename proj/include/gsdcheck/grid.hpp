#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "gsdcheck/gsd.hpp"

namespace gsdcheck {

/// Index of one (psi, rho) cell of the parameter grid.
struct GridCell {
    int psi_index = 0;
    int rho_index = 0;

    friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Precomputed GSD log-probabilities over
///   psi = 1.01, 1.02, ..., 4.99   (399 values)
///   rho = 0.0025, 0.0050, ..., 1  (400 values)
/// stored row-major as [psi][rho][score].
class ParamGrid {
public:
    static constexpr int kPsiCount = 399;
    static constexpr int kRhoCount = 400;
    static constexpr int kCellCount = kPsiCount * kRhoCount;
    static constexpr std::uint32_t kFormatVersion = 1;

    /// Evaluates gsd_log_pmf at every cell.
    static ParamGrid build();

    static double psi_at(int psi_index) noexcept { return (101 + psi_index) / 100.0; }
    static double rho_at(int rho_index) noexcept { return (rho_index + 1) / 400.0; }

    static GsdParams params_at(GridCell cell) { return {psi_at(cell.psi_index), rho_at(cell.rho_index)}; }

    /// Nearest grid cell to arbitrary parameters (clamped to the grid).
    static GridCell nearest(double psi, double rho) noexcept;

    static int flat_index(GridCell cell) noexcept { return cell.psi_index * kRhoCount + cell.rho_index; }
    static GridCell cell_at(int flat) noexcept { return {flat / kRhoCount, flat % kRhoCount}; }

    std::span<const double, kCategories> log_pmf(GridCell cell) const noexcept {
        return std::span<const double, kCategories>(log_pmf_.data() + flat_index(cell) * kCategories,
                                                    kCategories);
    }
    std::span<const double, kCategories> log_pmf(int flat) const noexcept {
        return std::span<const double, kCategories>(log_pmf_.data() + flat * kCategories, kCategories);
    }

    Pmf5 pmf(GridCell cell) const;

    /// Raw [cell][score] table; size kCellCount * kCategories.
    std::span<const double> values() const noexcept { return log_pmf_; }

    /// FNV-1a over the serialized payload; also stored in the grid file.
    std::uint64_t checksum() const;

    friend bool operator==(const ParamGrid& a, const ParamGrid& b);

private:
    friend ParamGrid load_grid(const std::filesystem::path& path);

    std::vector<double> log_pmf_;
};

/// Raised for missing, corrupted, truncated or version-mismatched grid files.
class GridFileError : public std::runtime_error {
public:
    enum class Kind { io, bad_magic, version_mismatch, bad_dimensions, truncated, checksum_mismatch };

    GridFileError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Grid cache file layout, all integers and doubles little-endian:
///
///   offset  size      field
///   0       8         magic "GSDGRID\0"
///   8       4         format_version (u32)
///   12      4         psi count (u32, 399)
///   16      4         rho count (u32, 400)
///   20      4         categories (u32, 5)
///   24      8*N       log-probabilities, row-major [psi][rho][score], IEEE-754 binary64
///   24+8N   8         FNV-1a 64 of bytes [0, 24+8N)
///
/// Values are produced with IEEE-754 double arithmetic in round-to-nearest
/// mode; -inf encodes a zero probability.
void save_grid(const ParamGrid& grid, const std::filesystem::path& path);
ParamGrid load_grid(const std::filesystem::path& path);

/// Serializes to the exact byte image written by save_grid.
std::vector<unsigned char> serialize_grid(const ParamGrid& grid);

}  // namespace gsdcheck
