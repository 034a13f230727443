#include "gsdcheck/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gsdcheck/rng.hpp"

namespace gsdcheck {

namespace {

constexpr char kMagic[8] = {'G', 'S', 'D', 'G', 'R', 'I', 'D', '\0'};
constexpr std::size_t kHeaderSize = 24;
constexpr std::size_t kPayloadDoubles =
    static_cast<std::size_t>(ParamGrid::kCellCount) * kCategories;
constexpr std::size_t kFileSize = kHeaderSize + 8 * kPayloadDoubles + 8;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t fnv1a64_bytes(const unsigned char* data, std::size_t size) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(data), size));
}

}  // namespace

ParamGrid ParamGrid::build() {
    ParamGrid grid;
    grid.log_pmf_.resize(kPayloadDoubles);
    for (int i = 0; i < kPsiCount; ++i) {
        for (int j = 0; j < kRhoCount; ++j) {
            const GridCell cell{i, j};
            const Pmf5 lp = gsd_log_pmf(params_at(cell));
            std::copy(lp.begin(), lp.end(), grid.log_pmf_.begin() + flat_index(cell) * kCategories);
        }
    }
    return grid;
}

GridCell ParamGrid::nearest(double psi, double rho) noexcept {
    const int i = static_cast<int>(std::lround(psi * 100.0)) - 101;
    const int j = static_cast<int>(std::lround(rho * 400.0)) - 1;
    return {std::clamp(i, 0, kPsiCount - 1), std::clamp(j, 0, kRhoCount - 1)};
}

Pmf5 ParamGrid::pmf(GridCell cell) const {
    Pmf5 p{};
    const auto lp = log_pmf(cell);
    for (int j = 0; j < kCategories; ++j) p[j] = std::exp(lp[j]);
    return p;
}

std::uint64_t ParamGrid::checksum() const {
    const auto bytes = serialize_grid(*this);
    return get_u64(bytes.data() + bytes.size() - 8);
}

bool operator==(const ParamGrid& a, const ParamGrid& b) {
    // Bitwise comparison: -inf == -inf and no NaNs are expected.
    return a.log_pmf_.size() == b.log_pmf_.size() &&
           std::memcmp(a.log_pmf_.data(), b.log_pmf_.data(), a.log_pmf_.size() * sizeof(double)) == 0;
}

std::vector<unsigned char> serialize_grid(const ParamGrid& grid) {
    std::vector<unsigned char> out;
    out.reserve(kFileSize);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, ParamGrid::kFormatVersion);
    put_u32(out, ParamGrid::kPsiCount);
    put_u32(out, ParamGrid::kRhoCount);
    put_u32(out, kCategories);
    for (double v : grid.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    put_u64(out, fnv1a64_bytes(out.data(), out.size()));
    return out;
}

void save_grid(const ParamGrid& grid, const std::filesystem::path& path) {
    const auto bytes = serialize_grid(grid);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw GridFileError(GridFileError::Kind::io, "cannot open grid file for writing: " + path.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw GridFileError(GridFileError::Kind::io, "failed writing grid file: " + path.string());
}

ParamGrid load_grid(const std::filesystem::path& path) {
    using Kind = GridFileError::Kind;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw GridFileError(Kind::io, "cannot open grid file: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    if (bytes.size() < kHeaderSize) throw GridFileError(Kind::truncated, "grid file truncated: " + path.string());
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw GridFileError(Kind::bad_magic, "not a grid file (bad magic): " + path.string());
    }
    const std::uint32_t version = get_u32(bytes.data() + 8);
    if (version != ParamGrid::kFormatVersion) {
        throw GridFileError(Kind::version_mismatch, "grid file format version " + std::to_string(version) +
                                                        " does not match expected " +
                                                        std::to_string(ParamGrid::kFormatVersion));
    }
    if (get_u32(bytes.data() + 12) != ParamGrid::kPsiCount || get_u32(bytes.data() + 16) != ParamGrid::kRhoCount ||
        get_u32(bytes.data() + 20) != kCategories) {
        throw GridFileError(Kind::bad_dimensions, "grid file has unexpected dimensions: " + path.string());
    }
    if (bytes.size() != kFileSize) {
        throw GridFileError(Kind::truncated, "grid file has wrong size (" + std::to_string(bytes.size()) +
                                                 " bytes, expected " + std::to_string(kFileSize) + ")");
    }
    const std::uint64_t stored = get_u64(bytes.data() + kFileSize - 8);
    if (stored != fnv1a64_bytes(bytes.data(), kFileSize - 8)) {
        throw GridFileError(Kind::checksum_mismatch, "grid file checksum mismatch: " + path.string());
    }

    ParamGrid grid;
    grid.log_pmf_.resize(kPayloadDoubles);
    for (std::size_t i = 0; i < kPayloadDoubles; ++i) {
        grid.log_pmf_[i] = std::bit_cast<double>(get_u64(bytes.data() + kHeaderSize + 8 * i));
    }
    return grid;
}

}  // namespace gsdcheck
