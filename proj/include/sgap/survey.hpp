#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgap/error.hpp"
#include "sgap/random.hpp"

namespace sgap {

/// Collinear fine grid. Source index i and receiver index i sit at the same
/// physical position i * spacing.
struct SurveyGrid {
    int n_s = 2;
    int n_r = 1;
    double spacing = 12.5;

    void validate() const {
        if (n_s < 2) throw InvalidArgument("survey grid needs n_s >= 2, got " + std::to_string(n_s));
        if (n_r < 1) throw InvalidArgument("survey grid needs n_r >= 1, got " + std::to_string(n_r));
        if (!(spacing > 0.0) || !std::isfinite(spacing)) throw InvalidArgument("survey grid spacing must be positive");
    }

    friend bool operator==(const SurveyGrid&, const SurveyGrid&) = default;
};

/// Half-open index interval [begin, end).
struct Region {
    int begin = 0;
    int end = 0;

    [[nodiscard]] int size() const noexcept { return end - begin; }
    [[nodiscard]] bool contains(int i) const noexcept { return i >= begin && i < end; }

    friend bool operator==(const Region&, const Region&) = default;
};

/// Contiguous near-equal split of the source line, one region per kept source.
struct RegionPartition {
    std::vector<Region> regions;
    double ratio = 1.0;

    [[nodiscard]] int n_sel() const noexcept { return static_cast<int>(regions.size()); }
    [[nodiscard]] int n_s() const noexcept { return regions.empty() ? 0 : regions.back().end; }

    /// Region holding source index i, or -1 when i is off the grid.
    [[nodiscard]] int region_of(int i) const noexcept {
        if (regions.empty() || i < 0 || i >= n_s()) return -1;
        auto it = std::upper_bound(regions.begin(), regions.end(), i,
                                   [](int v, const Region& r) { return v < r.begin; });
        return static_cast<int>(it - regions.begin()) - 1;
    }

    friend bool operator==(const RegionPartition&, const RegionPartition&) = default;
};

/// A binary source-subsampling mask: the selected sources keep every receiver.
struct SourceMask {
    SurveyGrid grid;
    RegionPartition partition;
    std::vector<int> selected; // ascending
    std::uint64_t seed = 0;    // provenance only

    [[nodiscard]] bool is_selected(int i) const { return std::binary_search(selected.begin(), selected.end(), i); }
    [[nodiscard]] std::size_t trace_count() const noexcept { return selected.size() * static_cast<std::size_t>(grid.n_r); }

    friend bool operator==(const SourceMask&, const SourceMask&) = default;
};

/// floor(n_s * ratio), tolerant to representation error such as 100 * 0.29.
inline int selection_count(int n_s, double ratio) noexcept {
    const double x = static_cast<double>(n_s) * ratio;
    return static_cast<int>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

inline RegionPartition make_partition(const SurveyGrid& grid, double ratio) {
    grid.validate();
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw InvalidArgument("subsampling ratio must lie in (0, 1], got " + std::to_string(ratio));
    }
    const int n_sel = selection_count(grid.n_s, ratio);
    if (n_sel < 1) {
        throw DegenerateRatio("floor(n_s * ratio) is zero for n_s=" + std::to_string(grid.n_s) +
                              ", ratio=" + std::to_string(ratio));
    }

    RegionPartition p;
    p.ratio = ratio;
    p.regions.reserve(static_cast<std::size_t>(n_sel));
    const int base = grid.n_s / n_sel;
    const int larger = grid.n_s % n_sel; // the first `larger` regions get one extra slot
    int begin = 0;
    for (int k = 0; k < n_sel; ++k) {
        const int size = base + (k < larger ? 1 : 0);
        p.regions.push_back({begin, begin + size});
        begin += size;
    }
    return p;
}

/// One uniformly drawn source per region. Neighbouring picks across a region
/// boundary are allowed.
inline SourceMask jittered_mask(const SurveyGrid& grid, const RegionPartition& partition, std::uint64_t seed) {
    grid.validate();
    if (partition.n_s() != grid.n_s) throw InvalidArgument("partition does not cover the survey grid");

    Rng rng = make_rng(seed);
    SourceMask mask{grid, partition, {}, seed};
    mask.selected.reserve(partition.regions.size());
    for (const Region& r : partition.regions) {
        std::uniform_int_distribution<int> pick(r.begin, r.end - 1);
        mask.selected.push_back(pick(rng));
    }
    return mask;
}

inline SourceMask jittered_mask(const SurveyGrid& grid, double ratio, std::uint64_t seed) {
    return jittered_mask(grid, make_partition(grid, ratio), seed);
}

/// Cardinality and one-selection-per-region constraints.
inline bool check_constraints(const SourceMask& mask) {
    const auto& regions = mask.partition.regions;
    if (regions.empty() || mask.partition.n_s() != mask.grid.n_s) return false;
    if (mask.selected.size() != regions.size()) return false;
    if (!std::is_sorted(mask.selected.begin(), mask.selected.end())) return false;
    for (std::size_t k = 0; k < regions.size(); ++k) {
        // sorted + one per ordered region means the k-th pick sits in region k
        if (!regions[k].contains(mask.selected[k])) return false;
    }
    return true;
}

/// Largest distance between consecutive selected indices.
inline int max_gap(const SourceMask& mask) {
    int gap = 0;
    for (std::size_t k = 1; k < mask.selected.size(); ++k) gap = std::max(gap, mask.selected[k] - mask.selected[k - 1]);
    return gap;
}

// ---------------------------------------------------------------------------
// Mask files

inline nlohmann::json mask_to_json(const SourceMask& mask) {
    nlohmann::json j;
    j["n_s"] = mask.grid.n_s;
    j["n_r"] = mask.grid.n_r;
    j["spacing_m"] = mask.grid.spacing;
    j["ratio"] = mask.partition.ratio;
    j["selected_sources"] = mask.selected;
    j["seed"] = mask.seed;
    return j;
}

inline SourceMask mask_from_json(const nlohmann::json& j) {
    SourceMask mask;
    try {
        mask.grid.n_s = j.at("n_s").get<int>();
        mask.grid.n_r = j.at("n_r").get<int>();
        mask.grid.spacing = j.at("spacing_m").get<double>();
        const double ratio = j.at("ratio").get<double>();
        mask.selected = j.at("selected_sources").get<std::vector<int>>();
        mask.seed = j.value("seed", std::uint64_t{0});
        mask.partition = make_partition(mask.grid, ratio);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed mask JSON: ") + e.what());
    }
    std::sort(mask.selected.begin(), mask.selected.end());
    return mask;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

/// Plain-text variant: `# n_s n_r ratio` header, then one index per line.
inline void write_mask_text(std::ostream& out, const SourceMask& mask) {
    out << "# " << mask.grid.n_s << ' ' << mask.grid.n_r << ' ' << format_double(mask.partition.ratio) << '\n';
    for (int i : mask.selected) out << i << '\n';
}

inline SourceMask read_mask_text(std::istream& in, double spacing = 12.5) {
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#') {
        throw InvalidArgument("mask text file must start with '# n_s n_r ratio'");
    }
    std::istringstream header(line.substr(1));
    SourceMask mask;
    double ratio = 0.0;
    if (!(header >> mask.grid.n_s >> mask.grid.n_r >> ratio)) throw InvalidArgument("bad mask text header: " + line);
    mask.grid.spacing = spacing;
    mask.partition = make_partition(mask.grid, ratio);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int idx = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), idx);
        if (ec != std::errc{}) throw InvalidArgument("bad source index line: " + line);
        mask.selected.push_back(idx);
    }
    std::sort(mask.selected.begin(), mask.selected.end());
    return mask;
}

inline void save_mask(const std::string& path, const SourceMask& mask) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".txt") == 0) {
        write_mask_text(out, mask);
    } else {
        out << mask_to_json(mask).dump(2) << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

inline SourceMask load_mask(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".txt") == 0) return read_mask_text(in);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("cannot parse " + path + ": " + e.what());
    }
    return mask_from_json(j);
}

} // namespace sgap
