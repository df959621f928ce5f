#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <vector>

#include "sgap/sparse.hpp"
#include "sgap/survey.hpp"

namespace sgap {

/// A recorded source-receiver pair.
struct Trace {
    int source;
    int receiver;

    friend auto operator<=>(const Trace&, const Trace&) = default;
};

/// Midpoint-offset coordinates. `m` is the midpoint rounded down to the source
/// grid, `h` the source-receiver offset shifted so that h = n_r - 1 is zero
/// offset. The map is injective: s + r has the parity of s - r.
struct MOCell {
    int m;
    int h;

    friend auto operator<=>(const MOCell&, const MOCell&) = default;
};

inline int mo_rows(const SurveyGrid& grid) noexcept { return (grid.n_s + grid.n_r - 2) / 2 + 1; }
inline int mo_cols(const SurveyGrid& grid) noexcept { return grid.n_s + grid.n_r - 1; }

inline MOCell to_mo_cell(const SurveyGrid& grid, Trace t) noexcept {
    return {(t.source + t.receiver) / 2, t.source - t.receiver + (grid.n_r - 1)};
}

/// Inverse of to_mo_cell; empty when the cell lies outside the acquisition diamond.
inline std::optional<Trace> trace_of(const SurveyGrid& grid, MOCell c) noexcept {
    const int offset = c.h - (grid.n_r - 1);
    const int sum = 2 * c.m + (offset & 1);
    const Trace t{(sum + offset) / 2, (sum - offset) / 2};
    if (c.m < 0 || t.source < 0 || t.receiver < 0 || t.source >= grid.n_s || t.receiver >= grid.n_r) return std::nullopt;
    return t;
}

/// Traces present in the survey: every receiver of every selected source, plus
/// (with reciprocity) each swapped trace that still lands on the grid.
/// Sorted, duplicates merged.
inline std::vector<Trace> recorded_traces(const SourceMask& mask, bool reciprocity) {
    std::vector<Trace> traces;
    traces.reserve(mask.trace_count() * (reciprocity ? 2 : 1));
    for (int s : mask.selected) {
        for (int r = 0; r < mask.grid.n_r; ++r) {
            traces.push_back({s, r});
            if (reciprocity && r < mask.grid.n_s && s < mask.grid.n_r) traces.push_back({r, s});
        }
    }
    std::sort(traces.begin(), traces.end());
    traces.erase(std::unique(traces.begin(), traces.end()), traces.end());
    return traces;
}

/// Binary mask in the midpoint-offset domain, stored as a sorted coordinate list.
struct MOMatrix {
    SurveyGrid grid;
    std::vector<MOCell> cells;

    [[nodiscard]] int rows() const noexcept { return mo_rows(grid); }
    [[nodiscard]] int cols() const noexcept { return mo_cols(grid); }
    [[nodiscard]] bool contains(MOCell c) const { return std::binary_search(cells.begin(), cells.end(), c); }
};

inline MOMatrix to_mo(const SourceMask& mask, bool reciprocity) {
    MOMatrix mo{mask.grid, {}};
    const auto traces = recorded_traces(mask, reciprocity);
    mo.cells.reserve(traces.size());
    for (const Trace& t : traces) mo.cells.push_back(to_mo_cell(mask.grid, t));
    std::sort(mo.cells.begin(), mo.cells.end());
    // the map is injective, so distinct traces already give distinct cells
    return mo;
}

inline std::size_t mo_nonzeros(const MOMatrix& mo) noexcept { return mo.cells.size(); }

/// Reads the support back into source-receiver traces.
inline std::vector<Trace> support_traces(const MOMatrix& mo) {
    std::vector<Trace> out;
    out.reserve(mo.cells.size());
    for (MOCell c : mo.cells) {
        if (auto t = trace_of(mo.grid, c)) out.push_back(*t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <typename T = double>
SparseMatrix<T> to_sparse(const MOMatrix& mo) {
    std::vector<Triplet<T>> triplets;
    triplets.reserve(mo.cells.size());
    for (MOCell c : mo.cells) triplets.push_back({c.m, c.h, T{1}});
    return SparseMatrix<T>(mo.rows(), mo.cols(), std::move(triplets));
}

/// `m h 1` per line, for plotting.
inline void write_triplets(std::ostream& out, const MOMatrix& mo) {
    for (MOCell c : mo.cells) out << c.m << ' ' << c.h << " 1\n";
}

} // namespace sgap
