#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "sgap/modomain.hpp"

using namespace sgap;

namespace {

SourceMask mask_with(SurveyGrid g, double ratio, std::vector<int> selected) {
    SourceMask m;
    m.grid = g;
    m.partition = make_partition(g, ratio);
    m.selected = std::move(selected);
    return m;
}

} // namespace

TEST_CASE("to_mo index map", "[modomain]") {
    SECTION("single source, reciprocity off") {
        auto m = mask_with({4, 2, 12.5}, 0.25, {0});
        auto mo = to_mo(m, false);
        CHECK(mo.rows() == 3);
        CHECK(mo.cols() == 5);
        // (0,0) -> midpoint 0, offset 0 (shifted 1); (0,1) -> midpoint 0.5 floored, offset -1 (shifted 0)
        CHECK(mo.cells == std::vector<MOCell>{{0, 0}, {0, 1}});
        CHECK(mo_nonzeros(mo) == 2);
    }
    SECTION("full square geometry fills the diamond") {
        const int n = 7;
        auto m = mask_with({n, n, 12.5}, 1.0, {0, 1, 2, 3, 4, 5, 6});
        auto mo = to_mo(m, false);
        CHECK(mo_nonzeros(mo) == static_cast<std::size_t>(n * n));
        int diamond = 0;
        for (int mm = 0; mm < mo.rows(); ++mm)
            for (int h = 0; h < mo.cols(); ++h)
                if (trace_of(m.grid, {mm, h})) {
                    ++diamond;
                    CHECK(mo.contains({mm, h}));
                }
        CHECK(diamond == n * n);
    }
    SECTION("reciprocity on a 3x3 grid merges the zero-offset cell") {
        auto m = mask_with({3, 3, 12.5}, 1.0 / 3.0, {1});
        // Oracle: enumerate recorded and swapped traces by hand.
        std::set<std::pair<int, int>> cells;
        for (int r = 0; r < 3; ++r) {
            cells.insert({(1 + r) / 2, 1 - r + 2});
            cells.insert({(r + 1) / 2, r - 1 + 2});
        }
        auto mo = to_mo(m, true);
        CHECK(mo_nonzeros(mo) == 5);
        CHECK(cells.size() == 5);
        for (auto [mm, h] : cells) CHECK(mo.contains({mm, h}));
    }
    SECTION("empty selection") {
        auto m = mask_with({4, 2, 12.5}, 0.25, {});
        CHECK(mo_nonzeros(to_mo(m, true)) == 0);
    }
    SECTION("single trace") {
        auto m = mask_with({4, 1, 12.5}, 0.25, {2});
        CHECK(mo_nonzeros(to_mo(m, false)) == 1);
    }
}

TEST_CASE("midpoint-offset invariants on random masks", "[modomain][property]") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const SurveyGrid g{10 + static_cast<int>(seed % 23), 3 + static_cast<int>((seed * 7) % 19), 12.5};
        auto m = jittered_mask(g, 0.25, seed);
        const auto off = to_mo(m, false);
        const auto on = to_mo(m, true);

        CHECK(mo_nonzeros(off) == m.selected.size() * static_cast<std::size_t>(g.n_r));
        CHECK(mo_nonzeros(on) >= mo_nonzeros(off));
        for (MOCell c : off.cells) CHECK(on.contains(c));
        for (MOCell c : on.cells) {
            CHECK(c.m >= 0);
            CHECK(c.m < on.rows());
            CHECK(c.h >= 0);
            CHECK(c.h < on.cols());
        }

        CHECK(support_traces(off) == recorded_traces(m, false));
        CHECK(support_traces(on) == recorded_traces(m, true));
    }
}

TEST_CASE("reciprocity adds nothing when no swapped trace lands on the grid", "[modomain]") {
    // Sources beyond the receiver spread have no valid reciprocal trace.
    auto m = mask_with({10, 3, 12.5}, 0.2, {4, 8});
    CHECK(mo_nonzeros(to_mo(m, true)) == mo_nonzeros(to_mo(m, false)));
}

TEST_CASE("trace_of inverts to_mo_cell", "[modomain]") {
    const SurveyGrid g{9, 5, 12.5};
    for (int s = 0; s < g.n_s; ++s)
        for (int r = 0; r < g.n_r; ++r) {
            auto t = trace_of(g, to_mo_cell(g, {s, r}));
            REQUIRE(t);
            CHECK(*t == Trace{s, r});
        }
    CHECK_FALSE(trace_of(g, {0, 0}));        // source -2
    CHECK_FALSE(trace_of(g, {mo_rows(g), 4})); // past the last midpoint
    // every cell of the full diamond is hit exactly once
    int hits = 0;
    for (int m = 0; m < mo_rows(g); ++m)
        for (int h = 0; h < mo_cols(g); ++h)
            if (auto t = trace_of(g, {m, h})) {
                ++hits;
                CHECK(to_mo_cell(g, *t) == MOCell{m, h});
            }
    CHECK(hits == g.n_s * g.n_r);
}

TEST_CASE("triplet dump", "[modomain][io]") {
    auto m = mask_with({4, 2, 12.5}, 0.25, {0});
    std::ostringstream out;
    write_triplets(out, to_mo(m, false));
    CHECK(out.str() == "0 0 1\n0 1 1\n");
}
