#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "sgap/survey.hpp"

using namespace sgap;

TEST_CASE("make_partition splits the source line", "[survey]") {
    SECTION("divisible case") {
        auto p = make_partition({20, 20, 12.5}, 0.2);
        REQUIRE(p.n_sel() == 4);
        CHECK(p.regions == std::vector<Region>{{0, 5}, {5, 10}, {10, 15}, {15, 20}});
    }
    SECTION("identity subsampling") {
        auto p = make_partition({10, 3, 12.5}, 1.0);
        REQUIRE(p.n_sel() == 10);
        for (int k = 0; k < 10; ++k) CHECK(p.regions[k] == Region{k, k + 1});
    }
    SECTION("near-equal split puts larger regions first") {
        auto p = make_partition({10, 3, 12.5}, 0.3);
        REQUIRE(p.n_sel() == 3);
        CHECK(p.regions == std::vector<Region>{{0, 4}, {4, 7}, {7, 10}});
    }
    SECTION("ratio given as a repeating fraction") {
        CHECK(make_partition({12, 6, 12.5}, 1.0 / 3.0).n_sel() == 4);
        CHECK(make_partition({100, 6, 12.5}, 0.29).n_sel() == 29);
    }
    SECTION("errors") {
        CHECK_THROWS_AS(make_partition({10, 3, 12.5}, 0.0), InvalidArgument);
        CHECK_THROWS_AS(make_partition({10, 3, 12.5}, 1.5), InvalidArgument);
        CHECK_THROWS_AS(make_partition({10, 3, 12.5}, -0.2), InvalidArgument);
        CHECK_THROWS_AS(make_partition({10, 3, 12.5}, 0.05), DegenerateRatio);
        CHECK_THROWS_AS(make_partition({1, 3, 12.5}, 1.0), InvalidArgument);
        CHECK_THROWS_AS(make_partition({10, 0, 12.5}, 1.0), InvalidArgument);
        CHECK_THROWS_AS(make_partition({10, 3, 0.0}, 1.0), InvalidArgument);
    }
}

TEST_CASE("partition is a partition for arbitrary sizes", "[survey][property]") {
    for (int n_s = 2; n_s <= 80; ++n_s) {
        for (double ratio : {0.05, 0.1, 0.2, 0.25, 1.0 / 3.0, 0.5, 0.7, 1.0}) {
            if (selection_count(n_s, ratio) < 1) continue;
            auto p = make_partition({n_s, 4, 1.0}, ratio);
            int next = 0;
            int lo = n_s, hi = 0;
            for (const Region& r : p.regions) {
                CHECK(r.begin == next);
                CHECK(r.size() >= 1);
                next = r.end;
                lo = std::min(lo, r.size());
                hi = std::max(hi, r.size());
            }
            CHECK(next == n_s);
            CHECK(hi - lo <= 1);
            for (int i = 0; i < n_s; ++i) CHECK(p.regions[p.region_of(i)].contains(i));
        }
    }
}

TEST_CASE("jittered_mask", "[survey]") {
    SECTION("singleton regions select every source") {
        const SurveyGrid g{10, 4, 12.5};
        for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
            auto m = jittered_mask(g, 1.0, seed);
            CHECK(m.selected == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
        }
    }
    SECTION("same seed gives the same mask") {
        const SurveyGrid g{300, 150, 12.5};
        CHECK(jittered_mask(g, 0.2, 42) == jittered_mask(g, 0.2, 42));
        CHECK(jittered_mask(g, 0.2, 42).selected != jittered_mask(g, 0.2, 43).selected);
    }
    SECTION("outputs always satisfy the constraints") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const SurveyGrid g{17 + static_cast<int>(seed % 50), 5, 12.5};
            CHECK(check_constraints(jittered_mask(g, 0.2, seed)));
        }
    }
}

TEST_CASE("jittered gap bound against exhaustive enumeration", "[survey][oracle]") {
    // n_s = 20, ratio 0.2: four regions of five slots, 5^4 = 625 jittered masks.
    const SurveyGrid g{20, 20, 12.5};
    const auto p = make_partition(g, 0.2);
    std::set<std::vector<int>> all;
    int worst = 0;
    for (int a = 0; a < 5; ++a)
        for (int b = 5; b < 10; ++b)
            for (int c = 10; c < 15; ++c)
                for (int d = 15; d < 20; ++d) {
                    all.insert({a, b, c, d});
                    worst = std::max({worst, b - a, c - b, d - c});
                }
    REQUIRE(all.size() == 625);
    CHECK(worst == 9); // 2f - 1
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        auto m = jittered_mask(g, p, seed);
        CHECK(all.count(m.selected) == 1);
        CHECK(max_gap(m) <= 9);
        CHECK(max_gap(m) < 2 * 5);
    }
}

TEST_CASE("check_constraints rejects violations", "[survey]") {
    const SurveyGrid g{20, 8, 12.5};
    auto m = jittered_mask(g, 0.2, 3);
    REQUIRE(check_constraints(m));

    SECTION("two selections in one region") {
        auto bad = m;
        bad.selected = {0, 1, 10, 15};
        CHECK_FALSE(check_constraints(bad));
    }
    SECTION("one selection short") {
        auto bad = m;
        bad.selected.pop_back();
        CHECK_FALSE(check_constraints(bad));
    }
    SECTION("duplicate index") {
        auto bad = m;
        bad.selected = {2, 2, 12, 17};
        CHECK_FALSE(check_constraints(bad));
    }
    SECTION("off-grid index") {
        auto bad = m;
        bad.selected.back() = 20;
        CHECK_FALSE(check_constraints(bad));
    }
}

TEST_CASE("mask files round-trip", "[survey][io]") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const SurveyGrid g{30 + static_cast<int>(seed), 7 + static_cast<int>(seed % 5), 12.5 + 0.1 * static_cast<double>(seed)};
        const double ratio = 0.1 + 0.035 * static_cast<double>(seed);
        auto m = jittered_mask(g, ratio, seed * 977 + 1);

        auto j = mask_to_json(m);
        CHECK(mask_from_json(nlohmann::json::parse(j.dump())) == m);

        std::stringstream ss;
        write_mask_text(ss, m);
        auto t = read_mask_text(ss, g.spacing);
        CHECK(t.grid == m.grid);
        CHECK(t.partition == m.partition);
        CHECK(t.selected == m.selected);
    }
}

TEST_CASE("mask JSON uses the documented keys", "[survey][io]") {
    auto m = jittered_mask({300, 150, 12.5}, 0.2, 1);
    auto j = mask_to_json(m);
    for (const char* key : {"n_s", "n_r", "spacing_m", "ratio", "selected_sources", "seed"}) CHECK(j.contains(key));
    CHECK(j.size() == 6);
    CHECK(j["selected_sources"].size() == 60);
    CHECK_THROWS_AS(mask_from_json(nlohmann::json{{"n_s", 10}}), InvalidArgument);
}
