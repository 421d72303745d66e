#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include "qpar/qubit_manager.hpp"

using namespace qpar;

TEST_CASE("fresh allocation mints sequential ids") {
    QubitManager mgr;
    auto ids = mgr.allocate(2);
    REQUIRE(ids.size() == 2);
    CHECK(ids[0].index == 0);
    CHECK(ids[1].index == 1);
    CHECK(mgr.next_fresh() == 2);
}

TEST_CASE("released ids are reused LIFO outside parallel blocks") {
    QubitManager mgr;
    auto a = mgr.allocate(1);
    mgr.release(a);
    auto b = mgr.allocate(1);
    CHECK(b[0] == a[0]);
    CHECK(mgr.next_fresh() == 1);

    auto pair = mgr.allocate(2);
    mgr.release({pair[1]});
    mgr.release({pair[0]});
    auto next = mgr.allocate(1);
    CHECK(next[0] == pair[0]);  // most recently released first
}

TEST_CASE("sections never share ids with siblings") {
    QubitManager mgr;
    mgr.begin_parallel();
    CHECK(mgr.begin_section() == 0);
    auto a = mgr.allocate(1);
    mgr.release(a);
    mgr.end_section();
    CHECK(mgr.begin_section() == 1);
    auto b = mgr.allocate(1);
    CHECK(b[0] != a[0]);
    mgr.release(b);
    mgr.end_section();
    mgr.end_parallel();
}

TEST_CASE("sections do not draw from the global pool") {
    QubitManager mgr;
    auto global = mgr.allocate(1);
    mgr.release(global);
    mgr.begin_parallel();
    mgr.begin_section();
    auto inner = mgr.allocate(1);
    CHECK(inner[0] != global[0]);
    mgr.release(inner);
    mgr.end_section();
    mgr.end_parallel();
}

TEST_CASE("end_parallel merges reserved pools into the enclosing scope") {
    QubitManager mgr;
    mgr.begin_parallel();
    mgr.end_parallel();
    CHECK(mgr.next_fresh() == 0);

    mgr.begin_parallel();
    mgr.begin_section();
    auto a = mgr.allocate(1);
    mgr.release(a);
    mgr.end_section();
    mgr.begin_section();
    auto b = mgr.allocate(1);
    mgr.release(b);
    mgr.end_section();
    mgr.end_parallel();

    auto next = mgr.allocate(1);
    CHECK((next[0] == a[0] || next[0] == b[0]));
    CHECK(mgr.next_fresh() == 2);
}

TEST_CASE("marker misuse raises") {
    QubitManager mgr;
    CHECK_THROWS_AS(mgr.begin_section(), LoweringError);
    CHECK_THROWS_AS(mgr.end_parallel(), LoweringError);
    CHECK_THROWS_AS(mgr.end_section(), LoweringError);

    mgr.begin_parallel();
    mgr.begin_section();
    CHECK_THROWS_AS(mgr.end_parallel(), LoweringError);
    mgr.end_section();
    CHECK_THROWS_AS(mgr.end_section(), LoweringError);
    mgr.end_parallel();
}

TEST_CASE("double release and unknown release raise") {
    QubitManager mgr;
    auto a = mgr.allocate(1);
    mgr.release(a);
    CHECK_THROWS_AS(mgr.release(a), LoweringError);
    CHECK_THROWS_AS(mgr.release({QubitId{42}}), LoweringError);
}

TEST_CASE("release into enclosing scope while a section is open") {
    QubitManager mgr;
    auto outer = mgr.allocate(1);
    mgr.begin_parallel();
    mgr.begin_section();
    mgr.release(outer);  // owned by the global pool
    auto inner = mgr.allocate(1);
    CHECK(inner[0] != outer[0]);  // reserved pool still empty
    mgr.release(inner);
    mgr.end_section();
    mgr.end_parallel();
    auto again = mgr.allocate(1);
    CHECK(again[0] == inner[0]);  // the merged section id sits on top of the pool
    auto next = mgr.allocate(1);
    CHECK(next[0] == outer[0]);  // the global release is still there beneath it
}

TEST_CASE("fanout registration allocates copies and unfanout releases them") {
    QubitManager mgr;
    auto reg = mgr.allocate(2);

    int fid = mgr.fanout_register(reg, 3);
    CHECK(mgr.next_fresh() == 6);  // (3-1)*2 copies
    CHECK(mgr.get_copies(fid, 0) == reg);
    auto replica1 = mgr.get_copies(fid, 1);
    CHECK(replica1.size() == 2);
    CHECK(mgr.get_copies(fid, 4) == replica1);  // 4 mod 3
    CHECK_THROWS_AS(mgr.get_copies(99, 0), LoweringError);

    QubitManager four;
    auto single = four.allocate(1);
    int f4 = four.fanout_register(single, 4);
    CHECK(four.get_copies(f4, 0) == single);
    CHECK(four.get_copies(f4, 5) == four.get_copies(f4, 1));  // 5 mod 4

    auto rec = mgr.unfanout();
    CHECK(rec.fanout_id == fid);
    CHECK(rec.copies.size() == 2);
    CHECK(mgr.live_count() == 2);
    CHECK_THROWS_AS(mgr.unfanout(), LoweringError);
}

TEST_CASE("degenerate fanout with one replica") {
    QubitManager mgr;
    auto reg = mgr.allocate(1);
    int fid = mgr.fanout_register(reg, 1);
    CHECK(mgr.next_fresh() == 1);
    CHECK(mgr.get_copies(fid, 5) == reg);
    auto rec = mgr.unfanout();
    CHECK(rec.copies.empty());
    CHECK_THROWS_AS(mgr.fanout_register(reg, 0), LoweringError);
}

TEST_CASE("full release after the outermost end_parallel fills the global pool") {
    QubitManager mgr;
    auto keep = mgr.allocate(2);
    mgr.begin_parallel();
    mgr.begin_section();
    auto a = mgr.allocate(2);
    mgr.release({a[0]});
    mgr.end_section();
    mgr.begin_section();
    auto b = mgr.allocate(1);
    mgr.end_section();
    mgr.end_parallel();

    mgr.release({a[1]});
    mgr.release(b);
    mgr.release(keep);
    CHECK(mgr.live_count() == 0);
    CHECK(mgr.global_free_pool().size() == mgr.next_fresh());
    CHECK(mgr.check_conservation().empty());
}

// Randomized scripts: pool conservation after every step and sibling-section
// disjointness from the allocation log. The acceptance suite reruns this
// with a higher script count.
namespace {

struct ScriptChecker {
    std::mt19937_64 rng;
    explicit ScriptChecker(std::uint64_t seed) : rng(seed) {}

    void run_script() {
        QubitManager mgr;
        std::vector<QubitId> live;
        // (block id, section index) -> allocated ids; block ids by begin order
        std::map<std::pair<int, int>, std::set<std::uint32_t>> section_allocs;
        struct OpenBlock {
            int id;
            int open_section = -1;
        };
        std::vector<OpenBlock> blocks;
        int next_block = 0;
        int fanouts = 0;

        auto in_section = [&] { return !blocks.empty() && blocks.back().open_section >= 0; };

        for (int step = 0; step < 60; ++step) {
            int choice = static_cast<int>(rng() % 100);
            if (choice < 30) {
                std::size_t count = rng() % 3 + 1;
                auto ids = mgr.allocate(count);
                for (QubitId q : ids) {
                    live.push_back(q);
                    if (in_section()) {
                        section_allocs[{blocks.back().id, blocks.back().open_section}].insert(
                            q.index);
                    }
                }
            } else if (choice < 55 && !live.empty()) {
                std::size_t pick = rng() % live.size();
                QubitId q = live[pick];
                live.erase(live.begin() + static_cast<std::ptrdiff_t>(pick));
                mgr.release({q});
            } else if (choice < 65) {
                mgr.begin_parallel();
                blocks.push_back({next_block++, -1});
            } else if (choice < 80 && !blocks.empty() && blocks.back().open_section < 0) {
                blocks.back().open_section = mgr.begin_section();
            } else if (choice < 90 && in_section()) {
                mgr.end_section();
                blocks.back().open_section = -1;
            } else if (!blocks.empty() && blocks.back().open_section < 0) {
                mgr.end_parallel();
                blocks.pop_back();
            } else if (choice >= 90 && !live.empty() && fanouts == 0) {
                std::vector<QubitId> originals{live[0]};
                mgr.fanout_register(originals, static_cast<long long>(rng() % 3 + 1));
                ++fanouts;
            }
            REQUIRE(mgr.check_conservation().empty());
        }

        // Sibling sections of the same block must have disjoint allocations.
        std::map<int, std::map<std::uint32_t, int>> per_block;
        for (const auto& [key, ids] : section_allocs) {
            auto& seen = per_block[key.first];
            for (std::uint32_t id : ids) {
                auto [it, inserted] = seen.emplace(id, key.second);
                if (!inserted) REQUIRE(it->second == key.second);
            }
        }
    }
};

}  // namespace

TEST_CASE("randomized allocate/release/section scripts hold the pool invariants") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        ScriptChecker checker(seed);
        checker.run_script();
    }
}
