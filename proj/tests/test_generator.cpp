// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "support/brute_force.hpp"
#include "support/fixtures.hpp"
#include "support/worked_example.hpp"
#include "zebra/generator.hpp"
#include "zebra/render.hpp"

using namespace zebra;
using namespace zebra::testsupport;

TEST_CASE("sample_solution draws a valid matrix") {
    const ThemeConfig& en = en_houses();
    Rng rng(7);
    SolutionMatrix s = sample_solution(en, {4, 3}, rng);
    s.validate();
    CHECK(s.size == Size{4, 3});
    std::set<CategoryId> cats(s.categories.begin(), s.categories.end());
    CHECK(cats.size() == 3);
    for (int j = 0; j < 3; ++j) {
        const ThemeCategory* cat = en.category(s.categories[static_cast<std::size_t>(j)]);
        REQUIRE(cat != nullptr);
        for (int r = 0; r < 4; ++r) {
            const AttributeId& attr = s.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
            CHECK(en.category_of_attribute(attr)->id == cat->id);
        }
    }
}

TEST_CASE("sampled categories keep naturalness order") {
    const ThemeConfig& en = en_houses();
    Rng rng(123);
    for (int i = 0; i < 20; ++i) {
        SolutionMatrix s = sample_solution(en, {2, 4}, rng);
        int last = -1;
        for (const CategoryId& id : s.categories) {
            int rank = en.category(id)->naturalness_rank;
            CHECK(rank > last);
            last = rank;
        }
    }
}

TEST_CASE("sample_solution is deterministic in the seed") {
    const ThemeConfig& en = en_houses();
    Rng a(42);
    Rng b(42);
    CHECK(sample_solution(en, {4, 5}, a) == sample_solution(en, {4, 5}, b));
}

TEST_CASE("sample_solution rejects undersized themes and sizes") {
    const ThemeConfig& en = en_houses();
    Rng rng(1);
    CHECK_THROWS_AS(sample_solution(en, {7, 2}, rng), InsufficientThemeError);
    CHECK_THROWS_AS(sample_solution(en, {2, 8}, rng), InsufficientThemeError);
    CHECK_THROWS_AS(sample_solution(en, {1, 3}, rng), MalformedClueError);
}

TEST_CASE("proposed clues always hold on the solution") {
    const ThemeConfig& en = en_houses();
    Rng rng(11);
    GenerationConfig cfg;
    cfg.size = {4, 5};
    SolutionMatrix s = sample_solution(en, cfg.size, rng);
    for (int i = 0; i < 300; ++i) {
        Clue c = propose_clue(s, cfg, rng);
        CHECK(clue_holds(c, s));
    }
}

TEST_CASE("clue type eligibility at 2x1") {
    const ThemeConfig& en = en_houses();
    Rng rng(5);
    GenerationConfig cfg;
    cfg.size = {2, 1};
    SolutionMatrix s = sample_solution(en, cfg.size, rng);
    std::set<ClueType> seen;
    for (int i = 0; i < 400; ++i) seen.insert(propose_clue(s, cfg, rng).type);
    CHECK(seen == std::set<ClueType>{ClueType::found_at, ClueType::not_at, ClueType::left_of,
                                     ClueType::right_of});
}

TEST_CASE("degenerate weights draw a single type") {
    const ThemeConfig& en = en_houses();
    Rng rng(5);
    GenerationConfig cfg;
    cfg.size = {3, 3};
    cfg.clue_weights[ClueType::found_at] = 1.0;
    SolutionMatrix s = sample_solution(en, cfg.size, rng);
    for (int i = 0; i < 50; ++i) CHECK(propose_clue(s, cfg, rng).type == ClueType::found_at);
}

TEST_CASE("pair clues avoid same-category referents unless allowed") {
    const ThemeConfig& en = en_houses();
    Rng rng(17);
    GenerationConfig cfg;
    cfg.size = {4, 3};
    SolutionMatrix s = sample_solution(en, cfg.size, rng);
    for (int i = 0; i < 300; ++i) {
        Clue c = propose_clue(s, cfg, rng);
        std::set<CategoryId> cats;
        for (const auto& a : c.attrs) cats.insert(en.category_of_attribute(a)->id);
        CHECK(cats.size() == c.attrs.size());
    }
    cfg.allow_same_category_pairs = true;
    bool saw_same_category_pair = false;
    for (int i = 0; i < 500 && !saw_same_category_pair; ++i) {
        Clue c = propose_clue(s, cfg, rng);
        std::set<CategoryId> cats;
        for (const auto& a : c.attrs) cats.insert(en.category_of_attribute(a)->id);
        if (cats.size() < c.attrs.size()) {
            saw_same_category_pair = true;
            // never for the same-object family
            CHECK(c.type != ClueType::same_object);
            CHECK(c.type != ClueType::not_same_object);
        }
    }
    CHECK(saw_same_category_pair);
}

TEST_CASE("grow_clue_set reaches a unique solution equal to the input") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {3, 3};
    for (int run = 0; run < 25; ++run) {
        Rng rng(Rng::derive_seed(900, static_cast<std::uint64_t>(run)));
        SolutionMatrix s = sample_solution(en, cfg.size, rng);
        std::vector<Clue> clues = grow_clue_set(s, cfg, rng);
        AttributeUniverse u = AttributeUniverse::from_solution(s);
        SolveOutcome out = count_solutions(clues, u, 2);
        REQUIRE(out.count == 1);
        CHECK(out.witnesses.at(0) == s);
        // Cross-checked with the independent enumerator.
        BruteForceResult oracle = brute_force_count(clues, u);
        CHECK(oracle.count == 1);
        CHECK(oracle.witnesses.at(0) == s);
    }
}

TEST_CASE("single found_at pins a 2x1 puzzle") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {2, 1};
    cfg.clue_weights[ClueType::found_at] = 1.0;
    Rng rng(3);
    SolutionMatrix s = sample_solution(en, cfg.size, rng);
    std::vector<Clue> clues = grow_clue_set(s, cfg, rng);
    CHECK(clues.size() == 1);
    CHECK(clues[0].type == ClueType::found_at);
}

TEST_CASE("prune removes redundant clues and is idempotent") {
    AttributeUniverse u = make_universe({2, 1});
    SECTION("mutually implied pair loses one member") {
        std::vector<Clue> clues = {
            make_clue(ClueType::found_at, {"c0a1"}, 1),
            make_clue(ClueType::not_at, {"c0a1"}, 2),
        };
        std::vector<Clue> pruned = prune_clues(clues, u);
        REQUIRE(pruned.size() == 1);
        // First pass drops found_at (not_at still pins) and keeps not_at.
        CHECK(pruned[0].type == ClueType::not_at);
        CHECK(prune_clues(pruned, u) == pruned);
    }
    SECTION("three pinning clues on the 2x3 example are all retained") {
        SolutionMatrix sol = two_house_solution();
        AttributeUniverse u23 = AttributeUniverse::from_solution(sol);
        std::vector<Clue> clues = {
            make_clue(ClueType::left_of, {"police officer", "nurse"}),
            make_clue(ClueType::not_at, {"handball"}, 2),
            make_clue(ClueType::found_at, {"romance"}, 2),
        };
        CHECK(prune_clues(clues, u23) == clues);
    }
    SECTION("non-unique input violates the precondition") {
        CHECK_THROWS_AS(prune_clues({}, u), GenerationError);
    }
}

TEST_CASE("pruned output is minimal") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {3, 3};
    for (int run = 0; run < 10; ++run) {
        Rng rng(Rng::derive_seed(17, static_cast<std::uint64_t>(run)));
        SolutionMatrix s = sample_solution(en, cfg.size, rng);
        AttributeUniverse u = AttributeUniverse::from_solution(s);
        std::vector<Clue> grown = grow_clue_set(s, cfg, rng);
        std::vector<Clue> pruned = prune_clues(grown, u);
        CHECK(pruned.size() <= grown.size());
        REQUIRE(count_solutions(pruned, u, 2).count == 1);
        for (std::size_t i = 0; i < pruned.size(); ++i) {
            std::vector<Clue> without = pruned;
            without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
            CHECK(count_solutions(without, u, 2).count >= 2);
        }
        CHECK(prune_clues(pruned, u) == pruned);
    }
}

TEST_CASE("red herring generation") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {2, 3};
    Rng rng(21);
    SolutionMatrix s = sample_solution(en, cfg.size, rng);

    SECTION("n = 0 yields nothing") {
        CHECK(generate_red_herrings(s, en, 0, cfg, rng).empty());
    }
    SECTION("herrings mention at most one solution attribute, no collisions") {
        std::vector<RedHerring> herrings = generate_red_herrings(s, en, 5, cfg, rng);
        REQUIRE(herrings.size() == 5);
        std::set<AttributeId> puzzle_attrs;
        for (const auto& row : s.cells) puzzle_attrs.insert(row.begin(), row.end());
        for (const RedHerring& h : herrings) {
            CHECK(herring_mentioned_attrs(h).size() <= 1);
            if (h.solution_attr) CHECK(puzzle_attrs.count(*h.solution_attr) == 1);
            for (const std::string& ref : h.distractor_refs) {
                CHECK(puzzle_attrs.count(ref) == 0);
            }
        }
        for (std::size_t i = 0; i < herrings.size(); ++i) {
            for (std::size_t j = i + 1; j < herrings.size(); ++j) {
                CHECK_FALSE(herrings[i] == herrings[j]);
            }
        }
    }
    SECTION("empty pools are an error when every type is starved") {
        nlohmann::json j = theme_to_json(en);
        j["herring_pools"]["facts"] = nlohmann::json::array();
        j["herring_pools"]["distractors"] = nlohmann::json::array();
        j["herring_pools"]["interests"] = nlohmann::json::array();
        ThemeConfig starved = theme_from_json(j);
        CHECK_THROWS_AS(generate_red_herrings(s, starved, 3, cfg, rng),
                        InsufficientThemeError);
    }
}

TEST_CASE("assemble_puzzle interleaves and indexes herrings") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {3, 3};
    Rng rng(31);
    SolutionMatrix s = sample_solution(en, cfg.size, rng);
    std::vector<Clue> clues = prune_clues(grow_clue_set(s, cfg, rng),
                                          AttributeUniverse::from_solution(s));
    std::vector<RedHerring> herrings = generate_red_herrings(s, en, 5, cfg, rng);
    PuzzleInstance p = assemble_puzzle(s, clues, herrings, rng);

    CHECK(p.items.size() == clues.size() + herrings.size());
    CHECK(p.red_herring_indices.size() == herrings.size());
    for (std::size_t i = 0; i < p.items.size(); ++i) {
        bool is_herring = is_red_herring(p.items[i]);
        bool indexed = std::find(p.red_herring_indices.begin(), p.red_herring_indices.end(),
                                 static_cast<int>(i) + 1) != p.red_herring_indices.end();
        CHECK(is_herring == indexed);
    }
    // Removing the herrings leaves the unique clue set.
    AttributeUniverse u = AttributeUniverse::from_solution(s);
    SolveOutcome out = count_solutions(p.real_clues(), u, 2);
    CHECK(out.count == 1);
    CHECK(out.witnesses.at(0) == s);
}

TEST_CASE("assembly order is deterministic in the seed") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {2, 3};
    auto build = [&] {
        Rng rng(77);
        SolutionMatrix s = sample_solution(en, cfg.size, rng);
        std::vector<Clue> clues = grow_clue_set(s, cfg, rng);
        std::vector<RedHerring> herrings = generate_red_herrings(s, en, 5, cfg, rng);
        return assemble_puzzle(s, clues, herrings, rng);
    };
    PuzzleInstance a = build();
    PuzzleInstance b = build();
    CHECK(a.items == b.items);
    CHECK(a.red_herring_indices == b.red_herring_indices);
}

TEST_CASE("derive_reduced_variant") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {2, 3};
    cfg.n_red_herrings = 5;
    cfg.master_seed = 404;
    PuzzleInstance p = generate_puzzle(en, cfg, 0);
    REQUIRE(p.red_herring_indices.size() == 5);

    SECTION("keep one") {
        Rng rng(1);
        PuzzleInstance reduced = derive_reduced_variant(p, 1, rng);
        CHECK(reduced.red_herring_indices.size() == 1);
        CHECK(reduced.items.size() == p.items.size() - 4);
        CHECK(reduced.solution == p.solution);
        CHECK(reduced.real_clues() == p.real_clues()); // clue order preserved
        CHECK(reduced.id == p.id + "-rh1");
    }
    SECTION("keep zero") {
        Rng rng(1);
        PuzzleInstance reduced = derive_reduced_variant(p, 0, rng);
        CHECK(reduced.red_herring_indices.empty());
        CHECK(reduced.items.size() == p.real_clues().size());
        CHECK(reduced.solution == p.solution);
    }
    SECTION("bounds") {
        Rng rng(1);
        CHECK_THROWS_AS(derive_reduced_variant(p, 6, rng), GenerationError);
    }
    SECTION("surviving herrings keep their relative order") {
        Rng rng(9);
        PuzzleInstance reduced = derive_reduced_variant(p, 3, rng);
        std::vector<std::string> original_texts;
        for (const auto& item : p.items) {
            original_texts.push_back(render_clue(item, en, p.size));
        }
        std::vector<std::string> reduced_texts;
        for (const auto& item : reduced.items) {
            reduced_texts.push_back(render_clue(item, en, p.size));
        }
        // reduced_texts must be a subsequence of original_texts
        std::size_t i = 0;
        for (const std::string& t : reduced_texts) {
            while (i < original_texts.size() && original_texts[i] != t) ++i;
            REQUIRE(i < original_texts.size());
            ++i;
        }
    }
}

TEST_CASE("generate_puzzle end to end") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {2, 3};
    cfg.n_red_herrings = 5;
    cfg.master_seed = 2025;
    PuzzleInstance p = generate_puzzle(en, cfg, 3);
    CHECK(p.id == "en-houses-2x3-3");
    CHECK(p.language == "en");
    CHECK(p.theme == "houses");
    CHECK(p.red_herring_indices.size() == 5);
    p.solution.validate();

    AttributeUniverse u = AttributeUniverse::from_solution(p.solution);
    SolveOutcome out = count_solutions(p.real_clues(), u, 2);
    CHECK(out.count == 1);
    CHECK(out.witnesses.at(0) == p.solution);

    PuzzleInstance again = generate_puzzle(en, cfg, 3);
    CHECK(again.items == p.items);
    CHECK(again.solution == p.solution);
    CHECK(again.seed == p.seed);
}

TEST_CASE("generate_batch is thread-count invariant") {
    const ThemeConfig& en = en_houses();
    GenerationConfig cfg;
    cfg.size = {2, 3};
    cfg.n_red_herrings = 2;
    cfg.master_seed = 5150;
    std::vector<PuzzleInstance> serial = generate_batch(en, cfg, 6, 1);
    std::vector<PuzzleInstance> parallel = generate_batch(en, cfg, 6, 3);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].items == parallel[i].items);
        CHECK(serial[i].solution == parallel[i].solution);
        CHECK(serial[i].id == parallel[i].id);
    }
}
