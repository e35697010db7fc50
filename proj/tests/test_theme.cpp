// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "support/worked_example.hpp"
#include "zebra/theme.hpp"

using namespace zebra;
using namespace zebra::testsupport;

TEST_CASE("bundled themes load and carry the full template sets") {
    const ThemeConfig& en = en_houses();
    CHECK(en.language == "en");
    CHECK(en.theme == "houses");
    CHECK(en.clue_templates.size() == 14);
    CHECK(en.herring_templates.size() == 8);
    CHECK(en.categories.size() == 7);
    for (const auto& cat : en.categories) CHECK(cat.attributes.size() == 6);

    const ThemeConfig& da = da_houses();
    CHECK(da.language == "da");
    CHECK(da.clue_templates.size() == 14);
    CHECK(da.herring_templates.size() == 8);
    CHECK(da.alphabet_tail.size() == 3);
}

TEST_CASE("naturalness rank follows bundle order") {
    const ThemeConfig& en = en_houses();
    REQUIRE(en.category("jobs") != nullptr);
    REQUIRE(en.category("hobbies") != nullptr);
    CHECK(en.category("jobs")->naturalness_rank < en.category("book_genres")->naturalness_rank);
    CHECK(en.category("book_genres")->naturalness_rank <
          en.category("hobbies")->naturalness_rank);
    CHECK(en.category_of_attribute("nurse")->id == "jobs");
    CHECK(en.attribute("budgerigar")->form("subject") == "the budgie owner");
}

TEST_CASE("missing template is reported at load") {
    nlohmann::json j = theme_to_json(en_houses());
    j["clue_templates"].erase("same_object");
    ThemeConfig broken = theme_from_json(j);
    std::vector<std::string> problems = validate_theme(broken);
    REQUIRE_FALSE(problems.empty());
    bool mentions_gap = false;
    for (const auto& p : problems) {
        if (p.find("same_object") != std::string::npos) mentions_gap = true;
    }
    CHECK(mentions_gap);
}

TEST_CASE("templates may reference only declared phrase forms") {
    nlohmann::json j = theme_to_json(en_houses());
    j["clue_templates"]["same_object"] = "{x:genitive} {y:predicate}.";
    std::vector<std::string> problems = validate_theme(theme_from_json(j));
    REQUIRE_FALSE(problems.empty());
    CHECK(problems.front().find("genitive") != std::string::npos);
}

TEST_CASE("unknown placeholder names are rejected") {
    nlohmann::json j = theme_to_json(en_houses());
    j["clue_templates"]["left_of"] = "{x} lives to the left of {w}.";
    std::vector<std::string> problems = validate_theme(theme_from_json(j));
    REQUIRE_FALSE(problems.empty());
    CHECK(problems.front().find("'w'") != std::string::npos);
}

TEST_CASE("distractor ids must not collide with attribute ids") {
    nlohmann::json j = theme_to_json(en_houses());
    j["herring_pools"]["distractors"].push_back(
        {{"id", "nurse"}, {"forms", {{"subject", "the person with a nurse friend"}}}});
    std::vector<std::string> problems = validate_theme(theme_from_json(j));
    REQUIRE_FALSE(problems.empty());
    bool found = false;
    for (const auto& p : problems) {
        if (p.find("collides") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("load_theme throws with every violation listed") {
    nlohmann::json j = theme_to_json(en_houses());
    j["clue_templates"].erase("between");
    j["herring_templates"].erase("fact");
    auto path = std::filesystem::temp_directory_path() / "zebra_broken_theme.json";
    std::ofstream(path) << j.dump(2);
    try {
        load_theme(path);
        FAIL("expected ThemeError");
    } catch (const ThemeError& e) {
        std::string what = e.what();
        CHECK(what.find("between") != std::string::npos);
        CHECK(what.find("fact") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("validate_for_size") {
    const ThemeConfig& en = en_houses();
    SECTION("supported sizes validate cleanly") {
        CHECK(validate_for_size(en, {4, 5}).empty());
        CHECK(validate_for_size(en, {2, 1}).empty());
        CHECK(validate_for_size(en, {6, 7}).empty());
    }
    SECTION("pool too small") {
        std::vector<std::string> findings = validate_for_size(en, {7, 1});
        REQUIRE_FALSE(findings.empty());
        CHECK(findings.front().find("categories with >= 7") != std::string::npos);
    }
    SECTION("too many categories requested") {
        CHECK_FALSE(validate_for_size(en, {2, 8}).empty());
    }
    SECTION("size-ineligible template absences are not findings") {
        nlohmann::json j = theme_to_json(en);
        // Shrink every pool to 2 attributes so next_to is unreachable, then
        // drop its template: still valid at 2x1.
        for (auto& cat : j["categories"]) {
            while (cat["attributes"].size() > 2) {
                cat["attributes"].erase(cat["attributes"].size() - 1);
            }
        }
        j["clue_templates"].erase("next_to");
        ThemeConfig small = theme_from_json(j);
        CHECK(validate_theme(small).empty());
        CHECK(validate_for_size(small, {2, 1}).empty());
        // At 3 objects the missing template would matter, but the pools cap
        // the size first.
        CHECK_FALSE(validate_for_size(small, {3, 1}).empty());
    }
}

TEST_CASE("theme serialization round-trips") {
    const ThemeConfig& en = en_houses();
    ThemeConfig again = theme_from_json(theme_to_json(en));
    CHECK(again == en);

    const ThemeConfig& da = da_houses();
    CHECK(theme_from_json(theme_to_json(da)) == da);
}

TEST_CASE("parse errors carry the file location") {
    auto path = std::filesystem::temp_directory_path() / "zebra_not_json.json";
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_theme(path), ThemeError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_theme("/nonexistent/theme.json"), ThemeError);
}

TEST_CASE("template parsing") {
    auto segments = parse_template("{x} lives next to {y:subject}.");
    REQUIRE(segments.size() == 4);
    CHECK(segments[0].is_slot);
    CHECK(segments[0].text == "x");
    CHECK(segments[0].form.empty());
    CHECK(segments[1].text == " lives next to ");
    CHECK(segments[2].form == "subject");
    CHECK(segments[3].text == ".");
    CHECK_THROWS_AS(parse_template("{x lives"), ThemeError);
    CHECK_THROWS_AS(parse_template("{} lives"), ThemeError);
}
