// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "zebra/text.hpp"

using namespace zebra;

TEST_CASE("trim removes surrounding whitespace only") {
    CHECK(text::trim("  nurse \n") == "nurse");
    CHECK(text::trim("police officer") == "police officer");
    CHECK(text::trim(" \t ") == "");
}

TEST_CASE("case folding covers ASCII and Latin ranges") {
    CHECK(text::fold_case("Police Officer") == "police officer");
    CHECK(text::fold_case("SMØRREBRØD") == "smørrebrød");
    CHECK(text::fold_case("ÆBLE") == "æble");
    CHECK(text::fold_case("Århus") == "århus");
    CHECK(text::fold_case("ÜBER Straße") == "über straße");
    CHECK(text::fold_case("Ōsaka Žižka") == "ōsaka žižka");
}

TEST_CASE("nfc composes combining marks used by Germanic languages") {
    // "a" + U+030A (combining ring) -> å
    CHECK(text::nfc_latin("a\xcc\x8a") == "\xc3\xa5");
    // "o" + U+0308 -> ö
    CHECK(text::nfc_latin("o\xcc\x88") == "\xc3\xb6");
    CHECK(text::nfc_latin("plain") == "plain");
}

TEST_CASE("canonical_cell combines trim, compose and fold") {
    CHECK(text::canonical_cell("  Smörgås ") == text::canonical_cell("smo\xcc\x88rga\xcc\x8as"));
    CHECK(text::canonical_cell("Police Officer") == "police officer");
}

TEST_CASE("capitalize_first upper-cases one leading letter") {
    CHECK(text::capitalize_first("the nurse lives here.") == "The nurse lives here.");
    CHECK(text::capitalize_first("æblet er grønt.") == "Æblet er grønt.");
    CHECK(text::capitalize_first("") == "");
    CHECK(text::capitalize_first("2 houses") == "2 houses");
}

TEST_CASE("replace_all replaces every occurrence in order") {
    CHECK(text::replace_all("von dem Haus von dem", "von dem", "vom") == "vom Haus vom");
    CHECK(text::replace_all("aaa", "aa", "b") == "ba");
}

TEST_CASE("collation respects configured tail letters") {
    std::vector<char32_t> danish = {U'æ', U'ø', U'å'};
    CHECK(text::collate_less("zebra", "æble", danish));
    CHECK(text::collate_less("æble", "øl", danish));
    CHECK(text::collate_less("øl", "ål", danish));
    // Without a tail configuration å > z by codepoint order.
    CHECK(text::collate_less("zebra", "ål", {}));
    CHECK(text::collate_less("bouldering", "handball", {}));
}
