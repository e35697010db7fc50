// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zebra/core.hpp"
#include "zebra/error.hpp"
#include "zebra/text.hpp"

namespace zebra {

inline constexpr int kThemeSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Template micro-syntax: literal text with {slot} or {slot:form}
// placeholders. Slot names are fixed per template kind; form names are
// free-form keys into the phrase-form maps.

struct TemplateSegment {
    bool is_slot = false;
    std::string text; // literal text, or slot name
    std::string form; // slot form, empty means the default for the slot
};

inline std::vector<TemplateSegment> parse_template(const std::string& tpl) {
    std::vector<TemplateSegment> segments;
    std::string literal;
    for (std::size_t i = 0; i < tpl.size(); ++i) {
        if (tpl[i] != '{') {
            literal.push_back(tpl[i]);
            continue;
        }
        std::size_t close = tpl.find('}', i);
        if (close == std::string::npos) {
            throw ThemeError("unterminated placeholder in template: " + tpl);
        }
        if (!literal.empty()) {
            segments.push_back({false, literal, ""});
            literal.clear();
        }
        std::string inner = tpl.substr(i + 1, close - i - 1);
        std::size_t colon = inner.find(':');
        TemplateSegment slot;
        slot.is_slot = true;
        if (colon == std::string::npos) {
            slot.text = inner;
        } else {
            slot.text = inner.substr(0, colon);
            slot.form = inner.substr(colon + 1);
        }
        if (slot.text.empty()) throw ThemeError("empty placeholder in template: " + tpl);
        segments.push_back(std::move(slot));
        i = close;
    }
    if (!literal.empty()) segments.push_back({false, literal, ""});
    return segments;
}

// ---------------------------------------------------------------------------
// Theme structures

struct ThemeAttribute {
    AttributeId id;
    std::map<std::string, std::string> forms; // must include "name"

    bool operator==(const ThemeAttribute&) const = default;

    const std::string& form(const std::string& key) const {
        auto it = forms.find(key);
        if (it == forms.end()) {
            throw ThemeError("attribute '" + id + "' has no phrase form '" + key + "'");
        }
        return it->second;
    }

    const std::string& name() const { return form("name"); }
};

struct ThemeCategory {
    CategoryId id;
    std::string display;
    int naturalness_rank = 0; // list position in the bundle; lower reads first
    std::vector<ThemeAttribute> attributes;

    bool operator==(const ThemeCategory&) const = default;
};

/// An entry in the distractor or interest pools: a phrase that looks like
/// an attribute but never names one.
struct PoolItem {
    std::string id;
    std::map<std::string, std::string> forms;

    bool operator==(const PoolItem&) const = default;

    const std::string& form(const std::string& key) const {
        auto it = forms.find(key);
        if (it == forms.end()) {
            throw ThemeError("pool item '" + id + "' has no phrase form '" + key + "'");
        }
        return it->second;
    }
};

struct FactItem {
    std::string id;
    std::string text; // lower-case sentence body, capitalized when standalone

    bool operator==(const FactItem&) const = default;
};

struct PromptSkeleton {
    std::string intro;              // may contain {n_objects}
    std::string category_header;    // optional line above the category list
    std::string clue_header;
    std::string question;
    std::string format_instruction;

    bool operator==(const PromptSkeleton&) const = default;
};

/// A per-(language, theme) asset bundle. Immutable after load.
struct ThemeConfig {
    int schema_version = kThemeSchemaVersion;
    std::string language;
    std::string theme;
    std::string list_separator = ", ";
    std::string list_final_separator = " and ";
    std::vector<char32_t> alphabet_tail; // letters collating after 'z'
    PromptSkeleton prompt;
    std::vector<ThemeCategory> categories;
    std::map<ClueType, std::string> clue_templates;
    std::map<RedHerringType, std::string> herring_templates;
    std::vector<FactItem> facts;
    std::vector<PoolItem> distractors;
    std::vector<PoolItem> interests;
    std::vector<std::pair<std::string, std::string>> post_replacements;

    bool operator==(const ThemeConfig&) const = default;

    const ThemeCategory* category(const CategoryId& id) const {
        for (const auto& c : categories) {
            if (c.id == id) return &c;
        }
        return nullptr;
    }

    /// Category owning an attribute id, or nullptr.
    const ThemeCategory* category_of_attribute(const AttributeId& id) const {
        for (const auto& c : categories) {
            for (const auto& a : c.attributes) {
                if (a.id == id) return &c;
            }
        }
        return nullptr;
    }

    const ThemeAttribute* attribute(const AttributeId& id) const {
        for (const auto& c : categories) {
            for (const auto& a : c.attributes) {
                if (a.id == id) return &a;
            }
        }
        return nullptr;
    }

    const FactItem* fact(const std::string& id) const {
        for (const auto& f : facts) {
            if (f.id == id) return &f;
        }
        return nullptr;
    }

    const PoolItem* distractor(const std::string& id) const {
        for (const auto& d : distractors) {
            if (d.id == id) return &d;
        }
        return nullptr;
    }

    const PoolItem* interest(const std::string& id) const {
        for (const auto& x : interests) {
            if (x.id == id) return &x;
        }
        return nullptr;
    }

    /// Largest size this theme could in principle generate.
    Size max_supported_size() const {
        int max_objects = 0;
        for (const auto& c : categories) {
            max_objects = std::max(max_objects, static_cast<int>(c.attributes.size()));
        }
        return Size{max_objects, static_cast<int>(categories.size())};
    }
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline const std::vector<std::string>& clue_slot_names(ClueType t) {
    static const std::vector<std::string> one = {"x"};
    static const std::vector<std::string> one_pos = {"x", "position"};
    static const std::vector<std::string> two = {"x", "y"};
    static const std::vector<std::string> two_n = {"x", "y", "n_between"};
    static const std::vector<std::string> three = {"x", "y", "z"};
    switch (t) {
        case ClueType::found_at:
        case ClueType::not_at: return one_pos;
        case ClueType::between:
        case ClueType::not_between: return three;
        case ClueType::multiple_between: return two_n;
        default: return two;
    }
    return one;
}

inline const std::vector<std::string>& herring_slot_names(RedHerringType t) {
    static const std::vector<std::string> attr_interest = {"attr", "interest"};
    static const std::vector<std::string> attr_distractor = {"attr", "distractor"};
    static const std::vector<std::string> distractor_interest = {"distractor", "interest"};
    static const std::vector<std::string> fact_only = {"fact"};
    static const std::vector<std::string> attr_fact = {"attr", "fact"};
    static const std::vector<std::string> distractor_pos = {"distractor", "position"};
    switch (t) {
        case RedHerringType::same_herring: return attr_interest;
        case RedHerringType::next_to_herring: return attr_distractor;
        case RedHerringType::double_herring: return distractor_interest;
        case RedHerringType::fact: return fact_only;
        case RedHerringType::object_fact: return attr_fact;
        case RedHerringType::friends: return attr_distractor;
        case RedHerringType::herring_found_at:
        case RedHerringType::herring_not_at: return distractor_pos;
    }
    return fact_only;
}

/// Forms demanded from attributes ("x","y","z","attr" slots), distractors
/// and interests by a parsed template. Numeric slots are skipped.
struct TemplateFormUse {
    std::vector<std::string> attribute_forms;
    std::vector<std::string> distractor_forms;
    std::vector<std::string> interest_forms;
};

inline void collect_form_use(const std::string& tpl, const std::vector<std::string>& slots,
                             TemplateFormUse& use, std::vector<std::string>& problems,
                             const std::string& where) {
    std::vector<TemplateSegment> segments;
    try {
        segments = parse_template(tpl);
    } catch (const ThemeError& e) {
        problems.push_back(where + ": " + e.what());
        return;
    }
    for (const auto& seg : segments) {
        if (!seg.is_slot) continue;
        if (std::find(slots.begin(), slots.end(), seg.text) == slots.end()) {
            problems.push_back(where + ": unknown placeholder '" + seg.text + "'");
            continue;
        }
        if (seg.text == "position" || seg.text == "n_between" || seg.text == "fact") continue;
        std::string form = seg.form.empty() ? std::string("subject") : seg.form;
        if (seg.text == "distractor") {
            use.distractor_forms.push_back(form);
        } else if (seg.text == "interest") {
            use.interest_forms.push_back(form);
        } else {
            use.attribute_forms.push_back(form);
        }
    }
}

} // namespace detail

/// Structural validation run eagerly at load time. Returns every violation
/// rather than stopping at the first.
inline std::vector<std::string> validate_theme(const ThemeConfig& theme) {
    std::vector<std::string> problems;
    if (theme.schema_version != kThemeSchemaVersion) {
        problems.push_back("unsupported schema_version " + std::to_string(theme.schema_version));
    }
    if (theme.language.empty()) problems.push_back("language tag is empty");
    if (theme.theme.empty()) problems.push_back("theme tag is empty");
    if (theme.categories.empty()) problems.push_back("no categories declared");

    std::set<std::string> attr_ids;
    std::set<std::string> cat_ids;
    for (const auto& cat : theme.categories) {
        if (!cat_ids.insert(cat.id).second) {
            problems.push_back("duplicate category id '" + cat.id + "'");
        }
        if (cat.display.empty()) problems.push_back("category '" + cat.id + "' has no display name");
        if (cat.attributes.size() < 2) {
            problems.push_back("category '" + cat.id + "' needs at least 2 attributes");
        }
        for (const auto& attr : cat.attributes) {
            if (!attr_ids.insert(attr.id).second) {
                problems.push_back("duplicate attribute id '" + attr.id + "'");
            }
            if (attr.forms.find("name") == attr.forms.end()) {
                problems.push_back("attribute '" + attr.id + "' is missing the 'name' form");
            }
        }
    }

    // Template coverage: every type that could become eligible at a size
    // this theme's pools can reach must have a template.
    Size max_size = theme.max_supported_size();
    for (ClueType t : kAllClueTypes) {
        bool reachable = clue_type_allowed(t, max_size) && max_size.n_objects >= 2 &&
                         max_size.n_attributes >= 1;
        if (reachable && theme.clue_templates.find(t) == theme.clue_templates.end()) {
            problems.push_back("missing clue template for '" +
                               std::string(clue_type_name(t)) + "'");
        }
    }
    for (RedHerringType t : kAllRedHerringTypes) {
        if (theme.herring_templates.find(t) == theme.herring_templates.end()) {
            problems.push_back("missing red herring template for '" +
                               std::string(herring_type_name(t)) + "'");
        }
    }

    // Placeholders must be known and resolvable to declared phrase forms.
    detail::TemplateFormUse use;
    for (const auto& [type, tpl] : theme.clue_templates) {
        detail::collect_form_use(tpl, detail::clue_slot_names(type), use, problems,
                                 "clue template '" + std::string(clue_type_name(type)) + "'");
    }
    for (const auto& [type, tpl] : theme.herring_templates) {
        detail::collect_form_use(tpl, detail::herring_slot_names(type), use, problems,
                                 "red herring template '" +
                                     std::string(herring_type_name(type)) + "'");
    }
    for (const auto& cat : theme.categories) {
        for (const auto& attr : cat.attributes) {
            for (const std::string& form : use.attribute_forms) {
                if (attr.forms.find(form) == attr.forms.end()) {
                    problems.push_back("attribute '" + attr.id + "' is missing phrase form '" +
                                       form + "' required by a template");
                }
            }
        }
    }
    for (const auto& item : theme.distractors) {
        for (const std::string& form : use.distractor_forms) {
            if (item.forms.find(form) == item.forms.end()) {
                problems.push_back("distractor '" + item.id + "' is missing phrase form '" +
                                   form + "'");
            }
        }
    }
    for (const auto& item : theme.interests) {
        for (const std::string& form : use.interest_forms) {
            if (item.forms.find(form) == item.forms.end()) {
                problems.push_back("interest '" + item.id + "' is missing phrase form '" + form +
                                   "'");
            }
        }
    }

    // Pool hygiene: unique ids, and distractors must never name a puzzle
    // attribute.
    std::set<std::string> pool_ids;
    for (const auto& f : theme.facts) {
        if (!pool_ids.insert("fact:" + f.id).second) {
            problems.push_back("duplicate fact id '" + f.id + "'");
        }
        if (f.text.empty()) problems.push_back("fact '" + f.id + "' has empty text");
    }
    for (const auto& d : theme.distractors) {
        if (!pool_ids.insert("distractor:" + d.id).second) {
            problems.push_back("duplicate distractor id '" + d.id + "'");
        }
        if (attr_ids.count(d.id) > 0) {
            problems.push_back("distractor id '" + d.id + "' collides with an attribute id");
        }
    }
    for (const auto& x : theme.interests) {
        if (!pool_ids.insert("interest:" + x.id).second) {
            problems.push_back("duplicate interest id '" + x.id + "'");
        }
    }
    for (const auto& [pattern, replacement] : theme.post_replacements) {
        (void)replacement;
        if (pattern.empty()) problems.push_back("post replacement with empty pattern");
    }
    return problems;
}

/// Findings preventing generation at a given size; empty means the theme
/// can generate puzzles of this size.
inline std::vector<std::string> validate_for_size(const ThemeConfig& theme, Size size) {
    std::vector<std::string> findings;
    if (size.n_objects < 2 || size.n_attributes < 1) {
        findings.push_back("size " + size.to_string() +
                           " is invalid: need n_objects >= 2 and n_attributes >= 1");
        return findings;
    }
    int eligible = 0;
    for (const auto& cat : theme.categories) {
        if (static_cast<int>(cat.attributes.size()) >= size.n_objects) ++eligible;
    }
    if (eligible < size.n_attributes) {
        findings.push_back("theme offers " + std::to_string(eligible) + " categories with >= " +
                           std::to_string(size.n_objects) + " attributes, need " +
                           std::to_string(size.n_attributes));
    }
    for (ClueType t : kAllClueTypes) {
        if (!clue_type_allowed(t, size)) continue;
        if (theme.clue_templates.find(t) == theme.clue_templates.end()) {
            findings.push_back("missing clue template for size-eligible type '" +
                               std::string(clue_type_name(t)) + "'");
        }
    }
    for (RedHerringType t : kAllRedHerringTypes) {
        if (theme.herring_templates.find(t) == theme.herring_templates.end()) {
            findings.push_back("missing red herring template for '" +
                               std::string(herring_type_name(t)) + "'");
        }
    }
    if (theme.facts.empty()) findings.push_back("fact pool is empty");
    if (theme.distractors.empty()) findings.push_back("distractor pool is empty");
    if (theme.interests.empty()) findings.push_back("interest pool is empty");
    return findings;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization

namespace detail {

inline std::map<std::string, std::string> forms_from_json(const nlohmann::json& j) {
    std::map<std::string, std::string> forms;
    for (auto it = j.begin(); it != j.end(); ++it) {
        forms[it.key()] = it.value().get<std::string>();
    }
    return forms;
}

} // namespace detail

inline ThemeConfig theme_from_json(const nlohmann::json& j) {
    try {
        ThemeConfig t;
        t.schema_version = j.at("schema_version").get<int>();
        t.language = j.at("language").get<std::string>();
        t.theme = j.at("theme").get<std::string>();
        t.list_separator = j.at("list_separator").get<std::string>();
        t.list_final_separator = j.at("list_final_separator").get<std::string>();
        if (j.contains("alphabet_tail")) {
            for (const auto& letter : j.at("alphabet_tail")) {
                std::string s = letter.get<std::string>();
                std::size_t i = 0;
                t.alphabet_tail.push_back(text::decode_utf8(s, i));
            }
        }
        const auto& prompt = j.at("prompt");
        t.prompt.intro = prompt.at("intro").get<std::string>();
        t.prompt.category_header = prompt.value("category_header", "");
        t.prompt.clue_header = prompt.at("clue_header").get<std::string>();
        t.prompt.question = prompt.at("question").get<std::string>();
        t.prompt.format_instruction = prompt.at("format_instruction").get<std::string>();
        int rank = 0;
        for (const auto& cat : j.at("categories")) {
            ThemeCategory c;
            c.id = cat.at("id").get<std::string>();
            c.display = cat.at("display").get<std::string>();
            c.naturalness_rank = rank++;
            for (const auto& attr : cat.at("attributes")) {
                ThemeAttribute a;
                a.id = attr.at("id").get<std::string>();
                a.forms = detail::forms_from_json(attr.at("forms"));
                c.attributes.push_back(std::move(a));
            }
            t.categories.push_back(std::move(c));
        }
        for (auto it = j.at("clue_templates").begin(); it != j.at("clue_templates").end(); ++it) {
            auto type = clue_type_from_name(it.key());
            if (!type) throw ThemeError("unknown clue type '" + it.key() + "'");
            t.clue_templates[*type] = it.value().get<std::string>();
        }
        for (auto it = j.at("herring_templates").begin(); it != j.at("herring_templates").end();
             ++it) {
            auto type = herring_type_from_name(it.key());
            if (!type) throw ThemeError("unknown red herring type '" + it.key() + "'");
            t.herring_templates[*type] = it.value().get<std::string>();
        }
        const auto& pools = j.at("herring_pools");
        for (const auto& f : pools.at("facts")) {
            t.facts.push_back({f.at("id").get<std::string>(), f.at("text").get<std::string>()});
        }
        for (const auto& d : pools.at("distractors")) {
            t.distractors.push_back(
                {d.at("id").get<std::string>(), detail::forms_from_json(d.at("forms"))});
        }
        for (const auto& x : pools.at("interests")) {
            t.interests.push_back(
                {x.at("id").get<std::string>(), detail::forms_from_json(x.at("forms"))});
        }
        for (const auto& r : j.at("post_replacements")) {
            t.post_replacements.emplace_back(r.at("pattern").get<std::string>(),
                                             r.at("replacement").get<std::string>());
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ThemeError(std::string("theme bundle is malformed: ") + e.what());
    }
}

inline nlohmann::ordered_json theme_to_json(const ThemeConfig& t) {
    nlohmann::ordered_json j;
    j["schema_version"] = t.schema_version;
    j["language"] = t.language;
    j["theme"] = t.theme;
    j["list_separator"] = t.list_separator;
    j["list_final_separator"] = t.list_final_separator;
    j["alphabet_tail"] = nlohmann::ordered_json::array();
    for (char32_t cp : t.alphabet_tail) {
        std::string s;
        text::encode_utf8(cp, s);
        j["alphabet_tail"].push_back(s);
    }
    j["prompt"] = {{"intro", t.prompt.intro},
                   {"category_header", t.prompt.category_header},
                   {"clue_header", t.prompt.clue_header},
                   {"question", t.prompt.question},
                   {"format_instruction", t.prompt.format_instruction}};
    j["categories"] = nlohmann::ordered_json::array();
    for (const auto& c : t.categories) {
        nlohmann::ordered_json cat;
        cat["id"] = c.id;
        cat["display"] = c.display;
        cat["attributes"] = nlohmann::ordered_json::array();
        for (const auto& a : c.attributes) {
            cat["attributes"].push_back({{"id", a.id}, {"forms", a.forms}});
        }
        j["categories"].push_back(std::move(cat));
    }
    for (const auto& [type, tpl] : t.clue_templates) {
        j["clue_templates"][std::string(clue_type_name(type))] = tpl;
    }
    for (const auto& [type, tpl] : t.herring_templates) {
        j["herring_templates"][std::string(herring_type_name(type))] = tpl;
    }
    j["herring_pools"]["facts"] = nlohmann::ordered_json::array();
    for (const auto& f : t.facts) {
        j["herring_pools"]["facts"].push_back({{"id", f.id}, {"text", f.text}});
    }
    j["herring_pools"]["distractors"] = nlohmann::ordered_json::array();
    for (const auto& d : t.distractors) {
        j["herring_pools"]["distractors"].push_back({{"id", d.id}, {"forms", d.forms}});
    }
    j["herring_pools"]["interests"] = nlohmann::ordered_json::array();
    for (const auto& x : t.interests) {
        j["herring_pools"]["interests"].push_back({{"id", x.id}, {"forms", x.forms}});
    }
    j["post_replacements"] = nlohmann::ordered_json::array();
    for (const auto& [pattern, replacement] : t.post_replacements) {
        j["post_replacements"].push_back({{"pattern", pattern}, {"replacement", replacement}});
    }
    return j;
}

/// Load and eagerly validate a theme bundle. Throws ThemeError listing
/// every violated invariant.
inline ThemeConfig load_theme(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ThemeError("cannot open theme bundle: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ThemeError("cannot parse theme bundle " + path.string() + ": " + e.what());
    }
    ThemeConfig t = theme_from_json(j);
    std::vector<std::string> problems = validate_theme(t);
    if (!problems.empty()) {
        std::string message = "theme bundle " + path.string() + " is invalid:";
        for (const auto& p : problems) message += "\n  - " + p;
        throw ThemeError(message);
    }
    return t;
}

} // namespace zebra
