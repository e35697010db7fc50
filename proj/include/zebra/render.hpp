// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zebra/core.hpp"
#include "zebra/error.hpp"
#include "zebra/text.hpp"
#include "zebra/theme.hpp"

namespace zebra {

/// The exact prompt a model receives, plus its parts for inspection.
struct RenderedPuzzle {
    std::string prompt_text;
    std::vector<std::string> clue_texts; // items order, herrings included
    std::string format_block;
};

namespace detail {

/// Whether the render order of the clue's attribute referents carries no
/// meaning, so they can be reordered for naturalness: symmetric pair
/// types plus the outer pair of between/not_between.
inline bool order_is_free(ClueType t) {
    switch (t) {
        case ClueType::same_object:
        case ClueType::not_same_object:
        case ClueType::next_to:
        case ClueType::not_next_to:
        case ClueType::one_between:
        case ClueType::multiple_between:
        case ClueType::between:
        case ClueType::not_between: return true;
        default: return false;
    }
}

inline int naturalness_of(const ThemeConfig& theme, const AttributeId& attr) {
    const ThemeCategory* cat = theme.category_of_attribute(attr);
    if (cat == nullptr) {
        throw ReferentialError("attribute '" + attr + "' is not part of theme " +
                               theme.language + "/" + theme.theme);
    }
    return cat->naturalness_rank;
}

/// Referents in render order: sorted by the owning category's naturalness
/// rank when order is semantically free. For between/not_between only the
/// outer pair [0] and [2] may swap; the middle referent is pinned.
inline std::vector<AttributeId> render_order(const Clue& clue, const ThemeConfig& theme) {
    std::vector<AttributeId> attrs = clue.attrs;
    if (!order_is_free(clue.type)) return attrs;
    const auto rank = [&](const AttributeId& a) { return naturalness_of(theme, a); };
    if (clue.type == ClueType::between || clue.type == ClueType::not_between) {
        if (rank(attrs[2]) < rank(attrs[0])) std::swap(attrs[0], attrs[2]);
    } else {
        std::stable_sort(attrs.begin(), attrs.end(),
                         [&](const AttributeId& a, const AttributeId& b) {
                             return rank(a) < rank(b);
                         });
    }
    return attrs;
}

inline std::string apply_post_replacements(std::string s, const ThemeConfig& theme) {
    for (const auto& [pattern, replacement] : theme.post_replacements) {
        s = text::replace_all(std::move(s), pattern, replacement);
    }
    return s;
}

inline std::string fill_template(const std::string& tpl,
                                 const std::vector<TemplateSegment>& segments,
                                 const ThemeConfig& theme,
                                 const std::function<std::string(const TemplateSegment&)>& lookup) {
    (void)tpl;
    std::string out;
    for (const TemplateSegment& seg : segments) {
        if (seg.is_slot) {
            out += lookup(seg);
        } else {
            out += seg.text;
        }
    }
    out = apply_post_replacements(std::move(out), theme);
    return text::capitalize_first(out);
}

inline std::string render_clue_text(const Clue& clue, const ThemeConfig& theme, Size size) {
    validate_clue(clue, size);
    auto it = theme.clue_templates.find(clue.type);
    if (it == theme.clue_templates.end()) {
        throw ThemeError("theme has no template for clue type '" +
                         std::string(clue_type_name(clue.type)) + "'");
    }
    const std::vector<AttributeId> attrs = render_order(clue, theme);
    const auto attr_form = [&](std::size_t idx, const std::string& form) -> std::string {
        const ThemeAttribute* attr = theme.attribute(attrs[idx]);
        if (attr == nullptr) {
            throw ReferentialError("attribute '" + attrs[idx] + "' is not part of theme " +
                                   theme.language + "/" + theme.theme);
        }
        return attr->form(form.empty() ? "subject" : form);
    };
    return fill_template(it->second, parse_template(it->second), theme,
                         [&](const TemplateSegment& seg) -> std::string {
                             if (seg.text == "x") return attr_form(0, seg.form);
                             if (seg.text == "y") return attr_form(1, seg.form);
                             if (seg.text == "z") return attr_form(2, seg.form);
                             if (seg.text == "position") return std::to_string(*clue.position);
                             if (seg.text == "n_between") return std::to_string(*clue.n_between);
                             throw ThemeError("clue template for '" +
                                              std::string(clue_type_name(clue.type)) +
                                              "' uses unknown placeholder '" + seg.text + "'");
                         });
}

inline std::string render_herring_text(const RedHerring& herring, const ThemeConfig& theme) {
    auto it = theme.herring_templates.find(herring.type);
    if (it == theme.herring_templates.end()) {
        throw ThemeError("theme has no template for red herring type '" +
                         std::string(herring_type_name(herring.type)) + "'");
    }
    const auto ref = [&](std::size_t idx) -> const std::string& {
        if (idx >= herring.distractor_refs.size()) {
            throw ThemeError("red herring '" + std::string(herring_type_name(herring.type)) +
                             "' is missing a pool reference");
        }
        return herring.distractor_refs[idx];
    };
    // Slot-to-pool wiring per type: the first ref is the primary pool item,
    // double_herring carries (distractor, interest).
    const auto distractor_item = [&]() -> const PoolItem* {
        return theme.distractor(ref(0));
    };
    const auto interest_item = [&]() -> const PoolItem* {
        if (herring.type == RedHerringType::double_herring) return theme.interest(ref(1));
        return theme.interest(ref(0));
    };
    return fill_template(
        it->second, parse_template(it->second), theme,
        [&](const TemplateSegment& seg) -> std::string {
            const std::string form = seg.form.empty() ? std::string("subject") : seg.form;
            if (seg.text == "attr") {
                if (!herring.solution_attr) {
                    throw ThemeError("red herring template expects a solution attribute");
                }
                const ThemeAttribute* attr = theme.attribute(*herring.solution_attr);
                if (attr == nullptr) {
                    throw ReferentialError("attribute '" + *herring.solution_attr +
                                           "' is not part of the theme");
                }
                return attr->form(form);
            }
            if (seg.text == "distractor") {
                const PoolItem* item = distractor_item();
                if (item == nullptr) {
                    throw ReferentialError("unknown distractor '" + ref(0) + "'");
                }
                return item->form(form);
            }
            if (seg.text == "interest") {
                const PoolItem* item = interest_item();
                if (item == nullptr) {
                    throw ReferentialError("unknown interest pool reference");
                }
                return item->form(seg.form.empty() ? std::string("predicate") : seg.form);
            }
            if (seg.text == "fact") {
                const FactItem* f = theme.fact(ref(0));
                if (f == nullptr) throw ReferentialError("unknown fact '" + ref(0) + "'");
                return f->text;
            }
            if (seg.text == "position") return std::to_string(*herring.position);
            throw ThemeError("red herring template uses unknown placeholder '" + seg.text + "'");
        });
}

} // namespace detail

/// Render one item (clue or red herring) to a sentence: template filled
/// with phrase forms, free-order referents sorted by naturalness,
/// post-replacements applied, first letter capitalized.
inline std::string render_clue(const PuzzleItem& item, const ThemeConfig& theme, Size size) {
    if (const Clue* clue = std::get_if<Clue>(&item)) {
        return detail::render_clue_text(*clue, theme, size);
    }
    return detail::render_herring_text(std::get<RedHerring>(item), theme);
}

/// The JSON answer-format block: keys object_1..object_N, each listing
/// placeholder strings "<category>_<i>" in the puzzle's category order.
inline std::string render_format_block(const PuzzleInstance& puzzle, const ThemeConfig& theme) {
    nlohmann::ordered_json block;
    for (int i = 1; i <= puzzle.size.n_objects; ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (const CategoryId& cat_id : puzzle.solution.categories) {
            const ThemeCategory* cat = theme.category(cat_id);
            if (cat == nullptr) {
                throw ReferentialError("category '" + cat_id + "' is not part of the theme");
            }
            row.push_back(text::fold_case(cat->display) + "_" + std::to_string(i));
        }
        block["object_" + std::to_string(i)] = std::move(row);
    }
    return block.dump(4);
}

/// Render the full prompt: intro, category list (attributes sorted
/// alphabetically within each line), numbered items, question and format
/// instructions. Pure function of (puzzle, theme).
inline RenderedPuzzle render_prompt(const PuzzleInstance& puzzle, const ThemeConfig& theme) {
    RenderedPuzzle r;

    std::string intro = text::replace_all(theme.prompt.intro, "{n_objects}",
                                          std::to_string(puzzle.size.n_objects));

    std::vector<std::string> category_lines;
    for (const CategoryId& cat_id : puzzle.solution.categories) {
        const ThemeCategory* cat = theme.category(cat_id);
        if (cat == nullptr) {
            throw ReferentialError("category '" + cat_id + "' is not part of the theme");
        }
        std::vector<std::string> names;
        for (int row = 0; row < puzzle.size.n_objects; ++row) {
            std::size_t col = 0;
            while (puzzle.solution.categories[col] != cat_id) ++col;
            const ThemeAttribute* attr =
                theme.attribute(puzzle.solution.cells[static_cast<std::size_t>(row)][col]);
            if (attr == nullptr) {
                throw ReferentialError("solution attribute missing from theme");
            }
            names.push_back(attr->name());
        }
        std::sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
            return text::collate_less(a, b, theme.alphabet_tail);
        });
        std::string line = cat->display + ": ";
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i > 0) {
                line += (i + 1 == names.size()) ? theme.list_final_separator
                                                : theme.list_separator;
            }
            line += names[i];
        }
        line += ".";
        category_lines.push_back(std::move(line));
    }

    std::vector<std::string> numbered;
    for (std::size_t i = 0; i < puzzle.items.size(); ++i) {
        std::string body = render_clue(puzzle.items[i], theme, puzzle.size);
        r.clue_texts.push_back(body);
        numbered.push_back(std::to_string(i + 1) + ". " + std::move(body));
    }

    r.format_block = render_format_block(puzzle, theme);

    const auto join = [](const std::vector<std::string>& lines) {
        std::string out;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (i > 0) out += "\n";
            out += lines[i];
        }
        return out;
    };

    std::string prompt = intro;
    if (!theme.prompt.category_header.empty()) {
        prompt += "\n\n" + theme.prompt.category_header;
    }
    prompt += "\n\n" + join(category_lines);
    prompt += "\n\n" + theme.prompt.clue_header;
    prompt += "\n\n" + join(numbered);
    prompt += "\n\n" + theme.prompt.question;
    prompt += "\n\n" + theme.prompt.format_instruction;
    prompt += "\n\n" + r.format_block + "\n";
    r.prompt_text = std::move(prompt);
    return r;
}

} // namespace zebra
