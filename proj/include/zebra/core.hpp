// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zebra/error.hpp"

namespace zebra {

using AttributeId = std::string;
using CategoryId = std::string;

/// Puzzle dimensions: a row of objects, each with one attribute per category.
struct Size {
    int n_objects = 0;
    int n_attributes = 0;

    bool operator==(const Size&) const = default;

    void validate() const {
        if (n_objects < 2 || n_attributes < 1) {
            throw MalformedClueError("size must have at least 2 objects and 1 attribute, got " +
                                     to_string());
        }
    }

    std::string to_string() const {
        return std::to_string(n_objects) + "x" + std::to_string(n_attributes);
    }
};

/// One attribute of a theme category, with its language phrase forms
/// (e.g. "the baker", "is a baker", "is not a baker").
struct Attribute {
    AttributeId id;
    CategoryId category_id;
    std::map<std::string, std::string> phrase_forms;

    bool operator==(const Attribute&) const = default;
};

// ---------------------------------------------------------------------------
// Clues

enum class ClueType {
    found_at,
    not_at,
    same_object,
    not_same_object,
    next_to,
    not_next_to,
    just_left_of,
    just_right_of,
    left_of,
    right_of,
    between,
    not_between,
    one_between,
    multiple_between,
};

inline constexpr std::array<ClueType, 14> kAllClueTypes = {
    ClueType::found_at,     ClueType::not_at,       ClueType::same_object,
    ClueType::not_same_object, ClueType::next_to,   ClueType::not_next_to,
    ClueType::just_left_of, ClueType::just_right_of, ClueType::left_of,
    ClueType::right_of,     ClueType::between,      ClueType::not_between,
    ClueType::one_between,  ClueType::multiple_between,
};

inline std::string_view clue_type_name(ClueType t) {
    switch (t) {
        case ClueType::found_at: return "found_at";
        case ClueType::not_at: return "not_at";
        case ClueType::same_object: return "same_object";
        case ClueType::not_same_object: return "not_same_object";
        case ClueType::next_to: return "next_to";
        case ClueType::not_next_to: return "not_next_to";
        case ClueType::just_left_of: return "just_left_of";
        case ClueType::just_right_of: return "just_right_of";
        case ClueType::left_of: return "left_of";
        case ClueType::right_of: return "right_of";
        case ClueType::between: return "between";
        case ClueType::not_between: return "not_between";
        case ClueType::one_between: return "one_between";
        case ClueType::multiple_between: return "multiple_between";
    }
    return "?";
}

inline std::optional<ClueType> clue_type_from_name(std::string_view name) {
    for (ClueType t : kAllClueTypes) {
        if (clue_type_name(t) == name) return t;
    }
    return std::nullopt;
}

/// Number of attribute referents the clue type takes.
inline int clue_arity(ClueType t) {
    switch (t) {
        case ClueType::found_at:
        case ClueType::not_at: return 1;
        case ClueType::between:
        case ClueType::not_between: return 3;
        default: return 2;
    }
}

inline bool clue_uses_position(ClueType t) {
    return t == ClueType::found_at || t == ClueType::not_at;
}

inline bool clue_uses_n_between(ClueType t) { return t == ClueType::multiple_between; }

/// Size requirements beyond the general n_objects >= 2, n_attributes >= 1.
/// Types that would duplicate another type's information at small sizes
/// are excluded there (e.g. just_left_of vs left_of on 2 objects).
inline bool clue_type_allowed(ClueType t, Size size) {
    switch (t) {
        case ClueType::same_object:
        case ClueType::not_same_object: return size.n_attributes > 1;
        case ClueType::next_to:
        case ClueType::not_next_to:
        case ClueType::just_left_of:
        case ClueType::just_right_of:
        case ClueType::between:
        case ClueType::not_between:
        case ClueType::one_between: return size.n_objects > 2;
        case ClueType::multiple_between: return size.n_objects > 3;
        default: return true;
    }
}

/// A typed constraint on the positions of referenced attributes.
/// For between/not_between the referent order is [X, Y, Z] with Y the
/// constrained middle.
struct Clue {
    ClueType type;
    std::vector<AttributeId> attrs;
    std::optional<int> position;  // found_at / not_at only, 1-based
    std::optional<int> n_between; // multiple_between only

    bool operator==(const Clue&) const = default;
    bool operator<(const Clue& o) const {
        return std::tie(type, attrs, position, n_between) <
               std::tie(o.type, o.attrs, o.position, o.n_between);
    }
};

// ---------------------------------------------------------------------------
// Red herrings

enum class RedHerringType {
    same_herring,
    next_to_herring,
    double_herring,
    fact,
    object_fact,
    friends,
    herring_found_at,
    herring_not_at,
};

inline constexpr std::array<RedHerringType, 8> kAllRedHerringTypes = {
    RedHerringType::same_herring,    RedHerringType::next_to_herring,
    RedHerringType::double_herring,  RedHerringType::fact,
    RedHerringType::object_fact,     RedHerringType::friends,
    RedHerringType::herring_found_at, RedHerringType::herring_not_at,
};

inline std::string_view herring_type_name(RedHerringType t) {
    switch (t) {
        case RedHerringType::same_herring: return "same_herring";
        case RedHerringType::next_to_herring: return "next_to_herring";
        case RedHerringType::double_herring: return "double_herring";
        case RedHerringType::fact: return "fact";
        case RedHerringType::object_fact: return "object_fact";
        case RedHerringType::friends: return "friends";
        case RedHerringType::herring_found_at: return "herring_found_at";
        case RedHerringType::herring_not_at: return "herring_not_at";
    }
    return "?";
}

inline std::optional<RedHerringType> herring_type_from_name(std::string_view name) {
    for (RedHerringType t : kAllRedHerringTypes) {
        if (herring_type_name(t) == name) return t;
    }
    return std::nullopt;
}

/// True when the herring type mentions one attribute from the solution;
/// the remaining slots are always filled from theme distractor pools.
inline bool herring_mentions_solution(RedHerringType t) {
    switch (t) {
        case RedHerringType::same_herring:
        case RedHerringType::next_to_herring:
        case RedHerringType::object_fact:
        case RedHerringType::friends: return true;
        default: return false;
    }
}

inline bool herring_uses_position(RedHerringType t) {
    return t == RedHerringType::herring_found_at || t == RedHerringType::herring_not_at;
}

/// A clue-shaped sentence that carries no information about the solution.
struct RedHerring {
    RedHerringType type;
    std::optional<AttributeId> solution_attr;
    std::vector<std::string> distractor_refs; // ids into the theme herring pools
    std::optional<int> position;

    bool operator==(const RedHerring&) const = default;
};

/// The solution attributes a herring mentions; cardinality is at most 1.
inline std::set<AttributeId> herring_mentioned_attrs(const RedHerring& h) {
    std::set<AttributeId> out;
    if (h.solution_attr) out.insert(*h.solution_attr);
    return out;
}

// ---------------------------------------------------------------------------
// Solution matrix

/// The hidden ground truth: one attribute per category for each object.
/// Object positions are 1-based throughout.
struct SolutionMatrix {
    Size size;
    std::vector<CategoryId> categories;            // length n_attributes
    std::vector<std::vector<AttributeId>> cells;   // n_objects rows x n_attributes columns

    bool operator==(const SolutionMatrix&) const = default;

    /// 1-based position of the attribute, or 0 when absent.
    int position_of(const AttributeId& attr) const {
        for (std::size_t r = 0; r < cells.size(); ++r) {
            for (const AttributeId& cell : cells[r]) {
                if (cell == attr) return static_cast<int>(r) + 1;
            }
        }
        return 0;
    }

    void validate() const {
        size.validate();
        if (static_cast<int>(categories.size()) != size.n_attributes) {
            throw Error("solution category count does not match size");
        }
        if (static_cast<int>(cells.size()) != size.n_objects) {
            throw Error("solution row count does not match size");
        }
        for (const auto& row : cells) {
            if (static_cast<int>(row.size()) != size.n_attributes) {
                throw Error("solution row width does not match size");
            }
        }
        for (int j = 0; j < size.n_attributes; ++j) {
            std::set<AttributeId> seen;
            for (int r = 0; r < size.n_objects; ++r) {
                if (!seen.insert(cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)])
                         .second) {
                    throw Error("duplicate attribute in category column " + categories[static_cast<std::size_t>(j)]);
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Clue semantics

/// The positional constraint of a clue type over the 1-based positions of
/// its referents (in referent order). Pure and total for valid arity.
inline bool positional_predicate(ClueType t, const std::vector<int>& pos,
                                 std::optional<int> p, std::optional<int> n_between) {
    const auto x = [&] { return pos[0]; };
    const auto y = [&] { return pos[1]; };
    const auto z = [&] { return pos[2]; };
    switch (t) {
        case ClueType::found_at: return x() == *p;
        case ClueType::not_at: return x() != *p;
        case ClueType::same_object: return x() == y();
        case ClueType::not_same_object: return x() != y();
        case ClueType::next_to: return std::abs(x() - y()) == 1;
        case ClueType::not_next_to: return std::abs(x() - y()) > 1;
        case ClueType::just_left_of: return y() - x() == 1;
        case ClueType::just_right_of: return x() - y() == 1;
        case ClueType::left_of: return x() < y();
        case ClueType::right_of: return x() > y();
        case ClueType::between:
            return (x() < y() && y() < z()) || (x() > y() && y() > z());
        case ClueType::not_between:
            return !((x() < y() && y() < z()) || (x() > y() && y() > z())) && x() != y() &&
                   x() != z() && y() != z();
        case ClueType::one_between: return std::abs(x() - y()) == 2;
        case ClueType::multiple_between: return std::abs(x() - y()) == *n_between + 1;
    }
    return false;
}

/// Structural validation of a clue against a puzzle size: arity, referent
/// distinctness, positional bounds and the Table-of-requirements gate.
inline void validate_clue(const Clue& clue, Size size) {
    if (static_cast<int>(clue.attrs.size()) != clue_arity(clue.type)) {
        throw MalformedClueError(std::string(clue_type_name(clue.type)) + " expects " +
                                 std::to_string(clue_arity(clue.type)) + " attributes, got " +
                                 std::to_string(clue.attrs.size()));
    }
    for (std::size_t i = 0; i < clue.attrs.size(); ++i) {
        for (std::size_t j = i + 1; j < clue.attrs.size(); ++j) {
            if (clue.attrs[i] == clue.attrs[j]) {
                throw MalformedClueError("clue references attribute '" + clue.attrs[i] +
                                         "' twice");
            }
        }
    }
    if (!clue_type_allowed(clue.type, size)) {
        throw MalformedClueError(std::string(clue_type_name(clue.type)) +
                                 " is not allowed at size " + size.to_string());
    }
    if (clue_uses_position(clue.type)) {
        if (!clue.position || *clue.position < 1 || *clue.position > size.n_objects) {
            throw MalformedClueError(std::string(clue_type_name(clue.type)) +
                                     " needs a position in [1, " +
                                     std::to_string(size.n_objects) + "]");
        }
    } else if (clue.position) {
        throw MalformedClueError(std::string(clue_type_name(clue.type)) +
                                 " does not take a position");
    }
    if (clue_uses_n_between(clue.type)) {
        if (!clue.n_between || *clue.n_between < 2 || *clue.n_between > size.n_objects - 2) {
            throw MalformedClueError("multiple_between needs n_between in [2, " +
                                     std::to_string(size.n_objects - 2) + "]");
        }
    } else if (clue.n_between) {
        throw MalformedClueError(std::string(clue_type_name(clue.type)) +
                                 " does not take n_between");
    }
}

/// Truth value of a clue on a solution. Total and deterministic; throws
/// only for malformed clues or unknown attributes.
inline bool clue_holds(const Clue& clue, const SolutionMatrix& solution) {
    validate_clue(clue, solution.size);
    std::vector<int> pos;
    pos.reserve(clue.attrs.size());
    for (const AttributeId& attr : clue.attrs) {
        int p = solution.position_of(attr);
        if (p == 0) {
            throw ReferentialError("attribute '" + attr + "' not present in solution");
        }
        pos.push_back(p);
    }
    return positional_predicate(clue.type, pos, clue.position, clue.n_between);
}

// ---------------------------------------------------------------------------
// Puzzle instance

using PuzzleItem = std::variant<Clue, RedHerring>;

inline bool is_red_herring(const PuzzleItem& item) {
    return std::holds_alternative<RedHerring>(item);
}

/// A complete puzzle: shuffled clue/herring list plus ground truth.
/// The real clues alone admit exactly one solution, equal to `solution`.
struct PuzzleInstance {
    std::string id;
    std::string language;
    std::string theme;
    Size size;
    SolutionMatrix solution;
    std::vector<PuzzleItem> items;
    std::vector<int> red_herring_indices; // 1-based into items
    std::uint64_t seed = 0;

    std::vector<Clue> real_clues() const {
        std::vector<Clue> out;
        for (const PuzzleItem& item : items) {
            if (const Clue* c = std::get_if<Clue>(&item)) out.push_back(*c);
        }
        return out;
    }

    std::vector<RedHerring> red_herrings() const {
        std::vector<RedHerring> out;
        for (const PuzzleItem& item : items) {
            if (const RedHerring* h = std::get_if<RedHerring>(&item)) out.push_back(*h);
        }
        return out;
    }
};

} // namespace zebra
