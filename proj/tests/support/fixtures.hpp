// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "zebra/core.hpp"
#include "zebra/csp.hpp"

namespace zebra::testsupport {

/// Synthetic universe with attribute ids "c<j>a<k>" (category j, k-th
/// attribute). In the identity solution, c<j>a<k> sits at position k.
inline AttributeUniverse make_universe(Size size) {
    AttributeUniverse u;
    u.size = size;
    for (int j = 0; j < size.n_attributes; ++j) {
        u.categories.push_back("c" + std::to_string(j));
        std::vector<AttributeId> col;
        for (int k = 1; k <= size.n_objects; ++k) {
            col.push_back("c" + std::to_string(j) + "a" + std::to_string(k));
        }
        u.attributes.push_back(std::move(col));
    }
    return u;
}

inline SolutionMatrix identity_solution(Size size) {
    AttributeUniverse u = make_universe(size);
    SolutionMatrix s;
    s.size = size;
    s.categories = u.categories;
    s.cells.assign(static_cast<std::size_t>(size.n_objects),
                   std::vector<AttributeId>(static_cast<std::size_t>(size.n_attributes)));
    for (int r = 0; r < size.n_objects; ++r) {
        for (int j = 0; j < size.n_attributes; ++j) {
            s.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
                u.attributes[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
        }
    }
    return s;
}

/// Attribute id of the synthetic universe at (1-based position, category).
inline AttributeId at(int position, int category = 0) {
    return "c" + std::to_string(category) + "a" + std::to_string(position);
}

inline Clue make_clue(ClueType type, std::vector<AttributeId> attrs,
                      std::optional<int> position = std::nullopt,
                      std::optional<int> n_between = std::nullopt) {
    return Clue{type, std::move(attrs), position, n_between};
}

/// The example 2x3 solution used across tests: jobs, book genres and
/// hobbies for two houses.
inline SolutionMatrix two_house_solution() {
    SolutionMatrix s;
    s.size = {2, 3};
    s.categories = {"jobs", "book_genres", "hobbies"};
    s.cells = {
        {"police officer", "fantasy", "handball"},
        {"nurse", "romance", "bouldering"},
    };
    return s;
}

} // namespace zebra::testsupport
