// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "zebra/core.hpp"
#include "zebra/csp.hpp"
#include "zebra/error.hpp"
#include "zebra/rng.hpp"
#include "zebra/theme.hpp"

namespace zebra {

struct GenerationConfig {
    Size size;
    int n_red_herrings = 5;
    std::map<ClueType, double> clue_weights;          // empty: all equal
    std::map<RedHerringType, double> herring_weights; // empty: all equal
    std::uint64_t master_seed = 0;
    int max_proposals = 1000;
    // Purely positional pair clues may relate two attributes of one
    // category; off by default except when the puzzle has a single
    // category, where every pair is same-category and the restriction
    // would make pair types undrawable.
    bool allow_same_category_pairs = false;

    double clue_weight(ClueType t) const {
        auto it = clue_weights.find(t);
        return it == clue_weights.end() ? (clue_weights.empty() ? 1.0 : 0.0) : it->second;
    }

    double herring_weight(RedHerringType t) const {
        auto it = herring_weights.find(t);
        return it == herring_weights.end() ? (herring_weights.empty() ? 1.0 : 0.0) : it->second;
    }
};

// ---------------------------------------------------------------------------
// Solution sampling

/// Draw categories without replacement (among those with enough
/// attributes), then attributes without replacement within each, assigned
/// to objects in random order. Chosen categories keep their naturalness
/// order in the matrix, which is also the prompt's category order.
inline SolutionMatrix sample_solution(const ThemeConfig& theme, Size size, Rng& rng) {
    size.validate();
    std::vector<int> eligible;
    for (std::size_t c = 0; c < theme.categories.size(); ++c) {
        if (static_cast<int>(theme.categories[c].attributes.size()) >= size.n_objects) {
            eligible.push_back(static_cast<int>(c));
        }
    }
    if (static_cast<int>(eligible.size()) < size.n_attributes) {
        throw InsufficientThemeError(
            "theme " + theme.language + "/" + theme.theme + " has only " +
            std::to_string(eligible.size()) + " categories with >= " +
            std::to_string(size.n_objects) + " attributes, need " +
            std::to_string(size.n_attributes));
    }
    std::vector<int> chosen_pool = rng.sample_indices(static_cast<int>(eligible.size()),
                                                      size.n_attributes);
    std::vector<int> chosen;
    chosen.reserve(chosen_pool.size());
    for (int k : chosen_pool) chosen.push_back(eligible[static_cast<std::size_t>(k)]);
    std::sort(chosen.begin(), chosen.end()); // theme order == naturalness order

    SolutionMatrix solution;
    solution.size = size;
    solution.cells.assign(static_cast<std::size_t>(size.n_objects),
                          std::vector<AttributeId>(static_cast<std::size_t>(size.n_attributes)));
    for (int j = 0; j < size.n_attributes; ++j) {
        const ThemeCategory& cat = theme.categories[static_cast<std::size_t>(chosen[static_cast<std::size_t>(j)])];
        solution.categories.push_back(cat.id);
        std::vector<int> picks =
            rng.sample_indices(static_cast<int>(cat.attributes.size()), size.n_objects);
        for (int r = 0; r < size.n_objects; ++r) {
            solution.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
                cat.attributes[static_cast<std::size_t>(picks[static_cast<std::size_t>(r)])].id;
        }
    }
    return solution;
}

// ---------------------------------------------------------------------------
// Clue proposal

namespace detail {

struct ProposalBudget {
    int remaining;
    void spend(const char* what) {
        if (--remaining < 0) {
            throw GenerationError(std::string("proposal budget exhausted while ") + what);
        }
    }
};

struct CellRef {
    int row; // 0-based
    int col;
};

inline CellRef random_cell(const SolutionMatrix& s, Rng& rng) {
    int idx = static_cast<int>(rng.below(
        static_cast<std::uint64_t>(s.size.n_objects * s.size.n_attributes)));
    return CellRef{idx / s.size.n_attributes, idx % s.size.n_attributes};
}

/// Canonical referent order for symmetric clue types so that duplicate
/// proposals collide regardless of draw order. Rendering re-sorts by
/// naturalness anyway.
inline void canonicalize_clue(Clue& clue) {
    switch (clue.type) {
        case ClueType::same_object:
        case ClueType::not_same_object:
        case ClueType::next_to:
        case ClueType::not_next_to:
        case ClueType::one_between:
        case ClueType::multiple_between:
            if (clue.attrs[1] < clue.attrs[0]) std::swap(clue.attrs[0], clue.attrs[1]);
            break;
        case ClueType::between:
        case ClueType::not_between:
            if (clue.attrs[2] < clue.attrs[0]) std::swap(clue.attrs[0], clue.attrs[2]);
            break;
        default: break;
    }
}

} // namespace detail

/// Draw one clue that is true on the solution: type weighted among the
/// size-eligible types, referents uniform among the draws satisfying the
/// clue (rejection sampling).
inline Clue propose_clue(const SolutionMatrix& solution, const GenerationConfig& cfg, Rng& rng,
                         detail::ProposalBudget& budget) {
    const Size size = solution.size;
    std::vector<ClueType> types;
    std::vector<double> weights;
    for (ClueType t : kAllClueTypes) {
        double w = cfg.clue_weight(t);
        if (w > 0.0 && clue_type_allowed(t, size)) {
            types.push_back(t);
            weights.push_back(w);
        }
    }
    if (types.empty()) {
        throw GenerationError("no clue type is eligible at size " + size.to_string());
    }
    const bool same_category_ok = cfg.allow_same_category_pairs || size.n_attributes == 1;

    for (;;) {
        budget.spend("proposing clues");
        ClueType type = types[rng.weighted(weights)];
        const int arity = clue_arity(type);

        Clue clue;
        clue.type = type;
        std::vector<detail::CellRef> cells;
        bool ok = true;
        for (int i = 0; i < arity && ok; ++i) {
            detail::CellRef cell = detail::random_cell(solution, rng);
            for (const auto& prev : cells) {
                if (prev.row == cell.row && prev.col == cell.col) {
                    ok = false; // same attribute twice
                    break;
                }
                if (prev.col == cell.col && !same_category_ok) {
                    ok = false;
                    break;
                }
                if ((type == ClueType::same_object || type == ClueType::not_same_object) &&
                    prev.col == cell.col) {
                    ok = false; // these relate distinct facts, categories must differ
                    break;
                }
            }
            if (ok) cells.push_back(cell);
        }
        if (!ok) continue;
        for (const auto& cell : cells) {
            clue.attrs.push_back(solution.cells[static_cast<std::size_t>(cell.row)]
                                               [static_cast<std::size_t>(cell.col)]);
        }
        if (type == ClueType::found_at) {
            clue.position = cells[0].row + 1; // always true by construction
        } else if (type == ClueType::not_at) {
            int p = rng.range(1, size.n_objects - 1);
            if (p >= cells[0].row + 1) ++p; // uniform over positions != the true one
            clue.position = p;
        } else if (type == ClueType::multiple_between) {
            clue.n_between = rng.range(2, size.n_objects - 2);
        }
        if (!clue_holds(clue, solution)) continue;
        detail::canonicalize_clue(clue);
        return clue;
    }
}

inline Clue propose_clue(const SolutionMatrix& solution, const GenerationConfig& cfg, Rng& rng) {
    detail::ProposalBudget budget{cfg.max_proposals};
    return propose_clue(solution, cfg, rng, budget);
}

// ---------------------------------------------------------------------------
// Clue set construction

/// Propose clues until the set pins the solution uniquely. A proposal is
/// kept iff it is informative (it removes at least one remaining
/// candidate solution). Duplicate proposals are rejected before any CSP
/// work.
inline std::vector<Clue> grow_clue_set(const SolutionMatrix& solution,
                                       const GenerationConfig& cfg, Rng& rng) {
    const AttributeUniverse universe = AttributeUniverse::from_solution(solution);
    std::vector<Clue> kept;
    std::set<Clue> seen;
    detail::ProposalBudget budget{cfg.max_proposals};
    while (count_solutions(kept, universe, 2).count > 1) {
        Clue candidate = propose_clue(solution, cfg, rng, budget);
        if (!seen.insert(candidate).second) continue;
        if (is_informative(kept, candidate, universe)) {
            kept.push_back(std::move(candidate));
        }
    }
    return kept;
}

/// One pass over the clues in their original order; each clue is dropped
/// unless its removal makes the solution degenerate (count >= 2). The
/// result is minimal: removing any surviving clue breaks uniqueness.
inline std::vector<Clue> prune_clues(const std::vector<Clue>& clues,
                                     const AttributeUniverse& universe) {
    if (count_solutions(clues, universe, 2).count != 1) {
        throw GenerationError("prune_clues requires a uniquely solvable clue set");
    }
    std::vector<Clue> kept = clues;
    std::size_t i = 0;
    while (i < kept.size()) {
        std::vector<Clue> without = kept;
        without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
        if (count_solutions(without, universe, 2).count >= 2) {
            ++i; // degenerates without it: keep
        } else {
            kept = std::move(without);
        }
    }
    return kept;
}

// ---------------------------------------------------------------------------
// Red herrings

namespace detail {

inline bool herring_type_available(RedHerringType t, const ThemeConfig& theme) {
    switch (t) {
        case RedHerringType::same_herring: return !theme.interests.empty();
        case RedHerringType::next_to_herring:
        case RedHerringType::friends:
        case RedHerringType::herring_found_at:
        case RedHerringType::herring_not_at: return !theme.distractors.empty();
        case RedHerringType::double_herring:
            return !theme.distractors.empty() && !theme.interests.empty();
        case RedHerringType::fact:
        case RedHerringType::object_fact: return !theme.facts.empty();
    }
    return false;
}

inline AttributeId random_solution_attr(const SolutionMatrix& s, Rng& rng) {
    CellRef cell = random_cell(s, rng);
    return s.cells[static_cast<std::size_t>(cell.row)][static_cast<std::size_t>(cell.col)];
}

} // namespace detail

/// Draw n red herrings: type by weight, pool items uniformly. Each
/// mentions at most one solution attribute; distractors come from pools
/// that are disjoint from the attribute space by theme validation. No two
/// herrings in one puzzle are identical.
inline std::vector<RedHerring> generate_red_herrings(const SolutionMatrix& solution,
                                                     const ThemeConfig& theme, int n,
                                                     const GenerationConfig& cfg, Rng& rng) {
    if (n < 0) throw GenerationError("red herring count must be >= 0");
    if (n == 0) return {};
    std::vector<RedHerringType> types;
    std::vector<double> weights;
    for (RedHerringType t : kAllRedHerringTypes) {
        double w = cfg.herring_weight(t);
        if (w > 0.0 && detail::herring_type_available(t, theme)) {
            types.push_back(t);
            weights.push_back(w);
        }
    }
    if (types.empty()) {
        throw InsufficientThemeError("no red herring type has both weight and pool items");
    }

    const auto pick = [&rng](std::size_t n_items) {
        return static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n_items)));
    };

    std::vector<RedHerring> herrings;
    detail::ProposalBudget budget{cfg.max_proposals};
    while (static_cast<int>(herrings.size()) < n) {
        budget.spend("drawing red herrings");
        RedHerring h;
        h.type = types[rng.weighted(weights)];
        if (herring_mentions_solution(h.type)) {
            h.solution_attr = detail::random_solution_attr(solution, rng);
        }
        switch (h.type) {
            case RedHerringType::same_herring:
                h.distractor_refs = {theme.interests[pick(theme.interests.size())].id};
                break;
            case RedHerringType::next_to_herring:
            case RedHerringType::friends:
                h.distractor_refs = {theme.distractors[pick(theme.distractors.size())].id};
                break;
            case RedHerringType::double_herring: {
                h.distractor_refs = {theme.distractors[pick(theme.distractors.size())].id,
                                     theme.interests[pick(theme.interests.size())].id};
                break;
            }
            case RedHerringType::fact:
            case RedHerringType::object_fact:
                h.distractor_refs = {theme.facts[pick(theme.facts.size())].id};
                break;
            case RedHerringType::herring_found_at:
            case RedHerringType::herring_not_at:
                h.distractor_refs = {theme.distractors[pick(theme.distractors.size())].id};
                h.position = rng.range(1, solution.size.n_objects);
                break;
        }
        bool duplicate = false;
        for (const RedHerring& other : herrings) {
            if (other == h) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) herrings.push_back(std::move(h));
    }
    return herrings;
}

// ---------------------------------------------------------------------------
// Assembly

/// Shuffle clues and herrings together and record the herrings' 1-based
/// positions. The solution and provenance fields are filled by the caller
/// (generate_puzzle) or by tests.
inline PuzzleInstance assemble_puzzle(const SolutionMatrix& solution,
                                      const std::vector<Clue>& clues,
                                      const std::vector<RedHerring>& herrings, Rng& rng) {
    PuzzleInstance puzzle;
    puzzle.size = solution.size;
    puzzle.solution = solution;
    puzzle.items.reserve(clues.size() + herrings.size());
    for (const Clue& c : clues) puzzle.items.emplace_back(c);
    for (const RedHerring& h : herrings) puzzle.items.emplace_back(h);
    rng.shuffle(puzzle.items);
    for (std::size_t i = 0; i < puzzle.items.size(); ++i) {
        if (is_red_herring(puzzle.items[i])) {
            puzzle.red_herring_indices.push_back(static_cast<int>(i) + 1);
        }
    }
    return puzzle;
}

/// A copy of the puzzle keeping a uniform random subset of `keep`
/// herrings. Relative item order is preserved and herring indices are
/// recomputed; the real clues and the solution are untouched.
inline PuzzleInstance derive_reduced_variant(const PuzzleInstance& puzzle, int keep, Rng& rng) {
    const int current = static_cast<int>(puzzle.red_herring_indices.size());
    if (keep < 0 || keep > current) {
        throw GenerationError("cannot keep " + std::to_string(keep) + " of " +
                              std::to_string(current) + " red herrings");
    }
    std::vector<int> picks = rng.sample_indices(current, keep);
    std::set<int> kept_item_indices; // 1-based
    for (int k : picks) {
        kept_item_indices.insert(puzzle.red_herring_indices[static_cast<std::size_t>(k)]);
    }
    PuzzleInstance reduced;
    reduced.id = puzzle.id + "-rh" + std::to_string(keep);
    reduced.language = puzzle.language;
    reduced.theme = puzzle.theme;
    reduced.size = puzzle.size;
    reduced.solution = puzzle.solution;
    reduced.seed = puzzle.seed;
    for (std::size_t i = 0; i < puzzle.items.size(); ++i) {
        const int one_based = static_cast<int>(i) + 1;
        if (is_red_herring(puzzle.items[i]) && kept_item_indices.count(one_based) == 0) {
            continue;
        }
        reduced.items.push_back(puzzle.items[i]);
        if (is_red_herring(puzzle.items[i])) {
            reduced.red_herring_indices.push_back(static_cast<int>(reduced.items.size()));
        }
    }
    return reduced;
}

// ---------------------------------------------------------------------------
// End-to-end generation

/// Generate one puzzle from a per-index derived seed. If a clue budget
/// runs out the solution is resampled with the next derived seed, so a
/// batch never stalls on one unlucky draw.
inline PuzzleInstance generate_puzzle(const ThemeConfig& theme, const GenerationConfig& cfg,
                                      std::uint64_t puzzle_index) {
    constexpr int kMaxAttempts = 64;
    for (int attempt = 0;; ++attempt) {
        const std::uint64_t seed =
            Rng::derive_seed(cfg.master_seed, puzzle_index, static_cast<std::uint64_t>(attempt));
        Rng rng(seed);
        try {
            SolutionMatrix solution = sample_solution(theme, cfg.size, rng);
            const AttributeUniverse universe = AttributeUniverse::from_solution(solution);
            std::vector<Clue> clues = grow_clue_set(solution, cfg, rng);
            clues = prune_clues(clues, universe);
            std::vector<RedHerring> herrings =
                generate_red_herrings(solution, theme, cfg.n_red_herrings, cfg, rng);
            PuzzleInstance puzzle = assemble_puzzle(solution, clues, herrings, rng);
            puzzle.id = theme.language + "-" + theme.theme + "-" + cfg.size.to_string() + "-" +
                        std::to_string(puzzle_index);
            puzzle.language = theme.language;
            puzzle.theme = theme.theme;
            puzzle.seed = seed;
            return puzzle;
        } catch (const GenerationError&) {
            if (attempt + 1 >= kMaxAttempts) throw;
        }
    }
}

/// Generate `count` puzzles with indices [start_index, start_index +
/// count), optionally across threads. Results are independent of the
/// thread count because every puzzle derives its own RNG from
/// (master_seed, index).
inline std::vector<PuzzleInstance> generate_batch(const ThemeConfig& theme,
                                                  const GenerationConfig& cfg, int count,
                                                  int jobs = 1,
                                                  std::uint64_t start_index = 0) {
    std::vector<PuzzleInstance> out(static_cast<std::size_t>(count));
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) {
            out[static_cast<std::size_t>(i)] =
                generate_puzzle(theme, cfg, start_index + static_cast<std::uint64_t>(i));
        }
        return out;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    const int n_workers = std::min(jobs, count);
    workers.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    out[static_cast<std::size_t>(i)] =
                        generate_puzzle(theme, cfg, start_index + static_cast<std::uint64_t>(i));
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!failed.exchange(true)) first_error = e.what();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failed.load()) throw GenerationError("batch generation failed: " + first_error);
    return out;
}

} // namespace zebra
