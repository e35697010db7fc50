// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "zebra/core.hpp"
#include "zebra/error.hpp"

namespace zebra {

/// The variable space of a puzzle CSP: one position variable per
/// (category, attribute) with domain [1, n_objects], all-different within
/// each category. Attribute ids must be globally unique.
struct AttributeUniverse {
    Size size;
    std::vector<CategoryId> categories;
    std::vector<std::vector<AttributeId>> attributes; // [category][k], n_objects each

    static AttributeUniverse from_solution(const SolutionMatrix& solution) {
        AttributeUniverse u;
        u.size = solution.size;
        u.categories = solution.categories;
        u.attributes.resize(u.categories.size());
        for (std::size_t j = 0; j < u.categories.size(); ++j) {
            auto& col = u.attributes[j];
            col.reserve(static_cast<std::size_t>(u.size.n_objects));
            for (int r = 0; r < u.size.n_objects; ++r) {
                col.push_back(solution.cells[static_cast<std::size_t>(r)][j]);
            }
        }
        return u;
    }

    int var_count() const { return size.n_objects * size.n_attributes; }

    /// Variable index of an attribute: category-major, attribute minor.
    int var_of(const AttributeId& attr) const {
        for (std::size_t j = 0; j < attributes.size(); ++j) {
            for (std::size_t k = 0; k < attributes[j].size(); ++k) {
                if (attributes[j][k] == attr) {
                    return static_cast<int>(j) * size.n_objects + static_cast<int>(k);
                }
            }
        }
        return -1;
    }
};

/// A (possibly negated) positional predicate over universe variables.
/// Negation is the logical complement of the clue's constraint, which is
/// not the same thing as the not_* clue types (those add distinctness).
struct Constraint {
    ClueType type;
    std::vector<AttributeId> attrs;
    std::optional<int> position;
    std::optional<int> n_between;
    bool negated = false;

    bool eval(const std::vector<int>& referent_positions) const {
        bool v = positional_predicate(type, referent_positions, position, n_between);
        return negated ? !v : v;
    }
};

inline Constraint to_constraint(const Clue& clue) {
    return Constraint{clue.type, clue.attrs, clue.position, clue.n_between, false};
}

inline Constraint negate(const Clue& clue) {
    return Constraint{clue.type, clue.attrs, clue.position, clue.n_between, true};
}

/// Result of a bounded solution count. `count` is exact when below the cap
/// and saturates at the cap otherwise. Up to two witnesses are retained.
struct SolveOutcome {
    int count = 0;
    std::vector<SolutionMatrix> witnesses;
};

namespace detail {

struct CompiledConstraint {
    std::vector<int> vars; // universe variable indices, referent order
    const Constraint* source;
};

/// Backtracking search over position variables in fixed category-major
/// order, values ascending, with forward-checking on the per-category
/// all-different constraints. Deterministic by construction.
class CspSolver {
public:
    CspSolver(const AttributeUniverse& universe, const std::vector<Constraint>& constraints)
        : u_(universe), n_(universe.size.n_objects), var_count_(universe.var_count()) {
        std::unordered_map<std::string, int> var_index;
        var_index.reserve(static_cast<std::size_t>(var_count_));
        for (std::size_t j = 0; j < u_.attributes.size(); ++j) {
            for (std::size_t k = 0; k < u_.attributes[j].size(); ++k) {
                var_index[u_.attributes[j][k]] =
                    static_cast<int>(j) * n_ + static_cast<int>(k);
            }
        }
        compiled_.reserve(constraints.size());
        watching_.resize(static_cast<std::size_t>(var_count_));
        for (const Constraint& c : constraints) {
            CompiledConstraint cc;
            cc.source = &c;
            for (const AttributeId& attr : c.attrs) {
                auto it = var_index.find(attr);
                if (it == var_index.end()) {
                    throw ReferentialError("attribute '" + attr +
                                           "' not declared in the CSP universe");
                }
                cc.vars.push_back(it->second);
            }
            compiled_.push_back(std::move(cc));
        }
        for (std::size_t ci = 0; ci < compiled_.size(); ++ci) {
            for (int v : compiled_[ci].vars) {
                watching_[static_cast<std::size_t>(v)].push_back(static_cast<int>(ci));
            }
        }
        full_domain_ = static_cast<std::uint32_t>((1u << n_) - 1);
    }

    SolveOutcome solve(int cap, int max_witnesses = 2) {
        cap_ = cap;
        max_witnesses_ = max_witnesses;
        outcome_ = SolveOutcome{};
        position_.assign(static_cast<std::size_t>(var_count_), -1);
        domain_.assign(static_cast<std::size_t>(var_count_), full_domain_);
        search(0);
        return outcome_;
    }

private:
    bool constraint_ready(const CompiledConstraint& cc, int just_assigned) const {
        for (int v : cc.vars) {
            if (position_[static_cast<std::size_t>(v)] < 0) return false;
        }
        // Evaluate only when the just-assigned variable completes the set,
        // so each constraint fires once per full binding.
        (void)just_assigned;
        return true;
    }

    bool check_constraints(int var) const {
        std::vector<int> pos;
        for (int ci : watching_[static_cast<std::size_t>(var)]) {
            const CompiledConstraint& cc = compiled_[static_cast<std::size_t>(ci)];
            if (!constraint_ready(cc, var)) continue;
            pos.clear();
            for (int v : cc.vars) pos.push_back(position_[static_cast<std::size_t>(v)] + 1);
            if (!cc.source->eval(pos)) return false;
        }
        return true;
    }

    // Returns false once the cap is reached and search should unwind.
    bool search(int var) {
        if (var == var_count_) {
            record_solution();
            return outcome_.count < cap_;
        }
        const int category = var / n_;
        const int cat_begin = category * n_;
        const int cat_end = cat_begin + n_;
        for (int p = 0; p < n_; ++p) {
            if ((domain_[static_cast<std::size_t>(var)] & (1u << p)) == 0) continue;
            position_[static_cast<std::size_t>(var)] = p;
            if (check_constraints(var)) {
                // Forward-check: prune p from unassigned peers in the category.
                bool wiped = false;
                std::uint32_t mask = ~(1u << p);
                std::vector<std::pair<int, std::uint32_t>> trail;
                for (int peer = cat_begin; peer < cat_end; ++peer) {
                    if (peer == var || position_[static_cast<std::size_t>(peer)] >= 0) continue;
                    std::uint32_t before = domain_[static_cast<std::size_t>(peer)];
                    std::uint32_t after = before & mask;
                    if (after != before) {
                        trail.emplace_back(peer, before);
                        domain_[static_cast<std::size_t>(peer)] = after;
                        if (after == 0) {
                            wiped = true;
                            break;
                        }
                    }
                }
                bool keep_going = true;
                if (!wiped) keep_going = search(var + 1);
                for (auto& [peer, before] : trail) {
                    domain_[static_cast<std::size_t>(peer)] = before;
                }
                if (!keep_going) {
                    position_[static_cast<std::size_t>(var)] = -1;
                    return false;
                }
            }
            position_[static_cast<std::size_t>(var)] = -1;
        }
        return true;
    }

    void record_solution() {
        ++outcome_.count;
        if (static_cast<int>(outcome_.witnesses.size()) >= max_witnesses_) return;
        SolutionMatrix w;
        w.size = u_.size;
        w.categories = u_.categories;
        w.cells.assign(static_cast<std::size_t>(n_),
                       std::vector<AttributeId>(u_.categories.size()));
        for (std::size_t j = 0; j < u_.attributes.size(); ++j) {
            for (std::size_t k = 0; k < u_.attributes[j].size(); ++k) {
                int var = static_cast<int>(j) * n_ + static_cast<int>(k);
                int row = position_[static_cast<std::size_t>(var)];
                w.cells[static_cast<std::size_t>(row)][j] = u_.attributes[j][k];
            }
        }
        outcome_.witnesses.push_back(std::move(w));
    }

    const AttributeUniverse& u_;
    int n_;
    int var_count_;
    std::vector<CompiledConstraint> compiled_;
    std::vector<std::vector<int>> watching_;
    std::vector<int> position_; // assigned 0-based position or -1
    std::vector<std::uint32_t> domain_;
    std::uint32_t full_domain_ = 0;
    int cap_ = 1;
    int max_witnesses_ = 2;
    SolveOutcome outcome_;
};

} // namespace detail

/// Count solutions of a raw constraint list, stopping at the cap.
inline SolveOutcome solve_constraints(const std::vector<Constraint>& constraints,
                                      const AttributeUniverse& universe, int cap) {
    detail::CspSolver solver(universe, constraints);
    return solver.solve(cap);
}

/// Count solutions of a clue set over the universe, stopping at the cap.
/// The count is exact whenever it is below the cap.
inline SolveOutcome count_solutions(const std::vector<Clue>& clues,
                                    const AttributeUniverse& universe, int cap) {
    if (cap < 1) throw Error("count_solutions cap must be >= 1");
    std::vector<Constraint> constraints;
    constraints.reserve(clues.size());
    for (const Clue& clue : clues) {
        validate_clue(clue, universe.size);
        constraints.push_back(to_constraint(clue));
    }
    return solve_constraints(constraints, universe, cap);
}

/// True iff some solution of `existing` violates `candidate`, i.e. adding
/// the candidate strictly decreases the solution count. Decided by a
/// single satisfiability query on existing + not(candidate); counting the
/// unconstrained space would be infeasible for larger sizes.
inline bool is_informative(const std::vector<Clue>& existing, const Clue& candidate,
                           const AttributeUniverse& universe) {
    validate_clue(candidate, universe.size);
    std::vector<Constraint> constraints;
    constraints.reserve(existing.size() + 1);
    for (const Clue& clue : existing) {
        validate_clue(clue, universe.size);
        constraints.push_back(to_constraint(clue));
    }
    constraints.push_back(negate(candidate));
    return solve_constraints(constraints, universe, 1).count > 0;
}

} // namespace zebra
