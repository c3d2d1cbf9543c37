#pragma once

#include <gmpxx.h>

#include <functional>
#include <optional>
#include <set>

#include "rha/skeleton.hpp"

namespace rha {

// Structurally valid skeletons from the model's initial entry with at most max_len steps and
// contexts of length at most k, in length-lexicographic order (edges by declaration order). When
// `targets` is non-empty only skeletons ending in a target location are returned.
std::vector<Skeleton> enumerate_skeletons(const Model& m, std::size_t k, std::size_t max_len,
                                          const std::set<Location>& targets = {});

struct TbQuery {
    std::set<Location> targets;
    bool termination_only = false;  // targets must be reached with an empty context
    Rational bound;
    std::size_t context = 1;
    std::optional<std::size_t> max_len;  // defaults to bound_C
    std::size_t jobs = 1;
};

struct TbResult {
    bool reachable = false;
    std::optional<Run> witness;
    std::optional<Skeleton> skeleton;
    mpz_class bound_c;
    std::size_t effective_len = 0;
    bool length_limited = false;  // effective_len < bound_c, so "unreachable" holds only up to that length
    std::size_t checked = 0;      // skeletons passed to the feasibility check
};

// Breadth-first over skeletons whose prefix is feasible within the bound; the first feasible skeleton
// reaching a target (in enumeration order) is returned with a replayed witness run.
TbResult decide_tb_reach(const Model& m, const TbQuery& q);

}  // namespace rha
