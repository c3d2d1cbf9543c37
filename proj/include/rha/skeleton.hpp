#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rha/semantics.hpp"

namespace rha {

// Context as a box sequence plus location; valuations are not stored (pass-by-reference models).
struct CtxLoc {
    std::vector<BoxId> context;
    Location loc;
    friend bool operator==(const CtxLoc&, const CtxLoc&) = default;
    friend auto operator<=>(const CtxLoc&, const CtxLoc&) = default;
};

struct SkelStep {
    StepKind kind = StepKind::edge;
    std::optional<EdgeId> edge;
    CtxLoc to;
    friend bool operator==(const SkelStep&, const SkelStep&) = default;
};

// A purely discrete run shape.
struct Skeleton {
    CtxLoc init;
    std::vector<SkelStep> steps;

    [[nodiscard]] std::size_t size() const { return steps.size(); }
    [[nodiscard]] const CtxLoc& at(std::size_t i) const { return i == 0 ? init : steps[i - 1].to; }
    [[nodiscard]] const CtxLoc& last() const { return at(steps.size()); }
    friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

CtxLoc ctxloc_of(const Configuration& c);
Skeleton skeleton_of(const Run& r);
std::string describe(const Model& m, const CtxLoc& cl);

// Structurally legal next steps with contexts of length at most k: the forced call or return, or
// one step per outgoing edge in declaration order.
std::vector<SkelStep> skeleton_successors(const Model& m, const CtxLoc& cl, std::size_t k);

// Throws std::invalid_argument if some box passes a variable by value.
void require_by_reference(const Model& m);

struct LpOptions {
    std::optional<Rational> bound;           // total duration <= bound
    std::optional<Rational> exact_duration;  // total duration = value
    std::optional<Valuation> end;            // final valuation
    std::vector<std::pair<std::size_t, Rational>> fixed_delays;  // (step index, delay)
};

struct LpWitness {
    std::vector<Rational> delays;         // one per step
    std::vector<Valuation> valuations;    // one per configuration
};

// Delays making the skeleton a run from `init` (guards, invariants at both ends of every delay,
// target invariants, zero delay on forced steps, by-value restore on return). Exact, including strict
// constraints.
std::optional<LpWitness> lp_feasible(const Model& m, const Skeleton& s, const Valuation& init, const LpOptions& opt = {});

// Replays a feasible witness through the step relation; throws StepError if it does not replay.
Run witness_run(const Model& m, const Skeleton& s, const Valuation& init, const LpWitness& w);

}  // namespace rha
