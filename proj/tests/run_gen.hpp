#pragma once

#include <random>

#include "rha/semantics.hpp"

namespace rha::test {

// Random legal run with at most max_len steps and contexts of length at most k. Delays favour zero
// and small quarters so that (context, location, region) repeats are common.
inline Run random_run(const Model& m, std::mt19937_64& rng, std::size_t k, std::size_t max_len) {
    Run run;
    run.init = initial_config(m);
    while (run.steps.size() < max_len) {
        const Configuration& c = run.last();
        if (is_forced(m, c)) {
            if (c.loc.kind == LocKind::call && c.context.size() >= k) break;
            try {
                run.steps.push_back(step(m, c, Rational(), std::nullopt));
            } catch (const StepError&) {
                break;
            }
            continue;
        }
        std::vector<std::pair<EdgeId, Rational>> options;
        for (auto e : m.outgoing(c.loc)) {
            if (m.edges[e].dst.kind == LocKind::call && c.context.size() >= k) continue;
            const TimeWindow w = edge_window(m, c, e);
            if (w.empty) continue;
            std::vector<Rational> cands;
            if (auto lo = w.earliest()) cands.push_back(*lo);
            if (auto p = w.pick()) cands.push_back(*p);
            for (const Rational& d : {Rational(1, 4), Rational(1, 2), Rational(1, 8)}) cands.push_back(w.lo + d);
            if (w.hi) cands.push_back((w.lo + *w.hi) / Rational(2));
            for (const auto& t : cands)
                if (w.contains(t)) options.emplace_back(e, t);
        }
        if (options.empty()) break;
        std::vector<std::pair<EdgeId, Rational>> instant;
        for (const auto& o : options)
            if (o.second.sign() == 0) instant.push_back(o);
        if (!instant.empty() && std::bernoulli_distribution(0.6)(rng)) options = std::move(instant);
        std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
        const auto& [e, t] = options[pick(rng)];
        run.steps.push_back(step(m, c, t, e));
    }
    return run;
}

}  // namespace rha::test
