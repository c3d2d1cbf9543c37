#include "rha/tbreach.hpp"

#include <atomic>
#include <thread>

#include "rha/contraction.hpp"

namespace rha {

namespace {

bool is_target(const Skeleton& s, const std::set<Location>& targets, bool termination_only) {
    const CtxLoc& cl = s.last();
    return targets.contains(cl.loc) && (!termination_only || cl.context.empty());
}

Skeleton root(const Model& m) { return {{{}, Location::node(m.init_entry)}, {}}; }

// f(i) for i < n, using up to `jobs` threads; results are placed by index.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, std::size_t jobs, F f) {
    std::vector<T> out(n);
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(jobs, n); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
        });
    }
    pool.clear();
    return out;
}

}  // namespace

std::vector<Skeleton> enumerate_skeletons(const Model& m, std::size_t k, std::size_t max_len,
                                          const std::set<Location>& targets) {
    require_by_reference(m);
    std::vector<Skeleton> out;
    std::vector<Skeleton> level{root(m)};
    for (std::size_t len = 0;; ++len) {
        for (const auto& s : level)
            if (targets.empty() || is_target(s, targets, false)) out.push_back(s);
        if (len == max_len) break;
        std::vector<Skeleton> next;
        for (const auto& s : level) {
            for (auto& st : skeleton_successors(m, s.last(), k)) {
                Skeleton c = s;
                c.steps.push_back(std::move(st));
                next.push_back(std::move(c));
            }
        }
        if (next.empty()) break;
        level = std::move(next);
    }
    return out;
}

TbResult decide_tb_reach(const Model& m, const TbQuery& q) {
    require_by_reference(m);
    TbResult res;
    res.bound_c = bound_C(q.bound, m.rmax(), static_cast<std::int64_t>(m.nvars()),
                          static_cast<std::int64_t>(m.boxes.size()), static_cast<std::int64_t>(q.context),
                          location_count(m), m.cmax());
    res.effective_len = q.max_len.value_or(0);
    if (!q.max_len || mpz_class(static_cast<unsigned long>(*q.max_len)) > res.bound_c) {
        res.effective_len = res.bound_c.fits_ulong_p() ? res.bound_c.get_ui() : static_cast<std::size_t>(-1);
    }
    res.length_limited = mpz_class(static_cast<unsigned long>(res.effective_len)) < res.bound_c;

    LpOptions opt;
    opt.bound = q.bound;
    auto feasible = [&](const Skeleton& s) { return lp_feasible(m, s, m.init_val, opt); };

    std::vector<Skeleton> level{root(m)};
    ++res.checked;
    auto found = [&](const Skeleton& s, const LpWitness& w) {
        res.reachable = true;
        res.skeleton = s;
        res.witness = witness_run(m, s, m.init_val, w);
    };
    {
        const auto w = feasible(level[0]);
        if (!w) return res;
        if (is_target(level[0], q.targets, q.termination_only)) {
            found(level[0], *w);
            return res;
        }
    }
    for (std::size_t len = 1; len <= res.effective_len && !level.empty(); ++len) {
        std::vector<Skeleton> cand;
        for (const auto& s : level) {
            for (auto& st : skeleton_successors(m, s.last(), q.context)) {
                Skeleton c = s;
                c.steps.push_back(std::move(st));
                cand.push_back(std::move(c));
            }
        }
        res.checked += cand.size();
        const auto sols = parallel_map<std::optional<LpWitness>>(cand.size(), q.jobs,
                                                                 [&](std::size_t i) { return feasible(cand[i]); });
        std::vector<Skeleton> next;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (!sols[i]) continue;
            if (is_target(cand[i], q.targets, q.termination_only)) {
                found(cand[i], *sols[i]);
                return res;
            }
            next.push_back(std::move(cand[i]));
        }
        level = std::move(next);
    }
    return res;
}

}  // namespace rha
