#include "rha/semantics.hpp"

#include <sstream>

namespace rha {

Rational Run::duration() const {
    Rational d;
    for (const auto& s : steps) d += s.delay;
    return d;
}

Configuration initial_config(const Model& m) { return Configuration{{}, Location::node(m.init_entry), m.init_val}; }

bool satisfies_invariant(const Model& m, const Configuration& c) { return m.attr(c.loc).inv.holds(c.val); }

bool is_termination(const Model& m, const Configuration& c) {
    return c.context.empty() && c.loc.kind == LocKind::node && m.is_exit(c.loc.id);
}

bool is_forced(const Model& m, const Configuration& c) {
    if (c.loc.kind == LocKind::call) return true;
    return c.loc.kind == LocKind::node && m.is_exit(c.loc.id) && !c.context.empty();
}

std::string describe(const Model& m, const Configuration& c) {
    std::ostringstream os;
    os << "([";
    for (std::size_t i = 0; i < c.context.size(); ++i) os << (i == 0 ? "" : " ") << m.boxes[c.context[i].box].name;
    os << "], " << m.loc_name(c.loc) << ", (";
    for (VarIndex i = 0; i < c.val.size(); ++i) os << (i == 0 ? "" : ", ") << m.vars[i] << "=" << c.val[i];
    os << "))";
    return os.str();
}

Step step(const Model& m, const Configuration& c, const Rational& t, std::optional<EdgeId> edge) {
    if (t.sign() < 0) throw StepError("negative delay");
    Step s;
    s.delay = t;
    const Location& q = c.loc;

    if (q.kind == LocKind::call) {
        if (edge) throw StepError("edge not outgoing from location (call port)");
        if (t.sign() != 0) throw StepError("nonzero delay at call port");
        s.kind = StepKind::call;
        s.action = "call";
        s.to.context = c.context;
        s.to.context.push_back(Frame{q.id, c.val});
        s.to.loc = Location::node(q.port);
        s.to.val = c.val;
        if (!satisfies_invariant(m, s.to)) throw StepError("invariant violated at entry");
        return s;
    }

    if (q.kind == LocKind::node && m.is_exit(q.id)) {
        if (edge) throw StepError("outgoing from exit");
        if (c.context.empty()) throw StepError("pop on empty context");
        if (t.sign() != 0) throw StepError("nonzero delay at exit");
        const Frame& top = c.context.back();
        const Box& b = m.boxes.at(top.box);
        if (b.callee != m.nodes[q.id].comp) throw StepError("context mismatch: frame box does not call this component");
        s.kind = StepKind::ret;
        s.action = "return";
        s.to.context.assign(c.context.begin(), c.context.end() - 1);
        s.to.loc = Location::ret(top.box, q.id);
        s.to.val = c.val;
        for (VarIndex i = 0; i < c.val.size(); ++i) {
            if (b.by_value.contains(i)) s.to.val[i] = top.saved[i];
        }
        if (!satisfies_invariant(m, s.to)) throw StepError("invariant violated at return port");
        return s;
    }

    if (!edge) throw StepError("no edge chosen");
    const auto& outs = m.outgoing(q);
    if (std::find(outs.begin(), outs.end(), *edge) == outs.end()) throw StepError("edge not outgoing from location");
    const Edge& e = m.edges[*edge];
    const LocAttr& a = m.attr(q);
    if (!a.inv.holds(c.val)) throw StepError("invariant violated before delay");
    const Valuation moved = evolve_and_reset(c.val, a.rate, t);
    if (!a.inv.holds(moved)) throw StepError("invariant violated during delay");
    if (!e.guard.holds(moved)) throw StepError("guard unsatisfied");
    s.kind = StepKind::edge;
    s.edge = *edge;
    s.action = e.action;
    s.to.context = c.context;
    s.to.loc = e.dst;
    s.to.val = evolve_and_reset(c.val, a.rate, t, e.reset);
    if (!satisfies_invariant(m, s.to)) throw StepError("invariant violated at target");
    return s;
}

std::optional<RunViolation> validate_run(const Model& m, const Run& run) {
    const std::size_t nv = m.nvars();
    auto well_formed = [&](const Configuration& c) {
        if (c.val.size() != nv) return false;
        for (const auto& f : c.context) {
            if (f.box >= m.boxes.size() || f.saved.size() != nv) return false;
        }
        return true;
    };
    if (!well_formed(run.init)) return RunViolation{0, "malformed initial configuration"};
    if (!satisfies_invariant(m, run.init)) return RunViolation{0, "invariant violated in initial configuration"};
    Configuration cur = run.init;
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
        const Step& st = run.steps[i];
        const std::size_t idx = i + 1;
        if (!well_formed(st.to)) return RunViolation{idx, "malformed configuration"};
        if (is_forced(m, cur)) {
            Step got;
            try {
                got = step(m, cur, st.delay, std::nullopt);
            } catch (const StepError& e) {
                return RunViolation{idx, e.what()};
            }
            if (got.to != st.to) {
                if (got.kind == StepKind::call) return RunViolation{idx, "call/entry mismatch"};
                if (got.to.context != st.to.context || got.to.loc != st.to.loc)
                    return RunViolation{idx, "exit/return mismatch"};
                return RunViolation{idx, "frame restore mismatch"};
            }
            cur = st.to;
            continue;
        }
        std::vector<EdgeId> cands;
        if (st.edge) {
            cands.push_back(*st.edge);
        } else {
            for (auto e : m.outgoing(cur.loc)) {
                if (m.edges[e].action == st.action && m.edges[e].dst == st.to.loc) cands.push_back(e);
            }
        }
        if (cands.empty()) return RunViolation{idx, "edge not outgoing from location"};
        std::string first_error;
        bool matched = false;
        for (auto e : cands) {
            try {
                const Step got = step(m, cur, st.delay, e);
                if (got.to == st.to) {
                    matched = true;
                    break;
                }
                if (first_error.empty()) {
                    first_error = got.to.context != st.to.context ? "context mismatch"
                                  : got.to.loc != st.to.loc       ? "location mismatch"
                                                                  : "valuation mismatch";
                }
            } catch (const StepError& ex) {
                if (first_error.empty()) first_error = ex.what();
            }
        }
        if (!matched) return RunViolation{idx, first_error};
        cur = st.to;
    }
    return std::nullopt;
}

std::optional<RunViolation> validate_run_from_init(const Model& m, const Run& run) {
    if (run.init != initial_config(m)) return RunViolation{0, "initial configuration differs from the model's"};
    return validate_run(m, run);
}

bool TimeWindow::contains(const Rational& t) const {
    if (empty || t < lo || (lo_open && t == lo)) return false;
    if (hi && (t > *hi || (hi_open && t == *hi))) return false;
    return true;
}

TimeWindow TimeWindow::intersect(const TimeWindow& o) const {
    if (empty || o.empty) return none();
    TimeWindow w;
    if (lo > o.lo) {
        w.lo = lo;
        w.lo_open = lo_open;
    } else if (o.lo > lo) {
        w.lo = o.lo;
        w.lo_open = o.lo_open;
    } else {
        w.lo = lo;
        w.lo_open = lo_open || o.lo_open;
    }
    if (!hi) {
        w.hi = o.hi;
        w.hi_open = o.hi_open;
    } else if (!o.hi) {
        w.hi = hi;
        w.hi_open = hi_open;
    } else if (*hi < *o.hi) {
        w.hi = hi;
        w.hi_open = hi_open;
    } else if (*o.hi < *hi) {
        w.hi = o.hi;
        w.hi_open = o.hi_open;
    } else {
        w.hi = hi;
        w.hi_open = hi_open || o.hi_open;
    }
    if (w.hi && (*w.hi < w.lo || (*w.hi == w.lo && (w.lo_open || w.hi_open)))) return none();
    return w;
}

std::optional<Rational> TimeWindow::earliest() const {
    if (empty || lo_open) return std::nullopt;
    return lo;
}

std::optional<Rational> TimeWindow::pick() const {
    if (empty) return std::nullopt;
    if (!lo_open) return lo;
    if (hi) return (lo + *hi) / Rational(2);
    return lo + Rational(1);
}

namespace {

TimeWindow atom_window(const Atom& a, const Rational& value, std::int64_t rate) {
    TimeWindow all;  // [0, inf)
    if (rate == 0) return a.holds(value) ? all : TimeWindow::none();
    // value + rate*t rel k  <=>  t rel s
    const Rational s = (Rational(static_cast<long>(a.bound)) - value) / Rational(static_cast<long>(rate));
    TimeWindow w;
    switch (a.rel) {
        case Rel::lt: w.hi = s; w.hi_open = true; break;
        case Rel::le: w.hi = s; break;
        case Rel::eq: w.lo = s; w.hi = s; break;
        case Rel::ge: w.lo = s; break;
        case Rel::gt: w.lo = s; w.lo_open = true; break;
    }
    if (w.lo.sign() < 0) {
        w.lo = Rational(0);
        w.lo_open = false;
    }
    return all.intersect(w);
}

}  // namespace

TimeWindow delay_window(const RectConstraint& c, const Valuation& v, const RateVector& rates) {
    TimeWindow w;
    for (const auto& a : c.atoms) w = w.intersect(atom_window(a, v[a.var], rates[a.var]));
    return w;
}

TimeWindow delay_window_after_reset(const RectConstraint& c, const Valuation& v, const RateVector& rates,
                                    VarSet reset) {
    TimeWindow w;
    for (const auto& a : c.atoms) {
        if (reset.contains(a.var)) {
            if (!a.holds(Rational(0))) return TimeWindow::none();
        } else {
            w = w.intersect(atom_window(a, v[a.var], rates[a.var]));
        }
    }
    return w;
}

TimeWindow edge_window(const Model& m, const Configuration& c, EdgeId e) {
    const Edge& ed = m.edges[e];
    const LocAttr& a = m.attr(c.loc);
    if (!a.inv.holds(c.val)) return TimeWindow::none();
    return delay_window(a.inv, c.val, a.rate)
        .intersect(delay_window(ed.guard, c.val, a.rate))
        .intersect(delay_window_after_reset(m.attr(ed.dst).inv, c.val, a.rate, ed.reset));
}

SimResult simulate_from(const Model& m, Configuration start, const DelayOracle& oracle, std::size_t max_steps,
                        const std::function<bool(const Configuration&)>& target) {
    SimResult r;
    r.run.init = std::move(start);
    for (;;) {
        const Configuration& cur = r.run.last();
        if (target && target(cur)) {
            r.status = SimStatus::target;
            return r;
        }
        if (is_termination(m, cur)) {
            r.status = SimStatus::terminated;
            return r;
        }
        if (r.run.steps.size() >= max_steps) {
            r.status = SimStatus::bound;
            return r;
        }
        if (is_forced(m, cur)) {
            try {
                r.run.steps.push_back(step(m, cur, Rational(0), std::nullopt));
            } catch (const StepError& e) {
                throw SimulationError(std::string("forced step failed: ") + e.what() + " at " + describe(m, cur), cur);
            }
            continue;
        }
        const auto choice = oracle(cur);
        if (!choice) {
            r.status = SimStatus::deadlock;
            return r;
        }
        try {
            r.run.steps.push_back(step(m, cur, choice->delay, choice->edge));
        } catch (const StepError& e) {
            throw SimulationError(std::string("oracle chose an illegal step: ") + e.what() + " at " + describe(m, cur),
                                  cur);
        }
    }
}

SimResult simulate(const Model& m, const DelayOracle& oracle, std::size_t max_steps,
                   const std::function<bool(const Configuration&)>& target) {
    return simulate_from(m, initial_config(m), oracle, max_steps, target);
}

DelayOracle earliest_oracle(const Model& m) {
    return [&m](const Configuration& c) -> std::optional<Choice> {
        std::optional<Choice> best;
        for (auto e : m.outgoing(c.loc)) {
            const auto t = edge_window(m, c, e).pick();
            if (t && (!best || *t < best->delay)) best = Choice{*t, e};
        }
        return best;
    };
}

const char* status_name(SimStatus s) {
    switch (s) {
        case SimStatus::target: return "target";
        case SimStatus::terminated: return "terminated";
        case SimStatus::deadlock: return "deadlock";
        case SimStatus::bound: return "bound";
    }
    return "?";
}

}  // namespace rha
