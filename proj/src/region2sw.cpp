#include "rha/region2sw.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace rha {

namespace {

Interval interval_of(const Rational& v, std::int64_t cmax) {
    const Rational cm(static_cast<long>(cmax));
    if (v > cm) return {IvKind::top, cmax};
    const auto fl = v.floor().get_si();
    if (v.is_integer()) return {IvKind::point, fl};
    return {IvKind::open, fl};
}

Rational pick_in(const Interval& iv, const Rational& frac) {
    switch (iv.kind) {
        case IvKind::point: return Rational(static_cast<long>(iv.c));
        case IvKind::open: return Rational(static_cast<long>(iv.c)) + frac;
        case IvKind::top: return Rational(static_cast<long>(iv.c + 1)) + frac;
    }
    return {};
}

}  // namespace

std::string to_string(const Interval& iv) {
    switch (iv.kind) {
        case IvKind::point: return "[" + std::to_string(iv.c) + "]";
        case IvKind::open: return "(" + std::to_string(iv.c) + "," + std::to_string(iv.c + 1) + ")";
        case IvKind::top: return "(" + std::to_string(iv.c) + ",inf)";
    }
    return "?";
}

std::string to_string(const Region& r) {
    std::string s = "(" + to_string(r.ix) + "," + to_string(r.iy);
    switch (r.order) {
        case FracOrder::none: break;
        case FracOrder::x_lt_y: s += ",xLEy"; break;
        case FracOrder::y_lt_x: s += ",yLEx"; break;
        case FracOrder::equal: s += ",equal"; break;
    }
    return s + ")";
}

std::vector<Region> enumerate_regions(std::int64_t cmax) {
    std::vector<Interval> ivs;
    for (std::int64_t c = 0; c <= cmax; ++c) {
        ivs.push_back({IvKind::point, c});
        if (c < cmax) ivs.push_back({IvKind::open, c});
    }
    ivs.push_back({IvKind::top, cmax});
    std::vector<Region> out;
    for (const auto& ix : ivs) {
        for (const auto& iy : ivs) {
            if (ix.kind == IvKind::open && iy.kind == IvKind::open) {
                for (auto o : {FracOrder::x_lt_y, FracOrder::equal, FracOrder::y_lt_x}) out.push_back({ix, iy, o});
            } else {
                out.push_back({ix, iy, FracOrder::none});
            }
        }
    }
    return out;
}

std::size_t region_count(std::int64_t cmax) {
    const auto n = static_cast<std::size_t>(2 * cmax + 2);
    return n * n + 2 * static_cast<std::size_t>(cmax * cmax);
}

Region region_of(const Valuation& v, std::int64_t cmax) {
    Region r{interval_of(v[0], cmax), interval_of(v[1], cmax), FracOrder::none};
    if (r.ix.kind == IvKind::open && r.iy.kind == IvKind::open) {
        const Rational fx = v[0].frac();
        const Rational fy = v[1].frac();
        r.order = fx < fy ? FracOrder::x_lt_y : (fy < fx ? FracOrder::y_lt_x : FracOrder::equal);
    }
    return r;
}

bool contains(const Region& r, const Valuation& v, std::int64_t cmax) { return region_of(v, cmax) == r; }

Valuation representative(const Region& r, std::int64_t cmax) {
    (void)cmax;
    Rational fx(1, 2);
    Rational fy(1, 2);
    if (r.order == FracOrder::x_lt_y) {
        fx = Rational(1, 3);
        fy = Rational(2, 3);
    } else if (r.order == FracOrder::y_lt_x) {
        fx = Rational(2, 3);
        fy = Rational(1, 3);
    }
    return Valuation({pick_in(r.ix, fx), pick_in(r.iy, fy)});
}

Region closest_successor(const Region& r, Rates2 rates, std::int64_t cmax) {
    const Valuation v = representative(r, cmax);
    const Rational cm(static_cast<long>(cmax));
    std::set<Rational> events;
    for (int i = 0; i < 2; ++i) {
        if (rates[i] == 0 || v[i] > cm) continue;
        for (mpz_class k = v[i].floor() + 1; k <= cmax; ++k) events.insert(Rational(mpq_class(k)) - v[i]);
        if (v[i].is_integer() && v[i] == cm) events.insert(Rational(1, 2));
    }
    // a moving coordinate overtaking the fractional part of a stopped one
    for (int mv = 0; mv < 2; ++mv) {
        const int st = 1 - mv;
        if (rates[mv] == 0 || rates[st] != 0) continue;
        if (interval_of(v[st], cmax).kind != IvKind::open) continue;
        const Rational fs = v[st].frac();
        for (mpz_class k = v[mv].floor(); k < cmax; ++k) {
            const Rational t = Rational(mpq_class(k)) + fs - v[mv];
            if (t.sign() > 0) events.insert(t);
        }
    }
    Rational prev;
    auto probe = [&](const Rational& t) {
        return region_of(evolve_and_reset(v, {rates[0], rates[1]}, t), cmax);
    };
    for (const auto& e : events) {
        const Region mid = probe((prev + e) / Rational(2));
        if (mid != r) return mid;
        const Region at = probe(e);
        if (at != r) return at;
        prev = e;
    }
    const Region after = probe(prev + Rational(1));
    return after;
}

std::vector<Region> successor_chain(const Region& r, Rates2 rates, std::int64_t cmax) {
    std::vector<Region> out;
    Region cur = r;
    for (;;) {
        const Region nxt = closest_successor(cur, rates, cmax);
        if (nxt == cur) return out;
        out.push_back(nxt);
        cur = nxt;
    }
}

bool region_satisfies(const Region& r, const RectConstraint& c, std::int64_t cmax) {
    return c.holds(representative(r, cmax));
}

ResetGuard region_reset_and_guard(const Region& r, VarSet reset, const RectConstraint& guard, std::int64_t cmax) {
    if (guard.max_constant() > cmax) throw std::invalid_argument("guard constant exceeds cmax");
    const Valuation v = representative(r, cmax);
    return {region_of(evolve_and_reset(v, {0, 0}, Rational(0), reset), cmax), guard.holds(v)};
}

CaseTableResult closest_successor_case_table(const Region& r, Rates2 rates, std::int64_t cmax) {
    const std::array<Interval, 2> iv{r.ix, r.iy};
    const bool zx = iv[0].kind == IvKind::point;
    const bool zy = iv[1].kind == IvKind::point;
    const bool both_move = rates[0] == 1 && rates[1] == 1;
    std::array<Interval, 2> out = iv;
    auto to_open = [&](const Interval& i) {
        return i.c < cmax ? Interval{IvKind::open, i.c} : Interval{IvKind::top, cmax};
    };
    auto to_next_point = [&](const Interval& i) {
        return i.kind == IvKind::open ? Interval{IvKind::point, i.c + 1} : i;
    };
    auto finish = [&](FracOrder o, int cs) {
        Region res{out[0], out[1], FracOrder::none};
        if (res.ix.kind == IvKind::open && res.iy.kind == IvKind::open) res.order = o;
        return CaseTableResult{res, cs};
    };
    if (rates[0] == 0 && rates[1] == 0) return {r, 0};

    if ((zx || zy) && both_move) {
        bool x_before = false;
        bool y_before = false;
        for (int i = 0; i < 2; ++i) {
            const bool in_z = iv[i].kind == IvKind::point;
            if (in_z) out[i] = to_open(iv[i]);
        }
        x_before = zx && iv[0].c < cmax && out[1].kind == IvKind::open;
        y_before = zy && iv[1].c < cmax && out[0].kind == IvKind::open;
        const FracOrder o = x_before && y_before ? FracOrder::equal
                            : x_before           ? FracOrder::x_lt_y
                            : y_before           ? FracOrder::y_lt_x
                                                 : FracOrder::none;
        return finish(o, 1);
    }
    if (zx || zy) {
        for (int i = 0; i < 2; ++i) {
            if (rates[i] == 0) continue;
            out[i] = iv[i].kind == IvKind::point ? to_open(iv[i]) : to_next_point(iv[i]);
        }
        FracOrder o = FracOrder::none;
        if (rates[0] == 1 && zx && !zy) o = FracOrder::x_lt_y;
        if (rates[1] == 1 && zy && !zx) o = FracOrder::y_lt_x;
        return finish(o, 2);
    }
    if (both_move) {
        const bool ox = iv[0].kind == IvKind::open;
        const bool oy = iv[1].kind == IvKind::open;
        if (!ox && !oy) return {r, 3};
        bool mx = ox;
        bool my = oy;
        if (ox && oy) {
            mx = r.order != FracOrder::x_lt_y;
            my = r.order != FracOrder::y_lt_x;
        }
        if (mx) out[0] = to_next_point(iv[0]);
        if (my) out[1] = to_next_point(iv[1]);
        return finish(FracOrder::none, 3);
    }
    for (int i = 0; i < 2; ++i) {
        if (rates[i] == 1) out[i] = to_next_point(iv[i]);
    }
    return finish(FracOrder::none, 4);
}

Rates2 rates2(const RateVector& r) { return {r.at(0), r.at(1)}; }

std::vector<RegionMove> region_moves(const Model& m, const Location& loc, const Region& r, std::int64_t cmax) {
    std::vector<RegionMove> out;
    const LocAttr& a = m.attr(loc);
    if (!region_satisfies(r, a.inv, cmax)) return out;
    std::vector<Region> hops{r};
    for (const auto& s : successor_chain(r, rates2(a.rate), cmax)) {
        if (!region_satisfies(s, a.inv, cmax)) break;
        hops.push_back(s);
    }
    for (std::size_t h = 0; h < hops.size(); ++h) {
        for (auto e : m.outgoing(loc)) {
            const Edge& ed = m.edges[e];
            const ResetGuard rg = region_reset_and_guard(hops[h], ed.reset, ed.guard, cmax);
            if (!rg.guard_holds) continue;
            if (!region_satisfies(rg.reset, m.attr(ed.dst).inv, cmax)) continue;
            out.push_back({h, e, rg.reset});
        }
    }
    return out;
}

std::optional<std::size_t> RegionGraph::find(const State& s) const {
    const auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
}

std::vector<bool> RegionGraph::reachable() const {
    std::vector<bool> seen(states.size(), false);
    std::deque<std::size_t> q{init};
    seen[init] = true;
    while (!q.empty()) {
        const auto s = q.front();
        q.pop_front();
        for (const auto& a : arcs[s]) {
            if (!seen[a.dst]) {
                seen[a.dst] = true;
                q.push_back(a.dst);
            }
        }
    }
    return seen;
}

RegionGraph build_region_automaton(const Model& m) {
    if (!m.boxes.empty()) throw std::invalid_argument("model has boxes; use build_region_rsm");
    if (m.nvars() != 2) throw std::invalid_argument("region automaton needs exactly two variables");
    if (!classify(m).stopwatches_only) throw std::invalid_argument("region automaton needs stopwatch rates");
    RegionGraph g;
    g.cmax = m.cmax();
    const auto regions = enumerate_regions(g.cmax);
    for (NodeId n = 0; n < m.nodes.size(); ++n) {
        for (const auto& r : regions) {
            if (region_satisfies(r, m.nodes[n].attr.inv, g.cmax)) g.states.push_back({Location::node(n), r});
        }
    }
    std::sort(g.states.begin(), g.states.end());
    g.arcs.resize(g.states.size());
    for (std::size_t s = 0; s < g.states.size(); ++s) {
        for (const auto& mv : region_moves(m, g.states[s].loc, g.states[s].region, g.cmax)) {
            const auto d = g.find({m.edges[mv.edge].dst, mv.target});
            if (d) g.arcs[s].push_back({*d, mv.hops, mv.edge});
        }
    }
    const auto init = g.find({Location::node(m.init_entry), region_of(m.init_val, g.cmax)});
    if (!init) throw std::invalid_argument("initial valuation violates the entry invariant");
    g.init = *init;
    return g;
}

}  // namespace rha
