#include <doctest.h>

#include <deque>
#include <map>
#include <random>
#include <set>

#include "rha/region2sw.hpp"
#include "support.hpp"

using namespace rha;

namespace {

constexpr long kDen = 60;

Region reg(Interval x, Interval y, FracOrder o = FracOrder::none) { return {x, y, o}; }
Interval pt(std::int64_t c) { return {IvKind::point, c}; }
Interval op(std::int64_t c) { return {IvKind::open, c}; }
Interval top(std::int64_t cmax) { return {IvKind::top, cmax}; }

// Random member of r with all coordinates on the 1/60 grid.
Valuation random_member(const Region& r, std::int64_t cmax, std::mt19937_64& rng) {
    std::uniform_int_distribution<long> f(1, kDen - 1);
    long a = f(rng);
    long b = f(rng);
    while (r.order != FracOrder::none && r.order != FracOrder::equal && a == b) b = f(rng);
    if (r.order == FracOrder::equal) b = a;
    if (r.order == FracOrder::x_lt_y && a > b) std::swap(a, b);
    if (r.order == FracOrder::y_lt_x && a < b) std::swap(a, b);
    auto coord = [&](const Interval& iv, long frac) {
        switch (iv.kind) {
            case IvKind::point: return Rational(static_cast<long>(iv.c));
            case IvKind::open: return Rational(static_cast<long>(iv.c)) + Rational(frac, kDen);
            case IvKind::top: return Rational(static_cast<long>(cmax)) + Rational(frac + kDen, kDen);
        }
        return Rational();
    };
    return Valuation({coord(r.ix, a), coord(r.iy, b)});
}

// Every boundary crossing of a 1/60-grid valuation under 0/1 rates falls on the 1/60 grid, so sampling
// at 1/120 steps sees every region visited, including the instantaneous ones.
std::vector<Region> sampled_chain(const Valuation& v, Rates2 rates, std::int64_t cmax) {
    std::vector<Region> out;
    Region cur = region_of(v, cmax);
    const long steps = (cmax + 3) * 2 * kDen;
    for (long k = 1; k <= steps; ++k) {
        const Region r = region_of(evolve_and_reset(v, {rates[0], rates[1]}, Rational(k, 2 * kDen)), cmax);
        if (r != cur) {
            out.push_back(r);
            cur = r;
        }
    }
    return out;
}

const std::array<Rates2, 4> kRates{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};

}  // namespace

TEST_CASE("region enumeration size and representatives") {
    for (std::int64_t cmax = 0; cmax <= 4; ++cmax) {
        const auto rs = enumerate_regions(cmax);
        CHECK(rs.size() == region_count(cmax));
        CHECK(std::set<Region>(rs.begin(), rs.end()).size() == rs.size());
        for (const auto& r : rs) CHECK(region_of(representative(r, cmax), cmax) == r);
    }
    CHECK(region_count(1) == 18);
    CHECK(region_count(2) == 44);
}

TEST_CASE("regions partition a dense rational grid") {
    for (std::int64_t cmax : {1, 2}) {
        const auto rs = enumerate_regions(cmax);
        for (long i = 0; i <= (cmax + 2) * 12; ++i) {
            for (long j = 0; j <= (cmax + 2) * 12; ++j) {
                const Valuation v({Rational(i, 12), Rational(j, 12)});
                int hits = 0;
                for (const auto& r : rs) hits += contains(r, v, cmax) ? 1 : 0;
                REQUIRE(hits == 1);
            }
        }
    }
}

TEST_CASE("guards are uniform on regions") {
    std::mt19937_64 rng(test::seed_from_env(11));
    for (std::int64_t cmax : {1, 2}) {
        for (const auto& r : enumerate_regions(cmax)) {
            for (VarIndex var = 0; var < 2; ++var) {
                for (Rel rel : {Rel::lt, Rel::le, Rel::eq, Rel::ge, Rel::gt}) {
                    for (std::int64_t k = 0; k <= cmax; ++k) {
                        const RectConstraint g{{{var, rel, k}}};
                        const bool expect = region_satisfies(r, g, cmax);
                        for (int s = 0; s < 6; ++s) CHECK(g.holds(random_member(r, cmax, rng)) == expect);
                    }
                }
            }
        }
    }
}

TEST_CASE("successor chains match sampled exact evolution") {
    std::mt19937_64 rng(test::seed_from_env(5));
    std::size_t checked = 0;
    for (std::int64_t cmax : {1, 2}) {
        for (const auto& r : enumerate_regions(cmax)) {
            for (const auto& rates : kRates) {
                const auto chain = successor_chain(r, rates, cmax);
                CHECK(sampled_chain(representative(r, cmax), rates, cmax) == chain);
                for (int s = 0; s < 5; ++s) {
                    const Valuation v = random_member(r, cmax, rng);
                    REQUIRE(region_of(v, cmax) == r);
                    CHECK(sampled_chain(v, rates, cmax) == chain);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked == 5 * 4 * (18 + 44));
}

TEST_CASE("closest successor examples") {
    CHECK(closest_successor(reg(pt(0), op(0)), {1, 1}, 1) == reg(op(0), op(0), FracOrder::x_lt_y));
    CHECK(closest_successor(reg(op(0), op(0), FracOrder::x_lt_y), {0, 1}, 1) == reg(op(0), pt(1)));
    for (const auto& rates : kRates) CHECK(closest_successor(reg(top(2), top(2)), rates, 2) == reg(top(2), top(2)));

    CHECK(successor_chain(reg(pt(0), pt(0)), {1, 1}, 1) ==
          std::vector<Region>{reg(op(0), op(0), FracOrder::equal), reg(pt(1), pt(1)), reg(top(1), top(1))});
    for (const auto& r : enumerate_regions(2)) CHECK(successor_chain(r, {0, 0}, 2).empty());
}

TEST_CASE("a moving stopwatch passes the fraction of a stopped one") {
    // x moves from 0 while y sits at a fraction: x overtakes y's fraction before reaching 1.
    const auto chain = successor_chain(reg(pt(0), op(0)), {1, 0}, 1);
    CHECK(chain == std::vector<Region>{reg(op(0), op(0), FracOrder::x_lt_y), reg(op(0), op(0), FracOrder::equal),
                                       reg(op(0), op(0), FracOrder::y_lt_x), reg(pt(1), op(0)), reg(top(1), op(0))});
    // Five hops exceed 4^cmax = 4: the hop count is enumerated, never capped.
    CHECK(chain.size() > 4);
}

TEST_CASE("hop cap holds from cmax 2 on") {
    for (std::int64_t cmax : {2, 3}) {
        std::size_t longest = 0;
        for (const auto& r : enumerate_regions(cmax))
            for (const auto& rates : kRates) longest = std::max(longest, successor_chain(r, rates, cmax).size());
        CHECK(longest <= static_cast<std::size_t>(1) << (2 * cmax));
    }
}

TEST_CASE("case table agrees with the geometric successor outside overtaking") {
    std::size_t overtakes = 0;
    for (std::int64_t cmax : {1, 2, 3}) {
        for (const auto& r : enumerate_regions(cmax)) {
            for (const auto& rates : kRates) {
                const Region geo = closest_successor(r, rates, cmax);
                const auto table = closest_successor_case_table(r, rates, cmax);
                // Only a moving open coordinate whose fraction does not lead that of a stopped open
                // coordinate may differ: geometrically the fraction order changes before any integer.
                const bool overtake = r.ix.kind == IvKind::open && r.iy.kind == IvKind::open &&
                                      ((rates == Rates2{1, 0} && r.order != FracOrder::y_lt_x) ||
                                       (rates == Rates2{0, 1} && r.order != FracOrder::x_lt_y));
                if (overtake) {
                    ++overtakes;
                    CHECK(table.case_number == 4);
                    CHECK(geo.ix == r.ix);
                    CHECK(geo.iy == r.iy);
                    CHECK(geo.order != r.order);
                    CHECK(table.region != geo);
                } else {
                    INFO(to_string(r), " rates ", rates[0], rates[1], " case ", table.case_number);
                    CHECK(table.region == geo);
                }
            }
        }
    }
    CHECK(overtakes > 0);
}

TEST_CASE("reset and guard on regions") {
    const auto a = region_reset_and_guard(reg(op(0), op(0), FracOrder::x_lt_y), VarSet::of({0}), {}, 1);
    CHECK(a.reset == reg(pt(0), op(0)));
    CHECK(region_reset_and_guard(reg(pt(1), op(0)), {}, RectConstraint{{{0, Rel::eq, 1}}}, 1).guard_holds);
    CHECK(region_reset_and_guard(reg(op(0), op(0), FracOrder::equal), {},
                                 RectConstraint{{{0, Rel::lt, 1}, {1, Rel::lt, 1}}}, 1)
              .guard_holds);
    CHECK_THROWS_AS(region_reset_and_guard(reg(pt(0), pt(0)), {}, RectConstraint{{{0, Rel::eq, 2}}}, 1),
                    std::invalid_argument);
}

namespace {

Model one_edge_model(RateVector rate) {
    ModelBuilder b("one", {"x", "y"}, ModelKind::stopwatch);
    const auto c = b.component("M");
    const auto s = b.entry(c, "s", rate);
    const auto g = b.node(c, "g");
    b.edge(Location::node(s), Location::node(g), RectConstraint{{b.atom("x", Rel::eq, 1)}});
    b.init(s, Valuation(2));
    return b.build();
}

bool node_reachable(const RegionGraph& g, const Model& m, const std::string& name) {
    const auto seen = g.reachable();
    for (std::size_t i = 0; i < g.states.size(); ++i)
        if (seen[i] && g.states[i].loc == Location::node(*m.node_index(name))) return true;
    return false;
}

// Delays at which a trajectory from v can change region, their midpoints and one point past all of them.
std::vector<Rational> candidate_delays(const Valuation& v, const RateVector& rates, std::int64_t cmax) {
    std::set<Rational> ev{Rational(0)};
    for (int i = 0; i < 2; ++i) {
        if (rates[i] == 0) continue;
        for (long k = 0; k <= cmax + 1; ++k)
            if (Rational(k) > v[i]) ev.insert(Rational(k) - v[i]);
        const int j = 1 - i;
        if (rates[j] != 0) continue;
        for (long k = 0; k <= cmax + 1; ++k) {
            const Rational t = Rational(k) + v[j].frac() - v[i];
            if (t.sign() > 0) ev.insert(t);
        }
    }
    std::vector<Rational> out(ev.begin(), ev.end());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i + 1 < n; ++i) out.push_back((out[i] + out[i + 1]) / Rational(2));
    out.push_back(out[n - 1] + Rational(1));
    return out;
}

// Nodes reachable within `depth` discrete edges by exact search over boundary-driven delays.
std::set<NodeId> concrete_reach(const Model& m, std::size_t depth) {
    const auto cmax = m.cmax();
    std::set<std::pair<NodeId, Valuation>> seen{{m.init_entry, m.init_val}};
    std::vector<std::pair<NodeId, Valuation>> frontier{{m.init_entry, m.init_val}};
    std::set<NodeId> nodes{m.init_entry};
    for (std::size_t d = 0; d < depth && !frontier.empty(); ++d) {
        std::vector<std::pair<NodeId, Valuation>> next;
        for (const auto& [n, v] : frontier) {
            const LocAttr& a = m.nodes[n].attr;
            for (const auto& t : candidate_delays(v, a.rate, cmax)) {
                const Valuation w = evolve_and_reset(v, a.rate, t);
                if (!a.inv.holds(v) || !a.inv.holds(w)) continue;
                for (auto e : m.outgoing(Location::node(n))) {
                    const Edge& ed = m.edges[e];
                    if (!ed.guard.holds(w)) continue;
                    const Valuation u = evolve_and_reset(w, a.rate, Rational(0), ed.reset);
                    if (!m.nodes[ed.dst.id].attr.inv.holds(u)) continue;
                    nodes.insert(ed.dst.id);
                    if (seen.insert({ed.dst.id, u}).second) next.emplace_back(ed.dst.id, u);
                }
            }
        }
        frontier = std::move(next);
    }
    return nodes;
}

std::set<NodeId> region_reach(const Model& m, const RegionGraph& g, std::size_t depth) {
    std::vector<bool> seen(g.states.size(), false);
    std::vector<std::size_t> frontier{g.init};
    seen[g.init] = true;
    std::set<NodeId> nodes{g.states[g.init].loc.id};
    for (std::size_t d = 0; d < depth; ++d) {
        std::vector<std::size_t> next;
        for (auto s : frontier) {
            for (const auto& a : g.arcs[s]) {
                nodes.insert(g.states[a.dst].loc.id);
                if (!seen[a.dst]) {
                    seen[a.dst] = true;
                    next.push_back(a.dst);
                }
            }
        }
        frontier = std::move(next);
    }
    (void)m;
    return nodes;
}

Model random_flat(std::mt19937_64& rng) {
    ModelBuilder b("rnd", {"x", "y"}, ModelKind::stopwatch);
    const auto c = b.component("M");
    std::uniform_int_distribution<int> bit(0, 1);
    std::uniform_int_distribution<int> k(0, 2);
    std::uniform_int_distribution<int> rel(0, 4);
    std::vector<NodeId> ns;
    for (int i = 0; i < 4; ++i) {
        const RateVector r{bit(rng), bit(rng)};
        RectConstraint inv;
        if (i > 0 && k(rng) == 0) inv.atoms.push_back({static_cast<VarIndex>(bit(rng)), Rel::le, 2});
        const std::string name = "n" + std::to_string(i);
        ns.push_back(i == 0 ? b.entry(c, name, r, inv) : b.node(c, name, r, inv));
    }
    std::uniform_int_distribution<int> pick(0, 3);
    for (int e = 0; e < 6; ++e) {
        RectConstraint g;
        for (int a = bit(rng); a >= 0; --a)
            g.atoms.push_back({static_cast<VarIndex>(bit(rng)), static_cast<Rel>(rel(rng)), k(rng)});
        VarSet reset;
        if (bit(rng)) reset.insert(static_cast<VarIndex>(bit(rng)));
        b.edge(Location::node(ns[pick(rng)]), Location::node(ns[pick(rng)]), g, reset);
    }
    b.init(ns[0], Valuation(2));
    return b.build();
}

}  // namespace

TEST_CASE("flat region automaton examples") {
    const Model m1 = one_edge_model({1, 1});
    CHECK(node_reachable(build_region_automaton(m1), m1, "g"));
    const Model m2 = one_edge_model({0, 1});
    CHECK_FALSE(node_reachable(build_region_automaton(m2), m2, "g"));
    CHECK_THROWS_AS(build_region_automaton(test::load_model("db2sw.rha")), std::invalid_argument);
}

TEST_CASE("flat region automaton agrees with concrete search") {
    std::mt19937_64 rng(test::seed_from_env(17));
    int nontrivial = 0;
    for (int i = 0; i < 60; ++i) {
        const Model m = random_flat(rng);
        const auto g = build_region_automaton(m);
        const auto want = concrete_reach(m, 5);
        CHECK(region_reach(m, g, 5) == want);
        if (want.size() > 2) ++nontrivial;
    }
    CHECK(nontrivial > 5);
}

TEST_CASE("region-equal valuations admit the same discrete moves") {
    std::mt19937_64 rng(test::seed_from_env(23));
    int pairs = 0;
    auto moves = [](const Model& m, NodeId n, const Valuation& v) {
        std::set<std::pair<EdgeId, Region>> out;
        const LocAttr& a = m.nodes[n].attr;
        for (const auto& t : candidate_delays(v, a.rate, m.cmax())) {
            const Valuation w = evolve_and_reset(v, a.rate, t);
            if (!a.inv.holds(v) || !a.inv.holds(w)) continue;
            for (auto e : m.outgoing(Location::node(n))) {
                const Edge& ed = m.edges[e];
                if (!ed.guard.holds(w)) continue;
                const Valuation u = evolve_and_reset(w, a.rate, Rational(0), ed.reset);
                if (m.nodes[ed.dst.id].attr.inv.holds(u)) out.insert({e, region_of(u, m.cmax())});
            }
        }
        return out;
    };
    while (pairs < 120) {
        const Model m = random_flat(rng);
        const auto regions = enumerate_regions(m.cmax());
        std::uniform_int_distribution<std::size_t> pr(0, regions.size() - 1);
        std::uniform_int_distribution<NodeId> pn(0, m.nodes.size() - 1);
        for (int i = 0; i < 10; ++i, ++pairs) {
            const Region& r = regions[pr(rng)];
            const NodeId n = pn(rng);
            const auto a = moves(m, n, random_member(r, m.cmax(), rng));
            const auto b = moves(m, n, random_member(r, m.cmax(), rng));
            CHECK(a == b);
            std::set<std::pair<EdgeId, Region>> abstract;
            if (region_satisfies(r, m.nodes[n].attr.inv, m.cmax()))
                for (const auto& mv : region_moves(m, Location::node(n), r, m.cmax())) abstract.insert({mv.edge, mv.target});
            CHECK(abstract == a);
        }
    }
}
