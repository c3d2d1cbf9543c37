#include "rha/gadgets.hpp"

#include <deque>
#include <tuple>
#include <stdexcept>

namespace rha {

std::optional<Encoding> parse_encoding(std::string_view s) {
    if (s == "2sw") return Encoding::sw2;
    if (s == "3sw-gf") return Encoding::sw3_gf;
    if (s == "5clk-tb") return Encoding::clk5_tb;
    if (s == "14sw-tb") return Encoding::sw14_tb;
    return std::nullopt;
}

const char* encoding_name(Encoding e) {
    switch (e) {
        case Encoding::sw2: return "2sw";
        case Encoding::sw3_gf: return "3sw-gf";
        case Encoding::clk5_tb: return "5clk-tb";
        case Encoding::sw14_tb: return "14sw-tb";
    }
    return "?";
}

std::string encoding_invariant(Encoding e) {
    switch (e) {
        case Encoding::sw2: return "one of x,y is 1/(2^c 3^d), the other 0";
        case Encoding::sw3_gf: return "x = 1/(2^c 3^d), y = z = 0";
        case Encoding::clk5_tb: return "z1 = z2 = 1-2^-k, x = 1-2^-(c+k), y = 1-2^-(d+k), b = 0";
        case Encoding::sw14_tb: return "z1..z3 = 1-2^-k, x1..x5 = 1-2^-(c+k), y1..y5 = 1-2^-(d+k), b = 0";
    }
    return "";
}

Rational AffineDelay::eval(const Valuation& v) const {
    Rational r = constant;
    for (const auto& [i, k] : coef) r += k * v[i];
    return r;
}

namespace {

struct Comp {
    CompId id = 0;
    NodeId en = 0;
    std::vector<NodeId> ex;
};

struct NamedGuess {
    std::string node;
    std::string caller;  // empty: any caller
    AffineDelay delay;
};

// ModelBuilder plus name-keyed bookkeeping; ids are only final after build().
class Writer {
public:
    Writer(std::string name, std::vector<std::string> vars, ModelKind kind)
        : b(std::move(name), vars, kind), vars_(std::move(vars)), kind_(kind) {}

    ModelBuilder b;

    [[nodiscard]] RateVector tick(const std::vector<std::string>& names) const {
        if (kind_ == ModelKind::clock) return {};
        RateVector r(vars_.size(), 0);
        for (const auto& n : names) r[b.var(n)] = 1;
        return r;
    }
    [[nodiscard]] Atom at(const std::string& v, Rel rel, std::int64_t k) const { return b.atom(v, rel, k); }
    [[nodiscard]] VarSet set(const std::vector<std::string>& names) const {
        VarSet s;
        for (const auto& n : names) s.insert(b.var(n));
        return s;
    }
    [[nodiscard]] VarSet all() const { return VarSet::all(vars_.size()); }
    [[nodiscard]] VarSet all_but(const std::vector<std::string>& names) const {
        VarSet s;
        const VarSet drop = set(names);
        for (VarIndex i = 0; i < vars_.size(); ++i)
            if (!drop.contains(i)) s.insert(i);
        return s;
    }
    [[nodiscard]] AffineDelay affine(Rational c, std::vector<std::pair<std::string, Rational>> coef) const {
        AffineDelay d{std::move(c), {}};
        for (auto& [v, k] : coef) d.coef.emplace_back(b.var(v), std::move(k));
        return d;
    }

    const Comp* find(const std::string& name) const {
        const auto it = comps_.find(name);
        return it == comps_.end() ? nullptr : &it->second;
    }
    // Registers the component before its body so bodies may call it recursively.
    Comp& open(const std::string& name, const std::string& entry, const std::vector<std::string>& exits,
               RateVector entry_rate = {}, RectConstraint entry_inv = {}, const RectConstraint& exit_inv = {}) {
        Comp c;
        c.id = b.component(name);
        c.en = b.entry(c.id, entry, std::move(entry_rate), std::move(entry_inv));
        for (const auto& x : exits) c.ex.push_back(b.exit(c.id, x, {}, exit_inv));
        return comps_.emplace(name, std::move(c)).first->second;
    }
    BoxId box(const Comp& owner, const std::string& name, const Comp& callee, VarSet by_value) {
        const BoxId id = b.box(owner.id, name, callee.id, by_value);
        if (port_inv_) {
            b.port(Location::call(id, callee.en), port_rate_, *port_inv_);
            for (auto x : callee.ex) b.port(Location::ret(id, x), port_rate_, *port_inv_);
        }
        return id;
    }
    static Location call(BoxId bx, const Comp& callee) { return Location::call(bx, callee.en); }
    static Location ret(BoxId bx, const Comp& callee, std::size_t i = 0) { return Location::ret(bx, callee.ex.at(i)); }

    void guess(std::string node, std::string caller, AffineDelay d) {
        guesses_.push_back({std::move(node), std::move(caller), std::move(d)});
    }
    void point(std::string node, std::size_t instr) { points_.emplace_back(std::move(node), instr); }
    // Ports of the time-bounded encodings hold b at zero; every box owner there has b = 0.
    void hold_b(RateVector port_rate, RectConstraint inv) {
        port_rate_ = std::move(port_rate);
        port_inv_ = std::move(inv);
    }

    GadgetBundle finish(Encoding enc, const CounterMachine& cm, const std::string& halt) {
        GadgetBundle g;
        g.model = b.build();
        g.enc = enc;
        g.cm = cm;
        auto node = [&](const std::string& n) {
            const auto id = g.model.node_index(n);
            if (!id) throw std::logic_error("gadget node '" + n + "' missing");
            return *id;
        };
        for (auto& ng : guesses_) {
            GuessKey k{node(ng.node), std::nullopt};
            if (!ng.caller.empty()) {
                const auto bx = g.model.box_index(ng.caller);
                if (!bx) throw std::logic_error("gadget box '" + ng.caller + "' missing");
                k.caller = *bx;
            }
            g.guesses.emplace(k, std::move(ng.delay));
        }
        for (const auto& [n, i] : points_) g.points.emplace(node(n), i);
        g.halt = node(halt);
        return g;
    }

private:
    std::vector<std::string> vars_;
    ModelKind kind_;
    std::map<std::string, Comp> comps_;
    std::vector<NamedGuess> guesses_;
    std::vector<std::pair<std::string, std::size_t>> points_;
    RateVector port_rate_;
    std::optional<RectConstraint> port_inv_;
};

RectConstraint when(std::vector<Atom> atoms) { return RectConstraint{std::move(atoms)}; }

std::string idx(std::size_t i) { return std::to_string(i); }

Valuation init_with(std::size_t nvars, std::optional<VarIndex> one) {
    Valuation v(nvars);
    if (one) v[*one] = Rational(1);
    return v;
}

// ---- two stopwatches -------------------------------------------------------------
// The value lives in u; phase X has u = x. Multiplying or dividing moves it to w.

struct Phase {
    char tag;
    std::string u;
    std::string w;
    [[nodiscard]] Phase flip() const { return tag == 'X' ? Phase{'Y', "y", "x"} : Phase{'X', "x", "y"}; }
};

class Sw2 {
public:
    explicit Sw2(Writer& w) : w_(w) {}

    // w' = k * u, u unchanged; en ticks w, the guess fixes the delay.
    const Comp& cmul(std::int64_t k, const Phase& p) { return chain("CMul" + idx(k) + p.tag, k, m1(p), p.u, p.w); }
    // u' = k with M2 waiting for w = 1; the guess fixes w = u / k.
    const Comp& cdiv(std::int64_t k, const Phase& p) { return chain("CDiv" + idx(k) + p.tag, k, m2(p), p.w, p.u); }

    // (u, 0) -> (0, k*u), by reference.
    const Comp& mul(std::int64_t k, const Phase& p) {
        const std::string name = "Mul" + idx(k) + p.tag;
        if (const Comp* c = w_.find(name)) return *c;
        const Comp& inner = cmul(k, p);
        Comp& c = w_.open(name, name + "_en", {name + "_ex"}, w_.tick({p.w}));
        const BoxId bx = w_.box(c, name + "_B", inner, w_.all());
        w_.b.edge(Location::node(c.en), Writer::call(bx, inner), when({w_.at(p.w, Rel::gt, 0)}));
        w_.b.edge(Writer::ret(bx, inner), Location::node(c.ex[0]), {}, w_.set({p.u}));
        w_.guess(name + "_en", "", w_.affine(Rational(0), {{p.u, Rational(k)}}));
        return c;
    }

    // Exits yes iff the value in u is a power of k. Multiplies back and forth between u and w.
    const Comp& po(std::int64_t k, const Phase& p) {
        const std::string name = "Po" + idx(k) + p.tag;
        if (const Comp* c = w_.find(name)) return *c;
        const Phase q = p.flip();
        const Comp& a = mul(k, p);
        const Comp& b = mul(k, q);
        Comp& c = w_.open(name, name + "_en", {name + "_yes", name + "_no"});
        const BoxId ba = w_.box(c, name + "_A", a, VarSet{});
        const BoxId bb = w_.box(c, name + "_B", b, VarSet{});
        w_.b.edge(Location::node(c.en), Writer::call(ba, a), when({w_.at(p.w, Rel::eq, 0)}));
        // After A the value is in p.w; after B it is back in p.u.
        for (auto [from, callee, v, next_box, next] : {std::tuple{ba, &a, p.w, bb, &b}, std::tuple{bb, &b, p.u, ba, &a}}) {
            const Location r = Writer::ret(from, *callee);
            w_.b.edge(r, Location::node(c.ex[0]), when({w_.at(v, Rel::eq, k)}), {}, "yes");
            w_.b.edge(r, Location::node(c.ex[1]), when({w_.at(v, Rel::gt, 1), w_.at(v, Rel::lt, k)}), {}, "no");
            w_.b.edge(r, Writer::call(next_box, *next), when({w_.at(v, Rel::le, 1)}));
        }
        return c;
    }

private:
    const Comp& m1(const Phase& p) { return wait_one("M1" + std::string(1, p.tag), p.u); }
    const Comp& m2(const Phase& p) { return wait_one("M2" + std::string(1, p.tag), p.w); }

    // Both stopwatches tick until v = 1.
    const Comp& wait_one(const std::string& name, const std::string& v) {
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_en", {name + "_ex"}, w_.tick({"x", "y"}));
        w_.b.edge(Location::node(c.en), Location::node(c.ex[0]), when({w_.at(v, Rel::eq, 1)}));
        return c;
    }

    // k calls to `unit` restoring `kept`, then `acc` must equal k.
    const Comp& chain(const std::string& name, std::int64_t k, const Comp& unit, const std::string& kept,
                      const std::string& acc) {
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_en", {name + "_ex"});
        Location prev = Location::node(c.en);
        for (std::int64_t j = 1; j <= k; ++j) {
            const BoxId bx = w_.box(c, name + "_B" + idx(j), unit, w_.set({kept}));
            w_.b.edge(prev, Writer::call(bx, unit));
            prev = Writer::ret(bx, unit);
        }
        w_.b.edge(prev, Location::node(c.ex[0]), when({w_.at(acc, Rel::eq, k)}));
        return c;
    }

    Writer& w_;
};

GadgetBundle compile_sw2(const CounterMachine& cm) {
    Writer w("cm_2sw", {"x", "y"}, ModelKind::stopwatch);
    Sw2 g(w);
    const Comp& main = w.open("H", "start", {"Halt"});
    const std::size_t halt = cm.halt_index();
    auto lname = [&](std::size_t i, const Phase& p) { return i == halt ? std::string("Halt") : "I" + idx(i) + p.tag; };

    // Only reachable (instruction, phase) pairs get a node.
    std::map<std::pair<std::size_t, char>, NodeId> nodes;
    std::deque<std::pair<std::size_t, Phase>> todo;
    auto lnode = [&](std::size_t i, const Phase& p) -> NodeId {
        if (i == halt) return main.ex[0];
        const auto key = std::pair{i, p.tag};
        if (auto it = nodes.find(key); it != nodes.end()) return it->second;
        const bool counts = cm.prog[i].op != CmOp::ifz;
        const NodeId n = w.b.node(main.id, lname(i, p), w.tick(counts ? std::vector<std::string>{p.w} : std::vector<std::string>{}));
        nodes.emplace(key, n);
        todo.emplace_back(i, p);
        w.point(lname(i, p), i);
        return n;
    };
    const Phase x{'X', "x", "y"};
    w.b.edge(Location::node(main.en), Location::node(lnode(0, x)));
    while (!todo.empty()) {
        const auto [i, p] = todo.front();
        todo.pop_front();
        const CmInstr& in = cm.prog[i];
        const NodeId l = nodes.at({i, p.tag});
        const std::string name = lname(i, p);
        if (in.op == CmOp::ifz) {
            const Comp& z = g.po(in.ctr == Counter::c ? 3 : 2, p);
            const BoxId bx = w.box(main, name + "_Z", z, w.all());
            w.b.edge(Location::node(l), Writer::call(bx, z), when({w.at(p.w, Rel::eq, 0)}));
            w.b.edge(Writer::ret(bx, z, 0), Location::node(lnode(in.target, p)), {}, {}, "zero");
            w.b.edge(Writer::ret(bx, z, 1), Location::node(lnode(in.alt, p)), {}, {}, "nonzero");
            continue;
        }
        // inc c halves, dec c doubles, inc d divides by 3, dec d triples.
        const std::int64_t k = in.ctr == Counter::c ? 2 : 3;
        const bool divide = in.op == CmOp::inc;
        const Comp& inner = divide ? g.cdiv(k, p) : g.cmul(k, p);
        const BoxId bx = w.box(main, name + "_B", inner, w.all());
        w.b.edge(Location::node(l), Writer::call(bx, inner), when({w.at(p.w, Rel::gt, 0)}));
        w.b.edge(Writer::ret(bx, inner), Location::node(lnode(in.target, p.flip())), {}, w.set({p.u}),
                 std::string(in.op == CmOp::inc ? "inc_" : "dec_") + counter_name(in.ctr));
        const Rational coef = divide ? Rational(1) / Rational(k) : Rational(k);
        w.guess(name, "", w.affine(Rational(0), {{p.u, coef}}));
    }
    w.point("Halt", halt);
    w.b.init(main.en, init_with(2, w.b.var("x")));
    return w.finish(Encoding::sw2, cm, "Halt");
}

// ---- three stopwatches, glitch-free --------------------------------------------
// Main nodes hold (v, 0, 0). The top part moves 1-v into y, then the guess puts k*v or v/k in x.

class Sw3 {
public:
    explicit Sw3(Writer& w) : w_(w) {}

    // Entered with (k*v, 1-v, 0); returns iff x reaches k after k rounds.
    const Comp& cmul(std::int64_t k) { return rounds("CMul" + idx(k), k, {"y", "z"}, "y", "x"); }
    // Entered with (v/k, 1-v, 0); returns iff y reaches 1 after k rounds.
    const Comp& cdiv(std::int64_t k) { return rounds("CDiv" + idx(k), k, {"x", "z"}, "x", "y"); }

    // Exits yes iff x is a power of k; recursive, everything by value.
    const Comp& po(std::int64_t k) {
        const std::string name = "Po" + idx(k);
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_en", {name + "_yes", name + "_no"}, w_.tick({"x", "y"}));
        const Comp& inner = cmul(k);
        const NodeId l = w_.b.node(c.id, name + "_l", w_.tick({"x"}));
        const NodeId chk = w_.b.node(c.id, name + "_chk", w_.tick({}));
        const BoxId ba = w_.box(c, name + "_A", inner, w_.all());
        const BoxId br = w_.box(c, name + "_R", c, w_.all());
        w_.b.edge(Location::node(c.en), Location::node(l), when({w_.at("x", Rel::eq, 1)}), w_.set({"x"}));
        w_.b.edge(Location::node(l), Writer::call(ba, inner), when({w_.at("x", Rel::gt, 0)}));
        w_.b.edge(Writer::ret(ba, inner), Location::node(chk), {}, w_.set({"y"}));
        w_.b.edge(Location::node(chk), Location::node(c.ex[0]), when({w_.at("x", Rel::eq, k)}), {}, "yes");
        w_.b.edge(Location::node(chk), Location::node(c.ex[1]), when({w_.at("x", Rel::gt, 1), w_.at("x", Rel::lt, k)}), {},
                  "no");
        w_.b.edge(Location::node(chk), Writer::call(br, c), when({w_.at("x", Rel::le, 1)}));
        w_.b.edge(Writer::ret(br, c, 0), Location::node(c.ex[0]), {}, {}, "yes");
        w_.b.edge(Writer::ret(br, c, 1), Location::node(c.ex[1]), {}, {}, "no");
        w_.guess(name + "_l", "", w_.affine(Rational(k), {{"y", Rational(-k)}}));
        return c;
    }

private:
    // Round j: A_j ticks `first` until `reset_first` = 1, then B_j ticks all until z = 1.
    const Comp& rounds(const std::string& name, std::int64_t k, const std::vector<std::string>& first,
                       const std::string& reset_first, const std::string& goal) {
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_A1", {name + "_ex"}, w_.tick(first));
        NodeId a = c.en;
        for (std::int64_t j = 1; j <= k; ++j) {
            const NodeId bn = w_.b.node(c.id, name + "_B" + idx(j), w_.tick({"x", "y", "z"}));
            w_.b.edge(Location::node(a), Location::node(bn), when({w_.at(reset_first, Rel::eq, 1)}),
                      w_.set({reset_first}));
            if (j == k) {
                w_.b.edge(Location::node(bn), Location::node(c.ex[0]),
                          when({w_.at("z", Rel::eq, 1), w_.at(goal, Rel::eq, goal == "x" ? k : 1)}), w_.set({"z"}));
            } else {
                a = w_.b.node(c.id, name + "_A" + idx(j + 1), w_.tick(first));
                w_.b.edge(Location::node(bn), Location::node(a), when({w_.at("z", Rel::eq, 1)}), w_.set({"z"}));
            }
        }
        return c;
    }

    Writer& w_;
};

GadgetBundle compile_sw3(const CounterMachine& cm) {
    Writer w("cm_3sw", {"x", "y", "z"}, ModelKind::stopwatch);
    Sw3 g(w);
    const Comp& main = w.open("H", "start", {"Halt"});
    const std::size_t halt = cm.halt_index();
    std::vector<NodeId> l(cm.prog.size());
    for (std::size_t i = 0; i < cm.prog.size(); ++i) {
        if (i == halt) {
            l[i] = main.ex[0];
            w.point("Halt", i);
            continue;
        }
        const bool counts = cm.prog[i].op != CmOp::ifz;
        l[i] = w.b.node(main.id, "I" + idx(i), w.tick(counts ? std::vector<std::string>{"x", "y"} : std::vector<std::string>{}));
        w.point("I" + idx(i), i);
    }
    w.b.edge(Location::node(main.en), Location::node(l[0]));
    for (std::size_t i = 0; i < halt; ++i) {
        const CmInstr& in = cm.prog[i];
        const std::string name = "I" + idx(i);
        if (in.op == CmOp::ifz) {
            const Comp& z = g.po(in.ctr == Counter::c ? 3 : 2);
            const BoxId bx = w.box(main, name + "_Z", z, w.all());
            w.b.edge(Location::node(l[i]), Writer::call(bx, z), when({w.at("y", Rel::eq, 0)}));
            w.b.edge(Writer::ret(bx, z, 0), Location::node(l[in.target]), {}, {}, "zero");
            w.b.edge(Writer::ret(bx, z, 1), Location::node(l[in.alt]), {}, {}, "nonzero");
            continue;
        }
        const std::int64_t k = in.ctr == Counter::c ? 2 : 3;
        const bool divide = in.op == CmOp::inc;
        const Comp& inner = divide ? g.cdiv(k) : g.cmul(k);
        const NodeId m = w.b.node(main.id, name + "_m", w.tick({"x"}));
        const BoxId bx = w.box(main, name + "_B", inner, w.all());
        w.b.edge(Location::node(l[i]), Location::node(m), when({w.at("x", Rel::eq, 1)}), w.set({"x"}));
        w.b.edge(Location::node(m), Writer::call(bx, inner), when({w.at("x", Rel::gt, 0)}));
        w.b.edge(Writer::ret(bx, inner), Location::node(l[in.target]), {}, w.set({"y"}),
                 std::string(in.op == CmOp::inc ? "inc_" : "dec_") + counter_name(in.ctr));
        // y = 1 - v at m.
        const Rational s = divide ? Rational(1) / Rational(k) : Rational(k);
        w.guess(name + "_m", "", w.affine(s, {{"y", -s}}));
    }
    w.b.init(main.en, init_with(3, w.b.var("x")));
    return w.finish(Encoding::sw3_gf, cm, "Halt");
}

// ---- five clocks, time-bounded ---------------------------------------------------
// beta = 2^-k, beta_c = 2^-(c+k). Up_n^a maps a = 1-beta_a to 1-beta_a/n, Up^Z maps z1 = z2 = 1-beta to 1-beta/2.

class Clk5 {
public:
    explicit Clk5(Writer& w) : w_(w) {}

    const Comp& delay() {
        if (const Comp* c = w_.find("D")) return *c;
        Comp& c = w_.open("D", "D_en", {"D_ex"});
        w_.b.edge(Location::node(c.en), Location::node(c.ex[0]));
        return c;
    }

    // Waits for a = 1; the caller passes only z2 by reference.
    const Comp& m(const std::string& a) {
        const std::string name = "M_" + a;
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_en", {name + "_ex"});
        w_.b.edge(Location::node(c.en), Location::node(c.ex[0]), when({w_.at(a, Rel::eq, 1)}));
        return c;
    }

    // Returns iff a = z2 on entry.
    const Comp& ceq(const std::string& a) {
        const std::string name = "Ceq_" + a;
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_en", {name + "_ex"});
        w_.b.edge(Location::node(c.en), Location::node(c.ex[0]), when({w_.at(a, Rel::eq, 1), w_.at("z2", Rel::eq, 1)}));
        return c;
    }

    // n waits for a = 1, each adding to z2; returns iff z2 reaches exactly 1.
    const Comp& chk(const std::string& a, std::int64_t n) {
        const std::string name = "Chk_" + a + "_" + idx(static_cast<std::size_t>(n));
        if (const Comp* c = w_.find(name)) return *c;
        const Comp& unit = m(a);
        Comp& c = w_.open(name, name + "_en", {name + "_ex"}, {}, b0(), b0());
        Location prev = Location::node(c.en);
        for (std::int64_t j = 1; j <= n; ++j) {
            const BoxId bx = w_.box(c, name + "_F" + idx(static_cast<std::size_t>(j)), unit, w_.all_but({"z2"}));
            w_.b.edge(prev, Writer::call(bx, unit));
            prev = Writer::ret(bx, unit);
        }
        w_.b.edge(prev, Location::node(c.ex[0]), when({w_.at("z2", Rel::eq, 1)}));
        return c;
    }

    const Comp& up(const std::string& a, std::int64_t n) {
        const std::string name = "Up_" + a + "_" + idx(static_cast<std::size_t>(n));
        if (const Comp* c = w_.find(name)) return *c;
        const Comp& d = delay();
        const Comp& eq = ceq(a);
        const Comp& ck = chk(a, n);
        Comp& c = w_.open(name, name + "_en", {name + "_ex"}, {}, b0(), b0());
        const BoxId f4 = w_.box(c, name + "_F4", d, w_.all_but({"z2"}));
        const BoxId f5 = w_.box(c, name + "_F5", eq, w_.all());
        const BoxId f6 = w_.box(c, name + "_F6", d, w_.all_but({a}));
        const BoxId f7 = w_.box(c, name + "_F7", ck, w_.all());
        w_.b.edge(Location::node(c.en), Writer::call(f4, d));
        w_.b.edge(Writer::ret(f4, d), Writer::call(f5, eq));
        w_.b.edge(Writer::ret(f5, eq), Writer::call(f6, d));
        w_.b.edge(Writer::ret(f6, d), Writer::call(f7, ck));
        w_.b.edge(Writer::ret(f7, ck), Location::node(c.ex[0]));
        const Rational frac = Rational(n - 1) / Rational(n);
        w_.guess("D_en", name + "_F4", w_.affine(Rational(0), {{a, Rational(1)}, {"z2", Rational(-1)}}));
        w_.guess("D_en", name + "_F6", w_.affine(frac, {{a, -frac}}));
        return c;
    }

    const Comp& up_z() {
        if (const Comp* c = w_.find("UpZ")) return *c;
        const Comp& d = delay();
        const Comp& ck = chk("z1", 2);
        const Comp& eq = ceq("z1");
        Comp& c = w_.open("UpZ", "UpZ_en", {"UpZ_ex"}, {}, b0(), b0());
        const BoxId f10 = w_.box(c, "UpZ_F10", d, w_.all_but({"z1"}));
        const BoxId f11 = w_.box(c, "UpZ_F11", ck, w_.all());
        const BoxId f12 = w_.box(c, "UpZ_F12", d, w_.all_but({"z2"}));
        const BoxId f13 = w_.box(c, "UpZ_F13", eq, w_.all());
        w_.b.edge(Location::node(c.en), Writer::call(f10, d));
        w_.b.edge(Writer::ret(f10, d), Writer::call(f11, ck));
        w_.b.edge(Writer::ret(f11, ck), Writer::call(f12, d));
        w_.b.edge(Writer::ret(f12, d), Writer::call(f13, eq));
        w_.b.edge(Writer::ret(f13, eq), Location::node(c.ex[0]));
        w_.guess("D_en", "UpZ_F10", w_.affine(Rational(1, 2), {{"z1", Rational(-1, 2)}}));
        w_.guess("D_en", "UpZ_F12", w_.affine(Rational(0), {{"z1", Rational(1)}, {"z2", Rational(-1)}}));
        return c;
    }

    // yes iff a = z1.
    const Comp& zc(const std::string& a) {
        const std::string name = "ZC_" + a;
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_en", {name + "_yes", name + "_no"});
        const auto z1 = w_.at("z1", Rel::eq, 1);
        w_.b.edge(Location::node(c.en), Location::node(c.ex[0]), when({z1, w_.at(a, Rel::eq, 1)}), {}, "yes");
        w_.b.edge(Location::node(c.en), Location::node(c.ex[1]), when({z1, w_.at(a, Rel::lt, 1)}), {}, "no");
        w_.b.edge(Location::node(c.en), Location::node(c.ex[1]), when({z1, w_.at(a, Rel::gt, 1)}), {}, "no");
        return c;
    }

    [[nodiscard]] RectConstraint b0() const { return when({w_.at("b", Rel::eq, 0)}); }

private:
    Writer& w_;
};

// Counter variable names per encoding: c lives in `cx`, d in `dy`.
struct UpStep {
    bool z = false;
    bool on_c = false;
    std::int64_t n = 2;
};

std::vector<UpStep> up_sequence(const CmInstr& in, bool z_first) {
    const bool c = in.ctr == Counter::c;
    std::vector<UpStep> seq;
    switch (in.op) {
        case CmOp::inc: seq = {{false, !c, 2}, {false, c, 4}}; break;
        case CmOp::dec: seq = {{false, !c, 2}}; break;
        case CmOp::ifz: seq = {{false, false, 2}, {false, true, 2}}; break;
        case CmOp::halt: return {};
    }
    const UpStep zs{true, false, 2};
    if (z_first) seq.insert(seq.begin(), zs);
    else seq.push_back(zs);
    return seq;
}

GadgetBundle compile_clk5(const CounterMachine& cm) {
    Writer w("cm_5clk", {"x", "y", "z1", "z2", "b"}, ModelKind::clock);
    Clk5 g(w);
    w.hold_b({}, g.b0());
    const Comp& main = w.open("H", "start", {"Halt"}, {}, g.b0(), g.b0());
    const std::size_t halt = cm.halt_index();
    std::vector<NodeId> l(cm.prog.size());
    for (std::size_t i = 0; i < cm.prog.size(); ++i) {
        if (i == halt) {
            l[i] = main.ex[0];
            w.point("Halt", i);
            continue;
        }
        l[i] = w.b.node(main.id, "I" + idx(i), {}, g.b0());
        w.point("I" + idx(i), i);
    }
    w.b.edge(Location::node(main.en), Location::node(l[0]));
    for (std::size_t i = 0; i < halt; ++i) {
        const CmInstr& in = cm.prog[i];
        const std::string name = "I" + idx(i);
        Location prev = Location::node(l[i]);
        std::size_t j = 0;
        for (const UpStep& s : up_sequence(in, false)) {
            const std::string a = s.on_c ? "x" : "y";
            const Comp& u = s.z ? g.up_z() : g.up(a, s.n);
            const VarSet by_value = s.z ? w.all_but({"z1", "z2"}) : w.all_but({a});
            const BoxId bx = w.box(main, name + "_F" + idx(++j), u, by_value);
            w.b.edge(prev, Writer::call(bx, u));
            prev = Writer::ret(bx, u);
        }
        if (in.op == CmOp::ifz) {
            const Comp& z = g.zc(in.ctr == Counter::c ? "x" : "y");
            const BoxId bx = w.box(main, name + "_ZC", z, w.all());
            w.b.edge(prev, Writer::call(bx, z));
            w.b.edge(Writer::ret(bx, z, 0), Location::node(l[in.target]), {}, {}, "zero");
            w.b.edge(Writer::ret(bx, z, 1), Location::node(l[in.alt]), {}, {}, "nonzero");
        } else {
            w.b.edge(prev, Location::node(l[in.target]), {}, {},
                     std::string(in.op == CmOp::inc ? "inc_" : "dec_") + counter_name(in.ctr));
        }
    }
    w.b.init(main.en, init_with(5, std::nullopt));
    return w.finish(Encoding::clk5_tb, cm, "Halt");
}

// ---- fourteen stopwatches, time-bounded, glitch-free -----------------------------
// Groups X = x1..x5, Y = y1..y5, Z = z1..z3; a group holds 1-beta_A in every member.

struct Group {
    char tag;
    std::vector<std::string> v;  // v[0] = a1, v[1] = a2
    [[nodiscard]] std::vector<std::string> members(std::initializer_list<std::size_t> ids) const {
        std::vector<std::string> out;
        for (auto i : ids) out.push_back(v.at(i - 1));
        return out;
    }
};

Group group(char tag, std::size_t n) {
    Group g{tag, {}};
    const std::string base(1, static_cast<char>(tag - 'A' + 'a'));
    for (std::size_t i = 1; i <= n; ++i) g.v.push_back(base + idx(i));
    return g;
}

class Sw14 {
public:
    explicit Sw14(Writer& w) : w_(w) {}

    // h_i ticks a2 and a_i; returns iff every checked a_i and a2 reach 1 together.
    const Comp& chk(const Group& g, std::int64_t n) {
        const std::string name = std::string("Chk_") + g.tag + "_" + idx(static_cast<std::size_t>(n));
        if (const Comp* c = w_.find(name)) return *c;
        const std::vector<std::size_t> ids = checked(g, n);
        Comp& c = w_.open(name, name + "_en", {name + "_ex"}, w_.tick({"b"}), b0(), b0());
        Location prev = Location::node(c.en);
        RectConstraint prev_guard;
        std::vector<Atom> final_guard{w_.at(g.v[1], Rel::eq, 1)};
        for (auto i : ids) {
            const std::string ai = g.v[i - 1];
            const std::string hn = name + "_h" + idx(i);
            const NodeId h = w_.b.node(c.id, hn, w_.tick({g.v[1], ai}));
            w_.b.edge(prev, Location::node(h), prev_guard);
            prev = Location::node(h);
            prev_guard = when({w_.at(ai, Rel::eq, 1)});
            final_guard.push_back(w_.at(ai, Rel::eq, 1));
            w_.guess(hn, "", w_.affine(Rational(1), {{ai, Rational(-1)}}));
        }
        w_.b.edge(prev, Location::node(c.ex[0]), when(final_guard));
        return c;
    }

    // Returns iff a1 = a2 on entry.
    const Comp& ceq(const Group& g) {
        const std::string name = std::string("Ceq_") + g.tag;
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_en", {name + "_ex"}, w_.tick({g.v[0], g.v[1]}));
        w_.b.edge(Location::node(c.en), Location::node(c.ex[0]),
                  when({w_.at(g.v[0], Rel::eq, 1), w_.at(g.v[1], Rel::eq, 1)}));
        return c;
    }

    // yes iff a1 = z1.
    const Comp& zc(const Group& g) {
        const std::string name = std::string("ZC_") + g.tag;
        if (const Comp* c = w_.find(name)) return *c;
        Comp& c = w_.open(name, name + "_en", {name + "_yes", name + "_no"}, w_.tick({"z1", g.v[0]}));
        const auto z1 = w_.at("z1", Rel::eq, 1);
        const std::string& a = g.v[0];
        w_.b.edge(Location::node(c.en), Location::node(c.ex[0]), when({z1, w_.at(a, Rel::eq, 1)}), {}, "yes");
        w_.b.edge(Location::node(c.en), Location::node(c.ex[1]), when({z1, w_.at(a, Rel::lt, 1)}), {}, "no");
        w_.b.edge(Location::node(c.en), Location::node(c.ex[1]), when({z1, w_.at(a, Rel::gt, 1)}), {}, "no");
        return c;
    }

    // Up_n^A inlined into `owner` from `from`; returns its exit node (inv b = 0).
    NodeId up(const Comp& owner, const std::string& prefix, Location from, const Group& g, std::int64_t n) {
        const std::string name = prefix + "_Up" + std::string(1, g.tag) + idx(static_cast<std::size_t>(n));
        const Comp& ck = chk(g, n);
        const Comp& eq = ceq(g);
        std::vector<std::string> not_a2;
        for (std::size_t i = 0; i < g.v.size(); ++i)
            if (i != 1) not_a2.push_back(g.v[i]);
        const NodeId m1 = w_.b.node(owner.id, name + "_m1", w_.tick(not_a2));
        const NodeId m2 = w_.b.node(owner.id, name + "_m2", w_.tick({g.v[1]}));
        const NodeId ex = w_.b.node(owner.id, name + "_ex", w_.tick({"b"}), b0());
        const BoxId f5 = w_.box(owner, name + "_F5", ck, w_.all());
        const BoxId f7 = w_.box(owner, name + "_F7", eq, w_.all());
        w_.b.edge(from, Location::node(m1));
        w_.b.edge(Location::node(m1), Writer::call(f5, ck));
        w_.b.edge(Writer::ret(f5, ck), Location::node(m2));
        w_.b.edge(Location::node(m2), Writer::call(f7, eq));
        w_.b.edge(Writer::ret(f7, eq), Location::node(ex));
        const Rational frac = Rational(n - 1) / Rational(n);
        w_.guess(name + "_m1", "", w_.affine(frac, {{g.v[0], -frac}}));
        w_.guess(name + "_m2", "", w_.affine(frac, {{g.v[1], -frac}}));
        return ex;
    }

    [[nodiscard]] RectConstraint b0() const { return when({w_.at("b", Rel::eq, 0)}); }

private:
    static std::vector<std::size_t> checked(const Group& g, std::int64_t n) {
        if (g.v.size() == 3 || n == 2) return {1, 3};
        return {1, 3, 4, 5};
    }

    Writer& w_;
};

GadgetBundle compile_sw14(const CounterMachine& cm) {
    const Group gx = group('X', 5);
    const Group gy = group('Y', 5);
    const Group gz = group('Z', 3);
    std::vector<std::string> vars;
    for (const Group* g : {&gx, &gy, &gz}) vars.insert(vars.end(), g->v.begin(), g->v.end());
    vars.emplace_back("b");
    Writer w("cm_14sw", vars, ModelKind::stopwatch);
    Sw14 g(w);
    w.hold_b(w.tick({"b"}), g.b0());
    const Comp& main = w.open("H", "start", {"Halt"}, w.tick({"b"}), g.b0(), g.b0());
    const std::size_t halt = cm.halt_index();
    std::vector<NodeId> l(cm.prog.size());
    for (std::size_t i = 0; i < cm.prog.size(); ++i) {
        if (i == halt) {
            l[i] = main.ex[0];
            w.point("Halt", i);
            continue;
        }
        l[i] = w.b.node(main.id, "I" + idx(i), w.tick({"b"}), g.b0());
        w.point("I" + idx(i), i);
    }
    w.b.edge(Location::node(main.en), Location::node(l[0]));
    for (std::size_t i = 0; i < halt; ++i) {
        const CmInstr& in = cm.prog[i];
        const std::string name = "I" + idx(i);
        Location prev = Location::node(l[i]);
        for (const UpStep& s : up_sequence(in, true)) {
            const Group& grp = s.z ? gz : (s.on_c ? gx : gy);
            prev = Location::node(g.up(main, name, prev, grp, s.n));
        }
        if (in.op == CmOp::ifz) {
            const Comp& z = g.zc(in.ctr == Counter::c ? gx : gy);
            const BoxId bx = w.box(main, name + "_ZC", z, w.all());
            w.b.edge(prev, Writer::call(bx, z));
            w.b.edge(Writer::ret(bx, z, 0), Location::node(l[in.target]), {}, {}, "zero");
            w.b.edge(Writer::ret(bx, z, 1), Location::node(l[in.alt]), {}, {}, "nonzero");
        } else {
            w.b.edge(prev, Location::node(l[in.target]), {}, {},
                     std::string(in.op == CmOp::inc ? "inc_" : "dec_") + counter_name(in.ctr));
        }
    }
    w.b.init(main.en, init_with(vars.size(), std::nullopt));
    return w.finish(Encoding::sw14_tb, cm, "Halt");
}

// 1/v = 2^c 3^d exactly.
std::optional<std::pair<std::uint64_t, std::uint64_t>> factor_23(const Rational& v) {
    if (v <= Rational(0)) return std::nullopt;
    const Rational inv = Rational(1) / v;
    if (inv.raw().get_den() != 1) return std::nullopt;
    mpz_class n = inv.raw().get_num();
    std::uint64_t c = 0;
    std::uint64_t d = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++c;
    }
    while (n % 3 == 0) {
        n /= 3;
        ++d;
    }
    if (n != 1) return std::nullopt;
    return std::pair{c, d};
}

// v = 1 - 2^-e with e >= k; returns e - k.
std::optional<std::uint64_t> exponent_over(const Rational& v, std::uint64_t k) {
    const Rational gap = Rational(1) - v;
    const auto f = factor_23(gap);
    if (!f || f->second != 0 || f->first < k) return std::nullopt;
    return f->first - k;
}

bool all_equal(const Valuation& v, std::size_t from, std::size_t to) {
    for (std::size_t i = from + 1; i < to; ++i)
        if (v[i] != v[from]) return false;
    return true;
}

}  // namespace

GadgetBundle compile_cm(const CounterMachine& cm, Encoding enc) {
    switch (enc) {
        case Encoding::sw2: return compile_sw2(cm);
        case Encoding::sw3_gf: return compile_sw3(cm);
        case Encoding::clk5_tb: return compile_clk5(cm);
        case Encoding::sw14_tb: return compile_sw14(cm);
    }
    throw std::invalid_argument("unknown encoding");
}

DelayOracle gadget_oracle(const GadgetBundle& g) {
    return [&g, fallback = earliest_oracle(g.model)](const Configuration& c) -> std::optional<Choice> {
        if (c.loc.kind == LocKind::node) {
            const std::optional<BoxId> caller =
                c.context.empty() ? std::nullopt : std::optional<BoxId>(c.context.back().box);
            auto it = g.guesses.find(GuessKey{c.loc.id, caller});
            if (it == g.guesses.end()) it = g.guesses.find(GuessKey{c.loc.id, std::nullopt});
            if (it != g.guesses.end()) {
                const Rational t = it->second.eval(c.val);
                if (t < Rational(0)) return std::nullopt;
                for (EdgeId e : g.model.outgoing(c.loc))
                    if (edge_window(g.model, c, e).contains(t)) return Choice{t, e};
                return std::nullopt;
            }
        }
        return fallback(c);
    };
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> decode(Encoding enc, const Valuation& v, std::uint64_t k) {
    switch (enc) {
        case Encoding::sw2: {
            if (v[0] == Rational(0)) return factor_23(v[1]);
            if (v[1] == Rational(0)) return factor_23(v[0]);
            return std::nullopt;
        }
        case Encoding::sw3_gf:
            if (v[1] != Rational(0) || v[2] != Rational(0)) return std::nullopt;
            return factor_23(v[0]);
        case Encoding::clk5_tb: {
            if (v[4] != Rational(0) || v[2] != v[3]) return std::nullopt;
            const auto z = exponent_over(v[2], k);
            const auto c = exponent_over(v[0], k);
            const auto d = exponent_over(v[1], k);
            if (!z || *z != 0 || !c || !d) return std::nullopt;
            return std::pair{*c, *d};
        }
        case Encoding::sw14_tb: {
            if (v[13] != Rational(0) || !all_equal(v, 0, 5) || !all_equal(v, 5, 10) || !all_equal(v, 10, 13))
                return std::nullopt;
            const auto z = exponent_over(v[10], k);
            const auto c = exponent_over(v[0], k);
            const auto d = exponent_over(v[5], k);
            if (!z || *z != 0 || !c || !d) return std::nullopt;
            return std::pair{*c, *d};
        }
    }
    return std::nullopt;
}

std::vector<Rational> GadgetRun::instr_durations() const {
    std::vector<Rational> out;
    for (std::size_t i = 1; i < points.size(); ++i) out.push_back(points[i].at - points[i - 1].at);
    return out;
}

GadgetRun simulate_gadget(const GadgetBundle& g, std::size_t max_instr) {
    GadgetRun r;
    std::size_t seen = 0;
    auto at_point = [&](const Configuration& c) {
        return c.context.empty() && c.loc.kind == LocKind::node && g.points.contains(c.loc.id);
    };
    auto stop = [&](const Configuration& c) {
        if (!at_point(c)) return false;
        ++seen;
        return seen > max_instr + 1 || (seen == max_instr + 1 && c.loc.id != g.halt);
    };
    // Each instruction takes a few hundred discrete steps at most for small counters.
    const std::size_t max_steps = 100000 + 20000 * (max_instr + 1);
    SimResult sim = simulate(g.model, gadget_oracle(g), max_steps, stop);
    r.run = std::move(sim.run);
    r.status = sim.status;
    Rational now;
    for (std::size_t i = 0; i <= r.run.steps.size(); ++i) {
        if (i > 0) now += r.run.steps[i - 1].delay;
        const Configuration& c = r.run.config(i);
        if (!at_point(c)) continue;
        const std::uint64_t k = r.points.size();
        const auto cd = decode(g.enc, c.val, k);
        if (!cd) {
            if (!r.decode_error) r.decode_error = "valuation does not decode at " + describe(g.model, c);
            break;
        }
        r.points.push_back(DecodedPoint{g.points.at(c.loc.id), cd->first, cd->second, now});
    }
    r.halted = r.status == SimStatus::terminated && r.run.last().loc == Location::node(g.halt);
    r.bound_exhausted = r.status == SimStatus::target;
    return r;
}

}  // namespace rha
