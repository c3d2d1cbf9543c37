#include "rha/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace rha {

const char* rel_symbol(Rel r) {
    switch (r) {
        case Rel::lt: return "<";
        case Rel::le: return "<=";
        case Rel::eq: return "=";
        case Rel::ge: return ">=";
        case Rel::gt: return ">";
    }
    return "?";
}

bool Atom::holds(const Rational& value) const {
    const Rational k(static_cast<long>(bound));
    switch (rel) {
        case Rel::lt: return value < k;
        case Rel::le: return value <= k;
        case Rel::eq: return value == k;
        case Rel::ge: return value >= k;
        case Rel::gt: return value > k;
    }
    return false;
}

bool RectConstraint::holds(const Valuation& v) const {
    return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return a.holds(v[a.var]); });
}

std::int64_t RectConstraint::max_constant() const {
    std::int64_t m = 0;
    for (const auto& a : atoms) m = std::max(m, a.bound);
    return m;
}

bool eval_constraint(const RectConstraint& c, const Valuation& v) { return c.holds(v); }

Valuation evolve_and_reset(const Valuation& v, const RateVector& rates, const Rational& t, VarSet reset) {
    if (t.sign() < 0) throw std::invalid_argument("negative delay " + t.str());
    Valuation out(v.size());
    for (VarIndex i = 0; i < v.size(); ++i) {
        if (!reset.contains(i)) out[i] = v[i] + Rational(static_cast<long>(rates[i])) * t;
    }
    return out;
}

RateVector Model::default_rate() const {
    return RateVector(vars.size(), kind == ModelKind::clock ? 1 : 0);
}

const LocAttr& Model::attr(const Location& loc) const {
    if (loc.kind == LocKind::node) return nodes.at(loc.id).attr;
    const auto it = port_attrs.find(loc);
    return it == port_attrs.end() ? default_port_ : it->second;
}

CompId Model::comp_of(const Location& loc) const {
    return loc.kind == LocKind::node ? nodes.at(loc.id).comp : boxes.at(loc.id).owner;
}

bool Model::is_entry(NodeId n) const {
    const auto& e = components.at(nodes.at(n).comp).entries;
    return std::find(e.begin(), e.end(), n) != e.end();
}

bool Model::is_exit(NodeId n) const {
    const auto& e = components.at(nodes.at(n).comp).exits;
    return std::find(e.begin(), e.end(), n) != e.end();
}

const std::vector<EdgeId>& Model::outgoing(const Location& loc) const {
    static const std::vector<EdgeId> none;
    const auto it = out_.find(loc);
    return it == out_.end() ? none : it->second;
}

std::vector<Location> Model::locations(CompId c) const {
    std::vector<Location> out;
    const auto& comp = components.at(c);
    for (auto n : comp.nodes) out.push_back(Location::node(n));
    for (auto b : comp.boxes) {
        for (auto en : components.at(boxes[b].callee).entries) out.push_back(Location::call(b, en));
    }
    for (auto b : comp.boxes) {
        for (auto ex : components.at(boxes[b].callee).exits) out.push_back(Location::ret(b, ex));
    }
    return out;
}

std::optional<VarIndex> Model::var_index(const std::string& v) const {
    const auto it = std::find(vars.begin(), vars.end(), v);
    if (it == vars.end()) return std::nullopt;
    return static_cast<VarIndex>(it - vars.begin());
}

std::optional<CompId> Model::comp_index(const std::string& c) const {
    for (CompId i = 0; i < components.size(); ++i) {
        if (components[i].name == c) return i;
    }
    return std::nullopt;
}

std::optional<NodeId> Model::node_index(const std::string& n) const {
    const auto it = node_by_name_.find(n);
    if (it == node_by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<BoxId> Model::box_index(const std::string& b) const {
    const auto it = box_by_name_.find(b);
    if (it == box_by_name_.end()) return std::nullopt;
    return it->second;
}

std::string Model::loc_name(const Location& loc) const {
    if (loc.kind == LocKind::node) return nodes.at(loc.id).name;
    return boxes.at(loc.id).name + "." + nodes.at(loc.port).name;
}

std::optional<Location> Model::parse_loc(const std::string& text) const {
    const auto dot = text.find('.');
    if (dot == std::string::npos) {
        const auto n = node_index(text);
        if (!n) return std::nullopt;
        return Location::node(*n);
    }
    const auto b = box_index(text.substr(0, dot));
    const auto n = node_index(text.substr(dot + 1));
    if (!b || !n || nodes[*n].comp != boxes[*b].callee) return std::nullopt;
    if (is_entry(*n)) return Location::call(*b, *n);
    if (is_exit(*n)) return Location::ret(*b, *n);
    return std::nullopt;
}

std::int64_t Model::max_constant() const {
    std::int64_t m = 0;
    for (const auto& n : nodes) m = std::max(m, n.attr.inv.max_constant());
    for (const auto& [loc, a] : port_attrs) m = std::max(m, a.inv.max_constant());
    for (const auto& e : edges) m = std::max(m, e.guard.max_constant());
    return m;
}

std::int64_t Model::cmax() const {
    return std::max(max_constant(), cmax_override.value_or(0));
}

std::int64_t Model::rmax() const {
    std::int64_t r = 0;
    auto scan = [&](const RateVector& rv) {
        for (auto x : rv) r = std::max(r, x);
    };
    for (const auto& n : nodes) scan(n.attr.rate);
    for (const auto& [loc, a] : port_attrs) scan(a.rate);
    if (!boxes.empty()) scan(default_rate());
    return r;
}

void Model::finalize() {
    out_.clear();
    for (EdgeId e = 0; e < edges.size(); ++e) out_[edges[e].src].push_back(e);
    node_by_name_.clear();
    for (NodeId n = 0; n < nodes.size(); ++n) node_by_name_.emplace(nodes[n].name, n);
    box_by_name_.clear();
    for (BoxId b = 0; b < boxes.size(); ++b) box_by_name_.emplace(boxes[b].name, b);
    default_port_ = LocAttr{default_rate(), {}};
}

bool operator==(const Model& a, const Model& b) {
    return a.name == b.name && a.vars == b.vars && a.kind == b.kind && a.cmax_override == b.cmax_override &&
           a.components == b.components && a.nodes == b.nodes && a.boxes == b.boxes && a.edges == b.edges &&
           a.port_attrs == b.port_attrs && a.init_entry == b.init_entry && a.init_val == b.init_val;
}

namespace {

bool has_cycle(const Model& m) {
    // 0 = unvisited, 1 = on stack, 2 = done
    std::vector<int> state(m.components.size(), 0);
    std::vector<std::pair<CompId, std::size_t>> stack;
    for (CompId root = 0; root < m.components.size(); ++root) {
        if (state[root] != 0) continue;
        stack.emplace_back(root, 0);
        state[root] = 1;
        while (!stack.empty()) {
            auto& [c, i] = stack.back();
            const auto& bs = m.components[c].boxes;
            if (i == bs.size()) {
                state[c] = 2;
                stack.pop_back();
                continue;
            }
            const CompId callee = m.boxes[bs[i++]].callee;
            if (callee >= m.components.size()) continue;
            if (state[callee] == 1) return true;
            if (state[callee] == 0) {
                state[callee] = 1;
                stack.emplace_back(callee, 0);
            }
        }
    }
    return false;
}

}  // namespace

ModelClass classify(const Model& m) {
    ModelClass cls;
    std::vector<const RateVector*> rates;
    for (const auto& n : m.nodes) rates.push_back(&n.attr.rate);
    for (const auto& [loc, a] : m.port_attrs) rates.push_back(&a.rate);
    const RateVector dflt = m.default_rate();
    if (!m.boxes.empty()) rates.push_back(&dflt);
    auto every = [&](auto pred) {
        return std::all_of(rates.begin(), rates.end(),
                           [&](const RateVector* r) { return std::all_of(r->begin(), r->end(), pred); });
    };
    cls.clocks_only = every([](std::int64_t r) { return r == 1; });
    cls.stopwatches_only = every([](std::int64_t r) { return r == 0 || r == 1; });
    cls.glitch_free = std::all_of(m.boxes.begin(), m.boxes.end(),
                                  [&](const Box& b) { return b.by_value.empty() || b.by_value.is_all(m.nvars()); });
    cls.by_reference_only =
        std::all_of(m.boxes.begin(), m.boxes.end(), [](const Box& b) { return b.by_value.empty(); });
    cls.hierarchical = !has_cycle(m);
    return cls;
}

ValidationReport validate_model(const Model& m) {
    ValidationReport rep;
    auto diag = [&](std::string msg) { rep.diagnostics.push_back({std::move(msg)}); };
    const std::size_t nv = m.nvars();

    if (nv > kMaxVars) diag("too many variables (max 64)");
    {
        std::set<std::string> seen;
        for (const auto& v : m.vars) {
            if (!seen.insert(v).second) diag("duplicate id: variable '" + v + "'");
        }
        seen.clear();
        for (const auto& c : m.components) {
            if (!seen.insert(c.name).second) diag("duplicate id: component '" + c.name + "'");
        }
        seen.clear();
        for (const auto& n : m.nodes) {
            if (!seen.insert(n.name).second) diag("duplicate id: node '" + n.name + "'");
        }
        for (const auto& b : m.boxes) {
            if (!seen.insert(b.name).second) diag("duplicate id: box '" + b.name + "'");
        }
    }

    auto check_attr = [&](const LocAttr& a, const std::string& where) {
        if (a.rate.size() != nv) diag("rate vector size mismatch at " + where);
        for (auto r : a.rate) {
            if (r < 0) diag("negative rate at " + where);
        }
        for (const auto& at : a.inv.atoms) {
            if (at.var >= nv) diag("unknown variable in invariant at " + where);
            if (at.bound < 0) diag("negative constant in invariant at " + where);
        }
        if (m.kind == ModelKind::clock && std::any_of(a.rate.begin(), a.rate.end(), [](auto r) { return r != 1; }))
            diag("clock model with non-unit rate at " + where);
        if (m.kind == ModelKind::stopwatch &&
            std::any_of(a.rate.begin(), a.rate.end(), [](auto r) { return r != 0 && r != 1; }))
            diag("stopwatch model with rate outside {0,1} at " + where);
    };

    for (const auto& n : m.nodes) {
        if (n.comp >= m.components.size()) diag("node '" + n.name + "' in unknown component");
        check_attr(n.attr, n.name);
    }
    for (CompId c = 0; c < m.components.size(); ++c) {
        const auto& comp = m.components[c];
        for (auto en : comp.entries) {
            if (std::find(comp.exits.begin(), comp.exits.end(), en) != comp.exits.end())
                diag("node '" + m.nodes[en].name + "' is both entry and exit");
        }
    }
    for (const auto& b : m.boxes) {
        if (b.callee >= m.components.size()) diag("dangling box target: box '" + b.name + "'");
        if (b.owner >= m.components.size()) diag("box '" + b.name + "' in unknown component");
    }

    auto loc_ok = [&](const Location& l) {
        if (l.kind == LocKind::node) return l.id < m.nodes.size();
        if (l.id >= m.boxes.size() || l.port >= m.nodes.size()) return false;
        const Box& b = m.boxes[l.id];
        if (b.callee >= m.components.size() || m.nodes[l.port].comp != b.callee) return false;
        return l.kind == LocKind::call ? m.is_entry(l.port) : m.is_exit(l.port);
    };
    for (const auto& [loc, a] : m.port_attrs) {
        if (!loc_ok(loc) || loc.kind == LocKind::node) {
            diag("port attributes for an invalid port");
            continue;
        }
        check_attr(a, m.loc_name(loc));
    }

    for (EdgeId e = 0; e < m.edges.size(); ++e) {
        const Edge& ed = m.edges[e];
        const std::string tag = "edge #" + std::to_string(e);
        if (!loc_ok(ed.src) || !loc_ok(ed.dst)) {
            diag(tag + ": invalid endpoint");
            continue;
        }
        const std::string where = tag + " (" + m.loc_name(ed.src) + " -> " + m.loc_name(ed.dst) + ")";
        if (m.comp_of(ed.src) != m.comp_of(ed.dst)) diag(where + ": endpoints in different components");
        if (ed.src.kind == LocKind::call) diag(where + ": outgoing from call port");
        if (ed.src.kind == LocKind::node && m.is_exit(ed.src.id)) diag(where + ": outgoing from exit");
        if (ed.dst.kind == LocKind::ret) diag(where + ": edge into return port");
        for (const auto& at : ed.guard.atoms) {
            if (at.var >= nv) diag(where + ": unknown variable in guard");
            if (at.bound < 0) diag(where + ": negative constant in guard");
        }
        for (VarIndex v = nv; v < kMaxVars; ++v) {
            if (ed.reset.contains(v)) {
                diag(where + ": reset of unknown variable");
                break;
            }
        }
    }

    if (m.cmax_override && *m.cmax_override < m.max_constant())
        diag("cmax override below the largest constant " + std::to_string(m.max_constant()));

    if (m.init_entry >= m.nodes.size() || !m.is_entry(m.init_entry)) {
        diag("initial location is not an entry node");
    } else if (m.init_val.size() != nv) {
        diag("initial valuation has wrong arity");
    } else {
        for (VarIndex i = 0; i < nv; ++i) {
            if (m.init_val[i].sign() < 0) diag("negative initial value for '" + m.vars[i] + "'");
        }
        if (!m.nodes[m.init_entry].attr.inv.holds(m.init_val)) diag("initial valuation violates the entry invariant");
    }

    rep.cls = classify(m);
    rep.cmax = m.cmax();
    rep.rmax = m.rmax();
    return rep;
}

ModelBuilder::ModelBuilder(std::string name, std::vector<std::string> vars, ModelKind kind) {
    m_.name = std::move(name);
    m_.vars = std::move(vars);
    m_.kind = kind;
    m_.init_val = Valuation(m_.vars.size());
}

CompId ModelBuilder::component(const std::string& name) {
    m_.components.push_back(Component{name, {}, {}, {}, {}, {}});
    return m_.components.size() - 1;
}

NodeId ModelBuilder::node(CompId c, const std::string& name, RateVector rate, RectConstraint inv) {
    if (rate.empty()) rate = m_.default_rate();
    m_.nodes.push_back(Node{name, c, LocAttr{std::move(rate), std::move(inv)}});
    const NodeId id = m_.nodes.size() - 1;
    m_.components.at(c).nodes.push_back(id);
    return id;
}

NodeId ModelBuilder::entry(CompId c, const std::string& name, RateVector rate, RectConstraint inv) {
    const NodeId id = node(c, name, std::move(rate), std::move(inv));
    m_.components[c].entries.push_back(id);
    return id;
}

NodeId ModelBuilder::exit(CompId c, const std::string& name, RateVector rate, RectConstraint inv) {
    const NodeId id = node(c, name, std::move(rate), std::move(inv));
    m_.components[c].exits.push_back(id);
    return id;
}

BoxId ModelBuilder::box(CompId owner, const std::string& name, CompId callee, VarSet by_value) {
    m_.boxes.push_back(Box{name, owner, callee, by_value});
    const BoxId id = m_.boxes.size() - 1;
    m_.components.at(owner).boxes.push_back(id);
    return id;
}

EdgeId ModelBuilder::edge(Location src, Location dst, RectConstraint guard, VarSet reset, std::string action) {
    if (action.empty()) action = "tau";
    m_.edges.push_back(Edge{src, std::move(action), std::move(guard), reset, dst});
    const EdgeId id = m_.edges.size() - 1;
    const CompId c = src.kind == LocKind::node ? m_.nodes.at(src.id).comp : m_.boxes.at(src.id).owner;
    m_.components.at(c).edges.push_back(id);
    return id;
}

void ModelBuilder::port(Location port, RateVector rate, RectConstraint inv) {
    if (rate.empty()) rate = m_.default_rate();
    m_.port_attrs[port] = LocAttr{std::move(rate), std::move(inv)};
}

void ModelBuilder::init(NodeId entry, Valuation v) {
    m_.init_entry = entry;
    m_.init_val = std::move(v);
}

VarIndex ModelBuilder::var(const std::string& v) const {
    const auto i = m_.var_index(v);
    if (!i) throw std::invalid_argument("unknown variable '" + v + "'");
    return *i;
}

VarSet ModelBuilder::vars(std::initializer_list<std::string> names) const {
    VarSet s;
    for (const auto& n : names) s.insert(var(n));
    return s;
}

RateVector ModelBuilder::rate(std::initializer_list<std::pair<std::string, std::int64_t>> r) const {
    RateVector out = m_.default_rate();
    for (const auto& [v, k] : r) out[var(v)] = k;
    return out;
}

Model ModelBuilder::build() {
    canonicalize(m_);
    return m_;
}

void canonicalize(Model& m) {
    std::vector<NodeId> node_map(m.nodes.size());
    std::vector<BoxId> box_map(m.boxes.size());
    std::vector<Node> nodes;
    std::vector<Box> boxes;
    for (auto& c : m.components) {
        for (auto n : c.nodes) {
            node_map[n] = nodes.size();
            nodes.push_back(m.nodes[n]);
        }
        for (auto b : c.boxes) {
            box_map[b] = boxes.size();
            boxes.push_back(m.boxes[b]);
        }
    }
    auto remap = [&](Location l) {
        if (l.kind == LocKind::node) return Location::node(node_map[l.id]);
        return Location{l.kind, box_map[l.id], node_map[l.port]};
    };
    std::vector<Edge> edges;
    for (auto& c : m.components) {
        std::vector<EdgeId> ids;
        for (auto e : c.edges) {
            Edge ed = m.edges[e];
            ed.src = remap(ed.src);
            ed.dst = remap(ed.dst);
            ids.push_back(edges.size());
            edges.push_back(std::move(ed));
        }
        c.edges = std::move(ids);
        for (auto& n : c.nodes) n = node_map[n];
        for (auto& n : c.entries) n = node_map[n];
        for (auto& n : c.exits) n = node_map[n];
        for (auto& b : c.boxes) b = box_map[b];
    }
    std::map<Location, LocAttr> ports;
    for (auto& [loc, a] : m.port_attrs) ports.emplace(remap(loc), a);
    m.nodes = std::move(nodes);
    m.boxes = std::move(boxes);
    m.edges = std::move(edges);
    m.port_attrs = std::move(ports);
    if (m.init_entry < node_map.size()) m.init_entry = node_map[m.init_entry];
    m.finalize();
}

}  // namespace rha
