#include "rha/parser.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace rha {

std::string SourceDiagnostic::str() const {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

namespace detail {

Lexer::Lexer(std::string_view text) : text_(text) {}

bool Lexer::next_line(std::vector<Token>& out) {
    while (pos_ < text_.size()) {
        out.clear();
        ++line_;
        const auto eol = text_.find('\n', pos_);
        const std::string_view ln = text_.substr(pos_, eol == std::string_view::npos ? std::string_view::npos : eol - pos_);
        pos_ = eol == std::string_view::npos ? text_.size() : eol + 1;
        std::size_t i = 0;
        while (i < ln.size()) {
            const auto c = static_cast<unsigned char>(ln[i]);
            if (c == '#') break;
            if (std::isspace(c) != 0) {
                ++i;
                continue;
            }
            Token t;
            t.line = line_;
            t.column = i + 1;
            if (std::isalpha(c) != 0 || c == '_') {
                const std::size_t s = i;
                while (i < ln.size() && (std::isalnum(static_cast<unsigned char>(ln[i])) != 0 || ln[i] == '_' || ln[i] == '\''))
                    ++i;
                t.kind = TokKind::ident;
                t.text = std::string(ln.substr(s, i - s));
            } else if (std::isdigit(c) != 0) {
                const std::size_t s = i;
                while (i < ln.size() && std::isdigit(static_cast<unsigned char>(ln[i])) != 0) ++i;
                t.kind = TokKind::number;
                t.text = std::string(ln.substr(s, i - s));
            } else {
                t.kind = TokKind::symbol;
                const std::string_view two = ln.substr(i, 2);
                if (two == "->" || two == "<=" || two == ">=") {
                    t.text = std::string(two);
                    i += 2;
                } else {
                    t.text = std::string(1, static_cast<char>(c));
                    ++i;
                }
            }
            out.push_back(std::move(t));
        }
        if (!out.empty()) return true;
    }
    return false;
}

const Token& TokenCursor::peek() const { return at_end() ? end_ : toks_[i_]; }

const Token& TokenCursor::take() {
    if (at_end()) fail("unexpected end of line");
    return toks_[i_++];
}

bool TokenCursor::accept(std::string_view sym) {
    if (!at_end() && toks_[i_].text == sym && toks_[i_].kind != TokKind::number) {
        ++i_;
        return true;
    }
    return false;
}

void TokenCursor::expect(std::string_view sym) {
    if (!accept(sym)) fail("expected '" + std::string(sym) + "'");
}

std::string TokenCursor::ident(std::string_view what) {
    if (at_end() || toks_[i_].kind != TokKind::ident) fail("expected " + std::string(what));
    return toks_[i_++].text;
}

std::int64_t TokenCursor::natural(std::string_view what) {
    if (!at_end() && toks_[i_].text == "-") fail("negative " + std::string(what) + " not allowed");
    if (at_end() || toks_[i_].kind != TokKind::number) fail("expected " + std::string(what));
    const auto& t = toks_[i_];
    if (t.text.size() > 15) fail_at(t, "constant too large");
    ++i_;
    return std::stoll(t.text);
}

Rational TokenCursor::rational(std::string_view what) {
    const Token& first = peek();
    std::string s;
    if (accept("-")) s = "-";
    if (at_end() || toks_[i_].kind != TokKind::number) fail("malformed rational for " + std::string(what));
    s += toks_[i_++].text;
    if (accept("/")) {
        if (at_end() || toks_[i_].kind != TokKind::number) fail("malformed rational for " + std::string(what));
        s += "/" + toks_[i_++].text;
    }
    try {
        return Rational::parse(s);
    } catch (const std::exception& e) {
        fail_at(first, e.what());
    }
}

void TokenCursor::fail(const std::string& msg) const {
    if (at_end()) {
        Token t = toks_.empty() ? Token{} : toks_.back();
        t.column += t.text.size();
        fail_at(t, msg);
    }
    fail_at(toks_[i_], msg);
}

void TokenCursor::fail_at(const Token& t, const std::string& msg) {
    throw ParseError(SourceDiagnostic{t.line, t.column, msg});
}

}  // namespace detail

namespace {

using detail::Token;
using detail::TokenCursor;

struct Stmt {
    std::vector<Token> toks;
};

struct PendingComp {
    std::string name;
    std::vector<Stmt> body;
    Token where;
};

class ModelParser {
public:
    explicit ModelParser(std::string_view text) : lex_(text) {}

    Model run() {
        std::vector<Token> line;
        std::optional<Stmt> init_stmt;
        bool have_vars = false;
        while (lex_.next_line(line)) {
            const std::string& kw = line.front().text;
            TokenCursor cur(line);
            if (kw == "model") {
                cur.take();
                m_.name = cur.ident("model name");
                done(cur);
            } else if (kw == "vars") {
                cur.take();
                if (have_vars || !comps_.empty()) cur.fail_at(line.front(), "vars must appear once, before components");
                have_vars = true;
                std::set<std::string> seen;
                while (!cur.at_end()) {
                    const Token& t = cur.peek();
                    auto v = cur.ident("variable name");
                    if (!seen.insert(v).second) TokenCursor::fail_at(t, "duplicate variable '" + v + "'");
                    m_.vars.push_back(v);
                }
                if (m_.vars.size() > kMaxVars) TokenCursor::fail_at(line.front(), "too many variables");
            } else if (kw == "kind") {
                cur.take();
                if (!comps_.empty()) TokenCursor::fail_at(line.front(), "kind must precede components");
                const Token& t = cur.peek();
                const auto k = cur.ident("model kind");
                if (k == "clock") m_.kind = ModelKind::clock;
                else if (k == "stopwatch") m_.kind = ModelKind::stopwatch;
                else if (k == "general") m_.kind = ModelKind::general;
                else TokenCursor::fail_at(t, "unknown kind '" + k + "'");
                done(cur);
            } else if (kw == "cmax") {
                cur.take();
                m_.cmax_override = cur.natural("cmax");
                done(cur);
            } else if (kw == "component") {
                cur.take();
                const Token& t = cur.peek();
                auto name = cur.ident("component name");
                done(cur);
                for (const auto& c : comps_) {
                    if (c.name == name) TokenCursor::fail_at(t, "duplicate component '" + name + "'");
                }
                comps_.push_back(PendingComp{name, {}, t});
            } else if (kw == "init") {
                if (init_stmt) TokenCursor::fail_at(line.front(), "duplicate init");
                init_stmt = Stmt{line};
            } else if (kw == "entry" || kw == "exit" || kw == "node" || kw == "box" || kw == "edge" || kw == "port") {
                if (comps_.empty()) TokenCursor::fail_at(line.front(), "'" + kw + "' outside a component");
                comps_.back().body.push_back(Stmt{line});
            } else {
                TokenCursor::fail_at(line.front(), "unknown statement '" + kw + "'");
            }
        }
        build_nodes_and_boxes();
        for (CompId c = 0; c < comps_.size(); ++c) {
            for (const auto& s : comps_[c].body) {
                const auto& kw = s.toks.front().text;
                if (kw == "edge") parse_edge(c, s);
                else if (kw == "port") parse_port(c, s);
            }
        }
        m_.init_val = Valuation(m_.vars.size());
        if (!init_stmt) {
            TokenCursor::fail_at(line.empty() ? Token{} : line.front(), "missing init statement");
        }
        parse_init(*init_stmt);
        canonicalize(m_);
        return m_;
    }

private:
    static void done(TokenCursor& cur) {
        if (!cur.at_end()) cur.fail("unexpected '" + cur.peek().text + "'");
    }

    void build_nodes_and_boxes() {
        for (CompId c = 0; c < comps_.size(); ++c) m_.components.push_back(Component{comps_[c].name, {}, {}, {}, {}, {}});
        std::map<std::string, NodeId> nodes;
        std::map<std::string, BoxId> boxes;
        for (CompId c = 0; c < comps_.size(); ++c) {
            std::set<std::string> attributed;
            for (const auto& s : comps_[c].body) {
                TokenCursor cur(s.toks);
                const std::string kw = cur.take().text;
                if (kw == "entry" || kw == "exit" || kw == "node") {
                    const Token& t = cur.peek();
                    const auto name = cur.ident("node name");
                    NodeId id = 0;
                    if (auto it = nodes.find(name); it != nodes.end()) {
                        id = it->second;
                        if (m_.nodes[id].comp != c) TokenCursor::fail_at(t, "duplicate node '" + name + "'");
                    } else {
                        if (boxes.count(name) != 0) TokenCursor::fail_at(t, "duplicate id '" + name + "'");
                        id = m_.nodes.size();
                        m_.nodes.push_back(Node{name, c, LocAttr{m_.default_rate(), {}}});
                        m_.components[c].nodes.push_back(id);
                        nodes.emplace(name, id);
                    }
                    auto& comp = m_.components[c];
                    if (kw == "entry" || kw == "exit") {
                        auto& list = kw == "entry" ? comp.entries : comp.exits;
                        if (std::find(list.begin(), list.end(), id) != list.end())
                            TokenCursor::fail_at(t, "duplicate " + kw + " '" + name + "'");
                        list.push_back(id);
                    }
                    if (!cur.at_end()) {
                        if (!attributed.insert(name).second)
                            TokenCursor::fail_at(t, "attributes for node '" + name + "' given twice");
                        m_.nodes[id].attr = parse_attrs(cur);
                    } else if (kw == "node" && !attributed.insert(name).second) {
                        TokenCursor::fail_at(t, "duplicate node '" + name + "'");
                    }
                } else if (kw == "box") {
                    const Token& t = cur.peek();
                    const auto name = cur.ident("box name");
                    if (boxes.count(name) != 0 || nodes.count(name) != 0)
                        TokenCursor::fail_at(t, "duplicate id '" + name + "'");
                    cur.expect(":");
                    const Token& ct = cur.peek();
                    const auto callee_name = cur.ident("callee component");
                    const auto callee = m_.comp_index(callee_name);
                    if (!callee) TokenCursor::fail_at(ct, "unknown component '" + callee_name + "'");
                    VarSet pv;
                    if (cur.accept("byvalue")) pv = parse_varset(cur, true);
                    done(cur);
                    boxes.emplace(name, m_.boxes.size());
                    m_.boxes.push_back(Box{name, c, *callee, pv});
                    m_.components[c].boxes.push_back(m_.boxes.size() - 1);
                }
            }
        }
        m_.finalize();
    }

    LocAttr parse_attrs(TokenCursor& cur) {
        LocAttr a{m_.default_rate(), {}};
        bool rate_seen = false;
        bool inv_seen = false;
        while (!cur.at_end()) {
            const Token& t = cur.peek();
            const auto kw = cur.ident("'rate' or 'inv'");
            if (kw == "rate" && !rate_seen) {
                rate_seen = true;
                do {
                    const VarIndex v = var(cur);
                    cur.expect(":");
                    a.rate[v] = cur.natural("rate");
                } while (cur.accept(","));
            } else if (kw == "inv" && !inv_seen) {
                inv_seen = true;
                a.inv = parse_expr(cur);
            } else {
                TokenCursor::fail_at(t, "unexpected '" + kw + "'");
            }
        }
        return a;
    }

    VarIndex var(TokenCursor& cur) {
        const Token& t = cur.peek();
        const auto name = cur.ident("variable");
        const auto v = m_.var_index(name);
        if (!v) TokenCursor::fail_at(t, "unknown variable '" + name + "'");
        return *v;
    }

    VarSet parse_varset(TokenCursor& cur, bool allow_star) {
        if (allow_star && cur.accept("*")) return VarSet::all(m_.nvars());
        VarSet s;
        cur.expect("{");
        if (cur.accept("}")) return s;
        do {
            s.insert(var(cur));
        } while (cur.accept(","));
        cur.expect("}");
        return s;
    }

    RectConstraint parse_expr(TokenCursor& cur) {
        RectConstraint c;
        if (cur.accept("true")) return c;
        do {
            Atom a;
            a.var = var(cur);
            const Token& rt = cur.take();
            if (rt.text == "<") a.rel = Rel::lt;
            else if (rt.text == "<=") a.rel = Rel::le;
            else if (rt.text == "=") a.rel = Rel::eq;
            else if (rt.text == ">=") a.rel = Rel::ge;
            else if (rt.text == ">") a.rel = Rel::gt;
            else TokenCursor::fail_at(rt, "expected comparison operator");
            a.bound = cur.natural("constant");
            c.atoms.push_back(a);
        } while (cur.accept("&"));
        return c;
    }

    Location parse_loc(TokenCursor& cur, CompId c) {
        const Token& t = cur.peek();
        const auto first = cur.ident("location");
        if (!cur.accept(".")) {
            const auto n = m_.node_index(first);
            if (!n) TokenCursor::fail_at(t, "unknown node '" + first + "'");
            if (m_.nodes[*n].comp != c) TokenCursor::fail_at(t, "node '" + first + "' belongs to another component");
            return Location::node(*n);
        }
        const auto b = m_.box_index(first);
        if (!b) TokenCursor::fail_at(t, "unknown box '" + first + "'");
        if (m_.boxes[*b].owner != c) TokenCursor::fail_at(t, "box '" + first + "' belongs to another component");
        const Token& pt = cur.peek();
        const auto port = cur.ident("entry or exit name");
        const auto n = m_.node_index(port);
        if (!n || m_.nodes[*n].comp != m_.boxes[*b].callee)
            TokenCursor::fail_at(pt, "'" + port + "' is not a node of the callee of '" + first + "'");
        if (m_.is_entry(*n)) return Location::call(*b, *n);
        if (m_.is_exit(*n)) return Location::ret(*b, *n);
        TokenCursor::fail_at(pt, "'" + port + "' is neither an entry nor an exit");
    }

    void parse_edge(CompId c, const Stmt& s) {
        TokenCursor cur(s.toks);
        cur.take();
        Edge e;
        e.src = parse_loc(cur, c);
        cur.expect("->");
        e.dst = parse_loc(cur, c);
        e.action = "tau";
        std::set<std::string> seen;
        while (!cur.at_end()) {
            const Token& t = cur.peek();
            const auto kw = cur.ident("'guard', 'reset' or 'action'");
            if (!seen.insert(kw).second) TokenCursor::fail_at(t, "repeated '" + kw + "'");
            if (kw == "guard") e.guard = parse_expr(cur);
            else if (kw == "reset") e.reset = parse_varset(cur, false);
            else if (kw == "action") e.action = cur.ident("action label");
            else TokenCursor::fail_at(t, "unexpected '" + kw + "'");
        }
        m_.components[c].edges.push_back(m_.edges.size());
        m_.edges.push_back(std::move(e));
    }

    void parse_port(CompId c, const Stmt& s) {
        TokenCursor cur(s.toks);
        cur.take();
        const Token& t = cur.peek();
        const Location loc = parse_loc(cur, c);
        if (loc.kind == LocKind::node) TokenCursor::fail_at(t, "port statement needs box.node");
        if (m_.port_attrs.count(loc) != 0) TokenCursor::fail_at(t, "duplicate port attributes");
        m_.port_attrs[loc] = parse_attrs(cur);
    }

    void parse_init(const Stmt& s) {
        TokenCursor cur(s.toks);
        cur.take();
        const Token& t = cur.peek();
        const auto comp = cur.ident("component");
        cur.expect(".");
        const Token& nt = cur.peek();
        const auto node = cur.ident("entry node");
        const auto c = m_.comp_index(comp);
        if (!c) TokenCursor::fail_at(t, "unknown component '" + comp + "'");
        const auto n = m_.node_index(node);
        if (!n || m_.nodes[*n].comp != *c) TokenCursor::fail_at(nt, "unknown node '" + node + "' in '" + comp + "'");
        m_.init_entry = *n;
        std::set<VarIndex> seen;
        while (!cur.at_end()) {
            const Token& vt = cur.peek();
            const VarIndex v = var(cur);
            if (!seen.insert(v).second) TokenCursor::fail_at(vt, "repeated initial value");
            cur.expect("=");
            m_.init_val[v] = cur.rational("initial value");
        }
    }

    detail::Lexer lex_;
    Model m_;
    std::vector<PendingComp> comps_;
};

std::string format_rate(const Model& m, const RateVector& r) {
    std::string s;
    for (VarIndex i = 0; i < m.nvars(); ++i) {
        if (i != 0) s += ",";
        s += m.vars[i] + ":" + std::to_string(r[i]);
    }
    return s;
}

std::string format_varset(const Model& m, VarSet s, bool allow_star) {
    if (allow_star && m.nvars() > 0 && s.is_all(m.nvars())) return "*";
    std::string out = "{";
    bool first = true;
    for (VarIndex i = 0; i < m.nvars(); ++i) {
        if (!s.contains(i)) continue;
        if (!first) out += ",";
        out += m.vars[i];
        first = false;
    }
    return out + "}";
}

std::string format_attrs(const Model& m, const LocAttr& a) {
    std::string s;
    if (m.nvars() > 0) s += " rate " + format_rate(m, a.rate);
    if (!a.inv.is_true()) s += " inv " + format_constraint(m, a.inv);
    return s;
}

}  // namespace

std::string format_constraint(const Model& m, const RectConstraint& c) {
    if (c.is_true()) return "true";
    std::string s;
    for (std::size_t i = 0; i < c.atoms.size(); ++i) {
        const auto& a = c.atoms[i];
        if (i != 0) s += " & ";
        s += (a.var < m.nvars() ? m.vars[a.var] : "?") + rel_symbol(a.rel) + std::to_string(a.bound);
    }
    return s;
}

Model parse_model(std::string_view text) {
    try {
        return ModelParser(text).run();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(SourceDiagnostic{1, 1, std::string("internal parse failure: ") + e.what()});
    }
}

std::string serialize_model(const Model& m) {
    std::ostringstream os;
    os << "model " << m.name << "\n";
    if (m.nvars() > 0) {
        os << "vars";
        for (const auto& v : m.vars) os << " " << v;
        os << "\n";
    }
    os << "kind " << (m.kind == ModelKind::clock ? "clock" : m.kind == ModelKind::stopwatch ? "stopwatch" : "general")
       << "\n";
    if (m.cmax_override) os << "cmax " << *m.cmax_override << "\n";
    for (CompId c = 0; c < m.components.size(); ++c) {
        const auto& comp = m.components[c];
        os << "\ncomponent " << comp.name << "\n";
        for (auto n : comp.nodes) os << "  node " << m.nodes[n].name << format_attrs(m, m.nodes[n].attr) << "\n";
        for (auto n : comp.entries) os << "  entry " << m.nodes[n].name << "\n";
        for (auto n : comp.exits) os << "  exit " << m.nodes[n].name << "\n";
        for (auto b : comp.boxes) {
            os << "  box " << m.boxes[b].name << " : " << m.components[m.boxes[b].callee].name << " byvalue "
               << format_varset(m, m.boxes[b].by_value, true) << "\n";
        }
        for (const auto& [loc, a] : m.port_attrs) {
            if (m.comp_of(loc) == c) os << "  port " << m.loc_name(loc) << format_attrs(m, a) << "\n";
        }
        for (auto e : comp.edges) {
            const Edge& ed = m.edges[e];
            os << "  edge " << m.loc_name(ed.src) << " -> " << m.loc_name(ed.dst);
            if (!ed.guard.is_true()) os << " guard " << format_constraint(m, ed.guard);
            if (!ed.reset.empty()) os << " reset " << format_varset(m, ed.reset, false);
            if (ed.action != "tau") os << " action " << ed.action;
            os << "\n";
        }
    }
    os << "\ninit " << m.components.at(m.nodes.at(m.init_entry).comp).name << "." << m.nodes[m.init_entry].name;
    for (VarIndex i = 0; i < m.nvars(); ++i) os << " " << m.vars[i] << "=" << m.init_val[i].str();
    os << "\n";
    return os.str();
}

}  // namespace rha
