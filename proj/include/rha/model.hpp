#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rha/rational.hpp"

namespace rha {

using VarIndex = std::size_t;
using NodeId = std::size_t;
using BoxId = std::size_t;
using CompId = std::size_t;
using EdgeId = std::size_t;

inline constexpr std::size_t kMaxVars = 64;

// Subset of the model's variables, at most kMaxVars of them.
class VarSet {
public:
    VarSet() = default;
    static VarSet all(std::size_t nvars) {
        return VarSet(nvars >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << nvars) - 1));
    }
    static VarSet of(std::initializer_list<VarIndex> vars) {
        VarSet s;
        for (auto v : vars) s.insert(v);
        return s;
    }
    [[nodiscard]] bool contains(VarIndex v) const { return ((bits_ >> v) & 1U) != 0; }
    void insert(VarIndex v) { bits_ |= std::uint64_t{1} << v; }
    [[nodiscard]] bool empty() const { return bits_ == 0; }
    [[nodiscard]] std::uint64_t bits() const { return bits_; }
    [[nodiscard]] bool is_all(std::size_t nvars) const { return *this == all(nvars); }
    friend bool operator==(VarSet a, VarSet b) = default;

private:
    explicit VarSet(std::uint64_t bits) : bits_(bits) {}
    std::uint64_t bits_ = 0;
};

class Valuation {
public:
    Valuation() = default;
    explicit Valuation(std::size_t nvars) : v_(nvars, Rational(0)) {}
    explicit Valuation(std::vector<Rational> values) : v_(std::move(values)) {}

    [[nodiscard]] std::size_t size() const { return v_.size(); }
    const Rational& operator[](VarIndex i) const { return v_[i]; }
    Rational& operator[](VarIndex i) { return v_[i]; }
    [[nodiscard]] const std::vector<Rational>& values() const { return v_; }
    friend bool operator==(const Valuation&, const Valuation&) = default;
    friend auto operator<=>(const Valuation&, const Valuation&) = default;

private:
    std::vector<Rational> v_;
};

// Natural rate per variable.
using RateVector = std::vector<std::int64_t>;

enum class Rel : std::uint8_t { lt, le, eq, ge, gt };

struct Atom {
    VarIndex var = 0;
    Rel rel = Rel::eq;
    std::int64_t bound = 0;

    [[nodiscard]] bool holds(const Rational& value) const;
    friend bool operator==(const Atom&, const Atom&) = default;
};

// Conjunction of atoms; the empty conjunction is true.
struct RectConstraint {
    std::vector<Atom> atoms;

    [[nodiscard]] bool holds(const Valuation& v) const;
    [[nodiscard]] bool is_true() const { return atoms.empty(); }
    [[nodiscard]] std::int64_t max_constant() const;
    friend bool operator==(const RectConstraint&, const RectConstraint&) = default;
};

bool eval_constraint(const RectConstraint& c, const Valuation& v);

// v'(x) = 0 for x in reset, v(x) + rate(x)*t otherwise. Throws std::invalid_argument on t < 0.
Valuation evolve_and_reset(const Valuation& v, const RateVector& rates, const Rational& t, VarSet reset = {});

enum class LocKind : std::uint8_t { node, call, ret };

// A location of some component: a node, a call port (box, callee entry) or a return port (box, callee exit).
struct Location {
    LocKind kind = LocKind::node;
    std::size_t id = 0;    // node id, or box id for ports
    NodeId port = 0;       // callee entry/exit node for ports, 0 for nodes

    static Location node(NodeId n) { return {LocKind::node, n, 0}; }
    static Location call(BoxId b, NodeId entry) { return {LocKind::call, b, entry}; }
    static Location ret(BoxId b, NodeId exit) { return {LocKind::ret, b, exit}; }
    friend bool operator==(const Location&, const Location&) = default;
    friend auto operator<=>(const Location&, const Location&) = default;
};

struct LocAttr {
    RateVector rate;
    RectConstraint inv;
    friend bool operator==(const LocAttr&, const LocAttr&) = default;
};

struct Node {
    std::string name;
    CompId comp = 0;
    LocAttr attr;
    friend bool operator==(const Node&, const Node&) = default;
};

struct Box {
    std::string name;
    CompId owner = 0;
    CompId callee = 0;
    VarSet by_value;
    friend bool operator==(const Box&, const Box&) = default;
};

struct Edge {
    Location src;
    std::string action;
    RectConstraint guard;
    VarSet reset;
    Location dst;
    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Component {
    std::string name;
    std::vector<NodeId> nodes;
    std::vector<NodeId> entries;
    std::vector<NodeId> exits;
    std::vector<BoxId> boxes;
    std::vector<EdgeId> edges;
    friend bool operator==(const Component&, const Component&) = default;
};

enum class ModelKind : std::uint8_t { clock, stopwatch, general };

struct ModelClass {
    bool clocks_only = false;
    bool stopwatches_only = false;
    bool glitch_free = false;
    bool by_reference_only = false;
    bool hierarchical = false;  // call graph acyclic
};

struct Diagnostic {
    std::string message;
};

struct ValidationReport {
    std::vector<Diagnostic> diagnostics;
    ModelClass cls;
    std::int64_t cmax = 0;
    std::int64_t rmax = 0;
    [[nodiscard]] bool ok() const { return diagnostics.empty(); }
};

// Recursive hybrid automaton. Node, box and edge ids are global across components.
class Model {
public:
    std::string name = "model";
    std::vector<std::string> vars;
    ModelKind kind = ModelKind::general;
    std::optional<std::int64_t> cmax_override;
    std::vector<Component> components;
    std::vector<Node> nodes;
    std::vector<Box> boxes;
    std::vector<Edge> edges;
    std::map<Location, LocAttr> port_attrs;  // explicit port rates/invariants
    NodeId init_entry = 0;
    Valuation init_val;

    [[nodiscard]] std::size_t nvars() const { return vars.size(); }

    // Rate vector applied at ports that carry no explicit attributes.
    [[nodiscard]] RateVector default_rate() const;
    [[nodiscard]] const LocAttr& attr(const Location& loc) const;
    [[nodiscard]] CompId comp_of(const Location& loc) const;
    [[nodiscard]] bool is_entry(NodeId n) const;
    [[nodiscard]] bool is_exit(NodeId n) const;

    // Outgoing transitions of a location, in declaration order.
    [[nodiscard]] const std::vector<EdgeId>& outgoing(const Location& loc) const;
    // Every location of component c: nodes, then call ports, then return ports.
    [[nodiscard]] std::vector<Location> locations(CompId c) const;

    [[nodiscard]] std::optional<VarIndex> var_index(const std::string& v) const;
    [[nodiscard]] std::optional<CompId> comp_index(const std::string& c) const;
    [[nodiscard]] std::optional<NodeId> node_index(const std::string& n) const;
    [[nodiscard]] std::optional<BoxId> box_index(const std::string& b) const;
    [[nodiscard]] std::string loc_name(const Location& loc) const;
    // Inverse of loc_name: "n" or "b.n".
    [[nodiscard]] std::optional<Location> parse_loc(const std::string& text) const;

    [[nodiscard]] std::int64_t max_constant() const;
    [[nodiscard]] std::int64_t cmax() const;
    [[nodiscard]] std::int64_t rmax() const;

    // Must be called after any structural mutation; rebuilds lookup indices.
    void finalize();

    friend bool operator==(const Model& a, const Model& b);

private:
    std::map<Location, std::vector<EdgeId>> out_;
    std::map<std::string, NodeId, std::less<>> node_by_name_;
    std::map<std::string, BoxId, std::less<>> box_by_name_;
    LocAttr default_port_;
};

ValidationReport validate_model(const Model& m);
// Renumbers nodes, boxes and edges so that ids are grouped by component in declaration order, then finalizes.
void canonicalize(Model& m);
ModelClass classify(const Model& m);

// Convenience builder used by the parser, the gadget compiler and tests.
class ModelBuilder {
public:
    ModelBuilder(std::string name, std::vector<std::string> vars, ModelKind kind);

    CompId component(const std::string& name);
    NodeId node(CompId c, const std::string& name, RateVector rate = {}, RectConstraint inv = {});
    NodeId entry(CompId c, const std::string& name, RateVector rate = {}, RectConstraint inv = {});
    NodeId exit(CompId c, const std::string& name, RateVector rate = {}, RectConstraint inv = {});
    BoxId box(CompId owner, const std::string& name, CompId callee, VarSet by_value);
    EdgeId edge(Location src, Location dst, RectConstraint guard = {}, VarSet reset = {}, std::string action = "");
    void port(Location port, RateVector rate, RectConstraint inv = {});
    void init(NodeId entry, Valuation v);
    void cmax_override(std::int64_t c) { m_.cmax_override = c; }

    [[nodiscard]] VarIndex var(const std::string& v) const;
    [[nodiscard]] VarSet vars(std::initializer_list<std::string> names) const;
    // "x:1,y:0"-style rate from a per-name map; unnamed variables get the kind default.
    [[nodiscard]] RateVector rate(std::initializer_list<std::pair<std::string, std::int64_t>> r) const;
    [[nodiscard]] Atom atom(const std::string& v, Rel rel, std::int64_t k) const { return {var(v), rel, k}; }
    [[nodiscard]] Model& model() { return m_; }

    Model build();

private:
    Model m_;
};

const char* rel_symbol(Rel r);

}  // namespace rha
