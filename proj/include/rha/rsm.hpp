#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rha/model.hpp"

namespace rha {

// Finite recursive state machine. Locations reuse rha::Location: node ids and box ids are global,
// port ids name the callee's entry or exit node.
struct Rsm {
    struct Node {
        std::string name;
        CompId comp = 0;
        bool entry = false;
        bool exit = false;
    };
    struct Box {
        std::string name;
        CompId owner = 0;
        CompId callee = 0;
    };
    struct Edge {
        Location src;
        Location dst;
        std::string label;
    };

    std::vector<std::string> components;
    std::vector<Node> nodes;
    std::vector<Box> boxes;
    std::vector<Edge> edges;

    std::size_t add_component(std::string name);
    NodeId add_node(CompId c, std::string name, bool entry = false, bool exit = false);
    BoxId add_box(CompId owner, std::string name, CompId callee);
    EdgeId add_edge(Location src, Location dst, std::string label = {});
    // Rebuilds the outgoing index; call after the last mutation.
    void finalize();

    [[nodiscard]] const std::vector<EdgeId>& outgoing(const Location& loc) const;
    [[nodiscard]] CompId comp_of(const Location& loc) const;
    [[nodiscard]] bool valid(const Location& loc) const;
    [[nodiscard]] std::string loc_name(const Location& loc) const;

private:
    std::map<Location, std::vector<EdgeId>> out_;
};

enum class RsmStepKind : std::uint8_t { edge, call, ret };

struct RsmStep {
    RsmStepKind kind = RsmStepKind::edge;
    std::optional<EdgeId> edge;
    Location to;
};

struct RsmRun {
    Location init;
    std::vector<RsmStep> steps;
};

// (en, ex) pairs realizable with balanced calls, for every entry started from some initial entry.
class SummaryTable {
public:
    [[nodiscard]] bool has(NodeId en, NodeId ex) const { return pairs_.contains({en, ex}); }
    [[nodiscard]] const std::set<std::pair<NodeId, NodeId>>& pairs() const { return pairs_; }
    [[nodiscard]] std::size_t size() const { return pairs_.size(); }
    friend bool operator==(const SummaryTable&, const SummaryTable&) = default;

private:
    friend class RsmSolver;
    std::set<std::pair<NodeId, NodeId>> pairs_;
};

// Worklist saturation over facts (entry, location): the location is reachable from the entry node of
// its component with a balanced stack. Entries are started on demand from call ports.
class RsmSolver {
public:
    RsmSolver(const Rsm& rsm, std::vector<NodeId> roots);

    [[nodiscard]] const SummaryTable& summaries() const { return summaries_; }
    // Some context reaches a target (any stack when !termination_only, empty stack otherwise).
    [[nodiscard]] std::optional<RsmRun> reach(const std::set<Location>& targets, bool termination_only) const;
    [[nodiscard]] bool fact(NodeId en, const Location& loc) const { return pred_.contains({en, loc}); }
    [[nodiscard]] std::size_t fact_count() const { return pred_.size(); }

private:
    struct Pred {
        enum class Kind : std::uint8_t { init, edge, summary } kind = Kind::init;
        Location from;    // edge: source location; summary: the call port
        EdgeId edge = 0;  // edge only
        NodeId callee_entry = 0;
        NodeId callee_exit = 0;
    };
    using Fact = std::pair<NodeId, Location>;

    void saturate();
    void add(const Fact& f, Pred p);
    void expand(const Fact& f, std::vector<RsmStep>& out) const;

    const Rsm& rsm_;
    std::vector<NodeId> roots_;
    std::map<Fact, Pred> pred_;
    std::vector<Fact> queue_;
    std::map<NodeId, std::vector<std::pair<NodeId, BoxId>>> callers_;   // callee entry -> (caller entry, box)
    std::map<NodeId, std::pair<NodeId, BoxId>> started_by_;             // first caller of a started entry
    std::map<NodeId, std::vector<NodeId>> exits_of_;                    // entry -> summarized exits
    SummaryTable summaries_;
};

// Convenience: summaries computed from every entry of every component.
SummaryTable compute_summaries(const Rsm& rsm);

struct RsmReachResult {
    bool reachable = false;
    std::optional<RsmRun> witness;
};
// Throws std::invalid_argument on an unknown init or target location, or a non-entry init.
RsmReachResult reachable(const Rsm& rsm, const Location& init, const std::set<Location>& targets,
                         bool termination_only);

// Replays a run under the RSM step relation; returns the 1-based failing step or nullopt.
std::optional<std::size_t> validate_rsm_run(const Rsm& rsm, const RsmRun& run);

}  // namespace rha
