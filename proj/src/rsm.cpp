#include "rha/rsm.hpp"

#include <algorithm>
#include <stdexcept>

namespace rha {

std::size_t Rsm::add_component(std::string name) {
    components.push_back(std::move(name));
    return components.size() - 1;
}

NodeId Rsm::add_node(CompId c, std::string name, bool entry, bool exit) {
    nodes.push_back({std::move(name), c, entry, exit});
    return nodes.size() - 1;
}

BoxId Rsm::add_box(CompId owner, std::string name, CompId callee) {
    boxes.push_back({std::move(name), owner, callee});
    return boxes.size() - 1;
}

EdgeId Rsm::add_edge(Location src, Location dst, std::string label) {
    edges.push_back({src, dst, std::move(label)});
    return edges.size() - 1;
}

void Rsm::finalize() {
    out_.clear();
    for (EdgeId e = 0; e < edges.size(); ++e) out_[edges[e].src].push_back(e);
}

const std::vector<EdgeId>& Rsm::outgoing(const Location& loc) const {
    static const std::vector<EdgeId> none;
    const auto it = out_.find(loc);
    return it == out_.end() ? none : it->second;
}

CompId Rsm::comp_of(const Location& loc) const {
    return loc.kind == LocKind::node ? nodes.at(loc.id).comp : boxes.at(loc.id).owner;
}

bool Rsm::valid(const Location& loc) const {
    if (loc.kind == LocKind::node) return loc.id < nodes.size();
    if (loc.id >= boxes.size() || loc.port >= nodes.size()) return false;
    const Node& p = nodes[loc.port];
    if (p.comp != boxes[loc.id].callee) return false;
    return loc.kind == LocKind::call ? p.entry : p.exit;
}

std::string Rsm::loc_name(const Location& loc) const {
    if (loc.kind == LocKind::node) return nodes.at(loc.id).name;
    return boxes.at(loc.id).name + "." + nodes.at(loc.port).name;
}

RsmSolver::RsmSolver(const Rsm& rsm, std::vector<NodeId> roots) : rsm_(rsm), roots_(std::move(roots)) {
    for (auto r : roots_) {
        if (r >= rsm_.nodes.size() || !rsm_.nodes[r].entry) throw std::invalid_argument("root is not an entry");
        add({r, Location::node(r)}, {});
    }
    saturate();
}

void RsmSolver::add(const Fact& f, Pred p) {
    if (pred_.emplace(f, p).second) queue_.push_back(f);
}

void RsmSolver::saturate() {
    for (std::size_t head = 0; head < queue_.size(); ++head) {
        const auto [en, q] = queue_[head];
        for (auto e : rsm_.outgoing(q)) add({en, rsm_.edges[e].dst}, {Pred::Kind::edge, q, e, 0, 0});
        if (q.kind == LocKind::call) {
            const NodeId callee_en = q.port;
            callers_[callee_en].emplace_back(en, q.id);
            if (!started_by_.contains(callee_en)) {
                started_by_.emplace(callee_en, std::make_pair(en, q.id));
                add({callee_en, Location::node(callee_en)}, {});
            }
            for (auto ex : exits_of_[callee_en])
                add({en, Location::ret(q.id, ex)}, {Pred::Kind::summary, q, 0, callee_en, ex});
        } else if (q.kind == LocKind::node && rsm_.nodes[q.id].exit) {
            if (summaries_.pairs_.insert({en, q.id}).second) {
                exits_of_[en].push_back(q.id);
                for (const auto& [caller_en, box] : callers_[en])
                    add({caller_en, Location::ret(box, q.id)},
                        {Pred::Kind::summary, Location::call(box, en), 0, en, q.id});
            }
        }
    }
}

void RsmSolver::expand(const Fact& f, std::vector<RsmStep>& out) const {
    const Pred& p = pred_.at(f);
    switch (p.kind) {
        case Pred::Kind::init: return;
        case Pred::Kind::edge:
            expand({f.first, p.from}, out);
            out.push_back({RsmStepKind::edge, p.edge, f.second});
            return;
        case Pred::Kind::summary:
            expand({f.first, p.from}, out);
            out.push_back({RsmStepKind::call, std::nullopt, Location::node(p.callee_entry)});
            expand({p.callee_entry, Location::node(p.callee_exit)}, out);
            out.push_back({RsmStepKind::ret, std::nullopt, f.second});
            return;
    }
}

std::optional<RsmRun> RsmSolver::reach(const std::set<Location>& targets, bool termination_only) const {
    // FIFO discovery order makes the first matching fact in queue order the earliest found.
    for (const auto& f : queue_) {
        if (!targets.contains(f.second)) continue;
        const bool is_root = std::find(roots_.begin(), roots_.end(), f.first) != roots_.end();
        if (termination_only && !is_root) continue;
        // Chain of starting calls from a root down to f.first.
        std::vector<std::pair<NodeId, BoxId>> chain;
        NodeId en = f.first;
        while (std::find(roots_.begin(), roots_.end(), en) == roots_.end()) {
            const auto& [caller, box] = started_by_.at(en);
            chain.emplace_back(en, box);
            en = caller;
        }
        RsmRun run;
        run.init = Location::node(en);
        NodeId cur = en;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            expand({cur, Location::call(it->second, it->first)}, run.steps);
            run.steps.push_back({RsmStepKind::call, std::nullopt, Location::node(it->first)});
            cur = it->first;
        }
        expand(f, run.steps);
        return run;
    }
    return std::nullopt;
}

SummaryTable compute_summaries(const Rsm& rsm) {
    std::vector<NodeId> roots;
    for (NodeId n = 0; n < rsm.nodes.size(); ++n)
        if (rsm.nodes[n].entry) roots.push_back(n);
    return RsmSolver(rsm, roots).summaries();
}

RsmReachResult reachable(const Rsm& rsm, const Location& init, const std::set<Location>& targets,
                         bool termination_only) {
    if (!rsm.valid(init) || init.kind != LocKind::node || !rsm.nodes[init.id].entry)
        throw std::invalid_argument("init must be an entry node");
    for (const auto& t : targets)
        if (!rsm.valid(t)) throw std::invalid_argument("unknown target location");
    RsmSolver solver(rsm, {init.id});
    auto w = solver.reach(targets, termination_only);
    return {w.has_value(), std::move(w)};
}

std::optional<std::size_t> validate_rsm_run(const Rsm& rsm, const RsmRun& run) {
    std::vector<BoxId> stack;
    Location cur = run.init;
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
        const RsmStep& s = run.steps[i];
        switch (s.kind) {
            case RsmStepKind::edge: {
                if (!s.edge || *s.edge >= rsm.edges.size()) return i + 1;
                const auto& e = rsm.edges[*s.edge];
                if (e.src != cur || e.dst != s.to) return i + 1;
                break;
            }
            case RsmStepKind::call:
                if (cur.kind != LocKind::call || s.to != Location::node(cur.port)) return i + 1;
                stack.push_back(cur.id);
                break;
            case RsmStepKind::ret:
                if (cur.kind != LocKind::node || !rsm.nodes[cur.id].exit || stack.empty()) return i + 1;
                if (s.to != Location::ret(stack.back(), cur.id)) return i + 1;
                stack.pop_back();
                break;
        }
        cur = s.to;
    }
    return std::nullopt;
}

}  // namespace rha
