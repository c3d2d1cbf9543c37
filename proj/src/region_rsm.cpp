#include "rha/region_rsm.hpp"

#include <stdexcept>

namespace rha {

namespace {

Model pad_to_two(const Model& m) {
    Model p = m;
    while (p.nvars() < 2) {
        p.vars.push_back("_pad" + std::to_string(p.nvars()));
        for (auto& n : p.nodes) n.attr.rate.push_back(0);
        for (auto& [loc, a] : p.port_attrs) a.rate.push_back(0);
        std::vector<Rational> v = p.init_val.values();
        v.emplace_back(0);
        p.init_val = Valuation(std::move(v));
    }
    p.finalize();
    return p;
}

std::string region_tag(const Region& r) { return "@" + to_string(r); }

}  // namespace

Region RegionRsm::region_at(const Location& l) const {
    switch (l.kind) {
        case LocKind::node: return node_of.at(l.id).second;
        case LocKind::call: return box_of.at(l.id).second;
        case LocKind::ret: {
            const auto& [b, r_old] = box_of.at(l.id);
            return model.boxes[b].by_value.is_all(model.nvars()) ? r_old : node_of.at(l.port).second;
        }
    }
    return {};
}

Location RegionRsm::model_loc(const Location& l) const {
    switch (l.kind) {
        case LocKind::node: return Location::node(node_of.at(l.id).first);
        case LocKind::call: return Location::call(box_of.at(l.id).first, node_of.at(l.port).first);
        case LocKind::ret: return Location::ret(box_of.at(l.id).first, node_of.at(l.port).first);
    }
    return {};
}

std::set<Location> RegionRsm::lift(const Location& ml) const {
    std::set<Location> out;
    const auto& inv = model.attr(ml).inv;
    if (ml.kind == LocKind::node) {
        for (const auto& [key, id] : node_ix)
            if (key.first == ml.id) out.insert(Location::node(id));
        return out;
    }
    for (const auto& [bkey, bid] : box_ix) {
        if (bkey.first != ml.id) continue;
        for (const auto& [nkey, nid] : node_ix) {
            if (nkey.first != ml.port) continue;
            const Location l = ml.kind == LocKind::call ? Location::call(bid, nid) : Location::ret(bid, nid);
            // a call port is only entered in the region its box records
            if (ml.kind == LocKind::call && nkey.second != bkey.second) continue;
            if (region_satisfies(region_at(l), inv, cmax)) out.insert(l);
        }
    }
    return out;
}

RegionRsm build_region_rsm(const Model& input) {
    const ModelClass cls = classify(input);
    if (!cls.glitch_free) throw std::invalid_argument("region RSM needs a glitch-free model");
    if (!cls.stopwatches_only) throw std::invalid_argument("region RSM needs stopwatch rates");
    if (input.nvars() > 2) throw std::invalid_argument("region RSM supports at most two variables");

    RegionRsm g;
    g.model = pad_to_two(input);
    const Model& m = g.model;
    g.cmax = m.cmax();
    const auto regions = enumerate_regions(g.cmax);

    for (const auto& c : m.components) g.rsm.add_component(c.name);
    for (NodeId n = 0; n < m.nodes.size(); ++n) {
        for (const auto& r : regions) {
            if (!region_satisfies(r, m.nodes[n].attr.inv, g.cmax)) continue;
            const NodeId id = g.rsm.add_node(m.nodes[n].comp, m.nodes[n].name + region_tag(r), m.is_entry(n),
                                             m.is_exit(n));
            g.node_of.emplace_back(n, r);
            g.node_ix.emplace(std::make_pair(n, r), id);
        }
    }
    for (BoxId b = 0; b < m.boxes.size(); ++b) {
        for (const auto& r : regions) {
            const BoxId id = g.rsm.add_box(m.boxes[b].owner, m.boxes[b].name + region_tag(r), m.boxes[b].callee);
            g.box_of.emplace_back(b, r);
            g.box_ix.emplace(std::make_pair(b, r), id);
        }
    }

    // Target RSM location of a model edge landing in region r; nullopt when the callee entry is excluded.
    auto target = [&](const Location& dst, const Region& r) -> std::optional<Location> {
        if (dst.kind == LocKind::node) {
            const auto it = g.node_ix.find({dst.id, r});
            if (it == g.node_ix.end()) return std::nullopt;
            return Location::node(it->second);
        }
        const auto en = g.node_ix.find({dst.port, r});
        if (en == g.node_ix.end()) return std::nullopt;
        return Location::call(g.box_ix.at({dst.id, r}), en->second);
    };
    auto add_moves = [&](const Location& rsm_src, const Location& model_src, const Region& r) {
        for (const auto& mv : region_moves(m, model_src, r, g.cmax)) {
            const Edge& ed = m.edges[mv.edge];
            if (const auto t = target(ed.dst, mv.target))
                g.rsm.add_edge(rsm_src, *t, "h=" + std::to_string(mv.hops) + " " + ed.action);
        }
    };

    for (NodeId id = 0; id < g.node_of.size(); ++id) {
        const auto& [n, r] = g.node_of[id];
        if (!m.is_exit(n)) add_moves(Location::node(id), Location::node(n), r);
    }
    for (BoxId bid = 0; bid < g.box_of.size(); ++bid) {
        const BoxId b = g.box_of[bid].first;
        for (auto ex : m.components[m.boxes[b].callee].exits) {
            for (const auto& r_now : regions) {
                const auto it = g.node_ix.find({ex, r_now});
                if (it == g.node_ix.end()) continue;
                const Location l = Location::ret(bid, it->second);
                add_moves(l, Location::ret(b, ex), g.region_at(l));
            }
        }
    }
    g.rsm.finalize();

    const auto init = g.node_ix.find({m.init_entry, region_of(m.init_val, g.cmax)});
    if (init == g.node_ix.end()) throw std::invalid_argument("initial valuation violates the entry invariant");
    g.init = init->second;
    return g;
}

std::set<Location> termination_targets(const Model& m) {
    std::set<Location> out;
    for (auto ex : m.components.at(m.nodes.at(m.init_entry).comp).exits) out.insert(Location::node(ex));
    return out;
}

RegionReachResult region_reach(const RegionRsm& rg, const std::set<Location>& model_targets, bool termination_only) {
    std::set<Location> targets;
    for (const auto& t : model_targets) {
        const auto l = rg.lift(t);
        targets.insert(l.begin(), l.end());
    }
    auto res = reachable(rg.rsm, Location::node(rg.init), targets, termination_only);
    return {res.reachable, std::move(res.witness)};
}

}  // namespace rha
