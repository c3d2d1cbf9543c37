#include "rha/skeleton.hpp"

#include <stdexcept>

#include "rha/linear.hpp"

namespace rha {

CtxLoc ctxloc_of(const Configuration& c) {
    CtxLoc cl{{}, c.loc};
    for (const auto& f : c.context) cl.context.push_back(f.box);
    return cl;
}

Skeleton skeleton_of(const Run& r) {
    Skeleton s{ctxloc_of(r.init), {}};
    for (const auto& st : r.steps) s.steps.push_back({st.kind, st.edge, ctxloc_of(st.to)});
    return s;
}

std::string describe(const Model& m, const CtxLoc& cl) {
    std::string s = "<";
    for (std::size_t i = 0; i < cl.context.size(); ++i) s += (i ? " " : "") + m.boxes[cl.context[i]].name;
    return s + ">," + m.loc_name(cl.loc);
}

void require_by_reference(const Model& m) {
    for (const auto& b : m.boxes)
        if (!b.by_value.empty()) throw std::invalid_argument("box " + b.name + " passes variables by value");
}

std::vector<SkelStep> skeleton_successors(const Model& m, const CtxLoc& cl, std::size_t k) {
    std::vector<SkelStep> out;
    if (cl.loc.kind == LocKind::call) {
        if (cl.context.size() < k) {
            CtxLoc to{cl.context, Location::node(cl.loc.port)};
            to.context.push_back(cl.loc.id);
            out.push_back({StepKind::call, std::nullopt, std::move(to)});
        }
        return out;
    }
    if (cl.loc.kind == LocKind::node && m.is_exit(cl.loc.id)) {
        if (!cl.context.empty()) {
            CtxLoc to{cl.context, Location::ret(cl.context.back(), cl.loc.id)};
            to.context.pop_back();
            out.push_back({StepKind::ret, std::nullopt, std::move(to)});
        }
        return out;
    }
    for (auto e : m.outgoing(cl.loc)) out.push_back({StepKind::edge, e, {cl.context, m.edges[e].dst}});
    return out;
}

namespace {

using AffVal = std::vector<LinExpr>;

void constrain(LinearSystem& sys, const RectConstraint& c, const AffVal& v) {
    for (const auto& a : c.atoms) {
        const LinExpr k = LinExpr::cst(Rational(static_cast<long>(a.bound)));
        const LinExpr& x = v.at(a.var);
        switch (a.rel) {
            case Rel::lt: sys.lt(x, k); break;
            case Rel::le: sys.le(x, k); break;
            case Rel::eq: sys.eq(x, k); break;
            case Rel::ge: sys.ge(x, k); break;
            case Rel::gt: sys.gt(x, k); break;
        }
    }
}

}  // namespace

std::optional<LpWitness> lp_feasible(const Model& m, const Skeleton& s, const Valuation& init, const LpOptions& opt) {
    const std::size_t nv = m.nvars();
    LinearSystem sys;
    std::vector<std::optional<LinVar>> tvar(s.size());
    std::vector<AffVal> vals;
    AffVal cur;
    for (std::size_t i = 0; i < nv; ++i) cur.push_back(LinExpr::cst(init[i]));
    vals.push_back(cur);
    constrain(sys, m.attr(s.init.loc).inv, cur);
    LinExpr total;
    std::vector<AffVal> saved(s.init.context.size(), cur);
    for (std::size_t p = 0; p < s.size(); ++p) {
        const SkelStep& st = s.steps[p];
        const Location& from = s.at(p).loc;
        if (st.kind == StepKind::edge) {
            const LinVar t = sys.new_var("t" + std::to_string(p + 1));
            tvar[p] = t;
            sys.ge(LinExpr::var(t), LinExpr{});
            total += LinExpr::var(t);
            const LocAttr& a = m.attr(from);
            AffVal w = cur;
            for (std::size_t i = 0; i < nv; ++i) w[i] += LinExpr::var(t, Rational(static_cast<long>(a.rate[i])));
            constrain(sys, a.inv, w);
            if (!st.edge) throw std::invalid_argument("skeleton step " + std::to_string(p + 1) + " names no edge");
            const Edge& e = m.edges.at(*st.edge);
            constrain(sys, e.guard, w);
            for (std::size_t i = 0; i < nv; ++i)
                if (e.reset.contains(static_cast<VarIndex>(i))) w[i] = LinExpr{};
            cur = std::move(w);
        }
        if (st.kind == StepKind::call) saved.push_back(cur);
        if (st.kind == StepKind::ret) {
            const VarSet bv = m.boxes.at(st.to.loc.id).by_value;
            for (std::size_t i = 0; i < nv; ++i)
                if (bv.contains(static_cast<VarIndex>(i))) cur[i] = saved.back()[i];
            saved.pop_back();
        }
        constrain(sys, m.attr(st.to.loc).inv, cur);
        vals.push_back(cur);
    }
    if (opt.bound) sys.le(total, LinExpr::cst(*opt.bound));
    if (opt.exact_duration) sys.eq(total, LinExpr::cst(*opt.exact_duration));
    for (const auto& [p, d] : opt.fixed_delays) {
        if (p >= s.size()) throw std::invalid_argument("fixed delay index out of range");
        if (tvar[p]) sys.eq(LinExpr::var(*tvar[p]), LinExpr::cst(d));
        else if (d.sign() != 0) return std::nullopt;
    }
    if (opt.end)
        for (std::size_t i = 0; i < nv; ++i) sys.eq(cur[i], LinExpr::cst((*opt.end)[i]));

    const auto x = solve(sys);
    if (!x) return std::nullopt;
    LpWitness w;
    for (std::size_t p = 0; p < s.size(); ++p) w.delays.push_back(tvar[p] ? (*x)[*tvar[p]] : Rational());
    for (const auto& v : vals) {
        std::vector<Rational> out;
        for (const auto& e : v) out.push_back(e.eval(*x));
        w.valuations.emplace_back(std::move(out));
    }
    return w;
}

Run witness_run(const Model& m, const Skeleton& s, const Valuation& init, const LpWitness& w) {
    Run r;
    r.init = Configuration{{}, s.init.loc, init};
    // Frames record the valuation at call time; the skeleton's initial context (if any) gets the initial one.
    for (auto b : s.init.context) r.init.context.push_back({b, init});
    Configuration c = r.init;
    for (std::size_t p = 0; p < s.size(); ++p) {
        const SkelStep& st = s.steps[p];
        Step step_out = step(m, c, w.delays[p], st.kind == StepKind::edge ? st.edge : std::nullopt);
        if (ctxloc_of(step_out.to) != st.to) throw StepError("witness leaves the skeleton at step " + std::to_string(p + 1));
        c = step_out.to;
        r.steps.push_back(std::move(step_out));
    }
    return r;
}

}  // namespace rha
