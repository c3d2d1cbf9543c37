#include "rha/trace_io.hpp"

#include <json.hpp>

namespace rha {

namespace {

using nlohmann::ordered_json;

ordered_json val_json(const Model& m, const Valuation& v) {
    ordered_json o = ordered_json::object();
    for (VarIndex i = 0; i < m.nvars(); ++i) o[m.vars[i]] = v[i].str();
    return o;
}

ordered_json conf_json(const Model& m, const Configuration& c) {
    ordered_json ctx = ordered_json::array();
    for (const auto& f : c.context) {
        ordered_json fr;
        fr["box"] = m.boxes[f.box].name;
        fr["saved"] = val_json(m, f.saved);
        ctx.push_back(std::move(fr));
    }
    ordered_json o;
    o["context"] = std::move(ctx);
    o["loc"] = m.loc_name(c.loc);
    o["val"] = val_json(m, c.val);
    return o;
}

const ordered_json& field(const ordered_json& o, const char* key, const std::string& where) {
    if (!o.is_object() || !o.contains(key)) throw TraceError(where + ": missing field '" + key + "'");
    return o.at(key);
}

Rational rat(const ordered_json& j, const std::string& where) {
    if (!j.is_string()) throw TraceError(where + ": rational must be a \"p/q\" string");
    try {
        return Rational::parse(j.get<std::string>());
    } catch (const std::exception& e) {
        throw TraceError(where + ": " + e.what());
    }
}

Valuation val_from(const Model& m, const ordered_json& j, const std::string& where) {
    if (!j.is_object()) throw TraceError(where + ": valuation must be an object");
    Valuation v(m.nvars());
    for (VarIndex i = 0; i < m.nvars(); ++i) {
        if (!j.contains(m.vars[i])) throw TraceError(where + ": missing value for '" + m.vars[i] + "'");
        v[i] = rat(j.at(m.vars[i]), where);
    }
    if (j.size() != m.nvars()) throw TraceError(where + ": unknown variable in valuation");
    return v;
}

Configuration conf_from(const Model& m, const ordered_json& j, const std::string& where) {
    Configuration c;
    const auto& ctx = field(j, "context", where);
    if (!ctx.is_array()) throw TraceError(where + ": context must be an array");
    for (const auto& fr : ctx) {
        const auto& box = field(fr, "box", where + " frame");
        if (!box.is_string()) throw TraceError(where + ": frame box must be a string");
        const auto b = m.box_index(box.get<std::string>());
        if (!b) throw TraceError(where + ": unknown box '" + box.get<std::string>() + "'");
        if (!fr.contains("saved")) throw TraceError(where + ": malformed frame (saved valuation missing)");
        c.context.push_back(Frame{*b, val_from(m, fr.at("saved"), where + " frame")});
    }
    const auto& loc = field(j, "loc", where);
    if (!loc.is_string()) throw TraceError(where + ": loc must be a string");
    const auto l = m.parse_loc(loc.get<std::string>());
    if (!l) throw TraceError(where + ": unknown location '" + loc.get<std::string>() + "'");
    c.loc = *l;
    c.val = val_from(m, field(j, "val", where), where);
    return c;
}

}  // namespace

std::string write_trace(const Model& m, const Run& run) {
    ordered_json doc;
    doc["init"] = conf_json(m, run.init);
    ordered_json steps = ordered_json::array();
    for (const auto& s : run.steps) {
        ordered_json st;
        st["t"] = s.delay.str();
        st["action"] = s.action;
        st["to"] = conf_json(m, s.to);
        steps.push_back(std::move(st));
    }
    doc["steps"] = std::move(steps);
    return doc.dump(1) + "\n";
}

namespace {

// Traces name actions, not edges; the edge is the first one with that action that reproduces the step.
std::optional<EdgeId> replaying_edge(const Model& m, const Configuration& from, const Step& s) {
    for (EdgeId e : m.outgoing(from.loc)) {
        if (m.edges[e].action != s.action) continue;
        try {
            if (step(m, from, s.delay, e).to == s.to) return e;
        } catch (const StepError&) {
        } catch (const std::invalid_argument&) {
        }
    }
    return std::nullopt;
}

}  // namespace

Run read_trace(const Model& m, std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw TraceError(std::string("malformed JSON: ") + e.what());
    }
    Run run;
    run.init = conf_from(m, field(doc, "init", "trace"), "init");
    const auto& steps = field(doc, "steps", "trace");
    if (!steps.is_array()) throw TraceError("steps must be an array");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string where = "step " + std::to_string(i + 1);
        Step s;
        s.delay = rat(field(steps[i], "t", where), where);
        const auto& act = field(steps[i], "action", where);
        if (!act.is_string()) throw TraceError(where + ": action must be a string");
        s.action = act.get<std::string>();
        s.kind = s.action == "call" ? StepKind::call : s.action == "return" ? StepKind::ret : StepKind::edge;
        s.to = conf_from(m, field(steps[i], "to", where), where);
        if (s.kind == StepKind::edge) s.edge = replaying_edge(m, run.last(), s);
        run.steps.push_back(std::move(s));
    }
    return run;
}

}  // namespace rha
