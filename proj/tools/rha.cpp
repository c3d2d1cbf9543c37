// rha: command-line front end. Exit 0 = yes/valid, 1 = no/unreachable/invalid, 2 = usage, parse or internal error.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "rha/cm.hpp"
#include "rha/contraction.hpp"
#include "rha/gadgets.hpp"
#include "rha/parser.hpp"
#include "rha/region2sw.hpp"
#include "rha/region_rsm.hpp"
#include "rha/semantics.hpp"
#include "rha/tbreach.hpp"
#include "rha/trace_io.hpp"

namespace {

using namespace rha;
using nlohmann::ordered_json;

enum Exit : int { kYes = 0, kNo = 1, kError = 2 };

// Usage, parse and I/O problems; reported on stderr with exit 2.
struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out || !(out << text)) throw CliError("cannot write " + path);
}

Model load_model(const std::string& path) {
    try {
        return parse_model(slurp(path));
    } catch (const ParseError& e) {
        throw CliError(path + ":" + e.what());
    }
}

CounterMachine load_cm(const std::string& path) {
    try {
        return parse_cm(slurp(path));
    } catch (const ParseError& e) {
        throw CliError(path + ":" + e.what());
    }
}

Rational parse_rational(const std::string& s, const char* what) {
    try {
        return Rational::parse(s);
    } catch (const std::exception&) {
        throw CliError(std::string("bad ") + what + " '" + s + "'");
    }
}

// "C.node" names a node of component C; anything else goes through the model's location syntax.
Location resolve_loc(const Model& m, const std::string& text) {
    if (auto l = m.parse_loc(text)) return *l;
    if (const auto dot = text.find('.'); dot != std::string::npos) {
        const auto c = m.comp_index(text.substr(0, dot));
        const auto n = m.node_index(text.substr(dot + 1));
        if (c && n && m.nodes[*n].comp == *c) return Location::node(*n);
    }
    throw CliError("unknown location '" + text + "'");
}

// Collects a verdict plus fields; renders as "key: value" lines or one JSON object.
class Report {
public:
    explicit Report(bool json) : json_(json) {}

    template <class T>
    void set(const std::string& key, const T& v) {
        obj_[key] = v;
    }
    void set(const std::string& key, const Rational& v) { obj_[key] = v.str(); }
    void line(const std::string& s) { lines_.push_back(s); }
    int finish(const std::string& verdict, int code) {
        if (json_) {
            ordered_json out;
            out["verdict"] = verdict;
            for (auto& [k, v] : obj_.items()) out[k] = v;
            if (!lines_.empty()) out["details"] = lines_;
            std::cout << out.dump(2) << "\n";
        } else {
            std::cout << "verdict: " << verdict << "\n";
            for (auto& [k, v] : obj_.items()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
            for (const auto& l : lines_) std::cout << l << "\n";
        }
        return code;
    }

private:
    bool json_;
    ordered_json obj_ = ordered_json::object();
    std::vector<std::string> lines_;
};

std::string class_summary(const ModelClass& c) {
    std::string s;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!s.empty()) s += ",";
        s += name;
    };
    add(c.clocks_only, "clocks");
    add(c.stopwatches_only, "stopwatches");
    add(c.glitch_free, "glitch-free");
    add(c.by_reference_only, "by-reference");
    add(c.hierarchical, "hierarchical");
    return s.empty() ? "general" : s;
}

std::string describe_rsm_loc(const RegionRsm& rg, const Location& l) {
    return rg.model.loc_name(rg.model_loc(l)) + " " + to_string(rg.region_at(l));
}

// ---- subcommands -----------------------------------------------------------------

struct Opts {
    std::string model;
    std::string trace;
    std::string target;
    std::string out;
    std::string cm;
    std::string encoding;
    std::string bound;
    std::string rates = "1,1";
    bool termination = false;
    std::size_t max_steps = 10000;
    std::size_t context = 1;
    std::optional<std::size_t> max_len;
    std::size_t jobs = 1;
    std::int64_t cmax = 1;
    std::size_t count = 40;
};

int cmd_validate(const Opts& o, Report& r) {
    const Model m = load_model(o.model);
    const auto rep = validate_model(m);
    r.set("model", m.name);
    r.set("class", class_summary(rep.cls));
    r.set("cmax", rep.cmax);
    r.set("rmax", rep.rmax);
    for (const auto& d : rep.diagnostics) r.line("error: " + d.message);
    return rep.ok() ? r.finish("valid", kYes) : r.finish("invalid", kNo);
}

void require_valid(const Model& m) {
    const auto rep = validate_model(m);
    if (!rep.ok()) throw CliError("model is invalid: " + rep.diagnostics.front().message);
}

int cmd_simulate(const Opts& o, Report& r) {
    const Model m = load_model(o.model);
    require_valid(m);
    std::optional<Location> target;
    if (!o.target.empty()) target = resolve_loc(m, o.target);
    std::function<bool(const Configuration&)> hit;
    if (target) hit = [&](const Configuration& c) { return c.loc == *target; };
    const SimResult sim = simulate(m, earliest_oracle(m), o.max_steps, hit);
    r.set("status", std::string(status_name(sim.status)));
    r.set("steps", sim.run.steps.size());
    r.set("duration", sim.run.duration());
    r.set("final", describe(m, sim.run.last()));
    if (!o.out.empty()) spill(o.out, write_trace(m, sim.run));
    const bool ok = target ? sim.status == SimStatus::target : sim.status == SimStatus::terminated;
    return r.finish(ok ? "yes" : "no", ok ? kYes : kNo);
}

int cmd_check_run(const Opts& o, Report& r) {
    const Model m = load_model(o.model);
    require_valid(m);
    Run run;
    try {
        run = read_trace(m, slurp(o.trace));
    } catch (const TraceError& e) {
        throw CliError(o.trace + ": " + e.what());
    }
    r.set("steps", run.steps.size());
    r.set("duration", run.duration());
    if (const auto v = validate_run_from_init(m, run)) {
        r.set("step", v->step);
        r.set("reason", v->reason);
        return r.finish("invalid", kNo);
    }
    return r.finish("valid", kYes);
}

int cmd_regions(const Opts& o, Report& r) {
    if (o.cmax < 0) throw CliError("--cmax must be non-negative");
    Rates2 rates{};
    {
        std::stringstream ss(o.rates);
        std::string part;
        std::size_t i = 0;
        while (std::getline(ss, part, ',')) {
            if (i >= 2 || (part != "0" && part != "1")) throw CliError("--rates expects two of 0/1, e.g. 1,0");
            rates[i++] = part == "1" ? 1 : 0;
        }
        if (i != 2) throw CliError("--rates expects two of 0/1, e.g. 1,0");
    }
    const auto regions = enumerate_regions(o.cmax);
    r.set("cmax", o.cmax);
    r.set("rates", std::to_string(rates[0]) + "," + std::to_string(rates[1]));
    r.set("count", regions.size());
    for (const Region& g : regions) {
        std::string chain;
        for (const Region& s : successor_chain(g, rates, o.cmax)) chain += " -> " + to_string(s);
        r.line(to_string(g) + chain);
    }
    return r.finish("yes", kYes);
}

int cmd_reach(const Opts& o, Report& r) {
    const Model m = load_model(o.model);
    require_valid(m);
    const auto cls = validate_model(m).cls;
    if (!cls.glitch_free || !cls.stopwatches_only || m.nvars() > 2)
        throw CliError("reach decides glitch-free models with at most two stopwatches; use tb-reach otherwise");
    std::set<Location> targets;
    if (!o.target.empty()) targets.insert(resolve_loc(m, o.target));
    else if (o.termination) targets = termination_targets(m);
    else throw CliError("reach needs --target or --termination");
    const RegionRsm rg = build_region_rsm(m);
    const auto res = region_reach(rg, targets, o.termination);
    r.set("rsm_nodes", rg.rsm.nodes.size());
    r.set("rsm_boxes", rg.rsm.boxes.size());
    if (res.witness) {
        r.line("witness:");
        r.line("  " + describe_rsm_loc(rg, res.witness->init));
        for (const auto& s : res.witness->steps) r.line("  " + describe_rsm_loc(rg, s.to));
    }
    return res.reachable ? r.finish("reachable", kYes) : r.finish("unreachable", kNo);
}

int cmd_tb_reach(const Opts& o, Report& r) {
    const Model m = load_model(o.model);
    require_valid(m);
    if (o.target.empty()) throw CliError("tb-reach needs --target");
    TbQuery q;
    q.targets = {resolve_loc(m, o.target)};
    q.termination_only = o.termination;
    q.bound = parse_rational(o.bound, "--bound");
    q.context = o.context;
    q.max_len = o.max_len;
    q.jobs = std::max<std::size_t>(o.jobs, 1);
    TbResult res;
    try {
        res = decide_tb_reach(m, q);
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
    r.set("bound_C", res.bound_c.get_str());
    r.set("effective_len", res.effective_len);
    r.set("length_limited", res.length_limited);
    r.set("checked", res.checked);
    if (res.witness) {
        r.set("duration", res.witness->duration());
        r.set("witness_steps", res.witness->steps.size());
        if (!o.out.empty()) spill(o.out, write_trace(m, *res.witness));
        for (std::size_t i = 0; i <= res.witness->steps.size(); ++i) r.line(describe(m, res.witness->config(i)));
    }
    return res.reachable ? r.finish("reachable", kYes) : r.finish("unreachable", kNo);
}

int cmd_contract(const Opts& o, Report& r) {
    const Model m = load_model(o.model);
    require_valid(m);
    Run run;
    try {
        run = read_trace(m, slurp(o.trace));
    } catch (const TraceError& e) {
        throw CliError(o.trace + ": " + e.what());
    }
    if (const auto v = validate_run_from_init(m, run)) throw CliError("trace is not a run: " + v->reason);
    const Rational T = o.bound.empty() ? run.duration() : parse_rational(o.bound, "--bound");
    std::size_t depth = 1;
    for (std::size_t i = 0; i <= run.steps.size(); ++i) depth = std::max(depth, run.config(i).context.size());
    PipelineResult pr;
    try {
        pr = contract_run(m, run, T);
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
    const auto nv = static_cast<std::int64_t>(m.nvars());
    const auto nb = static_cast<std::int64_t>(m.boxes.size());
    const auto K = static_cast<std::int64_t>(depth);
    const auto C = bound_C(T, m.rmax(), nv, nb, K, location_count(m), m.cmax());
    r.set("original_steps", run.steps.size());
    r.set("contracted_steps", pr.run.skel.size());
    r.set("type3_fragments", pr.split.type3.size());
    r.set("bound_C", C.get_str());
    r.set("duration", run.duration());
    const auto cert = certify(m, run, pr.run);
    if (!cert) return r.finish("uncertified", kError);
    const std::string trace = write_trace(m, *cert);
    if (!o.out.empty()) spill(o.out, trace);
    else r.set("trace", ordered_json::parse(trace));
    return r.finish("contracted", kYes);
}

Encoding encoding_of(const std::string& s) {
    if (const auto e = parse_encoding(s)) return *e;
    throw CliError("unknown encoding '" + s + "' (2sw, 3sw-gf, 5clk-tb, 14sw-tb)");
}

int cmd_compile_cm(const Opts& o, Report& r) {
    const CounterMachine cm = load_cm(o.cm);
    const GadgetBundle g = compile_cm(cm, encoding_of(o.encoding));
    const std::string text = serialize_model(g.model);
    if (o.out.empty()) {
        std::cout << text;
        return kYes;
    }
    spill(o.out, text);
    r.set("encoding", std::string(encoding_name(g.enc)));
    r.set("invariant", encoding_invariant(g.enc));
    r.set("components", g.model.components.size());
    r.set("boxes", g.model.boxes.size());
    r.set("output", o.out);
    return r.finish("yes", kYes);
}

int cmd_run_cm(const Opts& o, Report& r) {
    const CounterMachine cm = load_cm(o.cm);
    const GadgetBundle g = compile_cm(cm, encoding_of(o.encoding));
    CmRun cr;
    try {
        cr = cm_run(cm, o.max_steps);
    } catch (const CmTrap& t) {
        throw CliError(std::string("counter machine traps: ") + t.what());
    }
    const GadgetRun gr = simulate_gadget(g, o.max_steps);
    if (!o.trace.empty()) spill(o.trace, write_trace(g.model, gr.run));
    if (gr.decode_error) throw CliError("gadget run does not decode: " + *gr.decode_error);
    if (gr.status == SimStatus::deadlock)
        throw CliError("oracle found no step at " + describe(g.model, gr.run.last()));
    r.set("encoding", std::string(encoding_name(g.enc)));
    r.set("cm_halted", cr.halted);
    r.set("halt_reached", gr.halted);
    r.set("bound_exhausted", gr.bound_exhausted);
    r.set("instructions", gr.points.empty() ? 0 : gr.points.size() - 1);
    r.set("duration", gr.run.duration());
    r.set("steps", gr.run.steps.size());
    const auto durs = gr.instr_durations();
    for (std::size_t i = 0; i < gr.points.size(); ++i) {
        const auto& p = gr.points[i];
        std::string l = "k=" + std::to_string(i) + " instr=" + std::to_string(p.instr) + " c=" + std::to_string(p.c) +
                        " d=" + std::to_string(p.d) + " at=" + p.at.str();
        if (i < durs.size()) l += " dur=" + durs[i].str();
        r.line(l);
    }
    bool agrees = gr.halted == cr.halted && gr.points.size() == cr.trace.size();
    for (std::size_t i = 0; agrees && i < cr.trace.size(); ++i) {
        const auto& p = gr.points[i];
        agrees = p.instr == cr.trace[i].pc && p.c == cr.trace[i].c && p.d == cr.trace[i].d;
    }
    if (!agrees) return r.finish("mismatch", kError);
    return gr.halted ? r.finish("halted", kYes) : r.finish("bound-exhausted", kNo);
}

// ---- self test -------------------------------------------------------------------

// Random machine of n instructions plus halt; gotos stay in range.
CounterMachine random_cm(std::mt19937_64& rng, std::size_t n) {
    CounterMachine cm;
    std::uniform_int_distribution<int> op(0, 2);
    std::uniform_int_distribution<int> ctr(0, 1);
    std::uniform_int_distribution<std::size_t> to(0, n);
    for (std::size_t i = 0; i < n; ++i) {
        CmInstr in;
        in.op = static_cast<CmOp>(op(rng));
        in.ctr = ctr(rng) == 0 ? Counter::c : Counter::d;
        in.target = in.op == CmOp::ifz ? to(rng) : std::min(i + 1, n);
        in.alt = in.op == CmOp::ifz ? to(rng) : 0;
        cm.prog.push_back(in);
    }
    cm.prog.push_back(CmInstr{});
    return cm;
}

int cmd_self_test(const Opts& o, Report& r) {
    std::uint64_t seed = 1;
    if (const char* s = std::getenv("RHA_SEED")) seed = std::stoull(s);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(2, 6);
    std::size_t programs = 0;
    std::size_t checks = 0;
    std::size_t failures = 0;
    auto expect = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++failures;
            r.line("FAIL " + what);
        }
    };
    constexpr std::size_t kMax = 30;
    while (programs < o.count) {
        const CounterMachine cm = random_cm(rng, len(rng));
        CmRun cr;
        try {
            cr = cm_run(cm, kMax);
        } catch (const CmTrap&) {
            continue;  // gadgets assume dec is guarded
        }
        ++programs;
        const std::string tag = "seed " + std::to_string(seed) + " program " + std::to_string(programs);
        expect(parse_cm(serialize_cm(cm)) == cm, tag + ": cm round trip");
        for (Encoding e : {Encoding::sw2, Encoding::sw3_gf, Encoding::clk5_tb, Encoding::sw14_tb}) {
            const std::string t = tag + " " + encoding_name(e);
            const GadgetBundle g = compile_cm(cm, e);
            expect(validate_model(g.model).ok(), t + ": model validates");
            expect(parse_model(serialize_model(g.model)) == g.model, t + ": model round trip");
            const GadgetRun gr = simulate_gadget(g, kMax);
            bool same = !gr.decode_error && gr.halted == cr.halted && gr.points.size() == cr.trace.size();
            for (std::size_t i = 0; same && i < cr.trace.size(); ++i)
                same = gr.points[i].instr == cr.trace[i].pc && gr.points[i].c == cr.trace[i].c && gr.points[i].d == cr.trace[i].d;
            expect(same, t + ": gadget trace equals interpreter trace");
            expect(!validate_run_from_init(g.model, gr.run), t + ": gadget run is valid");
            expect(write_trace(g.model, read_trace(g.model, write_trace(g.model, gr.run))) == write_trace(g.model, gr.run),
                   t + ": trace round trip");
            if (e == Encoding::clk5_tb || e == Encoding::sw14_tb) {
                const auto durs = gr.instr_durations();
                Rational bound(9);
                bool within = gr.run.duration() < Rational(18);
                for (const auto& d : durs) {
                    within = within && d <= bound;
                    bound /= Rational(2);
                }
                expect(within, t + ": time bounds");
            }
        }
    }
    r.set("seed", seed);
    r.set("programs", programs);
    r.set("checks", checks);
    r.set("failures", failures);
    return failures == 0 ? r.finish("pass", kYes) : r.finish("fail", kNo);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recursive hybrid automata toolkit"};
    app.set_help_all_flag("--help-all", "Expand all help");
    std::string format = "text";
    bool self_test = false;
    Opts o;
    app.add_option("--out-format", format, "Report format")->check(CLI::IsMember({"text", "json"}));
    app.add_flag("--self-test", self_test, "Cross-check random counter machines against every encoding (seed: RHA_SEED)");
    app.add_option("--count", o.count, "Self-test: number of random programs");
    app.require_subcommand(0, 1);
    app.fallthrough();

    auto* validate = app.add_subcommand("validate", "Parse and validate a model");
    validate->add_option("model", o.model)->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate with the earliest-delay oracle");
    simulate_cmd->add_option("model", o.model)->required();
    simulate_cmd->add_option("--target", o.target, "Stop at this location");
    simulate_cmd->add_option("--max-steps", o.max_steps);
    simulate_cmd->add_option("--trace", o.out, "Write the run as a JSON trace");

    auto* check_run = app.add_subcommand("check-run", "Validate a JSON trace against a model");
    check_run->add_option("model", o.model)->required();
    check_run->add_option("trace", o.trace)->required();

    auto* regions = app.add_subcommand("regions", "List two-variable regions and their successor chains");
    regions->add_option("--cmax", o.cmax)->required();
    regions->add_option("--rates", o.rates, "Rates of x,y, each 0 or 1");

    auto* reach = app.add_subcommand("reach", "Untimed reachability through the region RSM");
    reach->add_option("model", o.model)->required();
    reach->add_option("--target", o.target);
    reach->add_flag("--termination", o.termination, "Require an empty context at the target");

    auto* tb = app.add_subcommand("tb-reach", "Time-bounded reachability for bounded contexts");
    tb->add_option("model", o.model)->required();
    tb->add_option("--target", o.target)->required();
    tb->add_option("--bound", o.bound, "Time bound T")->required();
    tb->add_option("--context", o.context, "Context bound K");
    tb->add_option("--max-len", o.max_len, "Skeleton length cap (default bound_C)");
    tb->add_option("--jobs", o.jobs, "Parallel feasibility checks");
    tb->add_option("--emit-witness", o.out, "Write the witness as a JSON trace");
    tb->add_flag("--termination", o.termination, "Require an empty context at the target");

    auto* contract = app.add_subcommand("contract", "Contract a run and certify the result");
    contract->add_option("model", o.model)->required();
    contract->add_option("trace", o.trace)->required();
    contract->add_option("--bound", o.bound, "Time bound T (default: the run's duration)");
    contract->add_option("-o,--out", o.out, "Write the contracted trace here");

    auto* compile = app.add_subcommand("compile-cm", "Compile a counter machine to a model");
    compile->add_option("program", o.cm)->required();
    compile->add_option("--encoding", o.encoding)->required();
    compile->add_option("-o,--out", o.out, "Output model file (default: stdout)");

    auto* run_cm = app.add_subcommand("run-cm", "Run a counter machine through its encoding");
    run_cm->add_option("program", o.cm)->required();
    run_cm->add_option("--encoding", o.encoding)->required();
    run_cm->add_option("--max-steps", o.max_steps, "Instruction bound");
    run_cm->add_option("--trace", o.trace, "Write the gadget run as a JSON trace");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kError;
    }

    Report report(format == "json");
    try {
        if (self_test) return cmd_self_test(o, report);
        if (validate->parsed()) return cmd_validate(o, report);
        if (simulate_cmd->parsed()) return cmd_simulate(o, report);
        if (check_run->parsed()) return cmd_check_run(o, report);
        if (regions->parsed()) return cmd_regions(o, report);
        if (reach->parsed()) return cmd_reach(o, report);
        if (tb->parsed()) return cmd_tb_reach(o, report);
        if (contract->parsed()) return cmd_contract(o, report);
        if (compile->parsed()) return cmd_compile_cm(o, report);
        if (run_cm->parsed()) return cmd_run_cm(o, report);
        std::cerr << app.help();
        return kError;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
    }
    return kError;
}
