#include "rha/cm.hpp"

#include <map>
#include <optional>

#include "rha/parser.hpp"

namespace rha {

using detail::Token;
using detail::TokenCursor;
using detail::TokKind;

const char* counter_name(Counter c) { return c == Counter::c ? "c" : "d"; }

namespace {

struct Statement {
    std::optional<std::size_t> label;
    CmInstr instr;
    Token at;
};

Counter counter(TokenCursor& cur) {
    const Token& t = cur.take();
    if (t.kind == TokKind::ident && t.text == "c") return Counter::c;
    if (t.kind == TokKind::ident && t.text == "d") return Counter::d;
    TokenCursor::fail_at(t, "expected counter c or d");
}

std::size_t label_ref(TokenCursor& cur) { return static_cast<std::size_t>(cur.natural("instruction label")); }

Statement statement(const std::vector<Token>& toks, std::size_t position) {
    TokenCursor cur(toks);
    Statement s;
    s.at = toks.front();
    if (cur.peek().kind == TokKind::number) {
        s.label = label_ref(cur);
        cur.expect(":");
    }
    const Token& kw = cur.take();
    if (kw.kind != TokKind::ident) TokenCursor::fail_at(kw, "expected an instruction");
    if (kw.text == "inc" || kw.text == "dec") {
        s.instr.op = kw.text == "inc" ? CmOp::inc : CmOp::dec;
        s.instr.ctr = counter(cur);
        s.instr.target = position + 1;
        if (!cur.at_end()) {
            if (cur.ident("goto") != "goto") cur.fail("expected goto");
            s.instr.target = label_ref(cur);
        }
    } else if (kw.text == "ifz") {
        s.instr.op = CmOp::ifz;
        s.instr.ctr = counter(cur);
        if (cur.ident("goto") != "goto") cur.fail("expected goto");
        s.instr.target = label_ref(cur);
        if (cur.ident("else") != "else") cur.fail("expected else");
        s.instr.alt = label_ref(cur);
    } else if (kw.text == "halt") {
        s.instr.op = CmOp::halt;
    } else {
        TokenCursor::fail_at(kw, "unknown instruction '" + kw.text + "'");
    }
    if (!cur.at_end()) cur.fail("trailing tokens");
    return s;
}

}  // namespace

CounterMachine parse_cm(std::string_view text) {
    detail::Lexer lex(text);
    std::vector<Token> line;
    std::vector<Statement> stmts;
    while (lex.next_line(line)) {
        std::vector<Token> cur;
        auto flush = [&] {
            if (!cur.empty()) stmts.push_back(statement(cur, stmts.size()));
            cur.clear();
        };
        for (auto& t : line) {
            if (t.kind == TokKind::symbol && (t.text == ";" || t.text == "/")) flush();
            else cur.push_back(t);
        }
        flush();
    }
    if (stmts.empty()) throw ParseError({1, 1, "missing halt"});
    std::map<std::size_t, const Statement*> by_label;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
        const std::size_t l = stmts[i].label.value_or(i);
        if (!by_label.emplace(l, &stmts[i]).second)
            TokenCursor::fail_at(stmts[i].at, "duplicate label " + std::to_string(l));
    }
    CounterMachine cm;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
        const auto it = by_label.find(i);
        if (it == by_label.end()) throw ParseError({1, 1, "missing label " + std::to_string(i)});
        cm.prog.push_back(it->second->instr);
    }
    for (std::size_t i = 0; i < cm.prog.size(); ++i) {
        const CmInstr& in = cm.prog[i];
        const Token& at = by_label.at(i)->at;
        auto check = [&](std::size_t l) {
            if (l >= cm.prog.size()) TokenCursor::fail_at(at, "goto " + std::to_string(l) + " is out of range");
        };
        if (in.op != CmOp::halt) check(in.target);
        if (in.op == CmOp::ifz) check(in.alt);
    }
    if (cm.prog.back().op != CmOp::halt) TokenCursor::fail_at(by_label.rbegin()->second->at, "missing halt");
    return cm;
}

std::string serialize_cm(const CounterMachine& cm) {
    std::string out;
    for (std::size_t i = 0; i < cm.prog.size(); ++i) {
        const CmInstr& in = cm.prog[i];
        out += std::to_string(i) + ": ";
        const std::string ctr = counter_name(in.ctr);
        switch (in.op) {
            case CmOp::inc: out += "inc " + ctr + " goto " + std::to_string(in.target); break;
            case CmOp::dec: out += "dec " + ctr + " goto " + std::to_string(in.target); break;
            case CmOp::ifz:
                out += "ifz " + ctr + " goto " + std::to_string(in.target) + " else " + std::to_string(in.alt);
                break;
            case CmOp::halt: out += "halt"; break;
        }
        out += '\n';
    }
    return out;
}

CmRun cm_run(const CounterMachine& cm, std::size_t max_steps) {
    CmRun r;
    CmConfig cur;
    r.trace.push_back(cur);
    for (std::size_t step = 1; step <= max_steps; ++step) {
        const CmInstr& in = cm.prog.at(cur.pc);
        if (in.op == CmOp::halt) break;
        std::uint64_t& v = in.ctr == Counter::c ? cur.c : cur.d;
        switch (in.op) {
            case CmOp::inc:
                ++v;
                cur.pc = in.target;
                break;
            case CmOp::dec:
                if (v == 0) throw CmTrap(step, cur.pc);
                --v;
                cur.pc = in.target;
                break;
            case CmOp::ifz: cur.pc = v == 0 ? in.target : in.alt; break;
            case CmOp::halt: break;
        }
        r.trace.push_back(cur);
    }
    r.halted = cm.prog.at(cur.pc).op == CmOp::halt;
    return r;
}

}  // namespace rha
