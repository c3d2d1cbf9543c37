#include <doctest.h>

#include <random>

#include "rha/semantics.hpp"
#include "rha/trace_io.hpp"
#include "sem_helpers.hpp"

using namespace rha;
using rha::test::R;

namespace {

DelayOracle db_oracle(const Model& m) {
    const NodeId en = *m.node_index("en");
    return [&m, en, fallback = earliest_oracle(m)](const Configuration& c) -> std::optional<Choice> {
        if (c.loc == Location::node(en)) return Choice{Rational(2) * c.val[0], m.outgoing(c.loc).front()};
        return fallback(c);
    };
}

}  // namespace

TEST_CASE("call port pushes the caller valuation") {
    const Model m = test::load_model("db2sw.rha");
    const BoxId b1 = *m.box_index("B1");
    const NodeId en1 = *m.node_index("en1");
    const Configuration at_call{{}, Location::call(b1, en1), test::val({"1/6", "1/3"})};
    const Step s = step(m, at_call, Rational(0), std::nullopt);
    CHECK(s.kind == StepKind::call);
    REQUIRE(s.to.context.size() == 1);
    CHECK(s.to.context[0] == Frame{b1, test::val({"1/6", "1/3"})});
    CHECK(s.to.loc == Location::node(en1));
    CHECK(s.to.val == at_call.val);
    CHECK_THROWS_WITH_AS(step(m, at_call, R("1/2"), std::nullopt), doctest::Contains("nonzero delay"), StepError);
}

TEST_CASE("exit restores exactly the by-value variables") {
    const Model m = test::load_model("db2sw.rha");
    const BoxId b2 = *m.box_index("B2");
    const NodeId ex2 = *m.node_index("ex2");
    const Rational x_old = R("1/6");
    const Rational t = R("1/3");
    const Configuration at_exit{{Frame{b2, Valuation({x_old, t})}}, Location::node(ex2),
                                Valuation({Rational(1), t + Rational(1) - x_old})};
    const Step s = step(m, at_exit, Rational(0), std::nullopt);
    CHECK(s.kind == StepKind::ret);
    CHECK(s.to.context.empty());
    CHECK(s.to.loc == Location::ret(b2, ex2));
    CHECK(s.to.val == Valuation({x_old, Rational(1) + t - x_old}));

    const Configuration terminal{{}, Location::node(ex2), at_exit.val};
    CHECK(is_termination(m, terminal));
    CHECK_THROWS_WITH_AS(step(m, terminal, Rational(0), std::nullopt), doctest::Contains("empty context"), StepError);
}

TEST_CASE("transition step errors") {
    const Model m = test::load_model("db2sw.rha");
    const NodeId en2 = *m.node_index("en2");
    const EdgeId e = m.outgoing(Location::node(en2)).front();
    const Configuration c{{}, Location::node(en2), test::val({"1/2", "0"})};
    CHECK_THROWS_WITH_AS(step(m, c, R("-1"), e), doctest::Contains("negative"), StepError);
    CHECK_THROWS_WITH_AS(step(m, c, R("1/4"), e), doctest::Contains("guard"), StepError);
    CHECK(step(m, c, R("1/2"), e).to.val == test::val({"1", "1/2"}));
    CHECK_THROWS_WITH_AS(step(m, c, R("1/2"), e + 1), doctest::Contains("not outgoing"), StepError);
    CHECK_THROWS_AS(step(m, c, R("1/2"), std::nullopt), StepError);
}

TEST_CASE("invariant violations are caught at both delay endpoints") {
    const Model m = parse_model(R"(model inv
vars x
kind clock
component C
  node a inv x<=1
  node b inv x>=2
  entry a
  exit b
  edge a -> b
init C.a x=0
)");
    const EdgeId e = 0;
    const Configuration c = initial_config(m);
    CHECK_THROWS_WITH_AS(step(m, c, R("3/2"), e), doctest::Contains("during delay"), StepError);
    CHECK_THROWS_WITH_AS(step(m, c, R("1"), e), doctest::Contains("at target"), StepError);
}

TEST_CASE("doubling gadget simulation") {
    const Model m = test::load_model("db2sw.rha");
    const SimResult r = simulate(m, db_oracle(m), 100);
    CHECK(r.status == SimStatus::terminated);
    CHECK(r.run.last().loc == Location::node(*m.node_index("ex")));
    CHECK(r.run.last().val == test::val({"0", "1/3"}));
    CHECK(r.run.duration() == Rational(2) * R("1/6") + Rational(2) * (Rational(1) - R("1/6")));
    CHECK_FALSE(validate_run_from_init(m, r.run));

    // the same run with t != 2*x_old fails exactly at the y=2 guard
    std::vector<Rational> delays;
    for (const auto& s : r.run.steps) delays.push_back(s.delay);
    delays[0] = R("1/3") + R("1/100");
    const Run bad = test::replay_with_delays(m, r.run, delays);
    const auto v = validate_run(m, bad);
    REQUIRE(v);
    CHECK(m.edges[*r.run.steps[v->step - 1].edge].guard == RectConstraint{{Atom{1, Rel::eq, 2}}});
    CHECK(v->reason.find("guard") != std::string::npos);

    // trace round trip of the accepting run
    const Run back = read_trace(m, write_trace(m, r.run));
    CHECK_FALSE(validate_run(m, back));
    CHECK(back.duration() == r.run.duration());
}

TEST_CASE("simulate with zero steps returns the initial configuration") {
    const Model m = test::load_model("db2sw.rha");
    const SimResult r = simulate(m, db_oracle(m), 0);
    CHECK(r.run.steps.empty());
    CHECK(r.status == SimStatus::bound);
    CHECK(r.run.init == initial_config(m));
}

TEST_CASE("illegal oracle choices are reported with the configuration") {
    const Model m = test::load_model("db2sw.rha");
    const DelayOracle wrong = [&m](const Configuration& c) -> std::optional<Choice> {
        return Choice{R("1/5"), m.outgoing(c.loc).front()};
    };
    try {
        (void)simulate(m, wrong, 100);
        FAIL("expected a simulation error");
    } catch (const SimulationError& e) {
        CHECK(e.at().loc == Location::node(*m.node_index("en2")));
    }
}

TEST_CASE("unbounded-context run validates with duration one") {
    const Model m = test::load_model("refnocnt.rha");
    const Run run = test::unbounded_context_run(m);
    CHECK(run.steps.size() == 21);
    CHECK_FALSE(validate_run_from_init(m, run));
    CHECK(run.duration() == Rational(1));
    CHECK(is_termination(m, run.last()));
    std::size_t deepest = 0;
    for (const auto& s : run.steps) deepest = std::max(deepest, s.to.context.size());
    CHECK(deepest == 5);

    // dropping a frame after a call breaks the call/entry correspondence
    Run broken = run;
    broken.steps[3].to.context.pop_back();
    const auto v = validate_run(m, broken);
    REQUIRE(v);
    CHECK(v->step == 4);
    CHECK(v->reason == "call/entry mismatch");

    Run broken_ret = run;
    broken_ret.steps[11].to.context.pop_back();
    REQUIRE(validate_run(m, broken_ret));
    CHECK(validate_run(m, broken_ret)->reason == "exit/return mismatch");
}

TEST_CASE("by-value restore and duration over simulated runs") {
    const Model m = test::load_model("gf2sw.rha");
    std::mt19937_64 rng(test::seed_from_env(5));
    for (int trial = 0; trial < 200; ++trial) {
        const DelayOracle random_oracle = [&](const Configuration& c) -> std::optional<Choice> {
            std::vector<Choice> options;
            for (auto e : m.outgoing(c.loc)) {
                const TimeWindow w = edge_window(m, c, e);
                if (w.empty) continue;
                if (auto t = w.pick()) options.push_back({*t, e});
                if (w.hi && !w.hi_open) options.push_back({*w.hi, e});
                if (!w.hi) options.push_back({w.lo + Rational(1, 64) + test::random_rational(rng, 2, 7), e});
            }
            if (options.empty()) return std::nullopt;
            std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
            return options[pick(rng)];
        };
        const SimResult r = simulate(m, random_oracle, 40);
        CHECK_FALSE(validate_run_from_init(m, r.run));
        Rational sum;
        std::vector<Valuation> at_call;
        for (std::size_t i = 0; i < r.run.steps.size(); ++i) {
            const Step& s = r.run.steps[i];
            sum += s.delay;
            if (s.kind == StepKind::call) at_call.push_back(r.run.config(i).val);
            if (s.kind == StepKind::ret) {
                REQUIRE_FALSE(at_call.empty());
                const Box& b = m.boxes[s.to.loc.id];
                for (VarIndex v = 0; v < m.nvars(); ++v) {
                    if (b.by_value.contains(v)) CHECK(s.to.val[v] == at_call.back()[v]);
                }
                at_call.pop_back();
            }
        }
        CHECK(sum == r.run.duration());
    }
}

TEST_CASE("delay windows agree with pointwise evaluation") {
    std::mt19937_64 rng(test::seed_from_env(17));
    std::uniform_int_distribution<int> rel(0, 4);
    std::uniform_int_distribution<std::int64_t> k(0, 3);
    std::uniform_int_distribution<std::int64_t> rate(0, 2);
    std::uniform_int_distribution<int> natoms(0, 3);
    for (int i = 0; i < 1000; ++i) {
        RectConstraint c;
        const int n = natoms(rng);
        for (int a = 0; a < n; ++a) c.atoms.push_back(Atom{static_cast<VarIndex>(a % 2), static_cast<Rel>(rel(rng)), k(rng)});
        const Valuation v({test::random_rational(rng, 3, 4), test::random_rational(rng, 3, 4)});
        const RateVector r{rate(rng), rate(rng)};
        const TimeWindow w = delay_window(c, v, r);
        for (int num = 0; num <= 96; ++num) {
            const Rational t(num, 16);
            CHECK(w.contains(t) == c.holds(evolve_and_reset(v, r, t)));
        }
        if (auto t = w.pick()) CHECK(c.holds(evolve_and_reset(v, r, *t)));
    }
}

TEST_CASE("endpoint invariant checks agree with dense sampling") {
    std::mt19937_64 rng(test::seed_from_env(19));
    std::uniform_int_distribution<int> rel(0, 4);
    std::uniform_int_distribution<std::int64_t> k(0, 3);
    std::uniform_int_distribution<std::int64_t> rate(0, 2);
    for (int i = 0; i < 1000; ++i) {
        RectConstraint c{{Atom{0, static_cast<Rel>(rel(rng)), k(rng)}, Atom{1, static_cast<Rel>(rel(rng)), k(rng)}}};
        const Valuation v({test::random_rational(rng, 3, 6), test::random_rational(rng, 3, 6)});
        const RateVector r{rate(rng), rate(rng)};
        const Rational t = test::random_rational(rng, 3, 6);
        const bool endpoints = c.holds(v) && c.holds(evolve_and_reset(v, r, t));
        bool dense = true;
        for (int s = 0; s <= 128 && dense; ++s) dense = c.holds(evolve_and_reset(v, r, t * Rational(s, 128)));
        CHECK(endpoints == dense);
    }
}
