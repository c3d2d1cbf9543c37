#include <doctest.h>

#include <map>
#include <random>

#include "rha/contraction.hpp"
#include "rha/tbreach.hpp"
#include "run_gen.hpp"
#include "sem_helpers.hpp"

using namespace rha;

namespace {

// Pair sequence over letters; the step between two letters is identified by the ordered pair.
CntSeq letters(const std::string& w) {
    std::vector<std::size_t> keys;
    std::vector<std::size_t> steps;
    std::vector<Rational> delays;
    for (std::size_t p = 0; p < w.size(); ++p) {
        keys.push_back(static_cast<std::size_t>(w[p] - 'a'));
        if (p + 1 < w.size()) {
            steps.push_back(static_cast<std::size_t>((w[p] - 'a') * 32 + (w[p + 1] - 'a')));
            delays.emplace_back(static_cast<long>(p + 1), 10L);
        }
    }
    return make_seq(keys, steps, delays);
}

std::string word(const CntSeq& s) {
    std::string w;
    for (auto k : s.keys) w += static_cast<char>('a' + k);
    return w;
}

Rational sum(const std::vector<Rational>& v) {
    Rational s;
    for (const auto& x : v) s = s + x;
    return s;
}

std::size_t max_context(const Run& r) {
    std::size_t k = r.init.context.size();
    for (const auto& s : r.steps) k = std::max(k, s.to.context.size());
    return k;
}

}  // namespace

TEST_CASE("a,b,a,b,a contracts to a,b,a") {
    const CntSeq s = letters("ababa");
    const auto w = find_cnt_witness(s.keys, s.steps);
    REQUIRE(w);
    CHECK(*w == CntWitness{1, 3, {0}});
    const CntSeq c = cnt(s, *w);
    CHECK(word(c) == "aba");
    CHECK(c.steps.size() == s.steps.size() - 2);
    // delays 1/10..4/10: position 2 (delay 3/10) joins position 0, position 3 (4/10) joins position 1
    CHECK(c.delays == std::vector<Rational>{Rational(4, 10), Rational(6, 10)});
    CHECK(sum(c.delays) == sum(s.delays));
    CHECK(word(cnt_star(s)) == "aba");
}

TEST_CASE("a,b,c,d,a,e,b,f is a fixpoint") {
    const CntSeq s = letters("abcdaebf");
    CHECK_FALSE(find_cnt_witness(s.keys, s.steps));
    CHECK(word(cnt_star(s)) == "abcdaebf");
}

TEST_CASE("invalid witnesses are rejected") {
    const CntSeq s = letters("ababa");
    CHECK_THROWS_AS(cnt(s, CntWitness{0, 2, {}}), std::invalid_argument);
    CHECK_THROWS_AS(cnt(s, CntWitness{0, 2, {0}}), std::invalid_argument);
    CHECK_THROWS_AS(cnt(s, CntWitness{1, 4, {0, 1}}), std::invalid_argument);
}

TEST_CASE("contraction moves delays and never drops them") {
    std::mt19937_64 rng(test::seed_from_env(31));
    std::uniform_int_distribution<int> letter(0, 3);
    std::uniform_int_distribution<std::size_t> len(4, 14);
    int applied = 0;
    for (int i = 0; applied < 200 && i < 5000; ++i) {
        std::string w;
        const auto n = len(rng);
        for (std::size_t p = 0; p < n; ++p) w += static_cast<char>('a' + letter(rng));
        const CntSeq s = letters(w);
        const auto wit = find_cnt_witness(s.keys, s.steps);
        if (!wit) continue;
        ++applied;
        const CntSeq c = cnt(s, *wit);
        CHECK(c.keys.size() == s.keys.size() - (wit->j - wit->i));
        CHECK(sum(c.delays) == sum(s.delays));
        CHECK(c.keys.front() == s.keys.front());
        CHECK(c.keys.back() == s.keys.back());
        const CntSeq star = cnt_star(s);
        CHECK_FALSE(find_cnt_witness(star.keys, star.steps));
        CHECK(cnt_star(star).keys == star.keys);
    }
    CHECK(applied == 200);
}

TEST_CASE("zero regions look ahead to the next delay") {
    CHECK(bg13_region(Rational(3, 2), 2, false) == Bg13Region{Bg13Kind::open, 2});
    CHECK(bg13_region(Rational(2), 2, false) == Bg13Region{Bg13Kind::point, 2});
    CHECK(bg13_region(Rational(5, 2), 2, false) == Bg13Region{Bg13Kind::top, 2});
    const Model m = test::load_model("tbsw.rha");
    Run run;
    run.init = initial_config(m);
    const EdgeId to_q = m.outgoing(run.init.loc)[1];
    run.steps.push_back(step(m, run.init, Rational(1), to_q));  // y reset, x = 1
    const auto ar = annotate_bg13(m, run, m.cmax());
    CHECK(ar.ann[0].regions[0] == Bg13Region{Bg13Kind::zero_leave, 0});
    CHECK(ar.ann[1].regions[1] == Bg13Region{Bg13Kind::zero_stay, 0});
    CHECK_THROWS_AS(annotate_bg13(test::load_model("db2sw.rha"), Run{initial_config(test::load_model("db2sw.rha")), {}}, 2),
                    std::invalid_argument);
}

TEST_CASE("fragment cuts around resets") {
    // p loops with zero delay: x reset at steps 2 and 4, y at step 3
    ModelBuilder b("loops", {"x", "y"}, ModelKind::stopwatch);
    const auto c = b.component("C");
    const auto p = b.entry(c, "p", b.rate({{"x", 1}, {"y", 1}}));
    b.exit(c, "ex");
    const auto none = b.edge(Location::node(p), Location::node(p));
    const auto rx = b.edge(Location::node(p), Location::node(p), {}, b.vars({"x"}));
    const auto ry = b.edge(Location::node(p), Location::node(p), {}, b.vars({"y"}));
    b.init(p, Valuation(2));
    const Model m = b.build();
    Run run;
    run.init = initial_config(m);
    for (EdgeId e : {none, rx, ry, rx, none}) run.steps.push_back(step(m, run.last(), Rational(), e));
    const auto ar = annotate_bg13(m, run, m.cmax());
    const auto sp = split_pipeline(ar, Rational(1), m.rmax());
    CHECK(sp.type1 == std::vector<Fragment>{{0, 5}});
    CHECK(sp.type2 == std::vector<Fragment>{{0, 5}});
    CHECK(sp.type3 == std::vector<Fragment>{{0, 2}, {2, 3}, {3, 4}, {4, 5}});

    // no resets, no region change, short: a single fragment
    Run quiet;
    quiet.init = initial_config(m);
    for (int i = 0; i < 3; ++i) quiet.steps.push_back(step(m, quiet.last(), Rational(), none));
    const auto sq = split_pipeline(annotate_bg13(m, quiet, m.cmax()), Rational(1), m.rmax());
    CHECK(sq.type3 == std::vector<Fragment>{{0, 3}});
    CHECK_THROWS_AS(split_pipeline(ar, Rational(-1), 1), std::invalid_argument);
}

TEST_CASE("the unbounded-context run is a contraction fixpoint") {
    const Model m = test::load_model("refnocnt.rha");
    const Run rho = test::unbounded_context_run(m);
    const auto ar = annotate_bg13(m, rho, m.cmax());
    const ContractedRun c = cnt_star_run(ar);
    CHECK(c.skel == skeleton_of(rho));
    CHECK(c.delays.size() == rho.steps.size());
    const auto pr = contract_run(m, rho, Rational(1));
    CHECK(pr.run.skel == skeleton_of(rho));
}

TEST_CASE("contraction pipeline on random by-reference runs") {
    std::mt19937_64 rng(test::seed_from_env(37));
    const std::vector<std::string> files{"cycref.rha", "tbsw.rha", "refnocnt.rha", "ratesref.rha"};
    std::vector<Model> models;
    for (const auto& f : files) models.push_back(test::load_model(f));
    std::uniform_int_distribution<std::size_t> pick(0, models.size() - 1);
    std::uniform_int_distribution<std::size_t> kd(1, 3);
    std::uniform_int_distribution<std::size_t> ld(5, 40);
    int runs = 0;
    int shrunk = 0;
    int whole_shrunk = 0;
    std::size_t type2_over = 0;
    while (runs < 120) {
        const Model& m = models[pick(rng)];
        const std::size_t k = kd(rng);
        const Run run = test::random_run(m, rng, k, ld(rng));
        if (run.steps.size() < 3) continue;
        ++runs;
        REQUIRE_FALSE(validate_run_from_init(m, run).has_value());
        mpz_class tz = run.duration().floor() + 1;
        const Rational T{mpq_class(tz)};
        const auto K = static_cast<std::int64_t>(std::max<std::size_t>(1, max_context(run)));
        const auto nv = static_cast<std::int64_t>(m.nvars());
        const auto nb = static_cast<std::int64_t>(m.boxes.size());
        const auto nl = location_count(m);

        // cnt_star on the whole run: fixpoint, endpoints and duration
        const auto ar = annotate_bg13(m, run, m.cmax());
        const ContractedRun whole = cnt_star_run(ar);
        CHECK(whole.skel.init == skeleton_of(run).init);
        CHECK(whole.skel.last() == skeleton_of(run).last());
        CHECK(whole.duration() == run.duration());
        if (whole.skel.size() < run.steps.size()) ++whole_shrunk;

        const PipelineResult pr = contract_run(m, run, T);
        CHECK(pr.run.skel.init == ctxloc_of(run.init));
        CHECK(pr.run.skel.last() == ctxloc_of(run.last()));
        CHECK(pr.run.duration() == run.duration());
        CHECK(pr.run.skel.size() <= run.steps.size());
        if (pr.run.skel.size() < run.steps.size()) ++shrunk;

        // idempotence per fragment: contracting a contracted piece changes nothing
        for (std::size_t f = 0; f < pr.split.type3.size(); ++f) {
            const auto& piece = pr.pieces[f];
            std::map<AnnotatedConfig, std::size_t> ids;
            std::vector<std::size_t> kk;
            for (auto o : piece.origin) kk.push_back(ids.emplace(ar.ann[o], ids.size()).first->second);
            std::vector<std::size_t> st;
            for (const auto& s : piece.skel.steps) st.push_back(s.edge ? *s.edge : (s.kind == StepKind::call ? 1000000 : 1000001));
            CHECK_FALSE(find_cnt_witness(kk, st));
            CHECK(mpz_class(static_cast<unsigned long>(piece.skel.size())) <= bound_type3(nv, nb, K, nl, m.cmax()));
        }

        // fragment counts
        CHECK(mpq_class(static_cast<long>(pr.split.type1.size())) <= mpq_class(T.floor() * m.rmax() + 1));
        CHECK(mpz_class(static_cast<unsigned long>(pr.run.skel.size())) <= bound_C(T, m.rmax(), nv, nb, K, nl, m.cmax()));
        for (const auto& f1 : pr.split.type1) {
            std::size_t n2 = 0;
            for (const auto& f2 : pr.split.type2)
                if (f2.begin >= f1.begin && f2.end <= f1.end) ++n2;
            if (n2 > static_cast<std::size_t>(3 * nv)) ++type2_over;
        }
        for (const auto& f2 : pr.split.type2) {
            std::size_t n3 = 0;
            for (const auto& f3 : pr.split.type3)
                if (f3.begin >= f2.begin && f3.end <= f2.end) ++n3;
            CHECK(n3 <= static_cast<std::size_t>(2 * nv + 1));
        }

        // structure: every step is a legal successor
        for (std::size_t p = 0; p < pr.run.skel.size(); ++p) {
            const auto succ = skeleton_successors(m, pr.run.skel.at(p), 64);
            CHECK(std::find(succ.begin(), succ.end(), pr.run.skel.steps[p]) != succ.end());
        }
        // certification: feasible delays with the same endpoints and duration
        const auto cert = certify(m, run, pr.run);
        REQUIRE(cert);
        CHECK_FALSE(validate_run_from_init(m, *cert).has_value());
        CHECK(cert->duration() == run.duration());
        CHECK(cert->last().val == run.last().val);
        CHECK(skeleton_of(*cert) == pr.run.skel);
    }
    MESSAGE("pipeline shrinks " << shrunk << ", whole-run shrinks " << whole_shrunk);
    CHECK(shrunk > 10);
    CHECK(whole_shrunk > 10);
    MESSAGE("type-1 fragments with more than 3|X| type-2 pieces: " << type2_over);
}
