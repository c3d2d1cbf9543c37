#include <doctest.h>

#include <random>

#include "rha/linear.hpp"
#include "rha/lp_oracle.hpp"
#include "support.hpp"

using namespace rha;

namespace {

LinearSystem random_system(std::mt19937_64& rng, std::size_t nvars, std::size_t nrows) {
    LinearSystem s;
    for (std::size_t i = 0; i < nvars; ++i) s.new_var();
    std::uniform_int_distribution<long> coef(-3, 3);
    std::uniform_int_distribution<long> cst(-5, 5);
    std::uniform_int_distribution<int> cmp(0, 5);
    for (std::size_t r = 0; r < nrows; ++r) {
        LinExpr e = LinExpr::cst(Rational(cst(rng)));
        for (std::size_t v = 0; v < nvars; ++v) e.add(v, Rational(coef(rng)));
        const int c = cmp(rng);
        s.add(e, c == 0 ? Cmp::eq : (c < 3 ? Cmp::gt : Cmp::ge));
    }
    return s;
}

}  // namespace

TEST_CASE("strict and non-strict bounds") {
    LinearSystem s;
    const auto x = s.new_var("x");
    s.lt(LinExpr::var(x), LinExpr::cst(Rational(1)));
    s.gt(LinExpr::var(x), LinExpr::cst(Rational(0)));
    const auto sol = solve(s);
    REQUIRE(sol);
    CHECK(s.satisfied_by(*sol));
    CHECK((*sol)[x] == Rational(1, 2));

    s.ge(LinExpr::var(x), LinExpr::cst(Rational(1)));
    CHECK_FALSE(solve(s));
}

TEST_CASE("strict cycle through two variables is infeasible") {
    // x < y, y < x
    LinearSystem s;
    const auto x = s.new_var();
    const auto y = s.new_var();
    s.lt(LinExpr::var(x), LinExpr::var(y));
    s.lt(LinExpr::var(y), LinExpr::var(x));
    CHECK_FALSE(solve(s));
}

TEST_CASE("equalities are substituted and restored") {
    LinearSystem s;
    const auto a = s.new_var();
    const auto b = s.new_var();
    const auto c = s.new_var();
    s.eq(LinExpr::var(a) + LinExpr::var(b), LinExpr::cst(Rational(3)));
    s.eq(LinExpr::var(b) - LinExpr::var(c), LinExpr::cst(Rational(1)));
    s.ge(LinExpr::var(c), LinExpr::cst(Rational(1, 2)));
    const auto sol = solve(s);
    REQUIRE(sol);
    CHECK(s.satisfied_by(*sol));
    s.eq(LinExpr::var(a), LinExpr::cst(Rational(2)));
    s.eq(LinExpr::var(c), LinExpr::cst(Rational(1)));
    CHECK_FALSE(solve(s));
}

TEST_CASE("simplex and elimination agree with vertex enumeration on random systems") {
    std::mt19937_64 rng(test::seed_from_env(29));
    std::uniform_int_distribution<std::size_t> nv(1, 3);
    std::uniform_int_distribution<std::size_t> nr(1, 5);
    int feasible = 0;
    for (int i = 0; i < 500; ++i) {
        const LinearSystem s = random_system(rng, nv(rng), nr(rng));
        const auto sol = solve(s);
        const auto fm = solve_fm(s);
        const bool want = vertex_feasible(s, Rational(1000));
        CHECK(sol.has_value() == want);
        CHECK(fm.has_value() == want);
        if (sol) {
            CHECK(s.satisfied_by(*sol));
            ++feasible;
        }
        if (fm) CHECK(s.satisfied_by(*fm));
    }
    CHECK(feasible > 50);
    CHECK(feasible < 450);
}

TEST_CASE("simplex and elimination agree on wider systems") {
    std::mt19937_64 rng(test::seed_from_env(41));
    std::uniform_int_distribution<std::size_t> nv(3, 4);
    std::uniform_int_distribution<std::size_t> nr(3, 8);
    int feasible = 0;
    for (int i = 0; i < 400; ++i) {
        const LinearSystem s = random_system(rng, nv(rng), nr(rng));
        const auto sol = solve(s);
        const auto fm = solve_fm(s);
        CHECK(sol.has_value() == fm.has_value());
        if (sol) {
            CHECK(s.satisfied_by(*sol));
            ++feasible;
        }
    }
    CHECK(feasible > 20);
}

TEST_CASE("simplex handles long delay chains") {
    // t_0..t_59 >= 0, prefix sums stay below 1 strictly, total equal to 9/10, t_i = t_{i+2}
    LinearSystem s;
    std::vector<LinVar> t;
    LinExpr prefix;
    for (int i = 0; i < 60; ++i) {
        t.push_back(s.new_var());
        s.ge(LinExpr::var(t.back()), LinExpr{});
        prefix += LinExpr::var(t.back());
        s.lt(prefix, LinExpr::cst(Rational(1)));
        if (i >= 2) s.eq(LinExpr::var(t[i]), LinExpr::var(t[i - 2]));
    }
    s.eq(prefix, LinExpr::cst(Rational(9, 10)));
    const auto sol = solve(s);
    REQUIRE(sol);
    CHECK(s.satisfied_by(*sol));
    s.gt(LinExpr::var(t[0]) + LinExpr::var(t[1]), LinExpr::cst(Rational(1, 30)));
    CHECK_FALSE(solve(s));
}
