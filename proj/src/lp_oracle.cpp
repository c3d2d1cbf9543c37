#include "rha/lp_oracle.hpp"

#include <functional>
#include <optional>

namespace rha {

namespace {

using Row = std::vector<Rational>;  // coefficients over x_0..x_{n-1}, e; last entry is the constant

// Solves A y + c = 0 for square A; nullopt when singular.
std::optional<std::vector<Rational>> gauss(std::vector<Row> m) {
    const std::size_t k = m.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        while (piv < k && m[piv][col].sign() == 0) ++piv;
        if (piv == k) return std::nullopt;
        std::swap(m[piv], m[col]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col || m[r][col].sign() == 0) continue;
            const Rational f = m[r][col] / m[col][col];
            for (std::size_t c = col; c <= k; ++c) m[r][c] = m[r][c] - f * m[col][c];
        }
    }
    std::vector<Rational> y(k);
    for (std::size_t i = 0; i < k; ++i) y[i] = -m[i][k] / m[i][i];
    return y;
}

Rational eval(const Row& r, const std::vector<Rational>& y) {
    Rational s = r.back();
    for (std::size_t i = 0; i < y.size(); ++i) s = s + r[i] * y[i];
    return s;
}

}  // namespace

bool vertex_feasible(const LinearSystem& sys, const Rational& box) {
    const std::size_t n = sys.size();
    const std::size_t k = n + 1;  // unknowns x and e
    std::vector<Row> ge;          // row >= 0
    std::vector<Row> eq;          // row = 0
    bool any_strict = false;
    for (const auto& c : sys.rows()) {
        Row r(k + 1);
        for (const auto& [v, a] : c.expr.coef) r[v] = a;
        r[k] = c.expr.constant;
        if (c.cmp == Cmp::gt) {
            r[n] = Rational(-1);
            any_strict = true;
        }
        (c.cmp == Cmp::eq ? eq : ge).push_back(r);
    }
    for (std::size_t i = 0; i < n; ++i) {
        Row lo(k + 1);
        lo[i] = Rational(1);
        lo[k] = box;
        Row hi(k + 1);
        hi[i] = Rational(-1);
        hi[k] = box;
        ge.push_back(lo);
        ge.push_back(hi);
    }
    Row cap(k + 1);  // 1 - e >= 0
    cap[n] = Rational(-1);
    cap[k] = Rational(1);
    ge.push_back(cap);
    Row floor(k + 1);  // e + 1 >= 0 keeps the polytope bounded
    floor[n] = Rational(1);
    floor[k] = Rational(1);
    ge.push_back(floor);

    // A vertex is fixed by k independent tight rows; equalities are candidates like any other row.
    std::vector<Row> all = eq;
    all.insert(all.end(), ge.begin(), ge.end());
    std::optional<Rational> best;
    std::vector<std::size_t> idx(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == k) {
            std::vector<Row> sq;
            for (auto i : idx) sq.push_back(all[i]);
            const auto y = gauss(sq);
            if (!y) return;
            for (const auto& r : eq)
                if (eval(r, *y).sign() != 0) return;
            for (const auto& r : ge)
                if (eval(r, *y).sign() < 0) return;
            if (!best || (*y)[n] > *best) best = (*y)[n];
            return;
        }
        for (std::size_t i = start; i < all.size(); ++i) {
            idx[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    if (!best) return false;
    return any_strict ? best->sign() > 0 : true;
}

}  // namespace rha
