#include "rha/linear.hpp"

#include <algorithm>
#include <cstdint>

namespace rha {

LinExpr LinExpr::var(LinVar v, const Rational& k) {
    LinExpr e;
    e.add(v, k);
    return e;
}

LinExpr LinExpr::cst(const Rational& c) {
    LinExpr e;
    e.constant = c;
    return e;
}

LinExpr& LinExpr::add(LinVar v, const Rational& k) {
    if (k.sign() == 0) return *this;
    auto [it, fresh] = coef.emplace(v, k);
    if (!fresh) {
        it->second = it->second + k;
        if (it->second.sign() == 0) coef.erase(it);
    }
    return *this;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    for (const auto& [v, k] : o.coef) add(v, k);
    constant = constant + o.constant;
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    for (const auto& [v, k] : o.coef) add(v, -k);
    constant = constant - o.constant;
    return *this;
}

LinExpr& LinExpr::operator*=(const Rational& k) {
    if (k.sign() == 0) {
        coef.clear();
        constant = Rational();
        return *this;
    }
    for (auto& [v, c] : coef) c = c * k;
    constant = constant * k;
    return *this;
}

Rational LinExpr::eval(const std::vector<Rational>& x) const {
    Rational s = constant;
    for (const auto& [v, k] : coef) s = s + k * x.at(v);
    return s;
}

bool LinConstraint::holds(const std::vector<Rational>& x) const {
    const Rational v = expr.eval(x);
    switch (cmp) {
        case Cmp::ge: return v.sign() >= 0;
        case Cmp::gt: return v.sign() > 0;
        case Cmp::eq: return v.sign() == 0;
    }
    return false;
}

LinVar LinearSystem::new_var(std::string name) {
    names_.push_back(name.empty() ? "v" + std::to_string(names_.size()) : std::move(name));
    return names_.size() - 1;
}

bool LinearSystem::satisfied_by(const std::vector<Rational>& x) const {
    return std::all_of(rows_.begin(), rows_.end(), [&](const LinConstraint& c) { return c.holds(x); });
}

namespace {

struct Ineq {
    LinExpr expr;
    bool strict = false;
};

// Replaces v by `by` in e.
void substitute(LinExpr& e, LinVar v, const LinExpr& by) {
    const auto it = e.coef.find(v);
    if (it == e.coef.end()) return;
    const Rational k = it->second;
    e.coef.erase(it);
    e += by * k;
}

// Scales so the leading coefficient has absolute value 1; keeps the direction of the inequality.
LinExpr normalized(LinExpr e) {
    if (e.coef.empty()) return e;
    Rational k = e.coef.begin()->second;
    if (k.sign() < 0) k = -k;
    return e * (Rational(1) / k);
}

// Keeps, per coefficient vector, only the tightest constant; drops trivially true rows.
// Returns false when a constant row is violated.
bool prune(std::vector<Ineq>& rows) {
    std::map<std::map<LinVar, Rational>, Ineq> best;
    for (auto& r : rows) {
        if (r.expr.is_constant()) {
            const int s = r.expr.constant.sign();
            if (s < 0 || (s == 0 && r.strict)) return false;
            continue;
        }
        LinExpr n = normalized(r.expr);
        auto [it, fresh] = best.emplace(n.coef, Ineq{n, r.strict});
        if (fresh) continue;
        Ineq& cur = it->second;
        if (n.constant < cur.expr.constant || (n.constant == cur.expr.constant && r.strict)) cur = Ineq{n, r.strict};
    }
    rows.clear();
    for (auto& [k, r] : best) rows.push_back(std::move(r));
    return true;
}

struct Bound {
    LinExpr value;  // v >= value (lower) or v <= value (upper)
    bool strict = false;
};

struct Reduced {
    std::vector<std::pair<LinVar, LinExpr>> solved;  // v = expr, in solving order
    std::vector<Ineq> rows;
};

// Gaussian substitution: solve each equality for its smallest variable and eliminate it everywhere.
std::optional<Reduced> substitute_equalities(const LinearSystem& sys) {
    std::vector<LinExpr> eqs;
    Reduced red;
    for (const auto& c : sys.rows()) {
        if (c.cmp == Cmp::eq) eqs.push_back(c.expr);
        else red.rows.push_back({c.expr, c.cmp == Cmp::gt});
    }
    auto& solved = red.solved;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        LinExpr e = eqs[i];
        for (const auto& [v, by] : solved) substitute(e, v, by);
        if (e.is_constant()) {
            if (e.constant.sign() != 0) return std::nullopt;
            continue;
        }
        const auto [v, k] = *e.coef.begin();
        LinExpr by = e;
        by.coef.erase(v);
        by *= Rational(-1) / k;
        for (auto& [w, prev] : solved) substitute(prev, v, by);
        solved.emplace_back(v, by);
    }
    for (auto& r : red.rows)
        for (const auto& [v, by] : solved) substitute(r.expr, v, by);
    if (!prune(red.rows)) return std::nullopt;
    return red;
}


}  // namespace

std::optional<std::vector<Rational>> solve_fm(const LinearSystem& sys, FmStats* stats) {
    const std::size_t n = sys.size();
    auto red = substitute_equalities(sys);
    if (!red) return std::nullopt;
    auto& solved = red->solved;
    auto& rows = red->rows;

    // Fourier-Motzkin in index order.
    std::vector<std::vector<Bound>> lower(n);
    std::vector<std::vector<Bound>> upper(n);
    std::vector<bool> is_solved(n, false);
    for (const auto& [v, by] : solved) is_solved[v] = true;
    for (LinVar v = 0; v < n; ++v) {
        if (is_solved[v]) continue;
        std::vector<Ineq> keep;
        std::vector<std::pair<Ineq, Rational>> lo;
        std::vector<std::pair<Ineq, Rational>> hi;
        for (auto& r : rows) {
            const auto it = r.expr.coef.find(v);
            if (it == r.expr.coef.end()) {
                keep.push_back(std::move(r));
                continue;
            }
            const Rational k = it->second;
            // k*v + rest (>|>=) 0  <=>  v (>|>=) -rest/k when k > 0, v (<|<=) -rest/k when k < 0
            LinExpr rest = r.expr;
            rest.coef.erase(v);
            Bound b{rest * (Rational(-1) / k), r.strict};
            if (k.sign() > 0) {
                lower[v].push_back(b);
                lo.emplace_back(std::move(r), k);
            } else {
                upper[v].push_back(b);
                hi.emplace_back(std::move(r), k);
            }
        }
        for (const auto& [l, kl] : lo) {
            for (const auto& [u, ku] : hi) {
                Ineq c{l.expr * (-ku) + u.expr * kl, l.strict || u.strict};
                keep.push_back(std::move(c));
            }
        }
        rows = std::move(keep);
        if (!prune(rows)) return std::nullopt;
        if (stats) stats->max_rows = std::max(stats->max_rows, rows.size());
    }

    // Back-substitution, last eliminated first.
    std::vector<Rational> x(n);
    for (LinVar v = n; v-- > 0;) {
        if (is_solved[v]) continue;
        std::optional<Rational> lo_v;
        bool lo_strict = false;
        for (const auto& b : lower[v]) {
            const Rational val = b.value.eval(x);
            if (!lo_v || val > *lo_v || (val == *lo_v && b.strict)) {
                lo_v = val;
                lo_strict = b.strict;
            }
        }
        std::optional<Rational> hi_v;
        bool hi_strict = false;
        for (const auto& b : upper[v]) {
            const Rational val = b.value.eval(x);
            if (!hi_v || val < *hi_v || (val == *hi_v && b.strict)) {
                hi_v = val;
                hi_strict = b.strict;
            }
        }
        if (lo_v && !lo_strict) x[v] = *lo_v;
        else if (lo_v && hi_v) x[v] = (*lo_v + *hi_v) / Rational(2);
        else if (lo_v) x[v] = *lo_v + Rational(1);
        else if (hi_v) x[v] = hi_strict ? *hi_v - Rational(1) : *hi_v;
        else x[v] = Rational(0);
    }
    for (auto it = solved.rbegin(); it != solved.rend(); ++it) x[it->first] = it->second.eval(x);
    return x;
}

namespace {

// Dense tableau over x >= 0 with rows T x = rhs (rhs >= 0); the objective row holds reduced costs
// for maximisation and is pivoted along with the constraints. Bland's rule guarantees termination.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : a_(rows, std::vector<mpq_class>(cols + 1)), obj_(cols + 1), basis_(rows) {}

    mpq_class& at(std::size_t r, std::size_t c) { return a_[r][c]; }
    mpq_class& rhs(std::size_t r) { return a_[r].back(); }
    std::size_t& basis(std::size_t r) { return basis_[r]; }
    [[nodiscard]] std::size_t rows() const { return a_.size(); }
    [[nodiscard]] std::size_t cols() const { return obj_.size() - 1; }

    // Loads max sum(c_j x_j) and prices out the current basis. Objective value is -obj_.back().
    void set_objective(const std::vector<mpq_class>& c) {
        for (std::size_t j = 0; j < cols(); ++j) obj_[j] = c[j];
        obj_.back() = 0;
        for (std::size_t r = 0; r < rows(); ++r) {
            const mpq_class cb = c[basis_[r]];
            if (cb == 0) continue;
            for (std::size_t j = 0; j <= cols(); ++j)
                if (a_[r][j] != 0) obj_[j] -= cb * a_[r][j];
        }
    }
    [[nodiscard]] mpq_class objective() const { return -obj_.back(); }

    // Returns false if unbounded. Columns with banned[j] never enter.
    bool maximize(const std::vector<bool>& banned) {
        for (;;) {
            std::size_t enter = cols();
            for (std::size_t j = 0; j < cols(); ++j)
                if (!banned[j] && obj_[j] > 0) {
                    enter = j;
                    break;
                }
            if (enter == cols()) return true;
            std::size_t leave = rows();
            mpq_class best;
            for (std::size_t r = 0; r < rows(); ++r) {
                if (a_[r][enter] <= 0) continue;
                const mpq_class ratio = a_[r].back() / a_[r][enter];
                if (leave == rows() || ratio < best || (ratio == best && basis_[r] < basis_[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave == rows()) return false;
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t pr, std::size_t pc) {
        auto& row = a_[pr];
        const mpq_class k = row[pc];
        std::vector<std::size_t> nz;
        for (std::size_t j = 0; j <= cols(); ++j)
            if (row[j] != 0) {
                row[j] /= k;
                nz.push_back(j);
            }
        auto eliminate = [&](std::vector<mpq_class>& other) {
            if (other[pc] == 0) return;
            const mpq_class f = other[pc];
            for (auto j : nz) other[j] -= f * row[j];
        };
        for (std::size_t r = 0; r < rows(); ++r)
            if (r != pr) eliminate(a_[r]);
        eliminate(obj_);
        basis_[pr] = pc;
    }

    void drop_row(std::size_t r) {
        a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    }

private:
    std::vector<std::vector<mpq_class>> a_;
    std::vector<mpq_class> obj_;
    std::vector<std::size_t> basis_;
};

}  // namespace

std::optional<std::vector<Rational>> solve(const LinearSystem& sys) {
    const std::size_t n = sys.size();
    auto red = substitute_equalities(sys);
    if (!red) return std::nullopt;
    const auto& rows = red->rows;

    // Free variables v = p_v - q_v; strict rows borrow a margin e in [0, 1] that is maximised.
    std::vector<LinVar> free_vars;
    std::vector<std::size_t> col_of(n, SIZE_MAX);
    {
        std::vector<bool> used(n, false);
        for (const auto& r : rows)
            for (const auto& [v, k] : r.expr.coef) used[v] = true;
        for (LinVar v = 0; v < n; ++v)
            if (used[v]) {
                col_of[v] = 2 * free_vars.size();
                free_vars.push_back(v);
            }
    }
    const bool any_strict = std::any_of(rows.begin(), rows.end(), [](const Ineq& r) { return r.strict; });
    const std::size_t m = rows.size() + (any_strict ? 1 : 0);
    const std::size_t e_col = 2 * free_vars.size();
    const std::size_t slack0 = e_col + (any_strict ? 1 : 0);
    // rows needing an artificial get one after the slacks
    std::vector<std::size_t> needs_art;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].expr.constant.sign() < 0) needs_art.push_back(i);
    const std::size_t art0 = slack0 + m;
    const std::size_t ncols = art0 + needs_art.size();

    Tableau t(m, ncols);
    std::size_t next_art = art0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        // expr - [strict] e - s = 0, i.e. sum k v - [strict] e - s = -constant
        const Ineq& r = rows[i];
        const bool flip = r.expr.constant.sign() < 0;  // then rhs = -constant > 0 as is
        const mpq_class sg = flip ? 1 : -1;
        for (const auto& [v, k] : r.expr.coef) {
            t.at(i, col_of[v]) = sg * k.raw();
            t.at(i, col_of[v] + 1) = -sg * k.raw();
        }
        if (r.strict) t.at(i, e_col) = -sg;
        t.at(i, slack0 + i) = -sg;
        t.rhs(i) = sg * -r.expr.constant.raw();
        if (flip) {
            t.at(i, next_art) = 1;
            t.basis(i) = next_art++;
        } else {
            t.basis(i) = slack0 + i;
        }
    }
    if (any_strict) {
        const std::size_t i = rows.size();
        t.at(i, e_col) = 1;
        t.at(i, slack0 + i) = 1;
        t.rhs(i) = 1;
        t.basis(i) = slack0 + i;
    }

    std::vector<bool> banned(ncols, false);
    if (!needs_art.empty()) {
        std::vector<mpq_class> c(ncols);
        for (std::size_t j = art0; j < ncols; ++j) c[j] = -1;
        t.set_objective(c);
        t.maximize(banned);
        if (t.objective() < 0) return std::nullopt;
        for (std::size_t j = art0; j < ncols; ++j) banned[j] = true;
        // zero-valued artificials still basic: pivot them out or drop their redundant row
        for (std::size_t r = t.rows(); r-- > 0;) {
            if (t.basis(r) < art0) continue;
            std::size_t pc = art0;
            for (std::size_t j = 0; j < art0; ++j)
                if (t.at(r, j) != 0) {
                    pc = j;
                    break;
                }
            if (pc == art0) t.drop_row(r);
            else t.pivot(r, pc);
        }
    }
    if (any_strict) {
        std::vector<mpq_class> c(ncols);
        c[e_col] = 1;
        t.set_objective(c);
        t.maximize(banned);
        if (t.objective() <= 0) return std::nullopt;
    }

    std::vector<mpq_class> val(ncols);
    for (std::size_t r = 0; r < t.rows(); ++r) val[t.basis(r)] = t.rhs(r);
    std::vector<Rational> x(n);
    for (LinVar v : free_vars) x[v] = Rational(mpq_class(val[col_of[v]] - val[col_of[v] + 1]));
    for (auto it = red->solved.rbegin(); it != red->solved.rend(); ++it) x[it->first] = it->second.eval(x);
    return x;
}

}  // namespace rha
