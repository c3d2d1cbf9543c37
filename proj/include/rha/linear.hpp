#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rha/rational.hpp"

namespace rha {

using LinVar = std::size_t;

// Affine form sum(coef[v] * v) + constant; zero coefficients are never stored.
struct LinExpr {
    std::map<LinVar, Rational> coef;
    Rational constant;

    static LinExpr var(LinVar v, const Rational& k = Rational(1));
    static LinExpr cst(const Rational& c);
    LinExpr& add(LinVar v, const Rational& k);
    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(const Rational& k);
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, const Rational& k) { return a *= k; }
    [[nodiscard]] Rational eval(const std::vector<Rational>& x) const;
    [[nodiscard]] bool is_constant() const { return coef.empty(); }
    friend bool operator==(const LinExpr&, const LinExpr&) = default;
};

// expr >= 0, expr > 0 or expr = 0.
enum class Cmp : std::uint8_t { ge, gt, eq };

struct LinConstraint {
    LinExpr expr;
    Cmp cmp = Cmp::ge;
    [[nodiscard]] bool holds(const std::vector<Rational>& x) const;
};

class LinearSystem {
public:
    LinVar new_var(std::string name = {});
    [[nodiscard]] std::size_t size() const { return names_.size(); }
    [[nodiscard]] const std::string& name(LinVar v) const { return names_.at(v); }

    void add(LinExpr e, Cmp c) { rows_.push_back({std::move(e), c}); }
    // lhs rel rhs for rel in <, <=, =, >=, >
    void le(const LinExpr& lhs, const LinExpr& rhs) { add(rhs - lhs, Cmp::ge); }
    void lt(const LinExpr& lhs, const LinExpr& rhs) { add(rhs - lhs, Cmp::gt); }
    void eq(const LinExpr& lhs, const LinExpr& rhs) { add(lhs - rhs, Cmp::eq); }
    void ge(const LinExpr& lhs, const LinExpr& rhs) { add(lhs - rhs, Cmp::ge); }
    void gt(const LinExpr& lhs, const LinExpr& rhs) { add(lhs - rhs, Cmp::gt); }

    [[nodiscard]] const std::vector<LinConstraint>& rows() const { return rows_; }
    [[nodiscard]] bool satisfied_by(const std::vector<Rational>& x) const;

private:
    std::vector<std::string> names_;
    std::vector<LinConstraint> rows_;
};

struct FmStats {
    std::size_t max_rows = 0;
};

// Both solvers first substitute equalities away and return a satisfying point or nullopt.

// Exact two-phase simplex; strict rows share a margin that is maximised up to 1.
std::optional<std::vector<Rational>> solve(const LinearSystem& sys);

// Fourier-Motzkin elimination in variable index order, preferring lower bounds on back-substitution.
// Exponential in the number of variables; kept as an independent cross-check for small systems.
std::optional<std::vector<Rational>> solve_fm(const LinearSystem& sys, FmStats* stats = nullptr);

}  // namespace rha
