#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rha/model.hpp"

namespace rha {

enum class IvKind : std::uint8_t { point, open, top };

// [c], (c, c+1) or (cmax, inf); for `top`, c holds cmax.
struct Interval {
    IvKind kind = IvKind::point;
    std::int64_t c = 0;
    friend bool operator==(const Interval&, const Interval&) = default;
    friend auto operator<=>(const Interval&, const Interval&) = default;
};

// Order of fractional parts; not `none` iff both coordinates lie in bounded open intervals.
enum class FracOrder : std::uint8_t { none, x_lt_y, y_lt_x, equal };

struct Region {
    Interval ix;
    Interval iy;
    FracOrder order = FracOrder::none;
    friend bool operator==(const Region&, const Region&) = default;
    friend auto operator<=>(const Region&, const Region&) = default;
};

using Rates2 = std::array<std::int64_t, 2>;

std::string to_string(const Interval& iv);
std::string to_string(const Region& r);

std::vector<Region> enumerate_regions(std::int64_t cmax);
// Number of regions: (2*cmax+2)^2 + 2*cmax^2.
std::size_t region_count(std::int64_t cmax);
Region region_of(const Valuation& v, std::int64_t cmax);
bool contains(const Region& r, const Valuation& v, std::int64_t cmax);
// Canonical member: open coordinates get fractions 1/3, 2/3 by the order, 1/2 when equal or unordered.
Valuation representative(const Region& r, std::int64_t cmax);

// First region other than r entered by flowing from r at the given rates (each 0 or 1); r itself if none.
Region closest_successor(const Region& r, Rates2 rates, std::int64_t cmax);
// Iterated closest successors, excluding r, until the fixpoint.
std::vector<Region> successor_chain(const Region& r, Rates2 rates, std::int64_t cmax);

struct ResetGuard {
    Region reset;
    bool guard_holds = false;
};
// Throws std::invalid_argument when the guard mentions a constant above cmax.
ResetGuard region_reset_and_guard(const Region& r, VarSet reset, const RectConstraint& guard, std::int64_t cmax);
bool region_satisfies(const Region& r, const RectConstraint& c, std::int64_t cmax);

// Closed-form successor following the four-case characterization (with the Top coordinate kept fixed
// where the characterization leaves it undefined). Used only to cross-check closest_successor.
struct CaseTableResult {
    Region region;
    int case_number = 0;
};
CaseTableResult closest_successor_case_table(const Region& r, Rates2 rates, std::int64_t cmax);

// Flat region automaton: states (location, region) of a model without boxes.
struct RegionGraph {
    struct State {
        Location loc;
        Region region;
        friend auto operator<=>(const State&, const State&) = default;
    };
    struct Arc {
        std::size_t dst = 0;
        std::size_t hops = 0;
        EdgeId edge = 0;
    };
    std::vector<State> states;
    std::vector<std::vector<Arc>> arcs;
    std::size_t init = 0;
    std::int64_t cmax = 0;

    [[nodiscard]] std::optional<std::size_t> find(const State& s) const;
    // States reachable from init.
    [[nodiscard]] std::vector<bool> reachable() const;
};

RegionGraph build_region_automaton(const Model& m);

// Region moves available from `loc` in region r: hop h along the successor chain (h = 0 stays in r),
// every traversed region satisfies inv(loc), the guard holds in the hop region, and the reset image
// satisfies the target invariant.
struct RegionMove {
    std::size_t hops = 0;
    EdgeId edge = 0;
    Region target;
};
std::vector<RegionMove> region_moves(const Model& m, const Location& loc, const Region& r, std::int64_t cmax);

Rates2 rates2(const RateVector& r);

}  // namespace rha
