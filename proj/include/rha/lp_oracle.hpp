#pragma once

#include "rha/linear.hpp"

namespace rha {

// Independent feasibility check for small systems: maximize e subject to strict rows >= e, other rows
// as given, e <= 1 and |x_i| <= box, by enumerating vertices. Feasible iff the optimum e is positive
// (or there are no strict rows and the polytope is non-empty). Exponential; meant for a few variables.
bool vertex_feasible(const LinearSystem& sys, const Rational& box);

}  // namespace rha
