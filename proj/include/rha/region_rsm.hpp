#pragma once

#include <map>
#include <optional>
#include <set>

#include "rha/region2sw.hpp"
#include "rha/rsm.hpp"

namespace rha {

// Region abstraction of a glitch-free two-stopwatch RHA as a finite RSM. Nodes are (node, region),
// boxes are (box, region at call). A return port ((b,R_old),(ex,R_now)) sits in R_old when b passes
// every variable by value and in R_now otherwise.
struct RegionRsm {
    Model model;  // the input, padded with rate-0 variables to exactly two
    Rsm rsm;
    std::int64_t cmax = 0;
    NodeId init = 0;
    std::vector<std::pair<NodeId, Region>> node_of;
    std::vector<std::pair<BoxId, Region>> box_of;
    std::map<std::pair<NodeId, Region>, NodeId> node_ix;
    std::map<std::pair<BoxId, Region>, BoxId> box_ix;

    // Region in which an RSM location sits.
    [[nodiscard]] Region region_at(const Location& rsm_loc) const;
    // Model location an RSM location abstracts.
    [[nodiscard]] Location model_loc(const Location& rsm_loc) const;
    // Every RSM location abstracting a model location whose region satisfies its invariant.
    [[nodiscard]] std::set<Location> lift(const Location& model_loc) const;
};

// Throws std::invalid_argument unless the model is glitch-free, stopwatch-only and has at most two variables.
RegionRsm build_region_rsm(const Model& m);

struct RegionReachResult {
    bool reachable = false;
    std::optional<RsmRun> witness;  // over rg.rsm
};
RegionReachResult region_reach(const RegionRsm& rg, const std::set<Location>& model_targets, bool termination_only);

// Model exits of the initial component, the targets of the termination question.
std::set<Location> termination_targets(const Model& m);

}  // namespace rha
