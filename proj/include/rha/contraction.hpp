#pragma once

#include <gmpxx.h>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rha/skeleton.hpp"

namespace rha {

// Per-variable region without fractional order; zero is split by whether the variable leaves 0
// before the next discrete step.
enum class Bg13Kind : std::uint8_t { zero_stay, zero_leave, point, open, top };

struct Bg13Region {
    Bg13Kind kind = Bg13Kind::zero_stay;
    std::int64_t a = 0;  // point: [a,a]; open: (a-1,a); top: cmax
    friend bool operator==(const Bg13Region&, const Bg13Region&) = default;
    friend auto operator<=>(const Bg13Region&, const Bg13Region&) = default;
};

std::string to_string(const Bg13Region& r);
Bg13Region bg13_region(const Rational& v, std::int64_t cmax, bool leaves_zero);

struct AnnotatedConfig {
    CtxLoc cl;
    std::vector<Bg13Region> regions;
    friend bool operator==(const AnnotatedConfig&, const AnnotatedConfig&) = default;
    friend auto operator<=>(const AnnotatedConfig&, const AnnotatedConfig&) = default;
};

struct AnnotatedRun {
    Run run;
    std::vector<AnnotatedConfig> ann;  // one per configuration
    std::vector<VarSet> resets;        // one per step
    std::int64_t cmax = 0;
};

// Throws std::invalid_argument for models with a by-value box.
AnnotatedRun annotate_bg13(const Model& m, const Run& run, std::int64_t cmax);

// Configurations [begin, end] of a run; consecutive fragments share their boundary configuration.
struct Fragment {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct SplitResult {
    std::vector<Fragment> type1;
    std::vector<Fragment> type2;
    std::vector<Fragment> type3;
};

// Type-1 cuts where floor(elapsed * rmax) changes, type-2 cuts where any variable's region changes,
// type-3 cuts after the first and after the last reset of each variable.
// Throws std::invalid_argument when the run is longer than T.
SplitResult split_pipeline(const AnnotatedRun& ar, const Rational& T, std::int64_t rmax);

// Contraction over an abstract sequence: keys[k] identifies configuration k, steps[k] the step
// leaving it, delays[k] the delay spent in it (steps and delays have one entry fewer than keys).
struct CntSeq {
    std::vector<std::size_t> keys;
    std::vector<std::size_t> steps;
    std::vector<Rational> delays;
    std::vector<std::size_t> origin;  // original configuration index per position
};

struct CntWitness {
    std::size_t i = 0;
    std::size_t j = 0;
    std::vector<std::size_t> h;  // h[p - i - 1] for i < p < j
    friend bool operator==(const CntWitness&, const CntWitness&) = default;
};

CntSeq make_seq(std::vector<std::size_t> keys, std::vector<std::size_t> steps, std::vector<Rational> delays);
// Smallest j, then largest i, then the lexicographically smallest h.
std::optional<CntWitness> find_cnt_witness(std::span<const std::size_t> keys, std::span<const std::size_t> steps);
// Deletes configurations i+1..j; delays at i+1..j-1 move to their h-images, the delay at j joins the one at i.
// Throws std::invalid_argument if the witness does not apply.
CntSeq cnt(const CntSeq& s, const CntWitness& w);
CntSeq cnt_star(CntSeq s);

struct ContractedRun {
    Skeleton skel;
    std::vector<Rational> delays;
    std::vector<std::size_t> origin;
    [[nodiscard]] Rational duration() const;
};

// Contracts one fragment to its fixpoint, matching (context, location, regions) and outgoing steps.
ContractedRun cnt_star_fragment(const AnnotatedRun& ar, const Fragment& f);
ContractedRun cnt_star_run(const AnnotatedRun& ar);

struct PipelineResult {
    SplitResult split;
    std::vector<ContractedRun> pieces;  // one per type-3 fragment
    ContractedRun run;                  // concatenation
};
PipelineResult contract_run(const Model& m, const Run& run, const Rational& T);

// Feasible delays for the contracted skeleton with the original start, end valuation and duration;
// the replayed run, if any.
std::optional<Run> certify(const Model& m, const Run& original, const ContractedRun& c);

// Number of non-empty contexts of length at most k over n boxes.
mpz_class alpha(std::int64_t n_boxes, std::int64_t k);
// 24 * (ceil(T*rmax)+1) * nvars^2 * (alpha*nlocs)^2 * (2*cmax+1)^(2*nvars)
mpz_class bound_C(const Rational& T, std::int64_t rmax, std::int64_t nvars, std::int64_t n_boxes, std::int64_t k,
                  std::int64_t nlocs, std::int64_t cmax);
// (alpha*nlocs*(2*cmax+1)^nvars)^2 + 1, the length bound for a contracted type-3 fragment.
mpz_class bound_type3(std::int64_t nvars, std::int64_t n_boxes, std::int64_t k, std::int64_t nlocs, std::int64_t cmax);
// Number of locations (nodes and ports) of a model.
std::int64_t location_count(const Model& m);

}  // namespace rha
