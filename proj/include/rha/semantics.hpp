#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rha/model.hpp"

namespace rha {

struct Frame {
    BoxId box = 0;
    Valuation saved;  // full valuation at call time
    friend bool operator==(const Frame&, const Frame&) = default;
    friend auto operator<=>(const Frame&, const Frame&) = default;
};

struct Configuration {
    std::vector<Frame> context;  // bottom to top
    Location loc;
    Valuation val;
    friend bool operator==(const Configuration&, const Configuration&) = default;
    friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

enum class StepKind : std::uint8_t { call, ret, edge };

struct Step {
    Rational delay;
    StepKind kind = StepKind::edge;
    std::optional<EdgeId> edge;  // set for StepKind::edge when known
    std::string action;          // "call", "return" or the edge's action label
    Configuration to;
};

struct Run {
    Configuration init;
    std::vector<Step> steps;

    [[nodiscard]] Rational duration() const;
    [[nodiscard]] const Configuration& last() const { return steps.empty() ? init : steps.back().to; }
    [[nodiscard]] const Configuration& config(std::size_t i) const { return i == 0 ? init : steps[i - 1].to; }
};

struct Choice {
    Rational delay;
    std::optional<EdgeId> edge;
};

class StepError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Configuration initial_config(const Model& m);
bool satisfies_invariant(const Model& m, const Configuration& c);
// Exit node with an empty context.
bool is_termination(const Model& m, const Configuration& c);
// Call port, or exit node with a non-empty context: the next step is forced and takes no time.
bool is_forced(const Model& m, const Configuration& c);
std::string describe(const Model& m, const Configuration& c);

// The step relation. `edge` must be empty exactly at call ports and at exit nodes with a pending frame.
// Throws StepError naming the violated condition.
Step step(const Model& m, const Configuration& c, const Rational& t, std::optional<EdgeId> edge);

struct RunViolation {
    std::size_t step = 0;  // 1-based index of the offending step; 0 for the initial configuration
    std::string reason;
};

std::optional<RunViolation> validate_run(const Model& m, const Run& run);
// Checks that run.init is the model's initial configuration, then validates.
std::optional<RunViolation> validate_run_from_init(const Model& m, const Run& run);

// Set of delays t >= 0 satisfying a constraint along flow; an interval by monotonicity of atoms.
struct TimeWindow {
    bool empty = false;
    Rational lo;
    bool lo_open = false;
    std::optional<Rational> hi;
    bool hi_open = false;

    static TimeWindow none() { return TimeWindow{true, {}, false, {}, false}; }
    [[nodiscard]] bool contains(const Rational& t) const;
    [[nodiscard]] TimeWindow intersect(const TimeWindow& o) const;
    // Smallest member, if the window is closed below.
    [[nodiscard]] std::optional<Rational> earliest() const;
    // Some member: the lower end if closed, otherwise an interior point.
    [[nodiscard]] std::optional<Rational> pick() const;
};

TimeWindow delay_window(const RectConstraint& c, const Valuation& v, const RateVector& rates);
// Delays t with c holding at (v + rates*t)[reset := 0].
TimeWindow delay_window_after_reset(const RectConstraint& c, const Valuation& v, const RateVector& rates, VarSet reset);
// Delays after which edge e can be taken from c (source invariant, guard, target invariant).
TimeWindow edge_window(const Model& m, const Configuration& c, EdgeId e);

using DelayOracle = std::function<std::optional<Choice>(const Configuration&)>;

class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& msg, Configuration at) : std::runtime_error(msg), at_(std::move(at)) {}
    [[nodiscard]] const Configuration& at() const { return at_; }

private:
    Configuration at_;
};

enum class SimStatus : std::uint8_t { target, terminated, deadlock, bound };

struct SimResult {
    Run run;
    SimStatus status = SimStatus::bound;
};

// Forced steps (calls, returns) are taken without consulting the oracle and count towards max_steps.
SimResult simulate(const Model& m, const DelayOracle& oracle, std::size_t max_steps,
                   const std::function<bool(const Configuration&)>& target = {});
SimResult simulate_from(const Model& m, Configuration start, const DelayOracle& oracle, std::size_t max_steps,
                        const std::function<bool(const Configuration&)>& target = {});

// Takes the enabled edge with the smallest pickable delay; ties go to the first declared edge.
DelayOracle earliest_oracle(const Model& m);

const char* status_name(SimStatus s);

}  // namespace rha
