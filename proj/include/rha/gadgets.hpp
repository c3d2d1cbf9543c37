#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rha/cm.hpp"
#include "rha/model.hpp"
#include "rha/semantics.hpp"

namespace rha {

// Target classes for the counter-machine reduction.
enum class Encoding : std::uint8_t { sw2, sw3_gf, clk5_tb, sw14_tb };

std::optional<Encoding> parse_encoding(std::string_view s);
const char* encoding_name(Encoding e);
// How a configuration (c, d) after k instructions sits in the variables at a main node.
std::string encoding_invariant(Encoding e);

// Delay c0 + sum coef[v] * val[v].
struct AffineDelay {
    Rational constant;
    std::vector<std::pair<VarIndex, Rational>> coef;
    [[nodiscard]] Rational eval(const Valuation& v) const;
};

// Where the oracle guesses: a node, optionally only under a given innermost box.
struct GuessKey {
    NodeId node = 0;
    std::optional<BoxId> caller;
    friend auto operator<=>(const GuessKey&, const GuessKey&) = default;
};

struct GadgetBundle {
    Model model;
    Encoding enc = Encoding::sw2;
    CounterMachine cm;
    std::map<GuessKey, AffineDelay> guesses;
    // Main-component nodes at which an instruction starts; halt maps to cm.halt_index().
    std::map<NodeId, std::size_t> points;
    NodeId halt = 0;
};

// Builds a canonical model whose runs from init mirror the machine's computation.
GadgetBundle compile_cm(const CounterMachine& cm, Encoding enc);

// Guessed delay where one is registered, then the first edge whose window contains it;
// otherwise the earliest enabled edge.
DelayOracle gadget_oracle(const GadgetBundle& g);

struct DecodedPoint {
    std::size_t instr = 0;
    std::uint64_t c = 0;
    std::uint64_t d = 0;
    Rational at;  // absolute time
};

// Inverse of the encoding at main nodes; nullopt when the valuation does not match it.
// `k` is the number of instructions already executed (needed by the time-bounded encodings).
std::optional<std::pair<std::uint64_t, std::uint64_t>> decode(Encoding enc, const Valuation& v, std::uint64_t k);

struct GadgetRun {
    Run run;
    SimStatus status = SimStatus::bound;
    bool halted = false;
    bool bound_exhausted = false;
    std::vector<DecodedPoint> points;  // one per main node visited, including init's successor
    std::optional<std::string> decode_error;
    // Durations between consecutive points.
    [[nodiscard]] std::vector<Rational> instr_durations() const;
};

// Simulates with the gadget oracle until halt or until `max_instr` instructions have run.
GadgetRun simulate_gadget(const GadgetBundle& g, std::size_t max_instr);

}  // namespace rha
