#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rha {

enum class CmOp : std::uint8_t { inc, dec, ifz, halt };
enum class Counter : std::uint8_t { c, d };

// ifz: goto `target` when the counter is zero, `alt` otherwise. inc/dec use `target` only.
struct CmInstr {
    CmOp op = CmOp::halt;
    Counter ctr = Counter::c;
    std::size_t target = 0;
    std::size_t alt = 0;
    friend bool operator==(const CmInstr&, const CmInstr&) = default;
};

// Two-counter machine; the last instruction is halt and every goto is in range.
struct CounterMachine {
    std::vector<CmInstr> prog;
    [[nodiscard]] std::size_t halt_index() const { return prog.size() - 1; }
    friend bool operator==(const CounterMachine&, const CounterMachine&) = default;
};

struct CmConfig {
    std::size_t pc = 0;
    std::uint64_t c = 0;
    std::uint64_t d = 0;
    friend bool operator==(const CmConfig&, const CmConfig&) = default;
};

struct CmRun {
    bool halted = false;
    std::vector<CmConfig> trace;  // initial configuration first
    [[nodiscard]] const CmConfig& final() const { return trace.back(); }
};

class CmTrap : public std::runtime_error {
public:
    CmTrap(std::size_t step, std::size_t pc)
        : std::runtime_error("step " + std::to_string(step) + ": dec on zero counter at instruction " + std::to_string(pc)),
          step_(step) {}
    [[nodiscard]] std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

// Statements are separated by newlines, ';' or '/':
//   [N:] inc c|d [goto N]   [N:] dec c|d [goto N]   [N:] ifz c|d goto N else M   [N:] halt
// Unlabelled statements take their position as label. Throws ParseError.
CounterMachine parse_cm(std::string_view text);
std::string serialize_cm(const CounterMachine& cm);

// Runs at most max_steps instructions from (0, 0, 0). Throws CmTrap on dec of a zero counter.
CmRun cm_run(const CounterMachine& cm, std::size_t max_steps);

const char* counter_name(Counter c);

}  // namespace rha
