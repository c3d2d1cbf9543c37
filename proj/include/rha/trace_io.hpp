#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "rha/semantics.hpp"

namespace rha {

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// JSON trace: {"init": CONF, "steps": [{"t", "action", "to": CONF}]},
// CONF = {"context": [{"box", "saved": {var: "p/q"}}], "loc", "val": {var: "p/q"}}.
std::string write_trace(const Model& m, const Run& run);
Run read_trace(const Model& m, std::string_view text);

}  // namespace rha
