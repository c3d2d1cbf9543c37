#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "rha/model.hpp"
#include "rha/parser.hpp"

namespace rha::test {

inline Rational R(const char* s) { return Rational::parse(s); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string model_path(const std::string& name) { return std::string(RHA_MODELS_DIR) + "/" + name; }

inline Model load_model(const std::string& name) { return parse_model(read_file(model_path(name))); }

inline Valuation val(std::initializer_list<const char*> vs) {
    std::vector<Rational> out;
    for (const char* s : vs) out.push_back(R(s));
    return Valuation(std::move(out));
}

inline std::uint64_t seed_from_env(std::uint64_t fallback) {
    if (const char* s = std::getenv("RHA_SEED")) return std::stoull(s);
    return fallback;
}

// Random rational p/q with 0 <= p/q <= hi, q in [1, maxden].
inline Rational random_rational(std::mt19937_64& rng, long hi, long maxden) {
    std::uniform_int_distribution<long> den(1, maxden);
    const long q = den(rng);
    std::uniform_int_distribution<long> num(0, hi * q);
    return Rational(num(rng), q);
}

}  // namespace rha::test
