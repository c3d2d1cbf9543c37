#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rha/model.hpp"

namespace rha {

struct SourceDiagnostic {
    std::size_t line = 1;    // 1-based
    std::size_t column = 1;  // 1-based
    std::string message;
    [[nodiscard]] std::string str() const;
};

class ParseError : public std::runtime_error {
public:
    explicit ParseError(SourceDiagnostic d) : std::runtime_error(d.str()), diag_(std::move(d)) {}
    [[nodiscard]] const SourceDiagnostic& diagnostic() const { return diag_; }

private:
    SourceDiagnostic diag_;
};

// Throws ParseError on the first problem. Structural well-formedness is left to validate_model.
Model parse_model(std::string_view text);
std::string serialize_model(const Model& m);

std::string format_constraint(const Model& m, const RectConstraint& c);

namespace detail {

enum class TokKind : std::uint8_t { ident, number, symbol, end };

struct Token {
    TokKind kind = TokKind::end;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

// Line-oriented token stream shared by the model and counter-machine parsers.
class Lexer {
public:
    explicit Lexer(std::string_view text);
    // Tokens of the next non-empty line; false at end of input.
    bool next_line(std::vector<Token>& out);

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

class TokenCursor {
public:
    explicit TokenCursor(const std::vector<Token>& toks) : toks_(toks) {}
    [[nodiscard]] const Token& peek() const;
    [[nodiscard]] bool at_end() const { return i_ >= toks_.size(); }
    const Token& take();
    bool accept(std::string_view sym);
    void expect(std::string_view sym);
    std::string ident(std::string_view what);
    std::int64_t natural(std::string_view what);
    Rational rational(std::string_view what);
    [[noreturn]] void fail(const std::string& msg) const;
    [[noreturn]] static void fail_at(const Token& t, const std::string& msg);

private:
    const std::vector<Token>& toks_;
    std::size_t i_ = 0;
    Token end_;
};

}  // namespace detail
}  // namespace rha
