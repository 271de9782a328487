#pragma once

// Coefficient expressions of one real variable `x` with named parameters.
//
// Grammar (whitespace insignificant):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' ['-'] number)?
//   atom   := number | 'x' | ident | '(' expr ')' | func '(' expr ')'
//   func   := sin | cos | tan | exp | ln | sqrt
//
// Exponents are constant reals. Unary minus binds looser than '^', so "-x^2"
// is -(x^2). Nodes are immutable and shared; an Expr is cheap to copy.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "riccati/errors.hpp"

namespace riccati {

using Params = std::map<std::string, double, std::less<>>;

enum class UnaryOp { neg, sin, cos, tan, exp, ln, sqrt };
enum class BinaryOp { add, sub, mul, div };

struct ExprNode;

class Expr {
public:
    /// The constant 0.
    Expr();

    const ExprNode& node() const noexcept { return *node_; }

    bool is_constant() const noexcept;
    /// Value of a constant node; only meaningful when is_constant().
    double constant_value() const noexcept;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

    friend Expr make_node(ExprNode node);

    std::shared_ptr<const ExprNode> node_;
};

namespace node {
struct Constant {
    double value;
};
struct Variable {};
struct Parameter {
    std::string name;
};
struct Unary {
    UnaryOp op;
    Expr arg;
};
struct Binary {
    BinaryOp op;
    Expr lhs;
    Expr rhs;
};
struct Power {
    Expr base;
    double exponent;
};
}  // namespace node

struct ExprNode {
    std::variant<node::Constant, node::Variable, node::Parameter, node::Unary, node::Binary, node::Power> v;
};

inline Expr make_node(ExprNode n) { return Expr(std::make_shared<const ExprNode>(std::move(n))); }

inline Expr::Expr() : node_(std::make_shared<const ExprNode>(ExprNode{node::Constant{0.0}})) {}

inline bool Expr::is_constant() const noexcept { return std::holds_alternative<node::Constant>(node_->v); }

inline double Expr::constant_value() const noexcept {
    const auto* c = std::get_if<node::Constant>(&node_->v);
    return c ? c->value : 0.0;
}

inline bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const auto& va = a.node_->v;
    const auto& vb = b.node_->v;
    if (va.index() != vb.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(vb);
            if constexpr (std::is_same_v<T, node::Constant>) {
                return x.value == y.value && std::signbit(x.value) == std::signbit(y.value);
            } else if constexpr (std::is_same_v<T, node::Variable>) {
                return true;
            } else if constexpr (std::is_same_v<T, node::Parameter>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, node::Unary>) {
                return x.op == y.op && x.arg == y.arg;
            } else if constexpr (std::is_same_v<T, node::Binary>) {
                return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
            } else {
                return x.exponent == y.exponent && x.base == y.base;
            }
        },
        va);
}

inline const char* function_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::neg: return "-";
        case UnaryOp::sin: return "sin";
        case UnaryOp::cos: return "cos";
        case UnaryOp::tan: return "tan";
        case UnaryOp::exp: return "exp";
        case UnaryOp::ln: return "ln";
        case UnaryOp::sqrt: return "sqrt";
    }
    return "?";
}

namespace detail {

inline bool is_const(const Expr& e, double v) { return e.is_constant() && e.constant_value() == v; }

// Returns false when the operation leaves the real domain; `out` is then unspecified.
inline bool apply_unary(UnaryOp op, double a, double& out) {
    switch (op) {
        case UnaryOp::neg: out = -a; return true;
        case UnaryOp::sin: out = std::sin(a); return true;
        case UnaryOp::cos: out = std::cos(a); return true;
        case UnaryOp::tan: out = std::tan(a); return true;
        case UnaryOp::exp: out = std::exp(a); return true;
        case UnaryOp::ln:
            if (!(a > 0.0)) return false;
            out = std::log(a);
            return true;
        case UnaryOp::sqrt:
            if (a < 0.0) return false;
            out = std::sqrt(a);
            return true;
    }
    return false;
}

inline bool apply_binary(BinaryOp op, double a, double b, double& out) {
    switch (op) {
        case BinaryOp::add: out = a + b; return true;
        case BinaryOp::sub: out = a - b; return true;
        case BinaryOp::mul: out = a * b; return true;
        case BinaryOp::div:
            if (b == 0.0) return false;
            out = a / b;
            return true;
    }
    return false;
}

inline bool apply_power(double a, double c, double& out) {
    if (a < 0.0 && c != std::floor(c)) return false;
    if (a == 0.0 && c < 0.0) return false;
    out = std::pow(a, c);
    return true;
}

}  // namespace detail

// Node factories. These fold constant subtrees and the identities
// 0*a, a*0 -> 0; a+0, 0+a, a-0, a*1, 1*a, a/1, a^1 -> a; a^0 -> 1; --a -> a.
// Folding is skipped whenever the folded value would leave the real domain.

// Negative zero is stored as +0 so structurally equal trees print identically.
inline Expr constant(double v) { return make_node({node::Constant{v == 0.0 ? 0.0 : v}}); }
inline Expr variable() { return make_node({node::Variable{}}); }
inline Expr parameter(std::string name) { return make_node({node::Parameter{std::move(name)}}); }

inline Expr unary(UnaryOp op, Expr arg) {
    if (arg.is_constant()) {
        double out = 0.0;
        if (detail::apply_unary(op, arg.constant_value(), out) && std::isfinite(out)) return constant(out);
    }
    if (op == UnaryOp::neg) {
        if (const auto* u = std::get_if<node::Unary>(&arg.node().v); u && u->op == UnaryOp::neg) return u->arg;
    }
    return make_node({node::Unary{op, std::move(arg)}});
}

inline Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
    if (lhs.is_constant() && rhs.is_constant()) {
        double out = 0.0;
        if (detail::apply_binary(op, lhs.constant_value(), rhs.constant_value(), out) && std::isfinite(out))
            return constant(out);
    }
    switch (op) {
        case BinaryOp::add:
            if (detail::is_const(lhs, 0.0)) return rhs;
            if (detail::is_const(rhs, 0.0)) return lhs;
            break;
        case BinaryOp::sub:
            if (detail::is_const(rhs, 0.0)) return lhs;
            if (detail::is_const(lhs, 0.0)) return unary(UnaryOp::neg, std::move(rhs));
            break;
        case BinaryOp::mul:
            if (detail::is_const(lhs, 0.0) || detail::is_const(rhs, 0.0)) return constant(0.0);
            if (detail::is_const(lhs, 1.0)) return rhs;
            if (detail::is_const(rhs, 1.0)) return lhs;
            break;
        case BinaryOp::div:
            if (detail::is_const(lhs, 0.0) && !detail::is_const(rhs, 0.0)) return constant(0.0);
            if (detail::is_const(rhs, 1.0)) return lhs;
            break;
    }
    return make_node({node::Binary{op, std::move(lhs), std::move(rhs)}});
}

inline Expr power(Expr base, double exponent) {
    if (base.is_constant()) {
        double out = 0.0;
        if (detail::apply_power(base.constant_value(), exponent, out) && std::isfinite(out)) return constant(out);
    }
    if (exponent == 1.0) return base;
    if (exponent == 0.0) return constant(1.0);
    return make_node({node::Power{std::move(base), exponent}});
}

inline Expr operator+(Expr a, Expr b) { return binary(BinaryOp::add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return binary(BinaryOp::sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return binary(BinaryOp::mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return binary(BinaryOp::div, std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return unary(UnaryOp::neg, std::move(a)); }
inline Expr operator*(double a, Expr b) { return constant(a) * std::move(b); }

inline Expr sin(Expr a) { return unary(UnaryOp::sin, std::move(a)); }
inline Expr cos(Expr a) { return unary(UnaryOp::cos, std::move(a)); }
inline Expr tan(Expr a) { return unary(UnaryOp::tan, std::move(a)); }
inline Expr exp(Expr a) { return unary(UnaryOp::exp, std::move(a)); }
inline Expr ln(Expr a) { return unary(UnaryOp::ln, std::move(a)); }
inline Expr sqrt(Expr a) { return unary(UnaryOp::sqrt, std::move(a)); }

// ---------------------------------------------------------------------------
// Printing

/// Shortest decimal text that reads back to exactly `v`.
inline std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace detail {

inline void print(std::string& out, const Expr& e) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Constant>) {
                if (std::signbit(n.value)) {
                    out += "(-";
                    out += format_number(-n.value);
                    out += ')';
                } else {
                    out += format_number(n.value);
                }
            } else if constexpr (std::is_same_v<T, node::Variable>) {
                out += 'x';
            } else if constexpr (std::is_same_v<T, node::Parameter>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, node::Unary>) {
                if (n.op == UnaryOp::neg) {
                    out += "(-";
                    print(out, n.arg);
                    out += ')';
                } else {
                    out += function_name(n.op);
                    out += '(';
                    print(out, n.arg);
                    out += ')';
                }
            } else if constexpr (std::is_same_v<T, node::Binary>) {
                static constexpr const char* ops[] = {" + ", " - ", " * ", " / "};
                out += '(';
                print(out, n.lhs);
                out += ops[static_cast<int>(n.op)];
                print(out, n.rhs);
                out += ')';
            } else {
                out += '(';
                print(out, n.base);
                out += '^';
                out += format_number(n.exponent);
                out += ')';
            }
        },
        e.node().v);
}

}  // namespace detail

/// Canonical fully parenthesized form; parse(to_string(e)) == e.
inline std::string to_string(const Expr& e) {
    std::string out;
    detail::print(out, e);
    return out;
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

/// Names of all parameters referenced by `e`.
inline std::set<std::string, std::less<>> parameters(const Expr& e) {
    std::set<std::string, std::less<>> names;
    std::function<void(const Expr&)> walk = [&](const Expr& x) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, node::Parameter>) {
                    names.insert(n.name);
                } else if constexpr (std::is_same_v<T, node::Unary>) {
                    walk(n.arg);
                } else if constexpr (std::is_same_v<T, node::Binary>) {
                    walk(n.lhs);
                    walk(n.rhs);
                } else if constexpr (std::is_same_v<T, node::Power>) {
                    walk(n.base);
                }
            },
            x.node().v);
    };
    walk(e);
    return names;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline bool is_function_name(std::string_view s, UnaryOp& op) {
    static constexpr std::pair<std::string_view, UnaryOp> table[] = {
        {"sin", UnaryOp::sin}, {"cos", UnaryOp::cos}, {"tan", UnaryOp::tan},
        {"exp", UnaryOp::exp}, {"ln", UnaryOp::ln},   {"sqrt", UnaryOp::sqrt},
    };
    for (const auto& [name, o] : table) {
        if (name == s) {
            op = o;
            return true;
        }
    }
    return false;
}

inline bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
public:
    Parser(std::string_view text, const std::set<std::string, std::less<>>& declared)
        : text_(text), declared_(declared) {}

    Expr parse() {
        skip_ws();
        if (pos_ == text_.size()) fail({"expression"});
        Expr e = expr();
        skip_ws();
        if (pos_ != text_.size()) fail({"operator", "end of input"});
        return e;
    }

private:
    static inline const std::vector<std::string> atom_start = {"number", "'x'", "identifier", "'('", "'-'"};

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string msg = "syntax error at offset " + std::to_string(pos_) + ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += i + 1 == expected.size() ? " or " : ", ";
            msg += expected[i];
        }
        throw ParseError(msg, pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail({std::string("'") + c + "'"});
    }

    Expr expr() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = binary(BinaryOp::add, std::move(lhs), term());
            } else if (accept('-')) {
                lhs = binary(BinaryOp::sub, std::move(lhs), term());
            } else {
                return lhs;
            }
        }
    }

    Expr term() {
        Expr lhs = factor();
        for (;;) {
            if (accept('*')) {
                lhs = binary(BinaryOp::mul, std::move(lhs), factor());
            } else if (accept('/')) {
                lhs = binary(BinaryOp::div, std::move(lhs), factor());
            } else {
                return lhs;
            }
        }
    }

    Expr factor() {
        if (accept('-')) return unary(UnaryOp::neg, factor());
        Expr base = atom();
        if (accept('^')) {
            bool negative = accept('-');
            double e = number_or_fail();
            return power(std::move(base), negative ? -e : e);
        }
        return base;
    }

    bool at_number() {
        skip_ws();
        if (pos_ >= text_.size()) return false;
        char c = text_[pos_];
        return is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]));
    }

    double number_or_fail() {
        if (!at_number()) fail({"number"});
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && is_digit(text_[pos_])) {
                while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
            } else {
                pos_ = mark + 1;
                fail({"exponent digits"});
            }
        }
        double value = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || !std::isfinite(value)) {
            pos_ = start;
            fail({"finite number"});
        }
        return value;
    }

    Expr atom() {
        skip_ws();
        if (at_number()) return constant(number_or_fail());
        if (accept('(')) {
            Expr e = expr();
            expect(')');
            return e;
        }
        if (pos_ < text_.size() && is_ident_start(text_[pos_])) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
            std::string_view name = text_.substr(start, pos_ - start);
            UnaryOp op{};
            if (is_function_name(name, op)) {
                expect('(');
                Expr arg = expr();
                expect(')');
                return unary(op, std::move(arg));
            }
            if (name == "x") return variable();
            if (!declared_.contains(name)) {
                throw ParseError("unknown identifier '" + std::string(name) + "' at offset " +
                                     std::to_string(start) + " (not declared as a parameter)",
                                 start, {"declared parameter"});
            }
            return parameter(std::string(name));
        }
        fail(atom_start);
    }

    std::string_view text_;
    const std::set<std::string, std::less<>>& declared_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text`; identifiers other than `x` and the function names must be in `declared`.
inline Expr parse(std::string_view text, const std::set<std::string, std::less<>>& declared = {}) {
    return detail::Parser(text, declared).parse();
}

/// Convenience overload: every key of `params` counts as declared.
inline Expr parse(std::string_view text, const Params& params) {
    std::set<std::string, std::less<>> declared;
    for (const auto& [k, v] : params) declared.insert(k);
    return parse(text, declared);
}

// ---------------------------------------------------------------------------
// Evaluation

inline double eval(const Expr& e, double x, const Params& params = {}) {
    auto finite = [](double v, const char* what) {
        if (!std::isfinite(v)) throw EvalError(EvalErrorKind::non_finite, what);
        return v;
    };
    return std::visit(
        [&](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Constant>) {
                return n.value;
            } else if constexpr (std::is_same_v<T, node::Variable>) {
                return x;
            } else if constexpr (std::is_same_v<T, node::Parameter>) {
                auto it = params.find(n.name);
                if (it == params.end()) throw EvalError(EvalErrorKind::unbound_parameter, n.name);
                return it->second;
            } else if constexpr (std::is_same_v<T, node::Unary>) {
                double a = eval(n.arg, x, params);
                double out = 0.0;
                if (!detail::apply_unary(n.op, a, out)) {
                    throw EvalError(n.op == UnaryOp::ln ? EvalErrorKind::log_domain : EvalErrorKind::sqrt_domain,
                                    function_name(n.op) + std::string("(") + format_number(a) + ")");
                }
                return finite(out, function_name(n.op));
            } else if constexpr (std::is_same_v<T, node::Binary>) {
                double a = eval(n.lhs, x, params);
                double b = eval(n.rhs, x, params);
                double out = 0.0;
                if (!detail::apply_binary(n.op, a, b, out)) {
                    throw EvalError(EvalErrorKind::division_by_zero, format_number(a) + " / 0");
                }
                return finite(out, "arithmetic overflow");
            } else {
                double a = eval(n.base, x, params);
                double out = 0.0;
                if (!detail::apply_power(a, n.exponent, out)) {
                    throw EvalError(a == 0.0 ? EvalErrorKind::division_by_zero : EvalErrorKind::pow_domain,
                                    format_number(a) + "^" + format_number(n.exponent));
                }
                return finite(out, "power overflow");
            }
        },
        e.node().v);
}

// ---------------------------------------------------------------------------
// Differentiation with respect to x

inline Expr differentiate(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> Expr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Constant> || std::is_same_v<T, node::Parameter>) {
                return constant(0.0);
            } else if constexpr (std::is_same_v<T, node::Variable>) {
                return constant(1.0);
            } else if constexpr (std::is_same_v<T, node::Unary>) {
                const Expr& a = n.arg;
                Expr da = differentiate(a);
                switch (n.op) {
                    case UnaryOp::neg: return -da;
                    case UnaryOp::sin: return cos(a) * da;
                    case UnaryOp::cos: return -(sin(a) * da);
                    case UnaryOp::tan: return da / power(cos(a), 2.0);
                    case UnaryOp::exp: return e * da;
                    case UnaryOp::ln: return da / a;
                    case UnaryOp::sqrt: return da / (constant(2.0) * e);
                }
                return constant(0.0);
            } else if constexpr (std::is_same_v<T, node::Binary>) {
                Expr da = differentiate(n.lhs);
                Expr db = differentiate(n.rhs);
                switch (n.op) {
                    case BinaryOp::add: return da + db;
                    case BinaryOp::sub: return da - db;
                    case BinaryOp::mul: return da * n.rhs + n.lhs * db;
                    case BinaryOp::div: return (da * n.rhs - n.lhs * db) / power(n.rhs, 2.0);
                }
                return constant(0.0);
            } else {
                return constant(n.exponent) * power(n.base, n.exponent - 1.0) * differentiate(n.base);
            }
        },
        e.node().v);
}

}  // namespace riccati
