#ifndef CONVEXCERT_EXPR_HPP
#define CONVEXCERT_EXPR_HPP

// Arithmetic expression language over variables x1..xn.
//
//   sum     := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          exponent must be constant
//   primary := number | 'pi' | x<k> | func '(' sum ')' | '(' sum ')'
//   func    := exp | log | abs | sin | cos | sqrt
//
// Gradients use forward-mode dual numbers, one pass per coordinate. At
// nonsmooth points: abs'(0) = 0, sqrt'(0) is an evaluation failure.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convexcert/core.hpp"

namespace convexcert::expr {

class ParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, UnknownIdentifier, VariableOutOfRange };

    ParseError(Kind kind, std::size_t offset, const std::string& message)
        : std::runtime_error(message + " at offset " + std::to_string(offset)),
          kind_(kind),
          offset_(offset) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

enum class NodeKind { Constant, Variable, Sum, Neg, Mul, Div, Pow, Func };
enum class FuncKind { Exp, Log, Abs, Sin, Cos, Sqrt };

inline const char* func_name(FuncKind f) {
    switch (f) {
        case FuncKind::Exp: return "exp";
        case FuncKind::Log: return "log";
        case FuncKind::Abs: return "abs";
        case FuncKind::Sin: return "sin";
        case FuncKind::Cos: return "cos";
        case FuncKind::Sqrt: return "sqrt";
    }
    return "?";
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;        // Constant value, or Pow exponent
    std::size_t index = 0;     // Variable, zero-based
    FuncKind func = FuncKind::Exp;
    std::vector<NodePtr> children;
    std::vector<bool> negated; // Sum: sign of each child
    std::size_t offset = 0;    // byte offset in the source text
};

/// Parsed expression. Immutable; cheap to copy.
class Expression {
public:
    Expression(NodePtr root, std::size_t dimension) : root_(std::move(root)), dimension_(dimension) {}

    const Node& root() const noexcept { return *root_; }
    std::size_t dimension() const noexcept { return dimension_; }

private:
    NodePtr root_;
    std::size_t dimension_;
};

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    return v < 0 ? "(" + s + ")" : s;
}

inline void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Constant: out += format_number(n.value); return;
        case NodeKind::Variable: out += "x" + std::to_string(n.index + 1); return;
        case NodeKind::Sum:
            out += '(';
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i == 0) {
                    if (n.negated[i]) out += '-';
                } else {
                    out += n.negated[i] ? " - " : " + ";
                }
                print_node(*n.children[i], out);
            }
            out += ')';
            return;
        case NodeKind::Neg:
            out += "(-";
            print_node(*n.children[0], out);
            out += ')';
            return;
        case NodeKind::Mul:
        case NodeKind::Div:
            out += '(';
            print_node(*n.children[0], out);
            out += n.kind == NodeKind::Mul ? " * " : " / ";
            print_node(*n.children[1], out);
            out += ')';
            return;
        case NodeKind::Pow:
            out += '(';
            print_node(*n.children[0], out);
            out += " ^ " + format_number(n.value) + ")";
            return;
        case NodeKind::Func:
            out += func_name(n.func);
            out += '(';
            print_node(*n.children[0], out);
            out += ')';
            return;
    }
}

}  // namespace detail

/// Canonical, fully parenthesized serialization; parse(print(e)) == e.
inline std::string print(const Expression& e) {
    std::string out;
    detail::print_node(e.root(), out);
    return out;
}

inline std::string print(const Node& n) {
    std::string out;
    detail::print_node(n, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Forward-mode AD carrier: value and one directional derivative.
struct DualScalar {
    double value = 0.0;
    double derivative = 0.0;
};

namespace detail {

[[noreturn]] inline void domain_failure(const Node& n, const std::string& what) {
    throw EvaluationError(what + " in `" + print(n) + "` (offset " + std::to_string(n.offset) + ")");
}

inline double primal(double v) { return v; }
inline double primal(const DualScalar& v) { return v.value; }

inline double constant(double v, double) { return v; }
inline DualScalar constant(double v, const DualScalar&) { return {v, 0.0}; }

inline double add(double a, double b) { return a + b; }
inline DualScalar add(DualScalar a, DualScalar b) { return {a.value + b.value, a.derivative + b.derivative}; }
inline double sub(double a, double b) { return a - b; }
inline DualScalar sub(DualScalar a, DualScalar b) { return {a.value - b.value, a.derivative - b.derivative}; }
inline double neg(double a) { return -a; }
inline DualScalar neg(DualScalar a) { return {-a.value, -a.derivative}; }
inline double mul(double a, double b) { return a * b; }
inline DualScalar mul(DualScalar a, DualScalar b) {
    return {a.value * b.value, a.derivative * b.value + a.value * b.derivative};
}
inline double div(double a, double b) { return a / b; }
inline DualScalar div(DualScalar a, DualScalar b) {
    return {a.value / b.value, (a.derivative * b.value - a.value * b.derivative) / (b.value * b.value)};
}

inline double real_pow(double b, double e, const Node&) { return std::pow(b, e); }
inline DualScalar real_pow(DualScalar b, double e, const Node&) {
    const double v = std::pow(b.value, e);
    return {v, e * std::pow(b.value, e - 1.0) * b.derivative};
}

inline double apply(FuncKind f, double a, const Node&) {
    switch (f) {
        case FuncKind::Exp: return std::exp(a);
        case FuncKind::Log: return std::log(a);
        case FuncKind::Abs: return std::fabs(a);
        case FuncKind::Sin: return std::sin(a);
        case FuncKind::Cos: return std::cos(a);
        case FuncKind::Sqrt: return std::sqrt(a);
    }
    return 0.0;
}

inline DualScalar apply(FuncKind f, DualScalar a, const Node& n) {
    switch (f) {
        case FuncKind::Exp: {
            const double e = std::exp(a.value);
            return {e, e * a.derivative};
        }
        case FuncKind::Log: return {std::log(a.value), a.derivative / a.value};
        case FuncKind::Abs: {
            const double sign = a.value > 0 ? 1.0 : (a.value < 0 ? -1.0 : 0.0);
            return {std::fabs(a.value), sign * a.derivative};
        }
        case FuncKind::Sin: return {std::sin(a.value), std::cos(a.value) * a.derivative};
        case FuncKind::Cos: return {std::cos(a.value), -std::sin(a.value) * a.derivative};
        case FuncKind::Sqrt: {
            if (a.value == 0.0) domain_failure(n, "sqrt derivative unbounded at 0");
            const double r = std::sqrt(a.value);
            return {r, a.derivative / (2.0 * r)};
        }
    }
    return {};
}

template <class S>
S eval_node(const Node& n, std::span<const S> vars) {
    switch (n.kind) {
        case NodeKind::Constant: return constant(n.value, S{});
        case NodeKind::Variable: return vars[n.index];
        case NodeKind::Sum: {
            S acc = constant(0.0, S{});
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                const S c = eval_node(*n.children[i], vars);
                acc = n.negated[i] ? sub(acc, c) : add(acc, c);
            }
            return acc;
        }
        case NodeKind::Neg: return neg(eval_node(*n.children[0], vars));
        case NodeKind::Mul: return mul(eval_node(*n.children[0], vars), eval_node(*n.children[1], vars));
        case NodeKind::Div: {
            const S a = eval_node(*n.children[0], vars);
            const S b = eval_node(*n.children[1], vars);
            if (primal(b) == 0.0) domain_failure(n, "division by zero");
            return div(a, b);
        }
        case NodeKind::Pow: {
            const S base = eval_node(*n.children[0], vars);
            const double e = n.value;
            if (e == std::trunc(e) && std::fabs(e) <= 1e6) {
                auto k = static_cast<long long>(std::fabs(e));
                S result = constant(1.0, S{});
                S factor = base;
                while (k > 0) {  // repeated squaring
                    if (k & 1) result = mul(result, factor);
                    k >>= 1;
                    if (k > 0) factor = mul(factor, factor);
                }
                if (e < 0) {
                    if (primal(result) == 0.0) domain_failure(n, "division by zero (negative power of 0)");
                    result = div(constant(1.0, S{}), result);
                }
                return result;
            }
            if (!(primal(base) > 0.0)) domain_failure(n, "non-integer power of a nonpositive base");
            return real_pow(base, e, n);
        }
        case NodeKind::Func: {
            const S a = eval_node(*n.children[0], vars);
            if (n.func == FuncKind::Log && !(primal(a) > 0.0)) domain_failure(n, "log of nonpositive argument");
            if (n.func == FuncKind::Sqrt && primal(a) < 0.0) domain_failure(n, "sqrt of negative argument");
            return apply(n.func, a, n);
        }
    }
    return S{};
}

inline void check_point(const Expression& e, const Point& x) {
    if (x.size() != e.dimension())
        throw ContractError("expression of dimension " + std::to_string(e.dimension()) +
                            " evaluated at a point of dimension " + std::to_string(x.size()));
}

}  // namespace detail

inline double evaluate(const Expression& e, const Point& x) {
    detail::check_point(e, x);
    const double v = detail::eval_node<double>(e.root(), std::span<const double>(x.coords()));
    if (!std::isfinite(v)) detail::domain_failure(e.root(), "non-finite value");
    return v;
}

/// Gradient by forward-mode AD, one dual pass per coordinate.
inline Point ad_gradient(const Expression& e, const Point& x) {
    detail::check_point(e, x);
    const std::size_t n = e.dimension();
    std::vector<DualScalar> vars(n);
    std::vector<double> grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) vars[j] = {x[j], i == j ? 1.0 : 0.0};
        const DualScalar r = detail::eval_node<DualScalar>(e.root(), std::span<const DualScalar>(vars));
        if (!std::isfinite(r.derivative)) detail::domain_failure(e.root(), "non-finite derivative");
        grad[i] = r.derivative;
    }
    return Point::unchecked(std::move(grad));
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
public:
    Parser(std::string_view text, std::size_t dimension) : text_(text), dimension_(dimension) {}

    NodePtr parse() {
        NodePtr root = parse_sum();
        skip_ws();
        if (pos_ < text_.size()) {
            if (text_[pos_] == ')') fail_syntax(pos_, "unbalanced ')'");
            fail_syntax(pos_, std::string("unexpected '") + text_[pos_] + "'");
        }
        return root;
    }

private:
    [[noreturn]] void fail_syntax(std::size_t at, const std::string& msg) {
        throw ParseError(ParseError::Kind::Syntax, at, "syntax error: " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    static std::shared_ptr<Node> make(NodeKind kind, std::size_t offset) {
        auto n = std::make_shared<Node>();
        n->kind = kind;
        n->offset = offset;
        return n;
    }

    NodePtr parse_sum() {
        const std::size_t start = (skip_ws(), pos_);
        NodePtr first = parse_term();
        if (peek() != '+' && peek() != '-') return first;
        auto sum = make(NodeKind::Sum, start);
        sum->children.push_back(first);
        sum->negated.push_back(false);
        while (peek() == '+' || peek() == '-') {
            const bool minus = text_[pos_] == '-';
            ++pos_;
            sum->children.push_back(parse_term());
            sum->negated.push_back(minus);
        }
        return sum;
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        while (peek() == '*' || peek() == '/') {
            const std::size_t at = pos_;
            auto n = make(text_[pos_] == '*' ? NodeKind::Mul : NodeKind::Div, at);
            ++pos_;
            n->children = {lhs, parse_unary()};
            lhs = n;
        }
        return lhs;
    }

    NodePtr parse_unary() {
        const char c = peek();
        if (c == '-' || c == '+') {
            const std::size_t at = pos_;
            ++pos_;
            NodePtr operand = parse_unary();
            if (c == '+') return operand;
            auto n = make(NodeKind::Neg, at);
            n->children = {operand};
            return n;
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (peek() != '^') return base;
        const std::size_t at = pos_;
        ++pos_;
        skip_ws();
        const std::size_t exponent_at = pos_;
        NodePtr exponent = parse_unary();
        if (mentions_variable(*exponent)) fail_syntax(exponent_at, "exponent must be constant");
        double e = 0.0;
        try {
            e = eval_node<double>(*exponent, std::span<const double>());
        } catch (const EvaluationError& err) {
            fail_syntax(exponent_at, std::string("invalid exponent: ") + err.what());
        }
        if (!std::isfinite(e)) fail_syntax(exponent_at, "non-finite exponent");
        auto n = make(NodeKind::Pow, at);
        n->children = {base};
        n->value = e;
        return n;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail_syntax(pos_, "unexpected end of input");
        const std::size_t at = pos_;
        const char c = text_[pos_];

        if (c == '(') {
            ++pos_;
            if (at_end()) fail_syntax(at, "unbalanced '('");
            NodePtr inner = parse_sum();
            if (at_end()) fail_syntax(at, "unbalanced '('");
            if (text_[pos_] != ')') fail_syntax(pos_, "expected ')'");
            ++pos_;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail_syntax(at, std::string("unexpected '") + c + "'");
    }

    NodePtr parse_number() {
        const std::size_t at = pos_;
        std::size_t end = pos_;
        auto digits = [&] {
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        };
        digits();
        if (end < text_.size() && text_[end] == '.') {
            ++end;
            digits();
        }
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t exp_end = end + 1;
            if (exp_end < text_.size() && (text_[exp_end] == '+' || text_[exp_end] == '-')) ++exp_end;
            if (exp_end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp_end]))) {
                end = exp_end;
                digits();
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + at, text_.data() + end, v);
        if (ec != std::errc() || ptr != text_.data() + end || !std::isfinite(v))
            fail_syntax(at, "malformed number");
        pos_ = end;
        auto n = make(NodeKind::Constant, at);
        n->value = v;
        return n;
    }

    NodePtr parse_identifier() {
        const std::size_t at = pos_;
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
            ++end;
        const std::string_view name = text_.substr(at, end - at);
        pos_ = end;

        if (name.size() >= 2 && name[0] == 'x' &&
            name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
            std::size_t k = 0;
            auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (ec != std::errc() || k == 0 || k > dimension_)
                throw ParseError(ParseError::Kind::VariableOutOfRange, at,
                                 "variable '" + std::string(name) + "' out of range for dimension " +
                                     std::to_string(dimension_));
            auto n = make(NodeKind::Variable, at);
            n->index = k - 1;
            return n;
        }
        if (name == "pi") {
            auto n = make(NodeKind::Constant, at);
            n->value = std::numbers::pi;
            return n;
        }

        static constexpr FuncKind kFuncs[] = {FuncKind::Exp, FuncKind::Log, FuncKind::Abs,
                                              FuncKind::Sin, FuncKind::Cos, FuncKind::Sqrt};
        for (FuncKind f : kFuncs) {
            if (name != func_name(f)) continue;
            if (peek() != '(') fail_syntax(pos_, "expected '(' after " + std::string(name));
            const std::size_t open = pos_++;
            if (at_end()) fail_syntax(open, "unbalanced '('");
            NodePtr arg = parse_sum();
            if (at_end()) fail_syntax(open, "unbalanced '('");
            if (text_[pos_] != ')') fail_syntax(pos_, "expected ')'");
            ++pos_;
            auto n = make(NodeKind::Func, at);
            n->func = f;
            n->children = {arg};
            return n;
        }
        throw ParseError(ParseError::Kind::UnknownIdentifier, at,
                         "unknown identifier '" + std::string(name) + "'");
    }

    static bool mentions_variable(const Node& n) {
        if (n.kind == NodeKind::Variable) return true;
        for (const auto& c : n.children)
            if (mentions_variable(*c)) return true;
        return false;
    }

    std::string_view text_;
    std::size_t dimension_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Expression parse_expression(std::string_view text, std::size_t dimension) {
    if (dimension == 0) throw ContractError("parse_expression: dimension must be >= 1");
    return Expression(detail::Parser(text, dimension).parse(), dimension);
}

// ---------------------------------------------------------------------------
// Curvature recognition
// ---------------------------------------------------------------------------

enum class Curvature { Constant, Affine, Convex, Concave, Unknown };

namespace detail {

inline Curvature flip(Curvature c) {
    if (c == Curvature::Convex) return Curvature::Concave;
    if (c == Curvature::Concave) return Curvature::Convex;
    return c;
}

inline Curvature combine(Curvature a, Curvature b) {
    if (a == Curvature::Unknown || b == Curvature::Unknown) return Curvature::Unknown;
    if (a == Curvature::Constant) return b;
    if (b == Curvature::Constant) return a;
    if (a == Curvature::Affine) return b;
    if (b == Curvature::Affine) return a;
    return a == b ? a : Curvature::Unknown;
}

inline bool at_most_affine(Curvature c) { return c == Curvature::Constant || c == Curvature::Affine; }

inline Curvature scale(Curvature c, double factor) { return factor >= 0 ? c : flip(c); }

inline Curvature curvature_of(const Node& n) {
    switch (n.kind) {
        case NodeKind::Constant: return Curvature::Constant;
        case NodeKind::Variable: return Curvature::Affine;
        case NodeKind::Sum: {
            Curvature acc = Curvature::Constant;
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                const Curvature c = curvature_of(*n.children[i]);
                acc = combine(acc, n.negated[i] ? flip(c) : c);
            }
            return acc;
        }
        case NodeKind::Neg: return flip(curvature_of(*n.children[0]));
        case NodeKind::Mul: {
            const Curvature a = curvature_of(*n.children[0]);
            const Curvature b = curvature_of(*n.children[1]);
            try {
                if (a == Curvature::Constant)
                    return scale(b, eval_node<double>(*n.children[0], std::span<const double>()));
                if (b == Curvature::Constant)
                    return scale(a, eval_node<double>(*n.children[1], std::span<const double>()));
            } catch (const EvaluationError&) {
                return Curvature::Unknown;
            }
            return Curvature::Unknown;
        }
        case NodeKind::Div: {
            const Curvature a = curvature_of(*n.children[0]);
            if (curvature_of(*n.children[1]) != Curvature::Constant) return Curvature::Unknown;
            try {
                return scale(a, eval_node<double>(*n.children[1], std::span<const double>()));
            } catch (const EvaluationError&) {
                return Curvature::Unknown;
            }
        }
        case NodeKind::Pow: {
            const Curvature b = curvature_of(*n.children[0]);
            const double e = n.value;
            if (b == Curvature::Constant || e == 0.0) return Curvature::Constant;
            if (e == 1.0) return b;
            const bool even = e == std::trunc(e) && e > 0 && std::fmod(e, 2.0) == 0.0;
            if (even && b == Curvature::Affine) return Curvature::Convex;
            return Curvature::Unknown;
        }
        case NodeKind::Func: {
            const Curvature a = curvature_of(*n.children[0]);
            if (a == Curvature::Constant) return Curvature::Constant;
            switch (n.func) {
                case FuncKind::Exp:
                    return (a == Curvature::Convex || a == Curvature::Affine) ? Curvature::Convex
                                                                             : Curvature::Unknown;
                case FuncKind::Log:
                case FuncKind::Sqrt:
                    return (a == Curvature::Concave || a == Curvature::Affine) ? Curvature::Concave
                                                                              : Curvature::Unknown;
                case FuncKind::Abs: return at_most_affine(a) ? Curvature::Convex : Curvature::Unknown;
                case FuncKind::Sin:
                case FuncKind::Cos: return Curvature::Unknown;
            }
            return Curvature::Unknown;
        }
    }
    return Curvature::Unknown;
}

inline bool contains_abs(const Node& n) {
    if (n.kind == NodeKind::Func && n.func == FuncKind::Abs) return true;
    for (const auto& c : n.children)
        if (contains_abs(*c)) return true;
    return false;
}

}  // namespace detail

/// Conservative curvature classification by composition rules.
inline Curvature curvature(const Expression& e) { return detail::curvature_of(e.root()); }

inline bool is_recognized_convex(const Expression& e) {
    const Curvature c = curvature(e);
    return c == Curvature::Convex || c == Curvature::Affine || c == Curvature::Constant;
}

/// Expressions without abs are treated as differentiable where defined.
inline bool is_smooth(const Expression& e) { return !detail::contains_abs(e.root()); }

inline std::string selection_rule(const Expression& e) {
    if (is_smooth(e)) return "gradient";
    return is_recognized_convex(e) ? "abs'(0)=0 (recognized convex composition)"
                                   : "abs'(0)=0 (selection heuristic)";
}

inline FunctionOracle make_oracle(const Expression& e) {
    return FunctionOracle(
        e.dimension(), [e](const Point& x) { return evaluate(e, x); },
        [e](const Point& x) { return ad_gradient(e, x); }, is_smooth(e), selection_rule(e));
}

}  // namespace convexcert::expr

#endif  // CONVEXCERT_EXPR_HPP
