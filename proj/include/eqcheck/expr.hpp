#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "eqcheck/error.hpp"
#include "eqcheck/jet.hpp"

namespace eqcheck {

enum class NodeKind { Number, Coordinate, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class Function { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };

struct Node {
    NodeKind kind = NodeKind::Number;
    double number = 0.0;   // Number literal, or the folded exponent of Pow
    int index = -1;        // Coordinate
    Function func = Function::Sin;
    int lhs = -1;          // operand / left child / call argument
    int rhs = -1;          // right child
    std::size_t offset = 0;
};

inline std::string_view function_name(Function f) {
    switch (f) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Tan: return "tan";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
    case Function::Sinh: return "sinh";
    case Function::Cosh: return "cosh";
    case Function::Tanh: return "tanh";
    }
    return "?";
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Immutable expression tree over chart coordinates. Nodes live in a shared arena;
/// copies are cheap and evaluation never mutates.
class ScalarExpr {
public:
    /// The constant 0 over a chart of dimension `dim`.
    explicit ScalarExpr(int dim = 0) : dim_(dim) {
        auto nodes = std::make_shared<std::vector<Node>>();
        nodes->push_back(Node{});
        nodes_ = std::move(nodes);
        root_ = 0;
    }

    ScalarExpr(std::shared_ptr<const std::vector<Node>> nodes, int root, int dim)
        : nodes_(std::move(nodes)), root_(root), dim_(dim) {}

    int dimension() const noexcept { return dim_; }
    int root() const noexcept { return root_; }
    const Node& node(int i) const { return (*nodes_)[static_cast<std::size_t>(i)]; }

    bool is_constant() const { return is_constant(root_); }
    bool is_constant(int i) const {
        const Node& n = node(i);
        switch (n.kind) {
        case NodeKind::Number: return true;
        case NodeKind::Coordinate: return false;
        case NodeKind::Negate:
        case NodeKind::Call: return is_constant(n.lhs);
        case NodeKind::Pow: return is_constant(n.lhs);
        default: return is_constant(n.lhs) && is_constant(n.rhs);
        }
    }

    /// Canonical text using the coordinate names it was parsed against.
    std::string to_string(std::span<const std::string> coordinates) const {
        std::string out;
        print(root_, coordinates, out);
        return out;
    }

    /// Structural equality (node kinds, literals, indices), ignoring offsets.
    friend bool operator==(const ScalarExpr& a, const ScalarExpr& b) {
        return a.dim_ == b.dim_ && same(a, a.root_, b, b.root_);
    }

private:
    static int precedence(NodeKind k) {
        switch (k) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Negate: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;
        }
    }

    void print_child(int child, bool paren, std::span<const std::string> coords, std::string& out) const {
        if (paren) out += '(';
        print(child, coords, out);
        if (paren) out += ')';
    }

    void print(int i, std::span<const std::string> coords, std::string& out) const {
        const Node& n = node(i);
        const int p = precedence(n.kind);
        switch (n.kind) {
        case NodeKind::Number: out += format_double(n.number); return;
        case NodeKind::Coordinate: out += coords[static_cast<std::size_t>(n.index)]; return;
        case NodeKind::Negate:
            out += '-';
            print_child(n.lhs, precedence(node(n.lhs).kind) < p, coords, out);
            return;
        case NodeKind::Call:
            out += function_name(n.func);
            out += '(';
            print(n.lhs, coords, out);
            out += ')';
            return;
        case NodeKind::Pow:
            print_child(n.lhs, precedence(node(n.lhs).kind) <= p, coords, out);
            out += '^';
            print_child(n.rhs, precedence(node(n.rhs).kind) < p, coords, out);
            return;
        default: {
            const char* op = n.kind == NodeKind::Add ? " + "
                           : n.kind == NodeKind::Sub ? " - "
                           : n.kind == NodeKind::Mul ? "*"
                                                     : "/";
            print_child(n.lhs, precedence(node(n.lhs).kind) < p, coords, out);
            out += op;
            print_child(n.rhs, precedence(node(n.rhs).kind) <= p, coords, out);
            return;
        }
        }
    }

    static bool same(const ScalarExpr& a, int i, const ScalarExpr& b, int j) {
        const Node& x = a.node(i);
        const Node& y = b.node(j);
        if (x.kind != y.kind) return false;
        switch (x.kind) {
        case NodeKind::Number: return x.number == y.number;
        case NodeKind::Coordinate: return x.index == y.index;
        case NodeKind::Negate: return same(a, x.lhs, b, y.lhs);
        case NodeKind::Call: return x.func == y.func && same(a, x.lhs, b, y.lhs);
        default: return same(a, x.lhs, b, y.lhs) && same(a, x.rhs, b, y.rhs);
        }
    }

    std::shared_ptr<const std::vector<Node>> nodes_;
    int root_ = 0;
    int dim_ = 0;
};

namespace detail {

class Parser {
public:
    Parser(std::string_view src, std::span<const std::string> coords) : src_(src), coords_(coords) {}

    ScalarExpr run() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "empty expression");
        const int root = expr();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError(pos_, std::string("unexpected character '") + src_[pos_] + "'");
        return ScalarExpr(std::make_shared<const std::vector<Node>>(std::move(nodes_)), root,
                          static_cast<int>(coords_.size()));
    }

private:
    int add(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                      src_[pos_] == '\r'))
            ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    // expr := term (('+'|'-') term)*
    int expr() {
        int lhs = term();
        while (true) {
            skip_ws();
            if (pos_ >= src_.size()) return lhs;
            const char c = src_[pos_];
            if (c != '+' && c != '-') return lhs;
            const std::size_t at = pos_++;
            const int rhs = term();
            lhs = add(Node{c == '+' ? NodeKind::Add : NodeKind::Sub, 0.0, -1, Function::Sin, lhs, rhs, at});
        }
    }

    // term := factor (('*'|'/') factor)*
    int term() {
        int lhs = factor();
        while (true) {
            skip_ws();
            if (pos_ >= src_.size()) return lhs;
            const char c = src_[pos_];
            if (c != '*' && c != '/') return lhs;
            const std::size_t at = pos_++;
            const int rhs = factor();
            lhs = add(Node{c == '*' ? NodeKind::Mul : NodeKind::Div, 0.0, -1, Function::Sin, lhs, rhs, at});
        }
    }

    // factor := '-' factor | base ('^' factor)?
    // Unary minus sits below '^' so that -x^2 is -(x^2).
    int factor() {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '-') {
            const std::size_t at = pos_++;
            const int operand = factor();
            return add(Node{NodeKind::Negate, 0.0, -1, Function::Sin, operand, -1, at});
        }
        const int b = base();
        if (peek('^')) {
            const std::size_t at = pos_++;
            const int exponent = factor();
            if (!constant(exponent))
                throw ParseError(at, "exponent must be a constant expression");
            Node n{NodeKind::Pow, fold(exponent), -1, Function::Sin, b, exponent, at};
            return add(n);
        }
        return b;
    }

    // base := number | ident | ident '(' args ')' | '(' expr ')'
    int base() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = expr();
            if (!peek(')')) throw ParseError(pos_, "expected ')'");
            ++pos_;
            return inner;
        }
        if (is_digit(c) || c == '.') return number();
        if (is_ident_start(c)) return identifier();
        throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    int number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '.')) ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (look < src_.size() && is_digit(src_[look])) {
                pos_ = look;
                while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
            }
        }
        double v = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) throw ParseError(start, "malformed number");
        return add(Node{NodeKind::Number, v, -1, Function::Sin, -1, -1, start});
    }

    int identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        const std::string name(src_.substr(start, pos_ - start));

        if (peek('(')) {
            const auto f = lookup_function(name);
            if (!f) throw ParseError(start, "unknown function '" + name + "'");
            ++pos_;
            std::vector<int> args;
            if (!peek(')')) {
                args.push_back(expr());
                while (peek(',')) {
                    ++pos_;
                    args.push_back(expr());
                }
            }
            if (!peek(')')) throw ParseError(pos_, "expected ')'");
            ++pos_;
            if (args.size() != 1)
                throw ParseError(start, "function '" + name + "' takes 1 argument, got " +
                                            std::to_string(args.size()));
            return add(Node{NodeKind::Call, 0.0, -1, *f, args[0], -1, start});
        }
        for (std::size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i] == name)
                return add(Node{NodeKind::Coordinate, 0.0, static_cast<int>(i), Function::Sin, -1, -1, start});
        if (name == "pi") return add(Node{NodeKind::Number, std::numbers::pi, -1, Function::Sin, -1, -1, start});
        if (name == "e") return add(Node{NodeKind::Number, std::numbers::e, -1, Function::Sin, -1, -1, start});
        throw ParseError(start, "unknown identifier '" + name + "'");
    }

    static const Function* lookup_function(const std::string& name) {
        static constexpr Function all[] = {Function::Sin, Function::Cos, Function::Tan,
                                           Function::Exp, Function::Log, Function::Sqrt,
                                           Function::Sinh, Function::Cosh, Function::Tanh};
        for (const Function& f : all)
            if (function_name(f) == name) return &f;
        return nullptr;
    }

    bool constant(int i) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.kind) {
        case NodeKind::Number: return true;
        case NodeKind::Coordinate: return false;
        case NodeKind::Negate:
        case NodeKind::Call:
        case NodeKind::Pow: return constant(n.lhs);
        default: return constant(n.lhs) && constant(n.rhs);
        }
    }

    double fold(int root) const;

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

    std::string_view src_;
    std::span<const std::string> coords_;
    std::vector<Node> nodes_;
    std::size_t pos_ = 0;
};

inline bool is_integer(double p) { return std::isfinite(p) && std::floor(p) == p; }

/// Falling factorial p (p-1) ... (p-k+1).
inline double falling(double p, int k) {
    double c = 1.0;
    for (int m = 0; m < k; ++m) c *= (p - m);
    return c;
}

class JetEvaluator {
public:
    JetEvaluator(const ScalarExpr& e, std::span<const double> point, int order)
        : e_(e), point_(point), order_(order), dim_(static_cast<int>(point.size())) {}

    Jet3 eval(int i) const {
        const Node& n = e_.node(i);
        switch (n.kind) {
        case NodeKind::Number: return Jet3::constant(dim_, order_, n.number);
        case NodeKind::Coordinate: return Jet3::variable(dim_, order_, n.index, point_[static_cast<std::size_t>(n.index)]);
        case NodeKind::Negate: return -eval(n.lhs);
        case NodeKind::Add: return eval(n.lhs) + eval(n.rhs);
        case NodeKind::Sub: return eval(n.lhs) - eval(n.rhs);
        case NodeKind::Mul: return eval(n.lhs) * eval(n.rhs);
        case NodeKind::Div: {
            Jet3 den = eval(n.rhs);
            if (den.value() == 0.0 || !std::isfinite(den.value()))
                throw DomainError(n.offset, "division by zero");
            return eval(n.lhs) * den.reciprocal();
        }
        case NodeKind::Pow: return power(eval(n.lhs), n.number, n.offset);
        case NodeKind::Call: return call(n.func, eval(n.lhs), n.offset);
        }
        return Jet3(dim_, order_);
    }

private:
    static Jet3 power(const Jet3& u, double p, std::size_t at) {
        const double x = u.value();
        if (p == 0.0) return Jet3::constant(u.dim(), u.order(), 1.0);
        if (is_integer(p)) {
            if (x == 0.0 && p < 0.0) throw DomainError(at, "zero raised to a negative power");
        } else if (!(x > 0.0)) {
            throw DomainError(at, "non-integer power of a non-positive base");
        }
        double h[4];
        for (int k = 0; k < 4; ++k) {
            const double c = falling(p, k);
            h[k] = c == 0.0 ? 0.0 : c * std::pow(x, p - k);
        }
        return u.compose(h[0], h[1], h[2], h[3]);
    }

    static Jet3 call(Function f, const Jet3& u, std::size_t at) {
        const double x = u.value();
        switch (f) {
        case Function::Sin: return u.compose(std::sin(x), std::cos(x), -std::sin(x), -std::cos(x));
        case Function::Cos: return u.compose(std::cos(x), -std::sin(x), -std::cos(x), std::sin(x));
        case Function::Tan: {
            const double c = std::cos(x);
            if (c == 0.0) throw DomainError(at, "tan at a pole");
            const double t = std::tan(x);
            const double s2 = 1.0 + t * t;
            return u.compose(t, s2, 2.0 * t * s2, s2 * (2.0 * s2 + 4.0 * t * t));
        }
        case Function::Exp: {
            const double v = std::exp(x);
            return u.compose(v, v, v, v);
        }
        case Function::Log: {
            if (!(x > 0.0)) throw DomainError(at, "log of a non-positive value");
            const double r = 1.0 / x;
            return u.compose(std::log(x), r, -r * r, 2.0 * r * r * r);
        }
        case Function::Sqrt: {
            if (!(x > 0.0)) throw DomainError(at, "sqrt of a non-positive value");
            const double s = std::sqrt(x);
            return u.compose(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x));
        }
        case Function::Sinh: return u.compose(std::sinh(x), std::cosh(x), std::sinh(x), std::cosh(x));
        case Function::Cosh: return u.compose(std::cosh(x), std::sinh(x), std::cosh(x), std::sinh(x));
        case Function::Tanh: {
            const double t = std::tanh(x);
            const double s = 1.0 - t * t;
            return u.compose(t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0));
        }
        }
        return u;
    }

    const ScalarExpr& e_;
    std::span<const double> point_;
    int order_;
    int dim_;
};

inline double Parser::fold(int root) const {
    // The exponent subtree is constant; evaluate it on an empty chart.
    auto nodes = std::make_shared<const std::vector<Node>>(nodes_);
    ScalarExpr sub(nodes, root, 0);
    try {
        return JetEvaluator(sub, {}, 0).eval(root).value();
    } catch (const DomainError& e) {
        throw ParseError(e.offset(), "exponent is not a finite constant");
    }
}

} // namespace detail

/// Parses `source` against the ordered coordinate names. Identifiers resolve to
/// coordinates first, then to the constants `pi` and `e`.
inline ScalarExpr parse_expr(std::string_view source, std::span<const std::string> coordinates) {
    for (std::size_t i = 0; i < coordinates.size(); ++i)
        for (std::size_t j = i + 1; j < coordinates.size(); ++j)
            if (coordinates[i] == coordinates[j])
                throw PreconditionError("duplicate coordinate name '" + coordinates[i] + "'");
    return detail::Parser(source, coordinates).run();
}

inline ScalarExpr parse_expr(std::string_view source, std::initializer_list<std::string> coordinates) {
    std::vector<std::string> c(coordinates);
    return parse_expr(source, std::span<const std::string>(c));
}

/// Value and partial derivatives through `order` (default 3) at `point`.
inline Jet3 eval_jet(const ScalarExpr& e, std::span<const double> point, int order = 3) {
    if (static_cast<int>(point.size()) != e.dimension())
        throw PreconditionError("point has dimension " + std::to_string(point.size()) +
                                ", expression expects " + std::to_string(e.dimension()));
    return detail::JetEvaluator(e, point, order).eval(e.root());
}

inline double eval_value(const ScalarExpr& e, std::span<const double> point) {
    return eval_jet(e, point, 0).value();
}

} // namespace eqcheck
