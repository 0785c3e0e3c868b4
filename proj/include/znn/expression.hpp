#pragma once

// Closed expression language for operator definitions in problem and scenario
// files. Grammar (whitespace ignored):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
//            | '[' expr (',' expr)* ']'            column vector of scalars
//            | '[' row (',' row)* ']'              matrix, row := '[' expr (',' expr)* ']'
//   func    := sin | cos | exp | sqrt
//
// Every value is a matrix; scalars are 1x1. '+' and '-' are elementwise with
// scalar broadcast, '*' is a matrix product or a scalar scaling, '/' and '^'
// need scalar right operands. Functions apply elementwise. Derivatives in t are
// computed exactly by forward-mode differentiation alongside the value.

#include "znn/core.hpp"
#include "znn/operator.hpp"

#include <cctype>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace znn {

class ExpressionError : public InvalidInput {
public:
    ExpressionError(const std::string& message, std::size_t position)
        : InvalidInput("expression error at column " + std::to_string(position + 1) + ": " + message),
          position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class Expression {
public:
    /// Value and exact time derivative.
    struct Dual {
        Matrix value;
        Matrix derivative;
    };

    [[nodiscard]] static Expression parse(std::string_view text);

    [[nodiscard]] Dual evaluate_dual(double t) const { return root_->eval(t); }
    [[nodiscard]] Matrix evaluate(double t) const { return root_->eval(t).value; }
    [[nodiscard]] Matrix derivative(double t) const { return root_->eval(t).derivative; }

    [[nodiscard]] Index rows() const { return rows_; }
    [[nodiscard]] Index cols() const { return cols_; }
    [[nodiscard]] const std::string& text() const { return text_; }

    /// Operator with the expression's value and exact derivative.
    [[nodiscard]] TimeVaryingOperator to_operator() const {
        TimeVaryingOperator op;
        op.rows = rows_;
        op.cols = cols_;
        op.value = [root = root_](double t) { return root->eval(t).value; };
        op.derivative = [root = root_](double t) { return root->eval(t).derivative; };
        return op;
    }

    struct Node {
        virtual ~Node() = default;
        [[nodiscard]] virtual Dual eval(double t) const = 0;
    };
    using NodePtr = std::shared_ptr<const Node>;

private:
    NodePtr root_;
    Index rows_ = 0;
    Index cols_ = 0;
    std::string text_;
};

namespace detail::expr {

using Dual = Expression::Dual;
using Node = Expression::Node;
using NodePtr = Expression::NodePtr;

[[nodiscard]] inline Dual scalar(double v, double d = 0.0) {
    return {Matrix::Constant(1, 1, v), Matrix::Constant(1, 1, d)};
}

[[nodiscard]] inline bool is_scalar(const Matrix& m) { return m.rows() == 1 && m.cols() == 1; }

struct Constant final : Node {
    double v;
    explicit Constant(double value) : v(value) {}
    Dual eval(double) const override { return scalar(v); }
};

struct Time final : Node {
    Dual eval(double t) const override { return scalar(t, 1.0); }
};

struct Negate final : Node {
    NodePtr a;
    explicit Negate(NodePtr x) : a(std::move(x)) {}
    Dual eval(double t) const override {
        auto r = a->eval(t);
        return {-r.value, -r.derivative};
    }
};

[[nodiscard]] inline Matrix broadcast(const Matrix& m, Index rows, Index cols) {
    if (m.rows() == rows && m.cols() == cols) return m;
    return Matrix::Constant(rows, cols, m(0, 0));
}

struct AddSub final : Node {
    NodePtr a, b;
    double sign;
    AddSub(NodePtr x, NodePtr y, double s) : a(std::move(x)), b(std::move(y)), sign(s) {}
    Dual eval(double t) const override {
        auto x = a->eval(t);
        auto y = b->eval(t);
        const Index r = is_scalar(x.value) ? y.value.rows() : x.value.rows();
        const Index c = is_scalar(x.value) ? y.value.cols() : x.value.cols();
        return {broadcast(x.value, r, c) + sign * broadcast(y.value, r, c),
                broadcast(x.derivative, r, c) + sign * broadcast(y.derivative, r, c)};
    }
};

struct Multiply final : Node {
    NodePtr a, b;
    Multiply(NodePtr x, NodePtr y) : a(std::move(x)), b(std::move(y)) {}
    Dual eval(double t) const override {
        auto x = a->eval(t);
        auto y = b->eval(t);
        if (is_scalar(x.value) || is_scalar(y.value)) {
            const auto& s = is_scalar(x.value) ? x : y;
            const auto& m = is_scalar(x.value) ? y : x;
            return {s.value(0, 0) * m.value, s.derivative(0, 0) * m.value + s.value(0, 0) * m.derivative};
        }
        return {x.value * y.value, x.derivative * y.value + x.value * y.derivative};
    }
};

struct Divide final : Node {
    NodePtr a, b;
    Divide(NodePtr x, NodePtr y) : a(std::move(x)), b(std::move(y)) {}
    Dual eval(double t) const override {
        auto x = a->eval(t);
        auto y = b->eval(t);
        const double v = y.value(0, 0);
        const double dv = y.derivative(0, 0);
        return {x.value / v, (x.derivative * v - x.value * dv) / (v * v)};
    }
};

struct Power final : Node {
    NodePtr a, b;
    Power(NodePtr x, NodePtr y) : a(std::move(x)), b(std::move(y)) {}
    Dual eval(double t) const override {
        auto x = a->eval(t);
        auto y = b->eval(t);
        const double p = y.value(0, 0);
        const double dp = y.derivative(0, 0);
        Dual out{x.value, x.derivative};
        for (Index i = 0; i < x.value.size(); ++i) {
            const double u = x.value(i);
            const double du = x.derivative(i);
            const double v = std::pow(u, p);
            double d = p == 0.0 ? 0.0 : p * std::pow(u, p - 1.0) * du;
            if (dp != 0.0) d += v * std::log(u) * dp;
            out.value(i) = v;
            out.derivative(i) = d;
        }
        return out;
    }
};

enum class Func { Sin, Cos, Exp, Sqrt };

struct Apply final : Node {
    Func f;
    NodePtr a;
    Apply(Func fn, NodePtr x) : f(fn), a(std::move(x)) {}
    Dual eval(double t) const override {
        auto x = a->eval(t);
        Dual out = x;
        for (Index i = 0; i < x.value.size(); ++i) {
            const double u = x.value(i);
            const double du = x.derivative(i);
            switch (f) {
                case Func::Sin: out.value(i) = std::sin(u); out.derivative(i) = std::cos(u) * du; break;
                case Func::Cos: out.value(i) = std::cos(u); out.derivative(i) = -std::sin(u) * du; break;
                case Func::Exp: out.value(i) = std::exp(u); out.derivative(i) = out.value(i) * du; break;
                case Func::Sqrt:
                    out.value(i) = std::sqrt(u);
                    out.derivative(i) = du / (2.0 * out.value(i));
                    break;
            }
        }
        return out;
    }
};

struct Literal final : Node {
    std::vector<std::vector<NodePtr>> rows;  // each entry must evaluate to a scalar
    Dual eval(double t) const override {
        const auto r = static_cast<Index>(rows.size());
        const auto c = static_cast<Index>(rows.front().size());
        Dual out{Matrix(r, c), Matrix(r, c)};
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) {
                auto e = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]->eval(t);
                out.value(i, j) = e.value(0, 0);
                out.derivative(i, j) = e.derivative(0, 0);
            }
        return out;
    }
};

/// Recursive-descent parser; also tracks the static shape of every subexpression.
class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    struct Parsed {
        NodePtr node;
        Index rows;
        Index cols;
    };

    Parsed parse_all() {
        auto out = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return out;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& message) const { throw ExpressionError(message, pos_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    static bool scalar_shape(const Parsed& p) { return p.rows == 1 && p.cols == 1; }

    Parsed expr() {
        auto lhs = term();
        for (;;) {
            double sign;
            if (accept('+'))
                sign = 1.0;
            else if (accept('-'))
                sign = -1.0;
            else
                return lhs;
            const std::size_t at = pos_;
            auto rhs = term();
            if (!scalar_shape(lhs) && !scalar_shape(rhs) && (lhs.rows != rhs.rows || lhs.cols != rhs.cols))
                throw ExpressionError("shape mismatch in '+'/'-'", at);
            const Index r = scalar_shape(lhs) ? rhs.rows : lhs.rows;
            const Index c = scalar_shape(lhs) ? rhs.cols : lhs.cols;
            lhs = {std::make_shared<AddSub>(lhs.node, rhs.node, sign), r, c};
        }
    }

    Parsed term() {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) {
                const std::size_t at = pos_;
                auto rhs = unary();
                Index r, c;
                if (scalar_shape(lhs)) {
                    r = rhs.rows;
                    c = rhs.cols;
                } else if (scalar_shape(rhs)) {
                    r = lhs.rows;
                    c = lhs.cols;
                } else {
                    if (lhs.cols != rhs.rows) throw ExpressionError("inner dimension mismatch in '*'", at);
                    r = lhs.rows;
                    c = rhs.cols;
                }
                lhs = {std::make_shared<Multiply>(lhs.node, rhs.node), r, c};
            } else if (accept('/')) {
                const std::size_t at = pos_;
                auto rhs = unary();
                if (!scalar_shape(rhs)) throw ExpressionError("divisor must be a scalar", at);
                lhs = {std::make_shared<Divide>(lhs.node, rhs.node), lhs.rows, lhs.cols};
            } else {
                return lhs;
            }
        }
    }

    Parsed unary() {
        if (accept('-')) {
            auto inner = unary();
            return {std::make_shared<Negate>(inner.node), inner.rows, inner.cols};
        }
        if (accept('+')) return unary();
        return power();
    }

    Parsed power() {
        auto base = primary();
        if (accept('^')) {
            const std::size_t at = pos_;
            auto exponent = unary();
            if (!scalar_shape(exponent)) throw ExpressionError("exponent must be a scalar", at);
            return {std::make_shared<Power>(base.node, exponent.node), base.rows, base.cols};
        }
        return base;
    }

    Parsed primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char ch = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(ch))) return identifier();
        if (accept('(')) {
            auto inner = expr();
            expect(')');
            return inner;
        }
        if (accept('[')) return literal();
        fail("unexpected '" + std::string(1, ch) + "'");
    }

    Parsed number() {
        const std::string rest(s_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        return {std::make_shared<Constant>(v), 1, 1};
    }

    Parsed identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view name = s_.substr(start, pos_ - start);
        if (name == "t") return {std::make_shared<Time>(), 1, 1};
        if (name == "pi") return {std::make_shared<Constant>(std::numbers::pi), 1, 1};
        Func f;
        if (name == "sin")
            f = Func::Sin;
        else if (name == "cos")
            f = Func::Cos;
        else if (name == "exp")
            f = Func::Exp;
        else if (name == "sqrt")
            f = Func::Sqrt;
        else
            throw ExpressionError("unknown identifier '" + std::string(name) + "'", start);
        expect('(');
        auto arg = expr();
        expect(')');
        return {std::make_shared<Apply>(f, arg.node), arg.rows, arg.cols};
    }

    // Called after the opening '['.
    Parsed literal() {
        auto lit = std::make_shared<Literal>();
        skip();
        const bool nested = pos_ < s_.size() && s_[pos_] == '[';
        if (nested) {
            do {
                expect('[');
                lit->rows.push_back(scalar_list(']'));
                if (lit->rows.back().size() != lit->rows.front().size()) fail("ragged matrix literal");
            } while (accept(','));
            expect(']');
            return {lit, static_cast<Index>(lit->rows.size()), static_cast<Index>(lit->rows.front().size())};
        }
        const auto column = scalar_list(']');
        for (const auto& e : column) lit->rows.push_back({e});
        return {lit, static_cast<Index>(column.size()), 1};
    }

    std::vector<NodePtr> scalar_list(char close) {
        std::vector<NodePtr> out;
        do {
            const std::size_t at = pos_;
            auto e = expr();
            if (!scalar_shape(e)) throw ExpressionError("literal entries must be scalars", at);
            out.push_back(e.node);
        } while (accept(','));
        expect(close);
        return out;
    }
};

}  // namespace detail::expr

inline Expression Expression::parse(std::string_view text) {
    auto parsed = detail::expr::Parser(text).parse_all();
    Expression e;
    e.root_ = std::move(parsed.node);
    e.rows_ = parsed.rows;
    e.cols_ = parsed.cols;
    e.text_ = std::string(text);
    return e;
}

}  // namespace znn
