#include "fractlab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "fractlab/errors.hpp"

namespace fractlab::expr {

namespace {

ExprPtr node(Node n) { return std::make_shared<const Node>(std::move(n)); }

bool is_const(const ExprPtr& e, double v) {
    return e->kind == Node::Kind::Const && e->value == v;
}

} // namespace

ExprPtr constant(double v) {
    Node n;
    n.kind = Node::Kind::Const;
    n.value = v;
    return node(std::move(n));
}

ExprPtr param(int i) {
    if (i < 0) throw ContractError("negative parameter index");
    Node n;
    n.kind = Node::Kind::Param;
    n.index = i;
    return node(std::move(n));
}

ExprPtr coord(int j) {
    if (j < 0) throw ContractError("negative coordinate index");
    Node n;
    n.kind = Node::Kind::Coord;
    n.index = j;
    return node(std::move(n));
}

ExprPtr add(ExprPtr a, ExprPtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const) return constant(a->value + b->value);
    Node n;
    n.kind = Node::Kind::Add;
    n.a = std::move(a);
    n.b = std::move(b);
    return node(std::move(n));
}

ExprPtr sub(ExprPtr a, ExprPtr b) {
    if (is_const(b, 0.0)) return a;
    if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const) return constant(a->value - b->value);
    Node n;
    n.kind = Node::Kind::Sub;
    n.a = std::move(a);
    n.b = std::move(b);
    return node(std::move(n));
}

ExprPtr mul(ExprPtr a, ExprPtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const) return constant(a->value * b->value);
    Node n;
    n.kind = Node::Kind::Mul;
    n.a = std::move(a);
    n.b = std::move(b);
    return node(std::move(n));
}

ExprPtr neg(ExprPtr a) {
    if (a->kind == Node::Kind::Const) return constant(-a->value);
    Node n;
    n.kind = Node::Kind::Neg;
    n.a = std::move(a);
    return node(std::move(n));
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr run() {
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw ConfigError("expression parse error at offset " + std::to_string(pos_) + ": " + what +
                          " in \"" + std::string(text_) + "\"");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ExprPtr expr() {
        ExprPtr e = term();
        while (true) {
            if (eat('+'))
                e = add(e, term());
            else if (eat('-'))
                e = sub(e, term());
            else
                return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        while (eat('*')) e = mul(e, factor());
        return e;
    }

    int digits() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected digits");
        int v = 0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc()) fail("bad index");
        return v;
    }

    ExprPtr factor() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '-') {
            ++pos_;
            return neg(factor());
        }
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (c == 'p') {
            ++pos_;
            return param(digits());
        }
        if (c == 'x') {
            ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                return coord(digits());
            return coord(0);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
                ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                ++pos_;
                if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
            double v = 0.0;
            std::string num(text_.substr(start, pos_ - start));
            try {
                std::size_t used = 0;
                v = std::stod(num, &used);
                if (used != num.size()) fail("bad number \"" + num + "\"");
            } catch (const std::exception&) {
                fail("bad number \"" + num + "\"");
            }
            return constant(v);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace

ExprPtr parse(std::string_view text) { return Parser(text).run(); }

namespace {

void to_string_rec(const ExprPtr& e, std::ostringstream& os) {
    switch (e->kind) {
    case Node::Kind::Const: {
        std::ostringstream tmp;
        tmp.precision(17);
        tmp << e->value;
        os << tmp.str();
        return;
    }
    case Node::Kind::Param:
        os << 'p' << e->index;
        return;
    case Node::Kind::Coord:
        os << 'x' << e->index;
        return;
    case Node::Kind::Add:
        os << '(';
        to_string_rec(e->a, os);
        os << " + ";
        to_string_rec(e->b, os);
        os << ')';
        return;
    case Node::Kind::Sub:
        os << '(';
        to_string_rec(e->a, os);
        os << " - ";
        to_string_rec(e->b, os);
        os << ')';
        return;
    case Node::Kind::Mul:
        os << '(';
        to_string_rec(e->a, os);
        os << " * ";
        to_string_rec(e->b, os);
        os << ')';
        return;
    case Node::Kind::Neg:
        os << "(-";
        to_string_rec(e->a, os);
        os << ')';
        return;
    }
}

} // namespace

std::string to_string(const ExprPtr& e) {
    std::ostringstream os;
    to_string_rec(e, os);
    return os.str();
}

double eval(const ExprPtr& e, const std::vector<double>& p, const std::vector<double>& x) {
    switch (e->kind) {
    case Node::Kind::Const:
        return e->value;
    case Node::Kind::Param:
        if (e->index >= static_cast<int>(p.size()))
            throw ContractError("expression uses p" + std::to_string(e->index) + " but only " +
                                std::to_string(p.size()) + " parameter components were given");
        return p[static_cast<std::size_t>(e->index)];
    case Node::Kind::Coord:
        if (e->index >= static_cast<int>(x.size()))
            throw ContractError("expression uses x" + std::to_string(e->index) + " but only " +
                                std::to_string(x.size()) + " coordinates were given");
        return x[static_cast<std::size_t>(e->index)];
    case Node::Kind::Add:
        return eval(e->a, p, x) + eval(e->b, p, x);
    case Node::Kind::Sub:
        return eval(e->a, p, x) - eval(e->b, p, x);
    case Node::Kind::Mul:
        return eval(e->a, p, x) * eval(e->b, p, x);
    case Node::Kind::Neg:
        return -eval(e->a, p, x);
    }
    throw InvariantError("corrupt expression node");
}

poly::TruncPoly eval_jet(const ExprPtr& e, const std::vector<poly::TruncPoly>& params,
                         const std::vector<poly::TruncPoly>& coords) {
    const poly::MultiIndexSet* set = nullptr;
    if (!params.empty())
        set = params.front().set;
    else if (!coords.empty())
        set = coords.front().set;
    if (!set) throw ContractError("eval_jet needs at least one substituted variable");

    switch (e->kind) {
    case Node::Kind::Const:
        return poly::TruncPoly::constant(*set, e->value);
    case Node::Kind::Param:
        if (e->index >= static_cast<int>(params.size()))
            throw ContractError("eval_jet: missing substitution for p" + std::to_string(e->index));
        return params[static_cast<std::size_t>(e->index)];
    case Node::Kind::Coord:
        if (e->index >= static_cast<int>(coords.size()))
            throw ContractError("eval_jet: missing substitution for x" + std::to_string(e->index));
        return coords[static_cast<std::size_t>(e->index)];
    case Node::Kind::Add:
        return eval_jet(e->a, params, coords) + eval_jet(e->b, params, coords);
    case Node::Kind::Sub:
        return eval_jet(e->a, params, coords) - eval_jet(e->b, params, coords);
    case Node::Kind::Mul:
        return eval_jet(e->a, params, coords) * eval_jet(e->b, params, coords);
    case Node::Kind::Neg:
        return eval_jet(e->a, params, coords) * -1.0;
    }
    throw InvariantError("corrupt expression node");
}

ExprPtr d_dparam(const ExprPtr& e, int i) {
    switch (e->kind) {
    case Node::Kind::Const:
    case Node::Kind::Coord:
        return constant(0.0);
    case Node::Kind::Param:
        return constant(e->index == i ? 1.0 : 0.0);
    case Node::Kind::Add:
        return add(d_dparam(e->a, i), d_dparam(e->b, i));
    case Node::Kind::Sub:
        return sub(d_dparam(e->a, i), d_dparam(e->b, i));
    case Node::Kind::Mul:
        return add(mul(d_dparam(e->a, i), e->b), mul(e->a, d_dparam(e->b, i)));
    case Node::Kind::Neg:
        return neg(d_dparam(e->a, i));
    }
    throw InvariantError("corrupt expression node");
}

ExprPtr d_dcoord(const ExprPtr& e, int j) {
    switch (e->kind) {
    case Node::Kind::Const:
    case Node::Kind::Param:
        return constant(0.0);
    case Node::Kind::Coord:
        return constant(e->index == j ? 1.0 : 0.0);
    case Node::Kind::Add:
        return add(d_dcoord(e->a, j), d_dcoord(e->b, j));
    case Node::Kind::Sub:
        return sub(d_dcoord(e->a, j), d_dcoord(e->b, j));
    case Node::Kind::Mul:
        return add(mul(d_dcoord(e->a, j), e->b), mul(e->a, d_dcoord(e->b, j)));
    case Node::Kind::Neg:
        return neg(d_dcoord(e->a, j));
    }
    throw InvariantError("corrupt expression node");
}

namespace {

int max_index(const ExprPtr& e, Node::Kind kind) {
    switch (e->kind) {
    case Node::Kind::Const:
        return -1;
    case Node::Kind::Param:
    case Node::Kind::Coord:
        return e->kind == kind ? e->index : -1;
    case Node::Kind::Neg:
        return max_index(e->a, kind);
    default:
        return std::max(max_index(e->a, kind), max_index(e->b, kind));
    }
}

} // namespace

int max_param_index(const ExprPtr& e) { return max_index(e, Node::Kind::Param); }
int max_coord_index(const ExprPtr& e) { return max_index(e, Node::Kind::Coord); }

} // namespace fractlab::expr
