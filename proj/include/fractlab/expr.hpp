#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fractlab/poly.hpp"

namespace fractlab::expr {

// Restricted expression grammar for map definitions: constants, parameter
// components p0, p1, ..., fiber coordinates x (alias x0), x1, ..., the
// operators + - * and parentheses. Everything definable here is a polynomial
// in (p, x), which is what makes exact jet evaluation possible.
//
//   expr   = term { ("+" | "-") term } ;
//   term   = factor { "*" factor } ;
//   factor = number | "p" digits | "x" [ digits ] | "-" factor | "(" expr ")" ;

struct Node;
using ExprPtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { Const, Param, Coord, Add, Sub, Mul, Neg };
    Kind kind = Kind::Const;
    double value = 0.0; // Const
    int index = 0;      // Param / Coord
    ExprPtr a, b;
};

ExprPtr constant(double v);
ExprPtr param(int i);
ExprPtr coord(int j);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr neg(ExprPtr a);

// Throws ConfigError with position information on syntax errors.
ExprPtr parse(std::string_view text);

std::string to_string(const ExprPtr& e);

double eval(const ExprPtr& e, const std::vector<double>& p, const std::vector<double>& x = {});

// Evaluation with truncated polynomials substituted for the variables;
// exact through the polynomial structure of the grammar.
poly::TruncPoly eval_jet(const ExprPtr& e, const std::vector<poly::TruncPoly>& params,
                         const std::vector<poly::TruncPoly>& coords);

// Symbolic partial derivatives (lightly constant-folded).
ExprPtr d_dparam(const ExprPtr& e, int i);
ExprPtr d_dcoord(const ExprPtr& e, int j);

int max_param_index(const ExprPtr& e); // -1 when no parameter appears
int max_coord_index(const ExprPtr& e); // -1 when no coordinate appears

} // namespace fractlab::expr
