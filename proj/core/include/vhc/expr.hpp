#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vhc/errors.hpp"

namespace vhc {

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class FuncId { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs, Sgn, Atan };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree. Nodes are shared; safe to evaluate from any
// number of threads concurrently.
class Expr {
public:
    struct Num {
        double value;
    };
    struct Var {
        std::string name;
    };
    struct Neg {
        ExprPtr arg;
    };
    struct Bin {
        BinOp op;
        ExprPtr lhs;
        ExprPtr rhs;
    };
    struct Fun {
        FuncId id;
        ExprPtr arg;
    };
    using Node = std::variant<Num, Var, Neg, Bin, Fun>;

    explicit Expr(Node node) : node_(std::move(node)) {}
    const Node& node() const { return node_; }

private:
    Node node_;
};

// Building blocks. These fold constant subtrees and apply the 0/1 identities
// (x+0, x*1, x*0, x^1, ...) so that repeated differentiation stays bounded
// in size. No further simplification is attempted.
ExprPtr make_num(double value);
ExprPtr make_var(std::string name);
ExprPtr make_neg(ExprPtr arg);
ExprPtr make_bin(BinOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_fun(FuncId id, ExprPtr arg);

inline ExprPtr operator+(ExprPtr a, ExprPtr b) { return make_bin(BinOp::Add, std::move(a), std::move(b)); }
inline ExprPtr operator-(ExprPtr a, ExprPtr b) { return make_bin(BinOp::Sub, std::move(a), std::move(b)); }
inline ExprPtr operator*(ExprPtr a, ExprPtr b) { return make_bin(BinOp::Mul, std::move(a), std::move(b)); }
inline ExprPtr operator/(ExprPtr a, ExprPtr b) { return make_bin(BinOp::Div, std::move(a), std::move(b)); }
inline ExprPtr operator-(ExprPtr a) { return make_neg(std::move(a)); }

// Grammar (documented in docs/expression-grammar.md):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := primary ('^' unary)?          right-associative
//   primary:= number | name | name '(' expr ')' | '(' expr ')'
// Builtin functions: sin cos tan exp ln sqrt abs sgn atan; constants pi, e.
// Any other name must appear in `allowed_vars`, otherwise
// UnknownIdentifierError is thrown. Syntax errors carry the byte offset and
// the expected token.
ExprPtr parse(std::string_view source, std::span<const std::string> allowed_vars);
ExprPtr parse(std::string_view source, std::initializer_list<std::string> allowed_vars);

// IEEE double evaluation. Throws EvalError on unbound variables and on
// domain errors, quoting the offending subexpression.
double evaluate(const ExprPtr& e, const std::map<std::string, double>& bindings);

// Exact symbolic derivative by rewrite rules. d|x|/dx is produced as sgn(x)
// and d sgn(x)/dx as 0; the values at 0 are the caller's problem.
ExprPtr differentiate(const ExprPtr& e, std::string_view var);

// Replaces variables by expressions (used to restrict model functions to the
// constraint curve q = sigma(s)).
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& map);

// Canonical fully parenthesized form; parse(to_string(e)) evaluates
// bit-identically to e.
std::string to_string(const ExprPtr& e);

// Sorted unique variable names appearing in the tree.
std::vector<std::string> variables_of(const ExprPtr& e);

// Flat postfix program for fast repeated evaluation (integrators and
// quadrature call Psi_i millions of times). Unlike evaluate(), domain errors
// are not raised here: the IEEE result (NaN/Inf) propagates and the numeric
// layers treat non-finite values as failures.
class CompiledExpr {
public:
    CompiledExpr() = default;
    CompiledExpr(const ExprPtr& e, std::span<const std::string> vars);

    double operator()(std::span<const double> values) const;
    double operator()(double x) const {
        return (*this)(std::span<const double>(&x, 1));
    }
    bool valid() const { return !code_.empty(); }

private:
    struct Instr {
        std::uint8_t op;
        std::int32_t var = 0;
        double value = 0.0;
    };
    std::vector<Instr> code_;
    int max_stack_ = 0;
};

}  // namespace vhc
