#include "vhc/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <algorithm>
#include <array>
#include <optional>
#include <set>

namespace vhc {

namespace {

constexpr std::array<const char*, 9> kFuncNames = {
    "sin", "cos", "tan", "exp", "ln", "sqrt", "abs", "sgn", "atan"};

std::optional<FuncId> func_by_name(std::string_view name) {
    for (std::size_t i = 0; i < kFuncNames.size(); ++i)
        if (name == kFuncNames[i]) return static_cast<FuncId>(i);
    return std::nullopt;
}

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

double apply_fun(FuncId id, double x) {
    switch (id) {
        case FuncId::Sin: return std::sin(x);
        case FuncId::Cos: return std::cos(x);
        case FuncId::Tan: return std::tan(x);
        case FuncId::Exp: return std::exp(x);
        case FuncId::Ln: return std::log(x);
        case FuncId::Sqrt: return std::sqrt(x);
        case FuncId::Abs: return std::fabs(x);
        case FuncId::Sgn: return sgn(x);
        case FuncId::Atan: return std::atan(x);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double apply_bin(BinOp op, double a, double b) {
    switch (op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Div: return a / b;
        case BinOp::Pow: return std::pow(a, b);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

const double* as_num(const ExprPtr& e) {
    if (auto* n = std::get_if<Expr::Num>(&e->node())) return &n->value;
    return nullptr;
}

bool is_num(const ExprPtr& e, double v) {
    const double* n = as_num(e);
    return n && *n == v;
}

}  // namespace

ExprPtr make_num(double value) {
    return std::make_shared<Expr>(Expr::Num{value});
}

ExprPtr make_var(std::string name) {
    return std::make_shared<Expr>(Expr::Var{std::move(name)});
}

ExprPtr make_neg(ExprPtr arg) {
    if (const double* v = as_num(arg)) return make_num(-*v);
    if (auto* n = std::get_if<Expr::Neg>(&arg->node())) return n->arg;
    return std::make_shared<Expr>(Expr::Neg{std::move(arg)});
}

ExprPtr make_bin(BinOp op, ExprPtr lhs, ExprPtr rhs) {
    const double* a = as_num(lhs);
    const double* b = as_num(rhs);
    if (a && b) {
        double v = apply_bin(op, *a, *b);
        if (std::isfinite(v)) return make_num(v);
    }
    switch (op) {
        case BinOp::Add:
            if (is_num(lhs, 0)) return rhs;
            if (is_num(rhs, 0)) return lhs;
            break;
        case BinOp::Sub:
            if (is_num(rhs, 0)) return lhs;
            if (is_num(lhs, 0)) return make_neg(rhs);
            break;
        case BinOp::Mul:
            if (is_num(lhs, 0) || is_num(rhs, 0)) return make_num(0);
            if (is_num(lhs, 1)) return rhs;
            if (is_num(rhs, 1)) return lhs;
            if (is_num(lhs, -1)) return make_neg(rhs);
            if (is_num(rhs, -1)) return make_neg(lhs);
            break;
        case BinOp::Div:
            if (is_num(lhs, 0) && !(b && *b == 0)) return make_num(0);
            if (is_num(rhs, 1)) return lhs;
            if (is_num(rhs, -1)) return make_neg(lhs);
            break;
        case BinOp::Pow:
            if (is_num(rhs, 1)) return lhs;
            if (is_num(rhs, 0)) return make_num(1);
            if (is_num(lhs, 1)) return make_num(1);
            break;
    }
    return std::make_shared<Expr>(Expr::Bin{op, std::move(lhs), std::move(rhs)});
}

ExprPtr make_fun(FuncId id, ExprPtr arg) {
    if (const double* v = as_num(arg)) {
        double r = apply_fun(id, *v);
        if (std::isfinite(r)) return make_num(r);
    }
    return std::make_shared<Expr>(Expr::Fun{id, std::move(arg)});
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(std::string_view src, std::span<const std::string> vars)
        : src_(src), vars_(vars) {}

    ExprPtr run() {
        if (src_.empty()) throw ParseError("empty expression", 0);
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError("expected end of input or operator", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        for (;;) {
            if (eat('+'))
                e = make_bin(BinOp::Add, e, parse_term());
            else if (eat('-'))
                e = make_bin(BinOp::Sub, e, parse_term());
            else
                return e;
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_unary();
        for (;;) {
            if (eat('*'))
                e = make_bin(BinOp::Mul, e, parse_unary());
            else if (eat('/'))
                e = make_bin(BinOp::Div, e, parse_unary());
            else
                return e;
        }
    }

    ExprPtr parse_unary() {
        if (eat('-')) return make_neg(parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        if (eat('^')) return make_bin(BinOp::Pow, base, parse_unary());
        return base;
    }

    ExprPtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size())
            throw ParseError("expected number, name, or '('", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        throw ParseError(std::string("unexpected character '") + c + "', expected number, name, or '('", pos_);
    }

    ExprPtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // 'e' belongs to something else, e.g. "2e" is "2*e"? no: reject below
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        if (text == "." ) throw ParseError("malformed number", start);
        char* end = nullptr;
        double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size())
            throw ParseError("malformed number '" + text + "'", start);
        return make_num(v);
    }

    ExprPtr parse_name() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (auto id = func_by_name(name)) {
            if (!eat('('))
                throw ParseError("expected '(' after function '" + name + "'", pos_);
            ExprPtr arg = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return make_fun(*id, arg);
        }
        if (name == "pi") return make_num(M_PI);
        if (name == "e") return make_num(M_E);
        for (const auto& v : vars_)
            if (v == name) return make_var(name);
        throw UnknownIdentifierError(name, start);
    }

    std::string_view src_;
    std::span<const std::string> vars_;
    std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse(std::string_view source, std::span<const std::string> allowed_vars) {
    return Parser(source, allowed_vars).run();
}

ExprPtr parse(std::string_view source, std::initializer_list<std::string> allowed_vars) {
    std::vector<std::string> vars(allowed_vars);
    return parse(source, std::span<const std::string>(vars));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

double eval_node(const ExprPtr& e, const std::map<std::string, double>& bindings) {
    const auto& node = e->node();
    if (auto* n = std::get_if<Expr::Num>(&node)) return n->value;
    if (auto* v = std::get_if<Expr::Var>(&node)) {
        auto it = bindings.find(v->name);
        if (it == bindings.end()) throw EvalError("unbound variable '" + v->name + "'");
        return it->second;
    }
    if (auto* u = std::get_if<Expr::Neg>(&node)) return -eval_node(u->arg, bindings);
    if (auto* b = std::get_if<Expr::Bin>(&node)) {
        double lhs = eval_node(b->lhs, bindings);
        double rhs = eval_node(b->rhs, bindings);
        if (b->op == BinOp::Div && rhs == 0.0)
            throw EvalError("division by zero in '" + to_string(e) + "'");
        double r = apply_bin(b->op, lhs, rhs);
        if (b->op == BinOp::Pow && std::isnan(r) && !std::isnan(lhs) && !std::isnan(rhs))
            throw EvalError("invalid power (negative base, non-integer exponent) in '" + to_string(e) + "'");
        return r;
    }
    const auto& f = std::get<Expr::Fun>(node);
    double x = eval_node(f.arg, bindings);
    if (f.id == FuncId::Ln && x <= 0.0)
        throw EvalError("ln of non-positive value in '" + to_string(e) + "'");
    if (f.id == FuncId::Sqrt && x < 0.0)
        throw EvalError("sqrt of negative value in '" + to_string(e) + "'");
    return apply_fun(f.id, x);
}

}  // namespace

double evaluate(const ExprPtr& e, const std::map<std::string, double>& bindings) {
    return eval_node(e, bindings);
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

ExprPtr differentiate(const ExprPtr& e, std::string_view var) {
    const auto& node = e->node();
    if (std::get_if<Expr::Num>(&node)) return make_num(0);
    if (auto* v = std::get_if<Expr::Var>(&node)) return make_num(v->name == var ? 1 : 0);
    if (auto* u = std::get_if<Expr::Neg>(&node)) return make_neg(differentiate(u->arg, var));
    if (auto* b = std::get_if<Expr::Bin>(&node)) {
        ExprPtr du = differentiate(b->lhs, var);
        ExprPtr dv = differentiate(b->rhs, var);
        const ExprPtr& u_ = b->lhs;
        const ExprPtr& v_ = b->rhs;
        switch (b->op) {
            case BinOp::Add: return du + dv;
            case BinOp::Sub: return du - dv;
            case BinOp::Mul: return du * v_ + u_ * dv;
            case BinOp::Div: return (du * v_ - u_ * dv) / (v_ * v_);
            case BinOp::Pow:
                if (const double* c = as_num(v_)) {
                    // c * u^(c-1) * u'
                    return make_num(*c) * make_bin(BinOp::Pow, u_, make_num(*c - 1)) * du;
                }
                if (as_num(u_)) {
                    // a^v * ln(a) * v'
                    return e * make_fun(FuncId::Ln, u_) * dv;
                }
                // u^v * (v' ln u + v u'/u)
                return e * (dv * make_fun(FuncId::Ln, u_) + v_ * du / u_);
        }
    }
    const auto& f = std::get<Expr::Fun>(node);
    ExprPtr da = differentiate(f.arg, var);
    const ExprPtr& a = f.arg;
    switch (f.id) {
        case FuncId::Sin: return make_fun(FuncId::Cos, a) * da;
        case FuncId::Cos: return make_neg(make_fun(FuncId::Sin, a)) * da;
        case FuncId::Tan: {
            ExprPtr t = make_fun(FuncId::Tan, a);
            return (make_num(1) + t * t) * da;
        }
        case FuncId::Exp: return e * da;
        case FuncId::Ln: return da / a;
        case FuncId::Sqrt: return da / (make_num(2) * e);
        case FuncId::Abs: return make_fun(FuncId::Sgn, a) * da;
        case FuncId::Sgn: return make_num(0);
        case FuncId::Atan: return da / (make_num(1) + a * a);
    }
    return make_num(0);
}

// ---------------------------------------------------------------------------
// Substitution, printing, variable collection
// ---------------------------------------------------------------------------

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& map) {
    const auto& node = e->node();
    if (std::get_if<Expr::Num>(&node)) return e;
    if (auto* v = std::get_if<Expr::Var>(&node)) {
        auto it = map.find(v->name);
        return it == map.end() ? e : it->second;
    }
    if (auto* u = std::get_if<Expr::Neg>(&node)) return make_neg(substitute(u->arg, map));
    if (auto* b = std::get_if<Expr::Bin>(&node))
        return make_bin(b->op, substitute(b->lhs, map), substitute(b->rhs, map));
    const auto& f = std::get<Expr::Fun>(node);
    return make_fun(f.id, substitute(f.arg, map));
}

namespace {

std::string num_repr(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_node(const ExprPtr& e, std::string& out) {
    const auto& node = e->node();
    if (auto* n = std::get_if<Expr::Num>(&node)) {
        if (n->value < 0 || std::signbit(n->value)) {
            out += '(';
            out += num_repr(n->value);
            out += ')';
        } else {
            out += num_repr(n->value);
        }
        return;
    }
    if (auto* v = std::get_if<Expr::Var>(&node)) {
        out += v->name;
        return;
    }
    if (auto* u = std::get_if<Expr::Neg>(&node)) {
        out += "(-";
        print_node(u->arg, out);
        out += ')';
        return;
    }
    if (auto* b = std::get_if<Expr::Bin>(&node)) {
        const char* op = nullptr;
        switch (b->op) {
            case BinOp::Add: op = "+"; break;
            case BinOp::Sub: op = "-"; break;
            case BinOp::Mul: op = "*"; break;
            case BinOp::Div: op = "/"; break;
            case BinOp::Pow: op = "^"; break;
        }
        out += '(';
        print_node(b->lhs, out);
        out += op;
        print_node(b->rhs, out);
        out += ')';
        return;
    }
    const auto& f = std::get<Expr::Fun>(node);
    out += kFuncNames[static_cast<int>(f.id)];
    out += '(';
    print_node(f.arg, out);
    out += ')';
}

}  // namespace

std::string to_string(const ExprPtr& e) {
    std::string out;
    print_node(e, out);
    return out;
}

namespace {

void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
    const auto& node = e->node();
    if (auto* v = std::get_if<Expr::Var>(&node)) {
        out.insert(v->name);
        return;
    }
    if (auto* u = std::get_if<Expr::Neg>(&node)) {
        collect_vars(u->arg, out);
        return;
    }
    if (auto* b = std::get_if<Expr::Bin>(&node)) {
        collect_vars(b->lhs, out);
        collect_vars(b->rhs, out);
        return;
    }
    if (auto* f = std::get_if<Expr::Fun>(&node)) collect_vars(f->arg, out);
}

}  // namespace

std::vector<std::string> variables_of(const ExprPtr& e) {
    std::set<std::string> s;
    collect_vars(e, s);
    return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Compilation to a postfix tape
// ---------------------------------------------------------------------------

namespace {

enum : std::uint8_t {
    kPushConst,
    kPushVar,
    kNeg,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPow,
    kFunBase  // kFunBase + FuncId
};

}  // namespace

CompiledExpr::CompiledExpr(const ExprPtr& e, std::span<const std::string> vars) {
    int depth = 0;
    auto emit = [&](const ExprPtr& node, auto&& self) -> int {
        const auto& n = node->node();
        if (auto* num = std::get_if<Expr::Num>(&n)) {
            code_.push_back({kPushConst, 0, num->value});
            return 1;
        }
        if (auto* v = std::get_if<Expr::Var>(&n)) {
            for (std::size_t i = 0; i < vars.size(); ++i)
                if (vars[i] == v->name) {
                    code_.push_back({kPushVar, static_cast<std::int32_t>(i), 0.0});
                    return 1;
                }
            throw EvalError("unbound variable '" + v->name + "' in compiled expression");
        }
        if (auto* u = std::get_if<Expr::Neg>(&n)) {
            int d = self(u->arg, self);
            code_.push_back({kNeg, 0, 0.0});
            return d;
        }
        if (auto* b = std::get_if<Expr::Bin>(&n)) {
            int dl = self(b->lhs, self);
            int dr = self(b->rhs, self);
            std::uint8_t op = kAdd;
            switch (b->op) {
                case BinOp::Add: op = kAdd; break;
                case BinOp::Sub: op = kSub; break;
                case BinOp::Mul: op = kMul; break;
                case BinOp::Div: op = kDiv; break;
                case BinOp::Pow: op = kPow; break;
            }
            code_.push_back({op, 0, 0.0});
            return std::max(dl, dr + 1);
        }
        const auto& f = std::get<Expr::Fun>(n);
        int d = self(f.arg, self);
        code_.push_back({static_cast<std::uint8_t>(kFunBase + static_cast<int>(f.id)), 0, 0.0});
        return d;
    };
    depth = emit(e, emit);
    max_stack_ = depth;
}

double CompiledExpr::operator()(std::span<const double> values) const {
    double fixed[64];
    fixed[0] = 0.0;  // defined result for an empty program
    std::vector<double> dyn;
    double* stack = fixed;
    if (max_stack_ > 64) {
        dyn.resize(static_cast<std::size_t>(max_stack_));
        stack = dyn.data();
    }
    int sp = 0;
    for (const Instr& ins : code_) {
        switch (ins.op) {
            case kPushConst: stack[sp++] = ins.value; break;
            case kPushVar: stack[sp++] = values[static_cast<std::size_t>(ins.var)]; break;
            case kNeg: stack[sp - 1] = -stack[sp - 1]; break;
            case kAdd: --sp; stack[sp - 1] += stack[sp]; break;
            case kSub: --sp; stack[sp - 1] -= stack[sp]; break;
            case kMul: --sp; stack[sp - 1] *= stack[sp]; break;
            case kDiv: --sp; stack[sp - 1] /= stack[sp]; break;
            case kPow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
            default:
                stack[sp - 1] = apply_fun(static_cast<FuncId>(ins.op - kFunBase), stack[sp - 1]);
                break;
        }
    }
    return stack[0];
}

}  // namespace vhc
