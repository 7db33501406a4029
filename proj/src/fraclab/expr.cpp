#include "fraclab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "fraclab/grid.hpp"

namespace fraclab {

enum class NodeKind { number, var_x, var_y, var_t, add, sub, mul, div, pow, neg, fn_sin, fn_cos, fn_exp, fn_sqrt, fn_clip01 };

struct Expr::Node {
    NodeKind kind;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    [[noreturn]] void fail(const std::string& what) {
        throw ValidationError("expression '" + s + "': " + what + " at position " + std::to_string(pos));
    }

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    NodePtr make(NodeKind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = k;
        n->value = v;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodePtr parse_expr() {
        NodePtr left = parse_term();
        for (;;) {
            if (eat('+'))
                left = make(NodeKind::add, left, parse_term());
            else if (eat('-'))
                left = make(NodeKind::sub, left, parse_term());
            else
                return left;
        }
    }

    NodePtr parse_term() {
        NodePtr left = parse_unary();
        for (;;) {
            if (eat('*'))
                left = make(NodeKind::mul, left, parse_unary());
            else if (eat('/'))
                left = make(NodeKind::div, left, parse_unary());
            else
                return left;
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) return make(NodeKind::neg, parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (eat('^')) {
            // right-associative; exponent may carry a unary sign
            NodePtr exp = eat('-') ? make(NodeKind::neg, parse_power()) : parse_power();
            return make(NodeKind::pow, base, exp);
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of input");
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!eat(')')) fail("missing ')'");
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail("unexpected character");
    }

    NodePtr parse_number() {
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("bad number");
        pos += static_cast<std::size_t>(end - begin);
        return make(NodeKind::number, nullptr, nullptr, v);
    }

    NodePtr parse_ident() {
        std::size_t start = pos;
        while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (name == "x") return make(NodeKind::var_x);
        if (name == "y") return make(NodeKind::var_y);
        if (name == "t") return make(NodeKind::var_t);
        if (name == "pi") return make(NodeKind::number, nullptr, nullptr, M_PI);
        NodeKind fk;
        if (name == "sin")
            fk = NodeKind::fn_sin;
        else if (name == "cos")
            fk = NodeKind::fn_cos;
        else if (name == "exp")
            fk = NodeKind::fn_exp;
        else if (name == "sqrt")
            fk = NodeKind::fn_sqrt;
        else if (name == "clip01")
            fk = NodeKind::fn_clip01;
        else {
            pos = start;
            fail("unknown identifier '" + name + "'");
        }
        if (!eat('(')) fail("expected '(' after function name");
        NodePtr arg = parse_expr();
        if (!eat(')')) fail("missing ')'");
        return make(fk, arg);
    }
};

double eval_node(const Expr::Node& n, double x, double y, double t) {
    switch (n.kind) {
        case NodeKind::number: return n.value;
        case NodeKind::var_x: return x;
        case NodeKind::var_y: return y;
        case NodeKind::var_t: return t;
        case NodeKind::add: return eval_node(*n.a, x, y, t) + eval_node(*n.b, x, y, t);
        case NodeKind::sub: return eval_node(*n.a, x, y, t) - eval_node(*n.b, x, y, t);
        case NodeKind::mul: return eval_node(*n.a, x, y, t) * eval_node(*n.b, x, y, t);
        case NodeKind::div: return eval_node(*n.a, x, y, t) / eval_node(*n.b, x, y, t);
        case NodeKind::pow: return std::pow(eval_node(*n.a, x, y, t), eval_node(*n.b, x, y, t));
        case NodeKind::neg: return -eval_node(*n.a, x, y, t);
        case NodeKind::fn_sin: return std::sin(eval_node(*n.a, x, y, t));
        case NodeKind::fn_cos: return std::cos(eval_node(*n.a, x, y, t));
        case NodeKind::fn_exp: return std::exp(eval_node(*n.a, x, y, t));
        case NodeKind::fn_sqrt: return std::sqrt(eval_node(*n.a, x, y, t));
        case NodeKind::fn_clip01: {
            const double v = eval_node(*n.a, x, y, t);
            return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        }
    }
    return 0.0;
}

bool node_uses(const Expr::Node& n, NodeKind var) {
    if (n.kind == var) return true;
    if (n.a && node_uses(*n.a, var)) return true;
    if (n.b && node_uses(*n.b, var)) return true;
    return false;
}

}  // namespace

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    Expr e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    e.text_ = text;
    return e;
}

double Expr::eval(double x, double y, double t) const {
    if (!root_) throw ValidationError("empty expression evaluated");
    return eval_node(*root_, x, y, t);
}

bool Expr::uses(char var) const {
    if (!root_) return false;
    const NodeKind k = var == 'x' ? NodeKind::var_x : var == 'y' ? NodeKind::var_y : NodeKind::var_t;
    return node_uses(*root_, k);
}

}  // namespace fraclab
