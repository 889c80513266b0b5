#include "qsdlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qsdlab {

struct Expr::Node {
    enum Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg } kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double k) const {
        switch (kind) {
            case Constant: return value;
            case Variable: return k;
            case Add: return lhs->eval(k) + rhs->eval(k);
            case Sub: return lhs->eval(k) - rhs->eval(k);
            case Mul: return lhs->eval(k) * rhs->eval(k);
            case Div: return lhs->eval(k) / rhs->eval(k);
            case Pow: return std::pow(lhs->eval(k), rhs->eval(k));
            case Neg: return -lhs->eval(k);
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    n->value = value;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return e;
    }

private:
    const std::string& s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) {
        throw std::invalid_argument("rate expression error at offset " + std::to_string(pos_) + ": " + why);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+')) lhs = make(Expr::Node::Add, lhs, term());
            else if (eat('-')) lhs = make(Expr::Node::Sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make(Expr::Node::Mul, lhs, unary());
            else if (eat('/')) lhs = make(Expr::Node::Div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Expr::Node::Neg, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make(Expr::Node::Pow, base, unary());  // right associative
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (c == 'k' || c == 'K') {
            ++pos_;
            return make(Expr::Node::Variable);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t end = pos_;
            char* after = nullptr;
            double v = std::strtod(s_.c_str() + pos_, &after);
            end = after - s_.c_str();
            if (end == pos_) fail("bad number");
            pos_ = end;
            return make(Expr::Node::Constant, nullptr, nullptr, v);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Expr Expr::parse(const std::string& source) {
    return Expr(Parser(source).run(), source);
}

Expr::Expr(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

double Expr::eval(double k) const { return root_->eval(k); }

}  // namespace qsdlab
