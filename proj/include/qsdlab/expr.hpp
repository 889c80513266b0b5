#pragma once

#include <functional>
#include <memory>
#include <string>

namespace qsdlab {

/// Tiny arithmetic expression over the variable k: operators + - * / ^,
/// parentheses, unary minus, decimal/scientific constants. Used by the JSON
/// spec files for birth/death/catastrophe rate sequences.
class Expr {
public:
    static Expr parse(const std::string& source);

    double eval(double k) const;
    const std::string& source() const { return source_; }

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> root, std::string source);
    std::shared_ptr<const Node> root_;
    std::string source_;
};

}  // namespace qsdlab
