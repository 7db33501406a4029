#pragma once

#include <memory>
#include <string>

namespace fraclab {

/// Closed-form scalar expression in the variables x, y, t.  The accepted
/// grammar is a deliberately small whitelist for manufactured inputs:
/// numbers, x, y, t, pi, + - * / ^, parentheses, and sin/cos/exp/sqrt/clip01
/// (clip01 clamps its argument to [0,1]; it makes compactly supported bump
/// sources expressible in closed form).
class Expr {
  public:
    /// Parses `text`; throws ValidationError with the offending position on
    /// a syntax error or an unknown identifier.
    static Expr parse(const std::string& text);

    double eval(double x, double t) const { return eval(x, 0.0, t); }
    double eval(double x, double y, double t) const;

    /// True when the expression references the given variable name.
    bool uses(char var) const;

    const std::string& text() const { return text_; }

    Expr() = default;

    struct Node;  ///< defined in the implementation file

  private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace fraclab
