#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace malab {

/// Variables visible to a closed-form density or potential.
struct ExprVars {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double h = 0.0;  // grid spacing, for smoothing widths such as "4*h"
};

/// Compiled arithmetic expression over x, y, z, h.
///
/// Grammar: numbers, the variables above plus r (= |x|), constants pi and e,
/// binary + - * / ^ (right-associative power), unary minus, parentheses and the
/// functions sin cos tan exp log sqrt abs tanh, min(a,b), max(a,b), step(s, w)
/// (a tanh ramp of width w, 0 for s << -w and 1 for s >> w).
class Expression {
 public:
  static Expression parse(std::string_view source);

  double operator()(const ExprVars& vars) const;
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace malab
