#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace slspec {

/// A compiled arithmetic expression in one variable `x`.
///
/// Grammar: numbers, `x`, `pi`, binary `+ - * / ^` (with `^` right
/// associative and binding tighter than unary minus), parentheses, and the
/// functions `exp sin cos sqrt floor`. The expression is compiled once into a
/// postfix program and evaluated without allocation.
class Expression {
 public:
  enum class Op { Push, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Sin, Cos, Sqrt, Floor };

  struct Instr {
    Op op;
    double value = 0.0;
  };

  Expression() = default;

  /// Throws Error(ParseError) with the offending column.
  static Expression parse(const std::string& source);

  const std::string& source() const noexcept { return source_; }
  bool empty() const noexcept { return program_.empty(); }

  template <typename Scalar>
  Scalar operator()(Scalar x) const {
    Scalar stack[kMaxStack];
    int top = -1;
    for (const Instr& in : program_) {
      switch (in.op) {
        case Op::Push: stack[++top] = static_cast<Scalar>(in.value); break;
        case Op::Var: stack[++top] = x; break;
        case Op::Add: stack[top - 1] += stack[top]; --top; break;
        case Op::Sub: stack[top - 1] -= stack[top]; --top; break;
        case Op::Mul: stack[top - 1] *= stack[top]; --top; break;
        case Op::Div: stack[top - 1] /= stack[top]; --top; break;
        case Op::Pow: stack[top - 1] = std::pow(stack[top - 1], stack[top]); --top; break;
        case Op::Neg: stack[top] = -stack[top]; break;
        case Op::Exp: stack[top] = std::exp(stack[top]); break;
        case Op::Sin: stack[top] = std::sin(stack[top]); break;
        case Op::Cos: stack[top] = std::cos(stack[top]); break;
        case Op::Sqrt: stack[top] = std::sqrt(stack[top]); break;
        case Op::Floor: stack[top] = std::floor(stack[top]); break;
      }
    }
    return stack[0];
  }

  static constexpr int kMaxStack = 64;

 private:
  std::string source_;
  std::vector<Instr> program_;
};

}  // namespace slspec
