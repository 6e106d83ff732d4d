#include "slspec/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <numbers>

#include "slspec/error.hpp"

namespace slspec {
namespace {

class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  std::vector<Expression::Instr> run() {
    parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return std::move(out_);
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                msg + " at column " + std::to_string(pos_ + 1) + " in '" + src_ + "'");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Op op, double v = 0.0) { out_.push_back({op, v}); }

  void parse_sum() {
    parse_product();
    for (;;) {
      if (accept('+')) {
        parse_product();
        emit(Op::Add);
      } else if (accept('-')) {
        parse_product();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void parse_product() {
    parse_unary();
    for (;;) {
      if (accept('*')) {
        parse_unary();
        emit(Op::Mul);
      } else if (accept('/')) {
        parse_unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (accept('-')) {
      parse_unary();
      emit(Op::Neg);
    } else if (accept('+')) {
      parse_unary();
    } else {
      parse_power();
    }
  }

  void parse_power() {
    parse_primary();
    if (accept('^')) {
      parse_unary();
      emit(Op::Pow);
    }
  }

  void parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      emit(Op::Push, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const std::string name = src_.substr(start, pos_ - start);
      if (name == "x") {
        emit(Op::Var);
        return;
      }
      if (name == "pi") {
        emit(Op::Push, std::numbers::pi);
        return;
      }
      Op fn;
      if (name == "exp") fn = Op::Exp;
      else if (name == "sin") fn = Op::Sin;
      else if (name == "cos") fn = Op::Cos;
      else if (name == "sqrt") fn = Op::Sqrt;
      else if (name == "floor") fn = Op::Floor;
      else {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!accept('(')) fail("expected '(' after " + name);
      parse_sum();
      if (!accept(')')) fail("expected ')'");
      emit(fn);
      return;
    }
    if (accept('(')) {
      parse_sum();
      if (!accept(')')) fail("expected ')'");
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  std::vector<Expression::Instr> out_;
};

int stack_depth(const std::vector<Expression::Instr>& program) {
  int depth = 0;
  int max_depth = 0;
  for (const auto& in : program) {
    switch (in.op) {
      case Expression::Op::Push:
      case Expression::Op::Var: ++depth; break;
      case Expression::Op::Add:
      case Expression::Op::Sub:
      case Expression::Op::Mul:
      case Expression::Op::Div:
      case Expression::Op::Pow: --depth; break;
      default: break;
    }
    if (depth > max_depth) max_depth = depth;
  }
  return max_depth;
}

}  // namespace

Expression Expression::parse(const std::string& source) {
  Expression e;
  e.program_ = Parser(source).run();
  if (stack_depth(e.program_) > kMaxStack) {
    throw Error(ErrorCode::ParseError, "expression nests too deeply: '" + source + "'");
  }
  e.source_ = source;
  return e;
}

}  // namespace slspec
