#ifndef OST_VALUE_HPP
#define OST_VALUE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ost/syntax.hpp"

namespace ost {

// ---------------------------------------------------------------------------
// Ground values

enum class ValueKind : uint8_t { Nat, Bool, Str, Sym };

// A value carries exactly one ground type. Symbolic values stand for the
// result of an uninterpreted function application.
class Value {
public:
  static Value nat(uint64_t n);
  static Value boolean(bool b);
  static Value str(std::string s);
  static Value sym(std::string tag, std::vector<Value> args, GroundType type);

  ValueKind kind() const { return kind_; }
  uint64_t nat_value() const { return nat_; }
  bool bool_value() const { return bool_; }
  const std::string& str_value() const { return str_; }
  const std::string& sym_tag() const { return tag_; }
  const std::vector<Value>& sym_args() const { return args_; }
  const GroundType& type() const { return type_; }

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
  friend bool operator<(const Value& a, const Value& b);

private:
  Value() : type_("Nat") {}

  ValueKind kind_ = ValueKind::Nat;
  uint64_t nat_ = 0;
  bool bool_ = false;
  std::string str_;
  std::string tag_;
  std::vector<Value> args_;
  GroundType type_;
};

// ---------------------------------------------------------------------------
// Expressions

class Expr;
using ExprRef = std::shared_ptr<const Expr>;

enum class ExprKind : uint8_t { Lit, Var, Apply };

class Expr {
public:
  static ExprRef lit(Value v);
  static ExprRef var(std::string name);
  static ExprRef apply(std::string fn, std::vector<ExprRef> args);

  ExprKind kind() const { return kind_; }
  const Value& value() const { return value_; }
  const std::string& name() const { return name_; }  // Var name or Apply fn
  const std::vector<ExprRef>& args() const { return args_; }

private:
  Expr() = default;

  ExprKind kind_ = ExprKind::Lit;
  Value value_ = Value::nat(0);
  std::string name_;
  std::vector<ExprRef> args_;
};

bool equal(const ExprRef& a, const ExprRef& b);
ExprRef subst_expr(const ExprRef& e, const std::string& var, const Value& v);

// ---------------------------------------------------------------------------
// Function table

struct FnSig {
  std::vector<GroundType> params;
  GroundType result;
};

struct EvalError : std::runtime_error {
  enum class Kind { UnboundVariable, ArityMismatch, UnknownFunction };
  EvalError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

// Named pure functions: a declared signature plus optional concrete rules
// keyed by argument tuples. Calls without a matching rule evaluate
// symbolically to Sym(fn, args) at the declared result type.
class FunctionTable {
public:
  static FunctionTable defaults();

  void declare(const std::string& name, FnSig sig);
  void add_rule(const std::string& name, std::vector<Value> args, Value result);
  const FnSig* signature(const std::string& name) const;

  Value call(const std::string& name, std::vector<Value> args) const;

private:
  std::map<std::string, FnSig> sigs_;
  std::map<std::string, std::vector<std::pair<std::vector<Value>, Value>>> rules_;
};

// Total on closed well-typed expressions; throws EvalError otherwise.
Value eval_expr(const FunctionTable& env, const ExprRef& e);
std::optional<Value> try_eval(const FunctionTable& env, const ExprRef& e);

}  // namespace ost

#endif
