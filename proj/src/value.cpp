#include "ost/value.hpp"

#include <tuple>

namespace ost {

Value Value::nat(uint64_t n) {
  Value v;
  v.kind_ = ValueKind::Nat;
  v.nat_ = n;
  v.type_ = GroundType("Nat");
  return v;
}

Value Value::boolean(bool b) {
  Value v;
  v.kind_ = ValueKind::Bool;
  v.bool_ = b;
  v.type_ = GroundType("Bool");
  return v;
}

Value Value::str(std::string s) {
  Value v;
  v.kind_ = ValueKind::Str;
  v.str_ = std::move(s);
  v.type_ = GroundType("String");
  return v;
}

Value Value::sym(std::string tag, std::vector<Value> args, GroundType type) {
  Value v;
  v.kind_ = ValueKind::Sym;
  v.tag_ = std::move(tag);
  v.args_ = std::move(args);
  v.type_ = std::move(type);
  return v;
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case ValueKind::Nat: return a.nat_ == b.nat_;
    case ValueKind::Bool: return a.bool_ == b.bool_;
    case ValueKind::Str: return a.str_ == b.str_;
    case ValueKind::Sym:
      return a.tag_ == b.tag_ && a.type_ == b.type_ && a.args_ == b.args_;
  }
  return false;
}

bool operator<(const Value& a, const Value& b) {
  if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
  switch (a.kind_) {
    case ValueKind::Nat: return a.nat_ < b.nat_;
    case ValueKind::Bool: return a.bool_ < b.bool_;
    case ValueKind::Str: return a.str_ < b.str_;
    case ValueKind::Sym:
      return std::tie(a.tag_, a.type_, a.args_) < std::tie(b.tag_, b.type_, b.args_);
  }
  return false;
}

ExprRef Expr::lit(Value v) {
  auto e = new Expr();
  e->kind_ = ExprKind::Lit;
  e->value_ = std::move(v);
  return ExprRef(e);
}

ExprRef Expr::var(std::string name) {
  if (name.empty()) throw ConstructionError("expression variable: empty name");
  auto e = new Expr();
  e->kind_ = ExprKind::Var;
  e->name_ = std::move(name);
  return ExprRef(e);
}

ExprRef Expr::apply(std::string fn, std::vector<ExprRef> args) {
  if (fn.empty()) throw ConstructionError("application: empty function name");
  auto e = new Expr();
  e->kind_ = ExprKind::Apply;
  e->name_ = std::move(fn);
  e->args_ = std::move(args);
  return ExprRef(e);
}

bool equal(const ExprRef& a, const ExprRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case ExprKind::Lit: return a->value() == b->value();
    case ExprKind::Var: return a->name() == b->name();
    case ExprKind::Apply: {
      if (a->name() != b->name() || a->args().size() != b->args().size()) return false;
      for (size_t i = 0; i < a->args().size(); ++i)
        if (!equal(a->args()[i], b->args()[i])) return false;
      return true;
    }
  }
  return false;
}

ExprRef subst_expr(const ExprRef& e, const std::string& var, const Value& v) {
  switch (e->kind()) {
    case ExprKind::Lit:
      return e;
    case ExprKind::Var:
      return e->name() == var ? Expr::lit(v) : e;
    case ExprKind::Apply: {
      std::vector<ExprRef> args;
      args.reserve(e->args().size());
      bool changed = false;
      for (const auto& a : e->args()) {
        auto a2 = subst_expr(a, var, v);
        changed = changed || a2 != a;
        args.push_back(std::move(a2));
      }
      return changed ? Expr::apply(e->name(), std::move(args)) : e;
    }
  }
  return e;
}

FunctionTable FunctionTable::defaults() {
  FunctionTable t;
  t.declare("available", {{GroundType("String")}, GroundType("Bool")});
  t.declare("amount", {{GroundType("String")}, GroundType("Amount")});
  t.declare("url", {{GroundType("String")}, GroundType("Url")});
  t.declare("IDtrans", {{GroundType("Amount"), GroundType("CcNumber")}, GroundType("TransIDnum")});
  t.declare("cc", {{GroundType("Nat")}, GroundType("CcNumber")});
  return t;
}

void FunctionTable::declare(const std::string& name, FnSig sig) {
  sigs_.insert_or_assign(name, std::move(sig));
}

void FunctionTable::add_rule(const std::string& name, std::vector<Value> args, Value result) {
  rules_[name].emplace_back(std::move(args), std::move(result));
}

const FnSig* FunctionTable::signature(const std::string& name) const {
  auto it = sigs_.find(name);
  return it == sigs_.end() ? nullptr : &it->second;
}

Value FunctionTable::call(const std::string& name, std::vector<Value> args) const {
  auto sig = signature(name);
  if (!sig)
    throw EvalError(EvalError::Kind::UnknownFunction, "unknown function '" + name + "'");
  if (sig->params.size() != args.size())
    throw EvalError(EvalError::Kind::ArityMismatch,
                    "function '" + name + "' expects " + std::to_string(sig->params.size()) +
                        " arguments, got " + std::to_string(args.size()));
  auto it = rules_.find(name);
  if (it != rules_.end()) {
    for (const auto& [key, result] : it->second)
      if (key == args) return result;
  }
  return Value::sym(name, std::move(args), sig->result);
}

Value eval_expr(const FunctionTable& env, const ExprRef& e) {
  switch (e->kind()) {
    case ExprKind::Lit:
      return e->value();
    case ExprKind::Var:
      throw EvalError(EvalError::Kind::UnboundVariable,
                      "unbound variable '" + e->name() + "'");
    case ExprKind::Apply: {
      std::vector<Value> args;
      args.reserve(e->args().size());
      for (const auto& a : e->args()) args.push_back(eval_expr(env, a));
      return env.call(e->name(), std::move(args));
    }
  }
  throw EvalError(EvalError::Kind::UnknownFunction, "malformed expression");
}

std::optional<Value> try_eval(const FunctionTable& env, const ExprRef& e) {
  try {
    return eval_expr(env, e);
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

}  // namespace ost
