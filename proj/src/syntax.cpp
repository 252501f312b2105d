#include "ost/syntax.hpp"

#include <algorithm>

namespace ost {

Polarity dual(Polarity p) {
  return p == Polarity::Plus ? Polarity::Minus : Polarity::Plus;
}

char polarity_char(Polarity p) { return p == Polarity::Plus ? '+' : '-'; }

GroundType::GroundType(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw ConstructionError("ground type name must be nonempty");
}

GroundRegistry::GroundRegistry()
    : names_{"Nat", "Bool", "String", "Url", "Amount", "CcNumber", "TransIDnum"} {}

const GroundRegistry& GroundRegistry::builtin() {
  static const GroundRegistry reg;
  return reg;
}

void GroundRegistry::add(const std::string& name) {
  if (name.empty()) throw ConstructionError("ground type name must be nonempty");
  names_.insert(name);
}

namespace {

template <typename Arm>
void check_arms(const std::vector<Arm>& arms, const char* what) {
  if (arms.empty()) throw ConstructionError(std::string(what) + ": arm list must be nonempty");
  std::set<std::string> seen;
  for (const auto& a : arms) {
    if (a.label.empty()) throw ConstructionError(std::string(what) + ": empty label");
    if (!seen.insert(a.label).second)
      throw ConstructionError(std::string(what) + ": duplicate label '" + a.label + "'");
  }
}

}  // namespace

const GroundType& Type::ground() const { return ground_; }
const TypeRef& Type::carried() const { return carried_; }
Polarity Type::carried_polarity() const { return carried_pol_; }
const TypeRef& Type::cont() const { return cont_; }
const std::vector<TypeArm>& Type::arms() const { return arms_; }

TypeRef Type::end() {
  static const TypeRef e = TypeRef(new Type(TypeKind::End));
  return e;
}

TypeRef Type::in_value(GroundType g, TypeRef cont) {
  auto t = new Type(TypeKind::InValue);
  t->ground_ = std::move(g);
  t->cont_ = std::move(cont);
  if (!t->cont_) throw ConstructionError("value input: null continuation");
  return TypeRef(t);
}

TypeRef Type::out_value(GroundType g, TypeRef cont) {
  auto t = new Type(TypeKind::OutValue);
  t->ground_ = std::move(g);
  t->cont_ = std::move(cont);
  if (!t->cont_) throw ConstructionError("value output: null continuation");
  return TypeRef(t);
}

TypeRef Type::in_session(TypeRef carried, Polarity p, TypeRef cont) {
  auto t = new Type(TypeKind::InSession);
  t->carried_ = std::move(carried);
  t->carried_pol_ = p;
  t->cont_ = std::move(cont);
  if (!t->carried_ || !t->cont_) throw ConstructionError("session input: null component");
  return TypeRef(t);
}

TypeRef Type::out_session(TypeRef carried, Polarity p, TypeRef cont) {
  auto t = new Type(TypeKind::OutSession);
  t->carried_ = std::move(carried);
  t->carried_pol_ = p;
  t->cont_ = std::move(cont);
  if (!t->carried_ || !t->cont_) throw ConstructionError("session output: null component");
  return TypeRef(t);
}

TypeRef Type::branch(std::vector<TypeArm> arms) {
  check_arms(arms, "branch");
  auto t = new Type(TypeKind::Branch);
  t->arms_ = std::move(arms);
  return TypeRef(t);
}

TypeRef Type::select(std::vector<TypeArm> arms) {
  check_arms(arms, "select");
  auto t = new Type(TypeKind::Select);
  t->arms_ = std::move(arms);
  return TypeRef(t);
}

TypeRef Type::spec_select(std::vector<TypeArm> arms, bool prioritized) {
  check_arms(arms, "speculative select");
  auto t = new Type(TypeKind::SpecSelect);
  t->arms_ = std::move(arms);
  t->prioritized_ = prioritized;
  return TypeRef(t);
}

const TypeArm* Type::find_arm(const std::string& label) const {
  for (const auto& a : arms_)
    if (a.label == label) return &a;
  return nullptr;
}

bool equal(const TypeRef& a, const TypeRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case TypeKind::End:
      return true;
    case TypeKind::InValue:
    case TypeKind::OutValue:
      return a->ground() == b->ground() && equal(a->cont(), b->cont());
    case TypeKind::InSession:
    case TypeKind::OutSession:
      return a->carried_polarity() == b->carried_polarity() &&
             equal(a->carried(), b->carried()) && equal(a->cont(), b->cont());
    case TypeKind::Branch:
    case TypeKind::Select:
    case TypeKind::SpecSelect: {
      if (a->kind() == TypeKind::SpecSelect && a->prioritized() != b->prioritized())
        return false;
      const auto& xs = a->arms();
      const auto& ys = b->arms();
      if (xs.size() != ys.size()) return false;
      for (size_t i = 0; i < xs.size(); ++i)
        if (xs[i].label != ys[i].label || !equal(xs[i].type, ys[i].type)) return false;
      return true;
    }
  }
  return false;
}

const OrchRef& Orch::cont() const { return cont_; }
const std::string& Orch::label() const { return label_; }
const std::vector<OrchArm>& Orch::arms() const { return arms_; }

OrchRef Orch::idle() {
  static const OrchRef e = OrchRef(new Orch(OrchKind::Idle));
  return e;
}

OrchRef Orch::io_prefix(OrchRef cont) {
  auto o = new Orch(OrchKind::IOPrefix);
  o->cont_ = std::move(cont);
  if (!o->cont_) throw ConstructionError("io prefix: null continuation");
  return OrchRef(o);
}

OrchRef Orch::label_prefix(std::string label, OrchRef cont) {
  if (label.empty()) throw ConstructionError("label prefix: empty label");
  auto o = new Orch(OrchKind::LabelPrefix);
  o->label_ = std::move(label);
  o->cont_ = std::move(cont);
  if (!o->cont_) throw ConstructionError("label prefix: null continuation");
  return OrchRef(o);
}

OrchRef Orch::external_choice(std::vector<OrchArm> arms) {
  check_arms(arms, "external choice");
  if (arms.size() == 1) return label_prefix(arms[0].label, arms[0].cont);
  auto o = new Orch(OrchKind::ExternalChoice);
  o->arms_ = std::move(arms);
  return OrchRef(o);
}

OrchRef Orch::internal_choice(std::vector<OrchArm> arms) {
  check_arms(arms, "internal choice");
  if (arms.size() == 1) return label_prefix(arms[0].label, arms[0].cont);
  auto o = new Orch(OrchKind::InternalChoice);
  o->arms_ = std::move(arms);
  return OrchRef(o);
}

std::vector<OrchArm> Orch::choice_arms() const {
  if (kind_ == OrchKind::LabelPrefix) return {OrchArm{label_, cont_}};
  return arms_;
}

bool equal(const OrchRef& a, const OrchRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case OrchKind::Idle:
      return true;
    case OrchKind::IOPrefix:
      return equal(a->cont(), b->cont());
    case OrchKind::LabelPrefix:
      return a->label() == b->label() && equal(a->cont(), b->cont());
    case OrchKind::ExternalChoice:
    case OrchKind::InternalChoice: {
      const auto& xs = a->arms();
      const auto& ys = b->arms();
      if (xs.size() != ys.size()) return false;
      for (size_t i = 0; i < xs.size(); ++i)
        if (xs[i].label != ys[i].label || !equal(xs[i].cont, ys[i].cont)) return false;
      return true;
    }
  }
  return false;
}

bool equal_unordered(const OrchRef& a, const OrchRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case OrchKind::Idle:
      return true;
    case OrchKind::IOPrefix:
      return equal_unordered(a->cont(), b->cont());
    case OrchKind::LabelPrefix:
      return a->label() == b->label() && equal_unordered(a->cont(), b->cont());
    case OrchKind::ExternalChoice:
    case OrchKind::InternalChoice: {
      auto xs = a->arms();
      auto ys = b->arms();
      if (xs.size() != ys.size()) return false;
      auto by_label = [](const OrchArm& l, const OrchArm& r) { return l.label < r.label; };
      std::sort(xs.begin(), xs.end(), by_label);
      std::sort(ys.begin(), ys.end(), by_label);
      for (size_t i = 0; i < xs.size(); ++i)
        if (xs[i].label != ys[i].label || !equal_unordered(xs[i].cont, ys[i].cont))
          return false;
      return true;
    }
  }
  return false;
}

const char* to_string(SemanticsMode m) {
  switch (m) {
    case SemanticsMode::Plain: return "plain";
    case SemanticsMode::PriorityType: return "priority-type";
    case SemanticsMode::PriorityProcess: return "priority-process";
  }
  return "?";
}

}  // namespace ost
