#ifndef OST_SYNTAX_HPP
#define OST_SYNTAX_HPP

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ost {

struct ConstructionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Polarities

enum class Polarity : uint8_t { Plus, Minus };

Polarity dual(Polarity p);
char polarity_char(Polarity p);

// ---------------------------------------------------------------------------
// Ground types

class GroundType {
public:
  explicit GroundType(std::string name);
  const std::string& name() const { return name_; }

  friend bool operator==(const GroundType& a, const GroundType& b) {
    return a.name_ == b.name_;
  }
  friend bool operator!=(const GroundType& a, const GroundType& b) {
    return !(a == b);
  }
  friend bool operator<(const GroundType& a, const GroundType& b) {
    return a.name_ < b.name_;
  }

private:
  std::string name_;
};

// Open registry of ground-type names; starts with the built-in set.
class GroundRegistry {
public:
  GroundRegistry();
  static const GroundRegistry& builtin();

  bool contains(const std::string& name) const { return names_.count(name) > 0; }
  void add(const std::string& name);
  const std::set<std::string>& names() const { return names_; }

private:
  std::set<std::string> names_;
};

// ---------------------------------------------------------------------------
// Session types

class Type;
using TypeRef = std::shared_ptr<const Type>;

struct TypeArm {
  std::string label;
  TypeRef type;
};

enum class TypeKind : uint8_t {
  End,
  InValue,
  OutValue,
  InSession,
  OutSession,
  Branch,
  Select,
  SpecSelect,
};

class Type {
public:
  TypeKind kind() const { return kind_; }

  const GroundType& ground() const;           // InValue/OutValue
  const TypeRef& carried() const;             // InSession/OutSession
  Polarity carried_polarity() const;          // InSession/OutSession
  const TypeRef& cont() const;                // prefixed forms
  const std::vector<TypeArm>& arms() const;   // Branch/Select/SpecSelect
  bool prioritized() const { return prioritized_; }

  static TypeRef end();
  static TypeRef in_value(GroundType g, TypeRef cont);
  static TypeRef out_value(GroundType g, TypeRef cont);
  static TypeRef in_session(TypeRef carried, Polarity p, TypeRef cont);
  static TypeRef out_session(TypeRef carried, Polarity p, TypeRef cont);
  static TypeRef branch(std::vector<TypeArm> arms);
  static TypeRef select(std::vector<TypeArm> arms);
  static TypeRef spec_select(std::vector<TypeArm> arms, bool prioritized);

  const TypeArm* find_arm(const std::string& label) const;

private:
  explicit Type(TypeKind k) : kind_(k), ground_("Nat") {}

  TypeKind kind_;
  GroundType ground_;
  TypeRef carried_;
  Polarity carried_pol_ = Polarity::Plus;
  TypeRef cont_;
  std::vector<TypeArm> arms_;
  bool prioritized_ = false;
};

bool equal(const TypeRef& a, const TypeRef& b);

// ---------------------------------------------------------------------------
// Orchestrators

class Orch;
using OrchRef = std::shared_ptr<const Orch>;

struct OrchArm {
  std::string label;
  OrchRef cont;
};

enum class OrchKind : uint8_t {
  Idle,
  IOPrefix,
  LabelPrefix,
  ExternalChoice,
  InternalChoice,
};

class Orch {
public:
  OrchKind kind() const { return kind_; }
  const OrchRef& cont() const;                // IOPrefix/LabelPrefix
  const std::string& label() const;           // LabelPrefix
  const std::vector<OrchArm>& arms() const;   // choices

  static OrchRef idle();
  static OrchRef io_prefix(OrchRef cont);
  static OrchRef label_prefix(std::string label, OrchRef cont);
  // A singleton choice collapses to a label prefix.
  static OrchRef external_choice(std::vector<OrchArm> arms);
  static OrchRef internal_choice(std::vector<OrchArm> arms);

  // Choice arms viewed uniformly; a label prefix is a singleton.
  std::vector<OrchArm> choice_arms() const;

private:
  explicit Orch(OrchKind k) : kind_(k) {}

  OrchKind kind_;
  OrchRef cont_;
  std::string label_;
  std::vector<OrchArm> arms_;
};

bool equal(const OrchRef& a, const OrchRef& b);
// Equality treating choice arms as label-keyed sets.
bool equal_unordered(const OrchRef& a, const OrchRef& b);

// Execution modes of the reduction engine (also consulted by the checker).
enum class SemanticsMode : uint8_t { Plain, PriorityType, PriorityProcess };

const char* to_string(SemanticsMode m);

}  // namespace ost

#endif
