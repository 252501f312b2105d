#ifndef OST_TYPECHECK_HPP
#define OST_TYPECHECK_HPP

#include <optional>
#include <string>
#include <variant>

#include "ost/process.hpp"
#include "ost/typing.hpp"

namespace ost {

enum class TypeErrorKind : uint8_t {
  UnboundChannel,
  PolarityClash,
  TypingOverlap,
  LabelMismatch,
  ComplianceFailure,
  GroundTypeMismatch,
  IncompleteTyping,
  BranchTypingDisagreement,
  ArityOrShape,
};

const char* to_string(TypeErrorKind k);

struct TypeError {
  TypeErrorKind kind;
  std::string path;    // location within the process tree
  std::string detail;  // human-readable message

  std::string to_string() const;
};

struct TypecheckResult {
  std::optional<Typing> typing;
  std::optional<TypeError> error;
  bool ok() const { return typing.has_value(); }
};

// Reconstructs the typing of P under gamma, or reports the first failure.
// Session types of delegated channels are solved by unification across the
// enclosing compliance checks.
TypecheckResult typecheck(const Context& gamma, const ProcRef& p,
                          SemanticsMode mode = SemanticsMode::Plain,
                          const FunctionTable& env = FunctionTable::defaults());

// Composition with a typed error (spec'd companion of typing_compose).
std::variant<Typing, TypeError> typing_compose_t(const Typing& a, const Typing& b);

// Resolved ground type of the value expected by a specific receive node
// inside `root` (located by pointer identity), when the whole term types.
std::optional<GroundType> infer_receive_ground(const ProcRef& root, const Proc* recv_node,
                                               const FunctionTable& env);

}  // namespace ost

#endif
