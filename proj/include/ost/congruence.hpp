#ifndef OST_CONGRUENCE_HPP
#define OST_CONGRUENCE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "ost/process.hpp"

namespace ost {

struct MalformedRuntime : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Canonical representative of the structural-congruence class: parallel
// compositions flattened and sorted (orchestrators first), restriction
// clusters re-nested into a least spine, bound channels renamed from a
// deterministic supply. Idempotent.
ProcRef canonicalize(const ProcRef& p);

bool congruent(const ProcRef& a, const ProcRef& b);

// Alpha-invariant structural key (bound names appear as binder indices).
std::string structural_key(const ProcRef& p);

// Single-step rewrites of Definition-4.1 shape (alpha renaming, orchestrated
// scope commutation, commutativity/associativity). Test oracle; intentionally
// independent of canonicalize's normal form.
std::vector<ProcRef> congruence_rewrites(const ProcRef& p);

}  // namespace ost

#endif
