#ifndef OST_GEN_HPP
#define OST_GEN_HPP

#include <cstdint>
#include <functional>

#include "ost/process.hpp"

namespace ost {

// Deterministic splittable generator state.
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed) {}
  uint64_t next();
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }
  bool chance(int percent) { return below(100) < uint64_t(percent); }
};

struct GenOptions {
  bool allow_spec = true;
  bool prioritized = false;
  bool allow_session_io = true;
  bool simple_grounds = false;  // restrict to Nat/Bool/String
};

TypeRef gen_type(Rng& rng, int max_depth, const GenOptions& opt = GenOptions{});
OrchRef gen_orch(Rng& rng, int max_depth);

struct CompliantPair {
  TypeRef client;
  TypeRef server;
  OrchRef orch;
};

// A triple built by running the compliance rules generatively; the server
// side may carry extra branch arms and speculative nodes keep unsafe arms
// around.
CompliantPair gen_compliant_pair(Rng& rng, int max_depth, const GenOptions& opt = GenOptions{});

// A closed user-defined process that typechecks to the empty typing: paired
// request/accept sessions whose bodies follow generated compliant types.
ProcRef gen_typed_process(Rng& rng, int sessions, int max_depth);

// Greedy structural shrinking preserving a failing predicate.
ProcRef shrink_process(const ProcRef& p, const std::function<bool(const ProcRef&)>& still_fails);
std::pair<TypeRef, TypeRef> shrink_type_pair(
    const std::pair<TypeRef, TypeRef>& pair,
    const std::function<bool(const TypeRef&, const TypeRef&)>& still_fails);

}  // namespace ost

#endif
