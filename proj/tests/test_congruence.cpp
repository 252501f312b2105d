#include "doctest.h"
#include "helpers.hpp"
#include "ost/congruence.hpp"
#include "ost/gen.hpp"
#include "ost/pretty.hpp"
#include "ost/semantics.hpp"

using namespace ost;

namespace {

ProcRef send0(const std::string& k, Polarity p) {
  return Proc::send_value(chan(k, p), Expr::lit(Value::nat(0)), Proc::inact());
}

}  // namespace

TEST_CASE("parallel components commute") {
  ProcRef a = send0("x", Polarity::Plus);
  ProcRef b = Proc::recv_value(chan("y", Polarity::Minus), "v", Proc::inact());
  CHECK(congruent(Proc::par(a, b), Proc::par(b, a)));
}

TEST_CASE("orchestrated scope commutation") {
  // (vk)(orch_k f | Q | (vk')(orch_k' g | Q' | R))
  //   == (vk')(orch_k' g | (vk)(orch_k f | Q | Q') | R),  k not free in R
  OrchRef f = Orch::io_prefix(Orch::idle());
  OrchRef g = Orch::io_prefix(Orch::io_prefix(Orch::idle()));
  ProcRef q = send0("k", Polarity::Plus);
  ProcRef q2 = Proc::par(send0("k2", Polarity::Minus), send0("k", Polarity::Minus));
  ProcRef r = send0("k2", Polarity::Plus);

  ProcRef lhs = Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", f),
                     Proc::par(q, Proc::restrict("k2", Proc::par(Proc::named_orch("k2", g),
                                                                 Proc::par(q2, r))))));
  ProcRef rhs = Proc::restrict(
      "k2",
      Proc::par(Proc::named_orch("k2", g),
                Proc::par(Proc::restrict("k", Proc::par(Proc::named_orch("k", f),
                                                        Proc::par(q, q2))),
                          r)));
  CHECK(congruent(lhs, rhs));
}

TEST_CASE("alpha variants are congruent") {
  ProcRef a =
      Proc::restrict("k", Proc::par(Proc::named_orch("k", Orch::idle()), Proc::inact()));
  ProcRef b =
      Proc::restrict("j", Proc::par(Proc::named_orch("j", Orch::idle()), Proc::inact()));
  CHECK(congruent(a, b));
}

TEST_CASE("reflexivity and trivial distinctions") {
  ProcRef p = send0("k", Polarity::Plus);
  CHECK(congruent(p, p));
  CHECK_FALSE(congruent(Proc::inact(), Proc::named_orch("k", Orch::idle())));
}

TEST_CASE("canonicalize is idempotent") {
  Rng rng(51);
  for (int i = 0; i < 40; ++i) {
    ProcRef p = gen_typed_process(rng, 2, 3);
    SeededScheduler sched(rng.next());
    Trace tr = run(p, SemanticsMode::Plain, true, sched, rng.below(5));
    ProcRef c = canonicalize(tr.final_state);
    CHECK(equal(canonicalize(c), c));
  }
}

TEST_CASE("canonicalization preserves free channels") {
  ProcRef p = Proc::par(send0("free1", Polarity::Plus),
                        Proc::restrict("k", Proc::par(Proc::named_orch("k", Orch::idle()),
                                                      send0("free2", Polarity::Minus))));
  CHECK(free_channels(canonicalize(p)) == free_channels(p));
}

TEST_CASE("a restriction without its orchestrator is malformed") {
  ProcRef p = Proc::restrict("k", Proc::inact());
  CHECK_THROWS_AS(canonicalize(p), MalformedRuntime);
}

TEST_CASE("single rewrite steps stay congruent") {
  Rng rng(57);
  for (int i = 0; i < 60; ++i) {
    ProcRef p = gen_typed_process(rng, 2, 3);
    SeededScheduler sched(rng.next());
    Trace tr = run(p, SemanticsMode::Plain, true, sched, rng.below(6));
    ProcRef state = tr.final_state;
    auto rewrites = congruence_rewrites(state);
    for (size_t j = 0; j < rewrites.size() && j < 10; ++j)
      CHECK(congruent(state, rewrites[j]));
  }
}
