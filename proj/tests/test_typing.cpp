#include "doctest.h"
#include "helpers.hpp"
#include "ost/congruence.hpp"
#include "ost/gen.hpp"
#include "ost/pretty.hpp"
#include "ost/semantics.hpp"
#include "ost/typecheck.hpp"

using namespace ost;
using ost::testing::movie_module;

TEST_CASE("typing composition") {
  Typing a, b;
  a.insert({"k", Polarity::Plus}, Type::end());
  b.insert({"k", Polarity::Minus}, Type::end());
  auto r = typing_compose(a, b);
  REQUIRE(r.has_value());
  CHECK(r->size() == 2);

  Typing c;
  c.insert({"k", Polarity::Plus}, Type::end());
  auto clash = typing_compose_t(a, c);
  REQUIRE(std::holds_alternative<TypeError>(clash));
  CHECK(std::get<TypeError>(clash).kind == TypeErrorKind::TypingOverlap);

  auto empty = typing_compose(Typing{}, Typing{});
  REQUIRE(empty.has_value());
  CHECK(empty->empty());
}

TEST_CASE("completed typings") {
  Typing d;
  CHECK(is_completed(d));
  d.insert({"k", Polarity::Plus}, Type::end());
  CHECK(is_completed(d));
  Typing e;
  e.insert({"k", Polarity::Plus}, Type::out_value(GroundType("Nat"), Type::end()));
  CHECK_FALSE(is_completed(e));
}

TEST_CASE("admits permits weakening by end entries only") {
  Typing inferred;
  Typing claimed;
  claimed.insert({"k", Polarity::Plus}, Type::end());
  CHECK(admits(inferred, claimed));
  Typing claimed2;
  claimed2.insert({"k", Polarity::Plus}, Type::out_value(GroundType("Nat"), Type::end()));
  CHECK_FALSE(admits(inferred, claimed2));
  CHECK(admits(claimed2, claimed2));
}

TEST_CASE("the movie system types to the empty typing") {
  auto r = typecheck({}, movie_module().proc_binding("System"));
  REQUIRE(r.ok());
  CHECK(r.typing->empty());
}

TEST_CASE("inaction types to the empty typing") {
  auto r = typecheck({}, Proc::inact());
  REQUIRE(r.ok());
  CHECK(r.typing->empty());
}

TEST_CASE("the deadlock example system typechecks") {
  auto r = typecheck({}, ost::testing::deadlock_module().proc_binding("System"));
  REQUIRE(r.ok());
  CHECK(r.typing->empty());
}

namespace {

// The four untypable stuck terms from the error discussion.
ProcRef err_two_sends() {
  return Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", Orch::io_prefix(Orch::idle())),
                     Proc::par(Proc::send_value(chan("k", Polarity::Plus),
                                                Expr::lit(Value::nat(1)), Proc::inact()),
                               Proc::send_value(chan("k", Polarity::Minus),
                                                Expr::lit(Value::nat(2)), Proc::inact()))));
}

ProcRef err_same_polarity() {
  OrchRef f = Orch::external_choice({{"l", Orch::idle()}, {"m", Orch::idle()}});
  return Proc::restrict(
      "k",
      Proc::par(Proc::named_orch("k", f),
                Proc::par(Proc::select_l(chan("k", Polarity::Plus), "l", Proc::inact()),
                          Proc::branch_l(chan("k", Polarity::Plus), {{"l", Proc::inact()}}))));
}

ProcRef err_unenabled_io() {
  OrchRef f = Orch::external_choice({{"l", Orch::idle()}, {"m", Orch::idle()}});
  return Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", f),
                     Proc::par(Proc::send_value(chan("k", Polarity::Plus),
                                                Expr::lit(Value::nat(1)), Proc::inact()),
                               Proc::recv_value(chan("k", Polarity::Minus), "x", Proc::inact()))));
}

ProcRef err_vacuous() {
  return Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", Orch::idle()),
                     Proc::par(Proc::send_value(chan("k", Polarity::Minus),
                                                Expr::lit(Value::nat(1)), Proc::inact()),
                               Proc::inact())));
}

}  // namespace

TEST_CASE("the four error terms are rejected with distinct diagnostics") {
  auto r1 = typecheck({}, err_two_sends());
  REQUIRE_FALSE(r1.ok());
  CHECK(r1.error->kind == TypeErrorKind::ComplianceFailure);

  auto r2 = typecheck({}, err_same_polarity());
  REQUIRE_FALSE(r2.ok());
  CHECK(r2.error->kind == TypeErrorKind::TypingOverlap);

  auto r3 = typecheck({}, err_unenabled_io());
  REQUIRE_FALSE(r3.ok());
  CHECK(r3.error->kind == TypeErrorKind::ComplianceFailure);
  CHECK(r3.error->detail != r1.error->detail);

  auto r4 = typecheck({}, err_vacuous());
  REQUIRE_FALSE(r4.ok());
  CHECK(r4.error->kind == TypeErrorKind::ComplianceFailure);
  CHECK(r4.error->detail != r1.error->detail);
  CHECK(r4.error->detail != r3.error->detail);
}

TEST_CASE("a lone orchestrator is not typable") {
  auto r = typecheck({}, Proc::named_orch("k", Orch::idle()));
  REQUIRE_FALSE(r.ok());
  CHECK(r.error->kind == TypeErrorKind::ArityOrShape);
}

TEST_CASE("unpolarized channels need a binder") {
  ProcRef p = Proc::send_value(chan("k"), Expr::lit(Value::nat(1)), Proc::inact());
  auto r = typecheck({}, p);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error->kind == TypeErrorKind::UnboundChannel);
}

TEST_CASE("conditional branches must agree after widening") {
  // selects on different labels merge into a wider select
  ProcRef p = Proc::request(
      "a", parse_type("+{l: !Nat.end, m: !Bool.end}"), "k",
      Proc::if_then_else(
          Expr::lit(Value::boolean(true)),
          Proc::select_l(chan("k"), "l",
                         Proc::send_value(chan("k"), Expr::lit(Value::nat(1)), Proc::inact())),
          Proc::select_l(chan("k"), "m",
                         Proc::send_value(chan("k"), Expr::lit(Value::boolean(true)),
                                          Proc::inact()))));
  auto r = typecheck({}, p);
  REQUIRE(r.ok());

  // sends of different ground types do not merge
  ProcRef bad = Proc::request(
      "a", parse_type("!Nat.end"), "k",
      Proc::if_then_else(
          Expr::lit(Value::boolean(true)),
          Proc::send_value(chan("k"), Expr::lit(Value::nat(1)), Proc::inact()),
          Proc::send_value(chan("k"), Expr::lit(Value::boolean(true)), Proc::inact())));
  auto rb = typecheck({}, bad);
  REQUIRE_FALSE(rb.ok());
  CHECK(rb.error->kind == TypeErrorKind::BranchTypingDisagreement);
}

TEST_CASE("condition must be boolean") {
  ProcRef p = Proc::if_then_else(Expr::lit(Value::nat(3)), Proc::inact(), Proc::inact());
  auto r = typecheck({}, p);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error->kind == TypeErrorKind::GroundTypeMismatch);
}

TEST_CASE("branch processes may offer more arms than the type") {
  ProcRef p = Proc::accept(
      "b", parse_type("&{l: end}"), "k",
      Proc::branch_l(chan("k"), {{"l", Proc::inact()}, {"extra", Proc::inact()}}));
  CHECK(typecheck({}, p).ok());

  // but cannot offer fewer
  ProcRef q = Proc::accept("b", parse_type("&{l: end, m: end}"), "k",
                           Proc::branch_l(chan("k"), {{"l", Proc::inact()}}));
  CHECK_FALSE(typecheck({}, q).ok());
}

TEST_CASE("speculative process arms must match the type exactly") {
  ProcRef p = Proc::request("a", parse_type("spec{l: end, m: end}"), "k",
                            Proc::spec_select(chan("k"), {{"l", Proc::inact()}}, false));
  CHECK_FALSE(typecheck({}, p).ok());
}

TEST_CASE("an orchestrator refusing the selected label is a compliance failure") {
  ProcRef p = Proc::restrict(
      "k",
      Proc::par(Proc::named_orch("k", Orch::label_prefix("a", Orch::idle())),
                Proc::par(Proc::select_l(chan("k", Polarity::Minus), "b", Proc::inact()),
                          Proc::branch_l(chan("k", Polarity::Plus),
                                         {{"a", Proc::inact()}, {"b", Proc::inact()}}))));
  auto r = typecheck({}, p);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error->kind == TypeErrorKind::ComplianceFailure);
  auto errs = classify_errors(canonicalize(p), true);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].kind == ErrorKind::OrchSynchError);
}

TEST_CASE("two pending throws on one channel are rejected") {
  ProcRef p = Proc::restrict(
      "k",
      Proc::par(Proc::named_orch("k", Orch::io_prefix(Orch::idle())),
                Proc::par(Proc::throw_chan(chan("k", Polarity::Minus), chan("i", Polarity::Minus),
                                           Proc::inact()),
                          Proc::throw_chan(chan("k", Polarity::Plus), chan("j", Polarity::Plus),
                                           Proc::inact()))));
  auto r = typecheck({}, p);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error->kind == TypeErrorKind::ComplianceFailure);
}

TEST_CASE("a mismatched delegated polarity is a polarity clash") {
  // the declared type promises a minus end but the body throws a plus end
  ProcRef p = Proc::request(
      "a", parse_type("!(?Nat.end-).end"), "k",
      Proc::throw_chan(chan("k"), chan("j", Polarity::Plus), Proc::inact()));
  auto r = typecheck({}, p);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error->kind == TypeErrorKind::PolarityClash);
}

TEST_CASE("typing is deterministic across reruns") {
  Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    ProcRef p = gen_typed_process(rng, 2, 3);
    auto a = typecheck({}, p);
    auto b = typecheck({}, p);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(*a.typing == *b.typing);
  }
}

TEST_CASE("substitution preserves typing") {
  // Gamma, x:Nat |- P and a literal value v:Nat give the same typing for P[v/x]
  ProcRef p = Proc::request("a", parse_type("!Nat.end"), "k",
                            Proc::send_value(chan("k"), Expr::var("x"), Proc::inact()));
  Context gamma{{"x", GroundType("Nat")}};
  auto before = typecheck(gamma, p);
  REQUIRE(before.ok());
  ProcRef q = subst_value(p, "x", Value::nat(7));
  auto after = typecheck({}, q);
  REQUIRE(after.ok());
  CHECK(*before.typing == *after.typing);
}

TEST_CASE("canonicalization preserves typings") {
  Rng rng(43);
  for (int i = 0; i < 25; ++i) {
    ProcRef p = gen_typed_process(rng, 2, 3);
    auto a = typecheck({}, p);
    REQUIRE(a.ok());
    auto b = typecheck({}, canonicalize(p));
    REQUIRE(b.ok());
    CHECK(*a.typing == *b.typing);
  }
}
