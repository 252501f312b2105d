#include "doctest.h"
#include "helpers.hpp"
#include "ost/compliance.hpp"
#include "ost/congruence.hpp"
#include "ost/pretty.hpp"
#include "ost/semantics.hpp"
#include "ost/typecheck.hpp"

using namespace ost;
using ost::testing::deadlock_module;
using ost::testing::movie_env;
using ost::testing::movie_module;

TEST_CASE("the movie system starts with exactly one link redex") {
  ProcRef sys = canonicalize(movie_module().proc_binding("System"));
  auto redexes = enumerate_redexes(sys, SemanticsMode::Plain, false, movie_env());
  REQUIRE(redexes.size() == 1);
  CHECK(redexes[0].rule == "Link");
}

TEST_CASE("an unenabled i/o pair yields no redex") {
  OrchRef f = Orch::external_choice({{"l", Orch::idle()}, {"m", Orch::idle()}});
  ProcRef p = Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", f),
                     Proc::par(Proc::send_value(chan("k", Polarity::Plus),
                                                Expr::lit(Value::nat(1)), Proc::inact()),
                               Proc::recv_value(chan("k", Polarity::Minus), "x", Proc::inact()))));
  CHECK(enumerate_redexes(canonicalize(p), SemanticsMode::Plain, true).empty());
}

TEST_CASE("clean-up redexes appear only when enabled") {
  ProcRef p = Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", Orch::idle()),
                     Proc::par(Proc::send_value(chan("k", Polarity::Plus),
                                                Expr::lit(Value::nat(4)), Proc::inact()),
                               Proc::inact())));
  ProcRef c = canonicalize(p);
  CHECK(enumerate_redexes(c, SemanticsMode::Plain, false).empty());
  auto with = enumerate_redexes(c, SemanticsMode::Plain, true);
  REQUIRE(with.size() == 1);
  CHECK(with[0].rule == "OrchClnUp1");
}

TEST_CASE("branch clean-up offers one redex per arm") {
  ProcRef p = Proc::restrict(
      "k",
      Proc::par(Proc::named_orch("k", Orch::idle()),
                Proc::branch_l(chan("k", Polarity::Plus),
                               {{"l", Proc::inact()}, {"m", Proc::inact()}})));
  auto redexes = enumerate_redexes(canonicalize(p), SemanticsMode::Plain, true);
  REQUIRE(redexes.size() == 2);
  CHECK(redexes[0].rule == "OrchClnUp2");
  CHECK(redexes[1].rule == "OrchClnUp2");
}

TEST_CASE("conditional reduction picks the evaluated branch") {
  ProcRef p = Proc::if_then_else(Expr::lit(Value::boolean(false)),
                                 Proc::send_value(chan("k", Polarity::Plus),
                                                  Expr::lit(Value::nat(1)), Proc::inact()),
                                 Proc::inact());
  ProcRef c = canonicalize(p);
  auto redexes = enumerate_redexes(c, SemanticsMode::Plain, true);
  REQUIRE(redexes.size() == 1);
  CHECK(redexes[0].rule == "If");
  CHECK(redexes[0].label == "false");
  ProcRef next = apply_redex(c, redexes[0]);
  CHECK(congruent(next, Proc::inact()));
}

TEST_CASE("deterministic runs are reproducible") {
  DeterministicScheduler s1, s2;
  Trace a = run(movie_module().proc_binding("System"), SemanticsMode::Plain, false, s1, 100,
                movie_env());
  Trace b = run(movie_module().proc_binding("System"), SemanticsMode::Plain, false, s2, 100,
                movie_env());
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].rule == b.steps[i].rule);
    CHECK(equal(a.steps[i].after, b.steps[i].after));
  }
}

TEST_CASE("seeded runs are reproducible") {
  SeededScheduler s1(99), s2(99);
  Trace a = run(movie_module().proc_binding("System"), SemanticsMode::Plain, true, s1, 100,
                movie_env());
  Trace b = run(movie_module().proc_binding("System"), SemanticsMode::Plain, true, s2, 100,
                movie_env());
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t i = 0; i < a.steps.size(); ++i) CHECK(a.steps[i].rule == b.steps[i].rule);
}

TEST_CASE("the worked trace follows the recorded rule sequence") {
  std::vector<std::string> script{"Link",    "OrchComm", "If",       "OrchSel", "OrchSSel",
                                  "OrchComm", "If",       "OrchSel",  "Link",    "OrchComm",
                                  "OrchDeleg", "OrchSSel", "OrchComm", "OrchComm"};
  ReplayScheduler sched(script);
  Trace tr = run(movie_module().proc_binding("System"), SemanticsMode::Plain, false, sched, 100,
                 movie_env());
  REQUIRE(tr.steps.size() == script.size());
  for (size_t i = 0; i < script.size(); ++i) CHECK(tr.steps[i].rule == script[i]);

  // final state: both sessions exhausted, the bank's last send pending
  ExprRef pending = Expr::apply(
      "IDtrans", {Expr::lit(Value::sym("amount", {Value::str("zootropolis")},
                                       GroundType("Amount"))),
                  Expr::lit(Value::sym("cc", {Value::nat(1234)}, GroundType("CcNumber")))});
  ProcRef expected = Proc::restrict(
      "k",
      Proc::par(
          Proc::named_orch("k", Orch::idle()),
          Proc::par(Proc::inact(),
                    Proc::par(Proc::inact(),
                              Proc::restrict(
                                  "kp", Proc::par(Proc::named_orch("kp", Orch::idle()),
                                                  Proc::send_value(chan("kp", Polarity::Plus),
                                                                   pending, Proc::inact())))))));
  CHECK(congruent(tr.final_state, expected));

  // with clean-up active the pending send is classified away
  auto errs = classify_errors(tr.final_state, true);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].kind == ErrorKind::NotAnError);

  // without clean-up it is a compliance-dependent deadlock
  auto errs2 = classify_errors(tr.final_state, false);
  REQUIRE(errs2.size() == 1);
  CHECK(errs2[0].kind == ErrorKind::ComplianceDependentDeadlock);
}

TEST_CASE("the movie system under clean-up drains the pending bank send") {
  DeterministicScheduler sched;
  Trace tr = run(movie_module().proc_binding("System"), SemanticsMode::Plain, true, sched, 100,
                 movie_env());
  CHECK_FALSE(tr.step_limit_hit);
  REQUIRE(tr.final_errors.size() == 1);
  CHECK(tr.final_errors[0].kind == ErrorKind::NotAnError);
  // both sessions exhausted, nothing left but inaction
  ProcRef expected = Proc::restrict(
      "k",
      Proc::par(Proc::named_orch("k", Orch::idle()),
                Proc::par(Proc::inact(),
                          Proc::par(Proc::inact(),
                                    Proc::restrict("kp", Proc::par(Proc::named_orch(
                                                             "kp", Orch::idle()),
                                                         Proc::inact()))))));
  CHECK(congruent(tr.final_state, expected));
}

TEST_CASE("the deadlock example gets stuck without clean-up and finishes with it") {
  const Module& m = deadlock_module();
  ProcRef sys = m.proc_binding("System");
  DeterministicScheduler sched;

  Trace stuck = run(sys, SemanticsMode::Plain, false, sched, 100);
  bool found = false;
  for (const auto& e : stuck.final_errors)
    if (e.kind == ErrorKind::ComplianceDependentDeadlock) found = true;
  CHECK(found);

  // the stuck state: the server's echo of 4 pending behind an idle orchestrator
  ProcRef expected_stuck = Proc::restrict(
      "k",
      Proc::par(Proc::named_orch("k", Orch::idle()),
                Proc::par(Proc::request("b", m.type_binding("Sb"), "kp",
                                        Proc::send_value(chan("kp"),
                                                         Expr::lit(Value::boolean(true)),
                                                         Proc::inact())),
                          Proc::send_value(
                              chan("k", Polarity::Plus), Expr::lit(Value::nat(4)),
                              Proc::accept("d", m.type_binding("Sd"), "kp",
                                           Proc::recv_value(chan("kp"), "y", Proc::inact()))))));
  CHECK(congruent(stuck.final_state, expected_stuck));

  DeterministicScheduler sched2;
  Trace done = run(sys, SemanticsMode::Plain, true, sched2, 100);
  REQUIRE(done.final_errors.size() == 1);
  CHECK(done.final_errors[0].kind == ErrorKind::NotAnError);
  ProcRef expected = Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", Orch::idle()),
                     Proc::restrict("kp", Proc::par(Proc::named_orch("kp", Orch::idle()),
                                                    Proc::par(Proc::inact(), Proc::inact())))));
  CHECK(congruent(done.final_state, expected));
}

TEST_CASE("classification of the four error shapes") {
  // two sends: a potential redex that cannot reduce
  ProcRef e1 = Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", Orch::io_prefix(Orch::idle())),
                     Proc::par(Proc::send_value(chan("k", Polarity::Plus),
                                                Expr::lit(Value::nat(1)), Proc::inact()),
                               Proc::send_value(chan("k", Polarity::Minus),
                                                Expr::lit(Value::nat(2)), Proc::inact()))));
  auto c1 = classify_errors(canonicalize(e1), true);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0].kind == ErrorKind::OrchSynchError);

  // select and branch on the same polarity
  OrchRef lm = Orch::external_choice({{"l", Orch::idle()}, {"m", Orch::idle()}});
  ProcRef e2 = Proc::restrict(
      "k",
      Proc::par(Proc::named_orch("k", lm),
                Proc::par(Proc::select_l(chan("k", Polarity::Plus), "l", Proc::inact()),
                          Proc::branch_l(chan("k", Polarity::Plus), {{"l", Proc::inact()}}))));
  auto c2 = classify_errors(canonicalize(e2), true);
  REQUIRE(c2.size() == 1);
  CHECK(c2[0].kind == ErrorKind::OrchSynchError);

  // i/o pair the orchestrator does not enable
  ProcRef e3 = Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", lm),
                     Proc::par(Proc::send_value(chan("k", Polarity::Plus),
                                                Expr::lit(Value::nat(1)), Proc::inact()),
                               Proc::recv_value(chan("k", Polarity::Minus), "x", Proc::inact()))));
  auto c3 = classify_errors(canonicalize(e3), true);
  REQUIRE(c3.size() == 1);
  CHECK(c3[0].kind == ErrorKind::OrchSynchError);

  // exhausted orchestrator facing a client-side action
  ProcRef e4 = Proc::restrict(
      "k", Proc::par(Proc::named_orch("k", Orch::idle()),
                     Proc::par(Proc::send_value(chan("k", Polarity::Minus),
                                                Expr::lit(Value::nat(1)), Proc::inact()),
                               Proc::inact())));
  auto c4 = classify_errors(canonicalize(e4), true);
  REQUIRE(c4.size() == 1);
  CHECK(c4[0].kind == ErrorKind::VacuousOrchError);
}

TEST_CASE("priority-type mode installs deterministic orchestrators") {
  ProcRef sys = movie_module().proc_binding("System");
  DeterministicScheduler sched;
  Trace tr = run(sys, SemanticsMode::PriorityType, false, sched, 100, movie_env());
  for (const auto& s : tr.steps)
    if (s.rule == "LinkPT") CHECK(s.rule == "LinkPT");
  REQUIRE(!tr.steps.empty());
  CHECK(tr.steps[0].rule == "LinkPT");
}

TEST_CASE("priority-process mode picks sd on the movie rental, plain may pick either") {
  // the client's speculative list reads uhd, hd, sd, ld; the safe set is
  // {sd, ld}, so process-level priorities force sd
  DeterministicScheduler sched;
  Trace tr = run(movie_module().proc_binding("System"), SemanticsMode::PriorityProcess, false,
                 sched, 100, movie_env());
  bool saw = false;
  for (const auto& s : tr.steps) {
    if (s.rule == "OrchSSelPP" && !saw) {
      saw = true;
      CHECK(s.label == "sd");
    }
  }
  CHECK(saw);
}

TEST_CASE("a branch missing the selected label blocks the selection") {
  OrchRef ab = Orch::external_choice({{"a", Orch::idle()}, {"b", Orch::idle()}});
  ProcRef p = Proc::restrict(
      "k",
      Proc::par(Proc::named_orch("k", ab),
                Proc::par(Proc::select_l(chan("k", Polarity::Minus), "a", Proc::inact()),
                          Proc::branch_l(chan("k", Polarity::Plus), {{"b", Proc::inact()}}))));
  ProcRef c = canonicalize(p);
  CHECK(enumerate_redexes(c, SemanticsMode::Plain, true).empty());
  auto errs = classify_errors(c, true);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].kind == ErrorKind::OrchSynchError);
}

TEST_CASE("priority-process mode fires the highest-priority available arm") {
  // spec <<l, m>> against a branch offering only m must pick m
  ProcRef client = Proc::request(
      "a", parse_type("spec<<l: !Nat.end, m: !Bool.end>>"), "k",
      Proc::spec_select(chan("k"),
                        {{"l", Proc::send_value(chan("k"), Expr::lit(Value::nat(1)),
                                                Proc::inact())},
                         {"m", Proc::send_value(chan("k"), Expr::lit(Value::boolean(true)),
                                                Proc::inact())}},
                        true));
  ProcRef server = Proc::accept(
      "b", parse_type("&{m: ?Bool.end}"), "k",
      Proc::branch_l(chan("k"), {{"m", Proc::recv_value(chan("k"), "x", Proc::inact())}}));
  DeterministicScheduler sched;
  Trace tr = run(Proc::par(client, server), SemanticsMode::PriorityProcess, false, sched, 20);
  REQUIRE(tr.steps.size() >= 2);
  CHECK(tr.steps[0].rule == "LinkPP");
  CHECK(tr.steps[1].rule == "OrchSSelPP");
  CHECK(tr.steps[1].label == "m");
}

TEST_CASE("the step limit flags the trace and still returns it") {
  DeterministicScheduler sched;
  Trace tr = run(movie_module().proc_binding("System"), SemanticsMode::Plain, true, sched, 3,
                 movie_env());
  CHECK(tr.step_limit_hit);
  CHECK(tr.steps.size() == 3);
  CHECK(tr.final_state != nullptr);
}

TEST_CASE("priority-type links always install deterministic orchestrators") {
  ProcRef sys = canonicalize(movie_module().proc_binding("System"));
  auto redexes = enumerate_redexes(sys, SemanticsMode::PriorityType, false, movie_env());
  REQUIRE(!redexes.empty());
  for (const auto& r : redexes) {
    REQUIRE(r.rule == "LinkPT");
    CHECK(is_deterministic(r.link_orch));
  }
  // plain mode keeps the nondeterministic all-safe orchestrator
  auto plain = enumerate_redexes(sys, SemanticsMode::Plain, false, movie_env());
  REQUIRE(!plain.empty());
  CHECK_FALSE(is_deterministic(plain[0].link_orch));
}

TEST_CASE("stale redexes are rejected") {
  ProcRef sys = canonicalize(movie_module().proc_binding("System"));
  auto redexes = enumerate_redexes(sys, SemanticsMode::Plain, false, movie_env());
  REQUIRE(!redexes.empty());
  ProcRef next = apply_redex(sys, redexes[0], movie_env());
  CHECK_THROWS_AS(apply_redex(next, redexes[0], movie_env()), StaleRedex);
}

TEST_CASE("subject reduction along the worked trace") {
  std::vector<std::string> script{"Link",    "OrchComm", "If",       "OrchSel", "OrchSSel",
                                  "OrchComm", "If",       "OrchSel",  "Link",    "OrchComm",
                                  "OrchDeleg", "OrchSSel", "OrchComm", "OrchComm"};
  ReplayScheduler sched(script);
  FunctionTable env = movie_env();
  Trace tr = run(movie_module().proc_binding("System"), SemanticsMode::Plain, false, sched, 100,
                 env);
  REQUIRE(tr.steps.size() == script.size());
  for (const auto& s : tr.steps) {
    auto r = typecheck({}, s.after, SemanticsMode::Plain, env);
    REQUIRE_MESSAGE(r.ok(), (r.error ? r.error->to_string() : std::string{}),
                    " at state ", pretty(s.after));
    CHECK(r.typing->empty());
  }
}
