#include "doctest.h"
#include "ost/gen.hpp"
#include "ost/pretty.hpp"
#include "ost/process.hpp"

using namespace ost;

TEST_CASE("polarity duality is an involution") {
  CHECK(dual(Polarity::Plus) == Polarity::Minus);
  CHECK(dual(Polarity::Minus) == Polarity::Plus);
  CHECK(dual(dual(Polarity::Plus)) == Polarity::Plus);
  CHECK(dual(dual(Polarity::Minus)) == Polarity::Minus);
}

TEST_CASE("arm label distinctness is enforced at construction") {
  CHECK_THROWS_AS(Type::branch({{"a", Type::end()}, {"a", Type::end()}}), ConstructionError);
  CHECK_THROWS_AS(Type::select({}), ConstructionError);
  CHECK_THROWS_AS(Type::spec_select({{"a", Type::end()}, {"a", Type::end()}}, false),
                  ConstructionError);
  CHECK_THROWS_AS(Orch::external_choice({{"a", Orch::idle()}, {"a", Orch::idle()}}),
                  ConstructionError);
  CHECK_THROWS_AS(Proc::branch_l(chan("k"), {{"a", Proc::inact()}, {"a", Proc::inact()}}),
                  ConstructionError);
}

TEST_CASE("singleton choices collapse to label prefixes") {
  OrchRef f = Orch::external_choice({{"a", Orch::idle()}});
  CHECK(f->kind() == OrchKind::LabelPrefix);
  OrchRef g = Orch::internal_choice({{"b", Orch::io_prefix(Orch::idle())}});
  CHECK(g->kind() == OrchKind::LabelPrefix);
  CHECK(g->label() == "b");
}

TEST_CASE("free_channels") {
  ProcRef send = Proc::send_value(chan("k", Polarity::Minus), Expr::lit(Value::nat(1)),
                                  Proc::inact());
  CHECK(free_channels(send) == std::set<std::string>{"k"});

  ProcRef restricted =
      Proc::restrict("k", Proc::par(Proc::named_orch("k", Orch::idle()), Proc::inact()));
  CHECK(free_channels(restricted).empty());

  ProcRef both = Proc::par(send, Proc::recv_value(chan("j", Polarity::Plus), "x", Proc::inact()));
  CHECK(free_channels(both) == std::set<std::string>{"k", "j"});

  // request binds its channel in the body
  ProcRef req = Proc::request("a", Type::end(), "k",
                              Proc::send_value(chan("k"), Expr::lit(Value::nat(1)), Proc::inact()));
  CHECK(free_channels(req).empty());
}

TEST_CASE("subst_channel") {
  ProcRef p = Proc::send_value(chan("k"), Expr::lit(Value::nat(4)), Proc::inact());
  ProcRef q = subst_channel(p, "k", chan("k", Polarity::Minus));
  CHECK(q->channel().pol == Polarity::Minus);

  CHECK(equal(subst_channel(Proc::inact(), "k", chan("k", Polarity::Plus)), Proc::inact()));

  // a shadowing binder stops the substitution
  ProcRef body = Proc::par(Proc::named_orch("k", Orch::idle()),
                           Proc::send_value(chan("k"), Expr::lit(Value::nat(0)), Proc::inact()));
  ProcRef shadowed = Proc::restrict("k", body);
  CHECK(equal(subst_channel(shadowed, "k", chan("k", Polarity::Plus)), shadowed));

  // polarized occurrences are untouched
  ProcRef pol = Proc::send_value(chan("k", Polarity::Plus), Expr::lit(Value::nat(0)), Proc::inact());
  CHECK(equal(subst_channel(pol, "k", chan("j", Polarity::Minus)), pol));

  // the thrown reference is substituted too
  ProcRef thr = Proc::throw_chan(chan("k", Polarity::Plus), chan("c"), Proc::inact());
  ProcRef thr2 = subst_channel(thr, "c", chan("c", Polarity::Minus));
  CHECK(thr2->sent().pol == Polarity::Minus);
}

TEST_CASE("subst_value") {
  ProcRef p = Proc::send_value(chan("k", Polarity::Minus), Expr::var("x"), Proc::inact());
  ProcRef q = subst_value(p, "x", Value::nat(4));
  CHECK(q->expr()->kind() == ExprKind::Lit);
  CHECK(q->expr()->value() == Value::nat(4));

  CHECK(equal(subst_value(Proc::inact(), "x", Value::boolean(true)), Proc::inact()));

  // rebinding receive leaves the body alone
  ProcRef r = Proc::recv_value(chan("k", Polarity::Minus), "x",
                               Proc::send_value(chan("k", Polarity::Minus), Expr::var("x"),
                                                Proc::inact()));
  CHECK(equal(subst_value(r, "x", Value::nat(4)), r));
}

TEST_CASE("substitutions commute on disjoint names") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    ProcRef p = gen_typed_process(rng, 1, 3);
    ProcRef a = subst_value(subst_channel(p, "k", chan("k", Polarity::Minus)), "zz", Value::nat(1));
    ProcRef b = subst_channel(subst_value(p, "zz", Value::nat(1)), "k", chan("k", Polarity::Minus));
    CHECK(equal(a, b));
  }
}

TEST_CASE("free_channels after substitution") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    ProcRef p = gen_typed_process(rng, 1, 3);
    auto before = free_channels(p);
    ProcRef q = subst_channel(p, "k", chan("j" + std::to_string(i), Polarity::Plus));
    auto after = free_channels(q);
    std::set<std::string> expect = before;
    if (expect.erase("k")) expect.insert("j" + std::to_string(i));
    CHECK(after == expect);
  }
}

TEST_CASE("eval_expr") {
  FunctionTable env = FunctionTable::defaults();
  CHECK(eval_expr(env, Expr::lit(Value::nat(4))) == Value::nat(4));

  Value v = eval_expr(env, Expr::apply("available", {Expr::lit(Value::str("zootropolis"))}));
  CHECK(v.kind() == ValueKind::Sym);
  CHECK(v.sym_tag() == "available");
  CHECK(v.type() == GroundType("Bool"));

  CHECK_THROWS_AS(eval_expr(env, Expr::var("x")), EvalError);
  CHECK_THROWS_AS(eval_expr(env, Expr::apply("available", {})), EvalError);

  // determinism: identical inputs, identical values
  Value v2 = eval_expr(env, Expr::apply("available", {Expr::lit(Value::str("zootropolis"))}));
  CHECK(v == v2);

  // concrete rules take precedence over the symbolic fallback
  FunctionTable env2 = FunctionTable::defaults();
  env2.add_rule("available", {Value::str("zootropolis")}, Value::boolean(true));
  CHECK(eval_expr(env2, Expr::apply("available", {Expr::lit(Value::str("zootropolis"))})) ==
        Value::boolean(true));
}

TEST_CASE("is_user_defined") {
  ProcRef user = Proc::request("a", Type::end(), "k", Proc::inact());
  CHECK(is_user_defined(user));

  ProcRef runtime =
      Proc::restrict("k", Proc::par(Proc::named_orch("k", Orch::idle()), Proc::inact()));
  CHECK_FALSE(is_user_defined(runtime));

  ProcRef polarized =
      Proc::send_value(chan("k", Polarity::Plus), Expr::lit(Value::nat(0)), Proc::inact());
  CHECK_FALSE(is_user_defined(polarized));
}
