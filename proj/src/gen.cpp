#include "ost/gen.hpp"

#include <algorithm>
#include <array>

namespace ost {

uint64_t Rng::next() {
  s += 0x9e3779b97f4a7c15ull;
  uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

const std::array<const char*, 6> kLabels{"a", "b", "c", "d", "e", "f"};

std::vector<std::string> pick_labels(Rng& rng, size_t n) {
  std::vector<std::string> pool(kLabels.begin(), kLabels.end());
  for (size_t i = pool.size(); i-- > 1;) std::swap(pool[i], pool[rng.below(i + 1)]);
  pool.resize(n);
  return pool;
}

GroundType pick_ground(Rng& rng, bool simple) {
  static const std::array<const char*, 7> all{"Nat",    "Bool",     "String",    "Url",
                                              "Amount", "CcNumber", "TransIDnum"};
  size_t n = simple ? 3 : all.size();
  return GroundType(all[rng.below(n)]);
}

}  // namespace

TypeRef gen_type(Rng& rng, int max_depth, const GenOptions& opt) {
  if (max_depth <= 0) return Type::end();
  int roll = int(rng.below(100));
  if (roll < 10) return Type::end();
  if (roll < 30)
    return Type::in_value(pick_ground(rng, opt.simple_grounds),
                          gen_type(rng, max_depth - 1, opt));
  if (roll < 50)
    return Type::out_value(pick_ground(rng, opt.simple_grounds),
                           gen_type(rng, max_depth - 1, opt));
  if (roll < 60 && opt.allow_session_io) {
    GenOptions inner = opt;
    inner.allow_session_io = false;
    TypeRef carried = gen_type(rng, std::min(max_depth - 1, 2), inner);
    Polarity p = rng.chance(50) ? Polarity::Plus : Polarity::Minus;
    TypeRef cont = gen_type(rng, max_depth - 1, opt);
    return rng.chance(50) ? Type::in_session(carried, p, cont)
                          : Type::out_session(carried, p, cont);
  }
  size_t width = 1 + rng.below(3);
  std::vector<std::string> labels = pick_labels(rng, width);
  std::vector<TypeArm> arms;
  for (const auto& l : labels) arms.push_back({l, gen_type(rng, max_depth - 1, opt)});
  if (roll < 75) return Type::branch(std::move(arms));
  if (roll < 90 || !opt.allow_spec) return Type::select(std::move(arms));
  return Type::spec_select(std::move(arms), opt.prioritized);
}

OrchRef gen_orch(Rng& rng, int max_depth) {
  if (max_depth <= 0) return Orch::idle();
  int roll = int(rng.below(100));
  if (roll < 15) return Orch::idle();
  if (roll < 45) return Orch::io_prefix(gen_orch(rng, max_depth - 1));
  if (roll < 65)
    return Orch::label_prefix(pick_labels(rng, 1)[0], gen_orch(rng, max_depth - 1));
  size_t width = 2 + rng.below(2);
  std::vector<std::string> labels = pick_labels(rng, width);
  std::vector<OrchArm> arms;
  for (const auto& l : labels) arms.push_back({l, gen_orch(rng, max_depth - 1)});
  return roll < 85 ? Orch::external_choice(std::move(arms))
                   : Orch::internal_choice(std::move(arms));
}

CompliantPair gen_compliant_pair(Rng& rng, int max_depth, const GenOptions& opt) {
  if (max_depth <= 0 || rng.chance(12)) {
    // the idle orchestrator ends any client against any server
    return {Type::end(), gen_type(rng, std::max(0, max_depth - 1), opt), Orch::idle()};
  }
  int roll = int(rng.below(100));
  if (roll < 35) {  // value i/o
    GroundType g = pick_ground(rng, opt.simple_grounds);
    CompliantPair inner = gen_compliant_pair(rng, max_depth - 1, opt);
    bool client_out = rng.chance(50);
    TypeRef c = client_out ? Type::out_value(g, inner.client) : Type::in_value(g, inner.client);
    TypeRef s = client_out ? Type::in_value(g, inner.server) : Type::out_value(g, inner.server);
    return {c, s, Orch::io_prefix(inner.orch)};
  }
  if (roll < 45 && opt.allow_session_io) {  // session delegation: same carried type
    GenOptions carried_opt = opt;
    carried_opt.allow_session_io = false;
    TypeRef carried = gen_type(rng, std::min(max_depth - 1, 2), carried_opt);
    Polarity p = rng.chance(50) ? Polarity::Plus : Polarity::Minus;
    CompliantPair inner = gen_compliant_pair(rng, max_depth - 1, opt);
    bool client_out = rng.chance(50);
    TypeRef c = client_out ? Type::out_session(carried, p, inner.client)
                           : Type::in_session(carried, p, inner.client);
    TypeRef s = client_out ? Type::in_session(carried, p, inner.server)
                           : Type::out_session(carried, p, inner.server);
    return {c, s, Orch::io_prefix(inner.orch)};
  }
  if (roll < 75 || !opt.allow_spec) {  // select-vs-branch, either orientation
    size_t width = 1 + rng.below(3);
    size_t padding = rng.below(3);
    std::vector<std::string> labels = pick_labels(rng, std::min<size_t>(width + padding, 6));
    std::vector<TypeArm> sel_arms, br_arms;
    std::vector<OrchArm> orch_arms;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (i < width) {
        CompliantPair inner = gen_compliant_pair(rng, max_depth - 1, opt);
        sel_arms.push_back({labels[i], inner.client});
        br_arms.push_back({labels[i], inner.server});
        orch_arms.push_back({labels[i], inner.orch});
      } else {
        br_arms.push_back({labels[i], gen_type(rng, max_depth - 1, opt)});
      }
    }
    bool client_selects = rng.chance(50);
    if (client_selects)
      return {Type::select(sel_arms), Type::branch(br_arms), Orch::external_choice(orch_arms)};
    // client branches: the padded branch is on the client side, and the
    // selection continuations live on the server
    std::vector<TypeArm> cl, sv;
    for (size_t i = 0; i < br_arms.size(); ++i) cl.push_back(br_arms[i]);
    for (size_t i = 0; i < sel_arms.size(); ++i) sv.push_back(sel_arms[i]);
    // swap continuation roles: client arm types must be the client sides
    for (size_t i = 0; i < width; ++i) std::swap(cl[i].type, sv[i].type);
    return {Type::branch(cl), Type::select(sv), Orch::external_choice(orch_arms)};
  }
  // speculative-vs-branch: a nonempty safe core plus unsafe noise
  size_t shared = 1 + rng.below(2);
  size_t spec_extra = rng.below(2);
  size_t br_extra = rng.below(2);
  std::vector<std::string> labels = pick_labels(rng, shared + spec_extra + br_extra);
  std::vector<TypeArm> spec_arms, br_arms;
  std::vector<OrchArm> orch_arms;
  bool client_speculates = rng.chance(50);
  for (size_t i = 0; i < shared; ++i) {
    CompliantPair inner = gen_compliant_pair(rng, max_depth - 1, opt);
    spec_arms.push_back({labels[i], client_speculates ? inner.client : inner.server});
    br_arms.push_back({labels[i], client_speculates ? inner.server : inner.client});
    orch_arms.push_back({labels[i], inner.orch});
  }
  for (size_t i = 0; i < spec_extra; ++i)
    spec_arms.push_back({labels[shared + i], gen_type(rng, max_depth - 1, opt)});
  for (size_t i = 0; i < br_extra; ++i)
    br_arms.push_back({labels[shared + spec_extra + i], gen_type(rng, max_depth - 1, opt)});
  TypeRef spec = Type::spec_select(spec_arms, opt.prioritized);
  TypeRef br = Type::branch(br_arms);
  OrchRef orch = Orch::internal_choice(orch_arms);
  if (client_speculates) return {spec, br, orch};
  return {br, spec, orch};
}

namespace {

Value gen_literal(Rng& rng, const GroundType& g) {
  if (g.name() == "Nat") return Value::nat(rng.below(100));
  if (g.name() == "Bool") return Value::boolean(rng.chance(50));
  if (g.name() == "String") return Value::str("s" + std::to_string(rng.below(4)));
  return Value::sym("mk" + g.name(), {}, g);
}

struct ProcGen {
  Rng& rng;
  uint64_t var_counter = 0;

  std::string fresh_var() { return "v" + std::to_string(var_counter++); }

  ProcRef derive(const TypeRef& t, const std::string& k) {
    switch (t->kind()) {
      case TypeKind::End:
        return Proc::inact();
      case TypeKind::OutValue:
        return Proc::send_value(chan(k), Expr::lit(gen_literal(rng, t->ground())),
                                derive(t->cont(), k));
      case TypeKind::InValue:
        return Proc::recv_value(chan(k), fresh_var(), derive(t->cont(), k));
      case TypeKind::InSession:
      case TypeKind::OutSession:
        // process generation sticks to first-order sessions
        return Proc::inact();
      case TypeKind::Select: {
        const auto& arms = t->arms();
        if (arms.size() >= 2 && rng.chance(40)) {
          size_t i = rng.below(arms.size());
          size_t j = rng.below(arms.size());
          if (j == i) j = (i + 1) % arms.size();
          return Proc::if_then_else(
              Expr::lit(Value::boolean(rng.chance(50))),
              Proc::select_l(chan(k), arms[i].label, derive(arms[i].type, k)),
              Proc::select_l(chan(k), arms[j].label, derive(arms[j].type, k)));
        }
        size_t i = rng.below(arms.size());
        return Proc::select_l(chan(k), arms[i].label, derive(arms[i].type, k));
      }
      case TypeKind::Branch: {
        std::vector<ProcArm> arms;
        for (const auto& a : t->arms()) arms.push_back({a.label, derive(a.type, k)});
        if (rng.chance(25)) {
          // an extra offered arm beyond the declared type
          std::set<std::string> used;
          for (const auto& a : arms) used.insert(a.label);
          for (const auto* cand : kLabels) {
            if (!used.count(cand)) {
              arms.push_back({cand, Proc::inact()});
              break;
            }
          }
        }
        return Proc::branch_l(chan(k), std::move(arms));
      }
      case TypeKind::SpecSelect: {
        std::vector<ProcArm> arms;
        for (const auto& a : t->arms()) arms.push_back({a.label, derive(a.type, k)});
        return Proc::spec_select(chan(k), std::move(arms), t->prioritized());
      }
    }
    return Proc::inact();
  }
};

// Replaces the first inaction leaf with `next` (sequential chaining).
ProcRef splice_at_inact(const ProcRef& p, const ProcRef& next, bool& done) {
  if (done) return p;
  switch (p->kind()) {
    case ProcKind::Inact:
      done = true;
      return next;
    case ProcKind::SendValue:
      return Proc::send_value(p->channel(), p->expr(), splice_at_inact(p->cont(), next, done));
    case ProcKind::RecvValue:
      return Proc::recv_value(p->channel(), p->binder(), splice_at_inact(p->cont(), next, done));
    case ProcKind::SelectL:
      return Proc::select_l(p->channel(), p->label(), splice_at_inact(p->cont(), next, done));
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      std::vector<ProcArm> arms;
      for (const auto& a : p->arms()) arms.push_back({a.label, splice_at_inact(a.proc, next, done)});
      if (p->kind() == ProcKind::BranchL) return Proc::branch_l(p->channel(), std::move(arms));
      return Proc::spec_select(p->channel(), std::move(arms), p->prioritized());
    }
    case ProcKind::If:
      return Proc::if_then_else(p->expr(), splice_at_inact(p->then_branch(), next, done),
                                p->else_branch());
    default:
      return p;
  }
}

}  // namespace

ProcRef gen_typed_process(Rng& rng, int sessions, int max_depth) {
  GenOptions opt;
  opt.allow_session_io = false;
  opt.simple_grounds = true;
  ProcGen pg{rng};

  std::vector<ProcRef> clients, servers;
  for (int i = 0; i < sessions; ++i) {
    CompliantPair pair = gen_compliant_pair(rng, max_depth, opt);
    std::string port_c = "p" + std::to_string(i);
    std::string port_s = "q" + std::to_string(i);
    ProcRef cbody = pg.derive(pair.client, "k");
    ProcRef sbody = pg.derive(pair.server, "k");
    clients.push_back(Proc::request(port_c, pair.client, "k", cbody));
    servers.push_back(Proc::accept(port_s, pair.server, "k", sbody));
  }

  // chain some requests sequentially, keep accepts at the top level
  std::vector<ProcRef> parts;
  ProcRef chain;
  for (auto& c : clients) {
    if (chain && rng.chance(40)) {
      bool done = false;
      chain = splice_at_inact(chain, c, done);
      if (!done) {
        parts.push_back(chain);
        chain = c;
      }
    } else {
      if (chain) parts.push_back(chain);
      chain = c;
    }
  }
  if (chain) parts.push_back(chain);
  for (auto& s : servers) parts.push_back(s);
  return rebuild_par(parts);
}

namespace {

void shrink_candidates(const ProcRef& p, std::vector<ProcRef>& out) {
  if (p->kind() != ProcKind::Inact) out.push_back(Proc::inact());
  switch (p->kind()) {
    case ProcKind::Par:
      out.push_back(p->left());
      out.push_back(p->right());
      break;
    case ProcKind::If:
      out.push_back(p->then_branch());
      out.push_back(p->else_branch());
      break;
    case ProcKind::Request:
    case ProcKind::Accept:
    case ProcKind::SendValue:
    case ProcKind::RecvValue:
    case ProcKind::Throw:
    case ProcKind::Catch:
    case ProcKind::SelectL:
      out.push_back(p->kind() == ProcKind::Request || p->kind() == ProcKind::Accept ? p->body()
                                                                                    : p->cont());
      break;
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP:
      if (p->arms().size() > 1) {
        for (size_t i = 0; i < p->arms().size(); ++i) {
          std::vector<ProcArm> arms = p->arms();
          arms.erase(arms.begin() + i);
          out.push_back(p->kind() == ProcKind::BranchL
                            ? Proc::branch_l(p->channel(), std::move(arms))
                            : Proc::spec_select(p->channel(), std::move(arms), p->prioritized()));
        }
      }
      break;
    default:
      break;
  }
}

size_t proc_size(const ProcRef& p) {
  size_t n = 1;
  switch (p->kind()) {
    case ProcKind::Par:
      return 1 + proc_size(p->left()) + proc_size(p->right());
    case ProcKind::If:
      return 1 + proc_size(p->then_branch()) + proc_size(p->else_branch());
    case ProcKind::Request:
    case ProcKind::Accept:
    case ProcKind::Restrict:
      return 1 + proc_size(p->body());
    case ProcKind::SendValue:
    case ProcKind::RecvValue:
    case ProcKind::Throw:
    case ProcKind::Catch:
    case ProcKind::SelectL:
      return 1 + proc_size(p->cont());
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP:
      for (const auto& a : p->arms()) n += proc_size(a.proc);
      return n;
    default:
      return n;
  }
}

}  // namespace

ProcRef shrink_process(const ProcRef& p, const std::function<bool(const ProcRef&)>& still_fails) {
  ProcRef cur = p;
  bool improved = true;
  while (improved) {
    improved = false;
    std::vector<ProcRef> cands;
    shrink_candidates(cur, cands);
    for (const auto& c : cands) {
      if (proc_size(c) >= proc_size(cur)) continue;
      bool fails = false;
      try {
        fails = still_fails(c);
      } catch (...) {
        fails = false;
      }
      if (fails) {
        cur = c;
        improved = true;
        break;
      }
    }
  }
  return cur;
}

namespace {

void type_shrinks(const TypeRef& t, std::vector<TypeRef>& out) {
  if (t->kind() != TypeKind::End) out.push_back(Type::end());
  switch (t->kind()) {
    case TypeKind::InValue:
    case TypeKind::OutValue:
      out.push_back(t->cont());
      break;
    case TypeKind::InSession:
    case TypeKind::OutSession:
      out.push_back(t->cont());
      out.push_back(t->carried());
      break;
    case TypeKind::Branch:
    case TypeKind::Select:
    case TypeKind::SpecSelect:
      for (const auto& a : t->arms()) out.push_back(a.type);
      if (t->arms().size() > 1) {
        for (size_t i = 0; i < t->arms().size(); ++i) {
          std::vector<TypeArm> arms = t->arms();
          arms.erase(arms.begin() + i);
          if (t->kind() == TypeKind::Branch) out.push_back(Type::branch(std::move(arms)));
          else if (t->kind() == TypeKind::Select) out.push_back(Type::select(std::move(arms)));
          else out.push_back(Type::spec_select(std::move(arms), t->prioritized()));
        }
      }
      break;
    default:
      break;
  }
}

size_t type_size(const TypeRef& t) {
  size_t n = 1;
  switch (t->kind()) {
    case TypeKind::InValue:
    case TypeKind::OutValue:
      return 1 + type_size(t->cont());
    case TypeKind::InSession:
    case TypeKind::OutSession:
      return 1 + type_size(t->carried()) + type_size(t->cont());
    case TypeKind::Branch:
    case TypeKind::Select:
    case TypeKind::SpecSelect:
      for (const auto& a : t->arms()) n += type_size(a.type);
      return n;
    default:
      return n;
  }
}

}  // namespace

std::pair<TypeRef, TypeRef> shrink_type_pair(
    const std::pair<TypeRef, TypeRef>& pair,
    const std::function<bool(const TypeRef&, const TypeRef&)>& still_fails) {
  auto cur = pair;
  bool improved = true;
  while (improved) {
    improved = false;
    std::vector<TypeRef> left, right;
    type_shrinks(cur.first, left);
    type_shrinks(cur.second, right);
    for (const auto& c : left) {
      if (type_size(c) < type_size(cur.first) && still_fails(c, cur.second)) {
        cur.first = c;
        improved = true;
        break;
      }
    }
    if (improved) continue;
    for (const auto& c : right) {
      if (type_size(c) < type_size(cur.second) && still_fails(cur.first, c)) {
        cur.second = c;
        improved = true;
        break;
      }
    }
  }
  return cur;
}

}  // namespace ost
