#include "ost/semantics.hpp"

#include <algorithm>
#include <atomic>
#include <optional>

#include "ost/compliance.hpp"
#include "ost/congruence.hpp"
#include "ost/pretty.hpp"
#include "ost/typecheck.hpp"

namespace ost {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::OrchSynchError: return "orch-synch-error";
    case ErrorKind::VacuousOrchError: return "vacuous-orchestration-error";
    case ErrorKind::ComplianceDependentDeadlock: return "compliance-dependent-deadlock";
    case ErrorKind::NotAnError: return "not-an-error";
  }
  return "?";
}

std::string Redex::key() const {
  std::string s = rule + "|" + channel + "|" + label + "|";
  if (item_a) s += structural_key(item_a);
  s += "|";
  if (item_b) s += structural_key(item_b);
  return s;
}

const Redex* DeterministicScheduler::pick(const std::vector<Redex>& redexes, size_t) {
  return redexes.empty() ? nullptr : &redexes.front();
}

namespace {

uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

const Redex* SeededScheduler::pick(const std::vector<Redex>& redexes, size_t) {
  if (redexes.empty()) return nullptr;
  return &redexes[splitmix64(state_) % redexes.size()];
}

const Redex* ReplayScheduler::pick(const std::vector<Redex>& redexes, size_t) {
  if (idx_ >= script_.size()) return nullptr;
  std::string entry = script_[idx_];
  std::string rule = entry;
  std::string label;
  auto colon = entry.find(':');
  if (colon != std::string::npos) {
    rule = entry.substr(0, colon);
    label = entry.substr(colon + 1);
  }
  for (const auto& r : redexes) {
    if (r.rule == rule && (label.empty() || r.label == label)) {
      ++idx_;
      return &r;
    }
  }
  return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// A structured view of a canonical state: loose items at the top plus
// restriction spines, each level carrying its channel, orchestrator and items.

struct Level {
  std::string chan;
  OrchRef orch;
  std::vector<ProcRef> items;
};

struct Spine {
  std::vector<Level> levels;
};

struct View {
  std::vector<ProcRef> top;
  std::vector<Spine> spines;
};

void build_spine(const ProcRef& restrict_term, Spine& out) {
  Level lvl;
  lvl.chan = restrict_term->binder();
  ProcRef nested;
  for (const auto& item : flatten_par(restrict_term->body())) {
    if (item->kind() == ProcKind::NamedOrch && item->binder() == lvl.chan) {
      if (lvl.orch) throw MalformedRuntime("duplicate orchestrator for " + lvl.chan);
      lvl.orch = item->orch();
    } else if (item->kind() == ProcKind::Restrict) {
      if (nested) throw MalformedRuntime("state not canonical: sibling restrictions");
      nested = item;
    } else {
      lvl.items.push_back(item);
    }
  }
  if (!lvl.orch) throw MalformedRuntime("restriction on " + lvl.chan + " lacks its orchestrator");
  out.levels.push_back(std::move(lvl));
  if (nested) build_spine(nested, out);
}

View build_view(const ProcRef& canonical) {
  View v;
  for (const auto& item : flatten_par(canonical)) {
    if (item->kind() == ProcKind::Restrict) {
      Spine s;
      build_spine(item, s);
      v.spines.push_back(std::move(s));
    } else {
      v.top.push_back(item);
    }
  }
  return v;
}

ProcRef rebuild(const View& v) {
  std::vector<ProcRef> parts = v.top;
  for (const auto& s : v.spines) {
    ProcRef inner;
    for (size_t i = s.levels.size(); i-- > 0;) {
      const Level& lvl = s.levels[i];
      std::vector<ProcRef> items;
      items.push_back(Proc::named_orch(lvl.chan, lvl.orch));
      items.insert(items.end(), lvl.items.begin(), lvl.items.end());
      if (inner) items.push_back(inner);
      inner = Proc::restrict(lvl.chan, rebuild_par(items));
    }
    if (inner) parts.push_back(inner);
  }
  return rebuild_par(parts);
}

struct Site {
  int spine = -1;  // -1: top level
  int level = -1;
  size_t index = 0;
};

std::optional<Site> locate(const View& v, const ProcRef& item) {
  for (size_t i = 0; i < v.top.size(); ++i)
    if (equal(v.top[i], item)) return Site{-1, -1, i};
  for (size_t s = 0; s < v.spines.size(); ++s)
    for (size_t l = 0; l < v.spines[s].levels.size(); ++l)
      for (size_t i = 0; i < v.spines[s].levels[l].items.size(); ++i)
        if (equal(v.spines[s].levels[l].items[i], item)) return Site{int(s), int(l), i};
  return std::nullopt;
}

void remove_at(View& v, const Site& s) {
  if (s.spine < 0)
    v.top.erase(v.top.begin() + s.index);
  else
    v.spines[s.spine].levels[s.level].items.erase(
        v.spines[s.spine].levels[s.level].items.begin() + s.index);
}

void replace_item(View& v, const ProcRef& from, const ProcRef& to, const char* rule) {
  auto site = locate(v, from);
  if (!site) throw StaleRedex(std::string(rule) + ": participant vanished");
  if (site->spine < 0)
    v.top[site->index] = to;
  else
    v.spines[site->spine].levels[site->level].items[site->index] = to;
}

struct HeadInfo {
  bool on_channel = false;
  std::string chan;
  Polarity pol = Polarity::Plus;
};

HeadInfo head_on(const ProcRef& p) {
  HeadInfo h;
  switch (p->kind()) {
    case ProcKind::SendValue:
    case ProcKind::RecvValue:
    case ProcKind::Throw:
    case ProcKind::Catch:
    case ProcKind::SelectL:
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP:
      if (p->channel().pol) {
        h.on_channel = true;
        h.chan = p->channel().name;
        h.pol = *p->channel().pol;
      }
      return h;
    default:
      return h;
  }
}

const char* link_rule_name(SemanticsMode mode) {
  switch (mode) {
    case SemanticsMode::Plain: return "Link";
    case SemanticsMode::PriorityType: return "LinkPT";
    case SemanticsMode::PriorityProcess: return "LinkPP";
  }
  return "Link";
}

SynthResult link_orchestrator(SemanticsMode mode, const TypeRef& s, const TypeRef& s2) {
  // Plain installs the all-safe orchestrator so speculative nondeterminism is
  // preserved; priority-type installs the deterministic one.
  if (mode == SemanticsMode::PriorityType) return synth(s, s2);
  return synth_ud(s, s2);
}

}  // namespace

std::vector<Redex> enumerate_redexes(const ProcRef& canonical, SemanticsMode mode, bool cleanup,
                                     const FunctionTable& env) {
  View v = build_view(canonical);
  std::vector<Redex> out;

  // every item position, for link pairs and conditionals
  std::vector<ProcRef> all_items = v.top;
  for (const auto& s : v.spines)
    for (const auto& l : s.levels)
      for (const auto& it : l.items) all_items.push_back(it);

  std::vector<ProcRef> requests, accepts;
  for (const auto& it : all_items) {
    if (it->kind() == ProcKind::Request) requests.push_back(it);
    if (it->kind() == ProcKind::Accept) accepts.push_back(it);
    if (it->kind() == ProcKind::If) {
      auto val = try_eval(env, it->expr());
      if (val && val->kind() == ValueKind::Bool) {
        Redex r;
        r.rule = "If";
        r.label = val->bool_value() ? "true" : "false";
        r.item_a = it;
        out.push_back(std::move(r));
      }
    }
  }
  for (const auto& rq : requests) {
    for (const auto& ac : accepts) {
      SynthResult f = link_orchestrator(mode, rq->session_type(), ac->session_type());
      if (!f) continue;
      Redex r;
      r.rule = link_rule_name(mode);
      r.item_a = rq;
      r.item_b = ac;
      r.link_orch = *f;
      out.push_back(std::move(r));
    }
  }

  for (const auto& s : v.spines) {
    for (size_t l = 0; l < s.levels.size(); ++l) {
      const Level& lvl = s.levels[l];
      const std::string& k = lvl.chan;
      std::vector<ProcRef> under;
      for (size_t l2 = l; l2 < s.levels.size(); ++l2)
        for (const auto& it : s.levels[l2].items) under.push_back(it);

      OrchKind ok = lvl.orch->kind();

      if (ok == OrchKind::IOPrefix) {
        for (const auto& a : under) {
          HeadInfo ha = head_on(a);
          if (!ha.on_channel || ha.chan != k) continue;
          for (const auto& b : under) {
            HeadInfo hb = head_on(b);
            if (!hb.on_channel || hb.chan != k || hb.pol != dual(ha.pol)) continue;
            if (a->kind() == ProcKind::SendValue && b->kind() == ProcKind::RecvValue) {
              auto val = try_eval(env, a->expr());
              if (!val) continue;
              Redex r;
              r.rule = "OrchComm";
              r.channel = k;
              r.item_a = a;
              r.item_b = b;
              out.push_back(std::move(r));
            } else if (a->kind() == ProcKind::Throw && b->kind() == ProcKind::Catch) {
              Redex r;
              r.rule = "OrchDeleg";
              r.channel = k;
              r.item_a = a;
              r.item_b = b;
              out.push_back(std::move(r));
            }
          }
        }
      }

      if (ok == OrchKind::ExternalChoice || ok == OrchKind::LabelPrefix) {
        auto arms = lvl.orch->choice_arms();
        for (const auto& a : under) {
          if (a->kind() != ProcKind::SelectL) continue;
          HeadInfo ha = head_on(a);
          if (ha.chan != k) continue;
          bool in_orch = false;
          for (const auto& oa : arms)
            if (oa.label == a->label()) in_orch = true;
          if (!in_orch) continue;
          for (const auto& b : under) {
            if (b->kind() != ProcKind::BranchL) continue;
            HeadInfo hb = head_on(b);
            if (hb.chan != k || hb.pol != dual(ha.pol)) continue;
            if (!b->find_arm(a->label())) continue;
            Redex r;
            r.rule = "OrchSel";
            r.channel = k;
            r.label = a->label();
            r.item_a = a;
            r.item_b = b;
            out.push_back(std::move(r));
          }
        }
      }

      if (ok == OrchKind::InternalChoice || ok == OrchKind::LabelPrefix) {
        auto arms = lvl.orch->choice_arms();
        for (const auto& a : under) {
          if (a->kind() != ProcKind::SpecSelectP) continue;
          HeadInfo ha = head_on(a);
          if (ha.chan != k) continue;
          for (const auto& b : under) {
            if (b->kind() != ProcKind::BranchL) continue;
            HeadInfo hb = head_on(b);
            if (hb.chan != k || hb.pol != dual(ha.pol)) continue;
            if (mode == SemanticsMode::PriorityProcess) {
              // highest-priority process arm whose label is available
              for (const auto& pa : a->arms()) {
                bool in_orch = false;
                for (const auto& oa : arms)
                  if (oa.label == pa.label) in_orch = true;
                if (!in_orch || !b->find_arm(pa.label)) continue;
                Redex r;
                r.rule = "OrchSSelPP";
                r.channel = k;
                r.label = pa.label;
                r.item_a = a;
                r.item_b = b;
                out.push_back(std::move(r));
                break;
              }
            } else {
              for (const auto& oa : arms) {
                if (!a->find_arm(oa.label) || !b->find_arm(oa.label)) continue;
                Redex r;
                r.rule = "OrchSSel";
                r.channel = k;
                r.label = oa.label;
                r.item_a = a;
                r.item_b = b;
                out.push_back(std::move(r));
              }
            }
          }
        }
      }

      if (ok == OrchKind::Idle && cleanup) {
        for (const auto& a : under) {
          HeadInfo ha = head_on(a);
          if (!ha.on_channel || ha.chan != k || ha.pol != Polarity::Plus) continue;
          switch (a->kind()) {
            case ProcKind::SendValue:
            case ProcKind::RecvValue:
            case ProcKind::SelectL: {
              Redex r;
              r.rule = "OrchClnUp1";
              r.channel = k;
              r.item_a = a;
              out.push_back(std::move(r));
              break;
            }
            case ProcKind::BranchL:
            case ProcKind::SpecSelectP: {
              for (const auto& arm : a->arms()) {
                Redex r;
                r.rule = a->kind() == ProcKind::BranchL ? "OrchClnUp2" : "OrchClnUp3";
                r.channel = k;
                r.label = arm.label;
                r.item_a = a;
                out.push_back(std::move(r));
              }
              break;
            }
            default:
              break;
          }
        }
      }
    }
  }

  std::sort(out.begin(), out.end(),
            [](const Redex& a, const Redex& b) { return a.key() < b.key(); });
  return out;
}

namespace {

std::atomic<uint64_t> link_counter{0};

Value cleanup_default_value(const ProcRef& state, const ProcRef& recv_item,
                            const FunctionTable& env) {
  auto g = infer_receive_ground(state, recv_item.get(), env);
  if (!g) return Value::str("");
  const std::string& n = g->name();
  if (n == "Nat") return Value::nat(0);
  if (n == "Bool") return Value::boolean(false);
  if (n == "String") return Value::str("");
  return Value::sym("default", {}, *g);
}

void advance_orch(View& v, const std::string& chan, const OrchRef& next) {
  for (auto& s : v.spines)
    for (auto& l : s.levels)
      if (l.chan == chan) {
        l.orch = next;
        return;
      }
  throw StaleRedex("channel " + chan + " vanished");
}

const Level* find_level(const View& v, const std::string& chan) {
  for (const auto& s : v.spines)
    for (const auto& l : s.levels)
      if (l.chan == chan) return &l;
  return nullptr;
}

OrchRef orch_arm_cont(const OrchRef& f, const std::string& label, const char* rule) {
  for (const auto& a : f->choice_arms())
    if (a.label == label) return a.cont;
  throw StaleRedex(std::string(rule) + ": orchestrator lacks arm " + label);
}

// A reduction happens where its participants stand: the contractum goes to
// the deeper of the two sites, nesting one spine under the other when the
// participants came from different clusters.
void place_component(View& v, const ProcRef& comp, const Site& sa, const Site& sb) {
  if (sa.spine < 0 && sb.spine < 0) {
    v.top.push_back(comp);
    return;
  }
  if (sa.spine < 0 || sb.spine < 0 || sa.spine == sb.spine) {
    int spine = sa.spine < 0 ? sb.spine : sa.spine;
    int level = std::max(sa.spine < 0 ? -1 : sa.level, sb.spine < 0 ? -1 : sb.level);
    v.spines[spine].levels[level].items.push_back(comp);
    return;
  }
  // different clusters: nest b's spine under a's at the request's level
  Spine sb_spine = v.spines[sb.spine];
  sb_spine.levels[sb.level].items.push_back(comp);
  View tmp;
  tmp.spines.push_back(sb_spine);
  ProcRef sb_term = rebuild(tmp);
  v.spines[sa.spine].levels[sa.level].items.push_back(sb_term);
  v.spines.erase(v.spines.begin() + sb.spine);
}

// Substitution can make an item mention binders deeper than where it stands
// (delegation hands the catcher a channel from an inner session); sink such
// items to the level that covers their needs.
void rescope(View& v) {
  for (auto& s : v.spines) {
    std::map<std::string, size_t> pos;
    for (size_t i = 0; i < s.levels.size(); ++i) pos[s.levels[i].chan] = i;
    for (size_t l = 0; l < s.levels.size(); ++l) {
      for (size_t i = 0; i < s.levels[l].items.size();) {
        size_t target = l;
        for (const auto& ch : free_channels(s.levels[l].items[i])) {
          auto it = pos.find(ch);
          if (it != pos.end()) target = std::max(target, it->second);
        }
        if (target > l) {
          ProcRef item = s.levels[l].items[i];
          s.levels[l].items.erase(s.levels[l].items.begin() + i);
          s.levels[target].items.push_back(item);
        } else {
          ++i;
        }
      }
    }
  }
}

ProcRef finish(View& v) {
  rescope(v);
  return canonicalize(rebuild(v));
}

}  // namespace

ProcRef apply_redex(const ProcRef& canonical, const Redex& r, const FunctionTable& env) {
  View v = build_view(canonical);

  if (r.rule == "Link" || r.rule == "LinkPT" || r.rule == "LinkPP") {
    auto site_a = locate(v, r.item_a);
    if (!site_a) throw StaleRedex("link: request vanished");
    remove_at(v, *site_a);
    auto site_b = locate(v, r.item_b);
    if (!site_b) throw StaleRedex("link: accept vanished");
    remove_at(v, *site_b);
    std::string fresh = "\x01ln" + std::to_string(link_counter.fetch_add(1));
    ProcRef client = subst_channel(r.item_a->body(), r.item_a->binder(),
                                   chan(fresh, Polarity::Minus));
    ProcRef server = subst_channel(r.item_b->body(), r.item_b->binder(),
                                   chan(fresh, Polarity::Plus));
    ProcRef comp = Proc::restrict(
        fresh, Proc::par(Proc::named_orch(fresh, r.link_orch), Proc::par(client, server)));
    place_component(v, comp, *site_a, *site_b);
    return finish(v);
  }

  if (r.rule == "If") {
    auto val = try_eval(env, r.item_a->expr());
    if (!val || val->kind() != ValueKind::Bool) throw StaleRedex("if: condition not boolean");
    replace_item(v, r.item_a, val->bool_value() ? r.item_a->then_branch() : r.item_a->else_branch(),
                 "if");
    return finish(v);
  }

  const Level* lvl = find_level(v, r.channel);
  if (!lvl) throw StaleRedex("channel " + r.channel + " vanished");
  OrchRef orch = lvl->orch;

  if (r.rule == "OrchComm") {
    auto val = try_eval(env, r.item_a->expr());
    if (!val) throw StaleRedex("send expression no longer evaluates");
    replace_item(v, r.item_a, r.item_a->cont(), "comm");
    replace_item(v, r.item_b, subst_value(r.item_b->cont(), r.item_b->binder(), *val), "comm");
    advance_orch(v, r.channel, orch->cont());
    return finish(v);
  }
  if (r.rule == "OrchDeleg") {
    replace_item(v, r.item_a, r.item_a->cont(), "deleg");
    replace_item(v, r.item_b, subst_channel(r.item_b->cont(), r.item_b->binder(), r.item_a->sent()),
                 "deleg");
    advance_orch(v, r.channel, orch->cont());
    return finish(v);
  }
  if (r.rule == "OrchSel") {
    const ProcArm* arm = r.item_b->find_arm(r.label);
    if (!arm) throw StaleRedex("branch lacks arm " + r.label);
    replace_item(v, r.item_a, r.item_a->cont(), "sel");
    replace_item(v, r.item_b, arm->proc, "sel");
    advance_orch(v, r.channel, orch_arm_cont(orch, r.label, "sel"));
    return finish(v);
  }
  if (r.rule == "OrchSSel" || r.rule == "OrchSSelPP") {
    const ProcArm* pa = r.item_a->find_arm(r.label);
    const ProcArm* ba = r.item_b->find_arm(r.label);
    if (!pa || !ba) throw StaleRedex("speculative arm " + r.label + " missing");
    replace_item(v, r.item_a, pa->proc, "ssel");
    replace_item(v, r.item_b, ba->proc, "ssel");
    advance_orch(v, r.channel, orch_arm_cont(orch, r.label, "ssel"));
    return finish(v);
  }
  if (r.rule == "OrchClnUp1") {
    ProcRef next;
    if (r.item_a->kind() == ProcKind::RecvValue) {
      Value def = cleanup_default_value(canonical, r.item_a, env);
      next = subst_value(r.item_a->cont(), r.item_a->binder(), def);
    } else {
      next = r.item_a->cont();
    }
    replace_item(v, r.item_a, next, "cleanup");
    return finish(v);
  }
  if (r.rule == "OrchClnUp2" || r.rule == "OrchClnUp3") {
    const ProcArm* arm = r.item_a->find_arm(r.label);
    if (!arm) throw StaleRedex("cleanup arm " + r.label + " missing");
    replace_item(v, r.item_a, arm->proc, "cleanup");
    return finish(v);
  }
  throw StaleRedex("unknown rule " + r.rule);
}

Trace run(const ProcRef& p, SemanticsMode mode, bool cleanup, Scheduler& sched,
          size_t step_limit, const FunctionTable& env) {
  Trace tr;
  tr.mode = mode;
  tr.cleanup = cleanup;
  ProcRef state = canonicalize(p);
  for (size_t step = 0;; ++step) {
    if (step >= step_limit) {
      tr.step_limit_hit = true;
      break;
    }
    std::vector<Redex> redexes = enumerate_redexes(state, mode, cleanup, env);
    if (redexes.empty()) break;
    // clean-up is a last resort: proper redexes run first
    bool any_proper = false;
    for (const auto& r : redexes)
      if (r.rule.rfind("OrchClnUp", 0) != 0) any_proper = true;
    if (any_proper) {
      std::vector<Redex> proper;
      for (auto& r : redexes)
        if (r.rule.rfind("OrchClnUp", 0) != 0) proper.push_back(std::move(r));
      redexes = std::move(proper);
    }
    const Redex* pick = sched.pick(redexes, step);
    if (!pick) break;
    ProcRef next = apply_redex(state, *pick, env);
    tr.steps.push_back(TraceStep{pick->rule, pick->channel, pick->label, state, next});
    state = next;
  }
  tr.final_state = state;
  tr.final_errors = classify_errors(state, cleanup, mode, env);
  return tr;
}

std::vector<ErrorClassification> classify_errors(const ProcRef& canonical, bool cleanup,
                                                 SemanticsMode mode, const FunctionTable& env) {
  View v = build_view(canonical);
  std::vector<Redex> redexes = enumerate_redexes(canonical, mode, cleanup, env);

  std::vector<ErrorClassification> out;

  for (const auto& s : v.spines) {
    for (size_t l = 0; l < s.levels.size(); ++l) {
      const Level& lvl = s.levels[l];
      std::vector<ProcRef> under;
      for (size_t l2 = l; l2 < s.levels.size(); ++l2)
        for (const auto& it : s.levels[l2].items) under.push_back(it);
      size_t kprocs = 0;
      for (const auto& it : under) {
        HeadInfo h = head_on(it);
        if (h.on_channel && h.chan == lvl.chan) ++kprocs;
      }
      if (kprocs >= 2) {
        bool reduces = false;
        for (const auto& r : redexes)
          if (r.channel == lvl.chan) reduces = true;
        if (!reduces) out.push_back({ErrorKind::OrchSynchError, lvl.chan});
      }
    }
  }
  for (const auto& s : v.spines) {
    for (size_t l = 0; l < s.levels.size(); ++l) {
      const Level& lvl = s.levels[l];
      if (lvl.orch->kind() != OrchKind::Idle) continue;
      std::vector<ProcRef> under;
      for (size_t l2 = l; l2 < s.levels.size(); ++l2)
        for (const auto& it : s.levels[l2].items) under.push_back(it);
      for (const auto& it : under) {
        HeadInfo h = head_on(it);
        if (h.on_channel && h.chan == lvl.chan && h.pol == Polarity::Minus) {
          out.push_back({ErrorKind::VacuousOrchError, lvl.chan});
          break;
        }
      }
    }
  }
  if (redexes.empty()) {
    for (const auto& s : v.spines) {
      for (size_t l = 0; l < s.levels.size(); ++l) {
        const Level& lvl = s.levels[l];
        if (lvl.orch->kind() != OrchKind::Idle) continue;
        std::vector<ProcRef> under;
        for (size_t l2 = l; l2 < s.levels.size(); ++l2)
          for (const auto& it : s.levels[l2].items) under.push_back(it);
        for (const auto& it : under) {
          HeadInfo h = head_on(it);
          if (h.on_channel && h.chan == lvl.chan && h.pol == Polarity::Plus) {
            out.push_back({ErrorKind::ComplianceDependentDeadlock, lvl.chan});
            break;
          }
        }
      }
    }
  }
  if (out.empty()) out.push_back({ErrorKind::NotAnError, ""});
  return out;
}

}  // namespace ost
