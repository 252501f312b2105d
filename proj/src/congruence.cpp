#include "ost/congruence.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "ost/pretty.hpp"

namespace ost {

namespace {

// ---------------------------------------------------------------------------
// Alpha-invariant structural keys

struct KeyEnv {
  std::map<std::string, int> bound;
  int depth = 0;
};

void key_walk(const ProcRef& p, KeyEnv env, std::ostream& os) {
  auto ref = [&](const ChannelRef& c) {
    auto it = env.bound.find(c.name);
    if (it != env.bound.end())
      os << '$' << it->second;
    else
      os << c.name;
    if (c.pol) os << polarity_char(*c.pol);
  };
  auto bind = [&](const std::string& name) {
    env.bound[name] = env.depth++;
  };
  switch (p->kind()) {
    case ProcKind::Inact:
      os << "0";
      return;
    case ProcKind::Par:
      os << "(";
      key_walk(p->left(), env, os);
      os << "|";
      key_walk(p->right(), env, os);
      os << ")";
      return;
    case ProcKind::Request:
    case ProcKind::Accept:
      os << (p->kind() == ProcKind::Request ? "req[" : "acc[") << p->port() << ";"
         << pretty(p->session_type()) << "].";
      bind(p->binder());
      key_walk(p->body(), env, os);
      return;
    case ProcKind::SendValue:
      os << "snd[";
      ref(p->channel());
      os << ";" << pretty(p->expr()) << "].";
      key_walk(p->cont(), env, os);
      return;
    case ProcKind::RecvValue:
      os << "rcv[";
      ref(p->channel());
      os << ";" << p->binder() << "].";
      key_walk(p->cont(), env, os);
      return;
    case ProcKind::Throw:
      os << "thr[";
      ref(p->channel());
      os << ";";
      ref(p->sent());
      os << "].";
      key_walk(p->cont(), env, os);
      return;
    case ProcKind::Catch:
      os << "cat[";
      ref(p->channel());
      os << "].";
      bind(p->binder());
      key_walk(p->cont(), env, os);
      return;
    case ProcKind::SelectL:
      os << "sel[";
      ref(p->channel());
      os << ";" << p->label() << "].";
      key_walk(p->cont(), env, os);
      return;
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP:
      os << (p->kind() == ProcKind::BranchL ? "bra[" : (p->prioritized() ? "spp[" : "spc["));
      ref(p->channel());
      os << "]{";
      for (const auto& a : p->arms()) {
        os << a.label << ":";
        key_walk(a.proc, env, os);
        os << ",";
      }
      os << "}";
      return;
    case ProcKind::If:
      os << "if[" << pretty(p->expr()) << "](";
      key_walk(p->then_branch(), env, os);
      os << ")(";
      key_walk(p->else_branch(), env, os);
      os << ")";
      return;
    case ProcKind::NamedOrch: {
      os << "orc[";
      ChannelRef c{p->binder(), std::nullopt};
      ref(c);
      os << ";" << pretty(p->orch()) << "]";
      return;
    }
    case ProcKind::Restrict:
      os << "nu.";
      bind(p->binder());
      key_walk(p->body(), env, os);
      return;
  }
}

}  // namespace

std::string structural_key(const ProcRef& p) {
  std::ostringstream os;
  key_walk(p, KeyEnv{}, os);
  return os.str();
}

namespace {

// ---------------------------------------------------------------------------
// Alpha supplies

struct NameSupply {
  std::string prefix;
  const std::set<std::string>* avoid = nullptr;
  uint64_t n = 0;

  std::string fresh() {
    std::string name;
    do {
      name = prefix + std::to_string(n++);
    } while (avoid && avoid->count(name));
    return name;
  }
};

// Renames every binder (restriction, request, accept, catch) to the next
// supply name, in structural traversal order.
ProcRef alpha_rename(const ProcRef& p, NameSupply& supply) {
  switch (p->kind()) {
    case ProcKind::Inact:
    case ProcKind::NamedOrch:
      return p;
    case ProcKind::Par:
      return Proc::par(alpha_rename(p->left(), supply), alpha_rename(p->right(), supply));
    case ProcKind::Request:
    case ProcKind::Accept: {
      std::string nb = supply.fresh();
      ProcRef body = rename_free_channels(p->body(), {{p->binder(), nb}});
      body = alpha_rename(body, supply);
      return p->kind() == ProcKind::Request
                 ? Proc::request(p->port(), p->session_type(), nb, body)
                 : Proc::accept(p->port(), p->session_type(), nb, body);
    }
    case ProcKind::SendValue:
      return Proc::send_value(p->channel(), p->expr(), alpha_rename(p->cont(), supply));
    case ProcKind::RecvValue:
      return Proc::recv_value(p->channel(), p->binder(), alpha_rename(p->cont(), supply));
    case ProcKind::Throw:
      return Proc::throw_chan(p->channel(), p->sent(), alpha_rename(p->cont(), supply));
    case ProcKind::Catch: {
      std::string nb = supply.fresh();
      ProcRef body = rename_free_channels(p->cont(), {{p->binder(), nb}});
      body = alpha_rename(body, supply);
      return Proc::catch_chan(p->channel(), nb, body);
    }
    case ProcKind::SelectL:
      return Proc::select_l(p->channel(), p->label(), alpha_rename(p->cont(), supply));
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      std::vector<ProcArm> arms;
      arms.reserve(p->arms().size());
      for (const auto& a : p->arms()) arms.push_back({a.label, alpha_rename(a.proc, supply)});
      if (p->kind() == ProcKind::BranchL) return Proc::branch_l(p->channel(), std::move(arms));
      return Proc::spec_select(p->channel(), std::move(arms), p->prioritized());
    }
    case ProcKind::If:
      return Proc::if_then_else(p->expr(), alpha_rename(p->then_branch(), supply),
                                alpha_rename(p->else_branch(), supply));
    case ProcKind::Restrict: {
      std::string nb = supply.fresh();
      ProcRef body = rename_free_channels(p->body(), {{p->binder(), nb}});
      body = alpha_rename(body, supply);
      return Proc::restrict(nb, body);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Cluster normalization

struct Session {
  std::string chan;
  OrchRef orch;
};

struct Cluster {
  std::vector<Session> sessions;
  std::vector<ProcRef> items;  // plain (non-restriction) items, normalized
};

ProcRef normalize(const ProcRef& p);

void collect_cluster(const ProcRef& restrict_term, Cluster& out) {
  const std::string& k = restrict_term->binder();
  OrchRef orch;
  std::vector<ProcRef> rest;
  for (const auto& item : flatten_par(restrict_term->body())) {
    if (item->kind() == ProcKind::NamedOrch && item->binder() == k) {
      if (orch) throw MalformedRuntime("duplicate orchestrator for channel " + k);
      orch = item->orch();
    } else if (item->kind() == ProcKind::Restrict) {
      collect_cluster(item, out);
    } else {
      rest.push_back(item);
    }
  }
  if (!orch) throw MalformedRuntime("restriction on " + k + " lacks its orchestrator");
  out.sessions.push_back({k, orch});
  for (auto& r : rest) out.items.push_back(normalize(r));
}

struct ClusterItem {
  ProcRef proc;
  std::set<std::string> needs;  // cluster channels it mentions
};

ProcRef build_candidate(const Cluster& c, const std::vector<size_t>& perm,
                        const std::vector<ClusterItem>& items) {
  size_t n = perm.size();
  std::map<std::string, size_t> position;
  for (size_t i = 0; i < n; ++i) position[c.sessions[perm[i]].chan] = i;
  // outermost admissible level for every item
  std::vector<std::vector<ProcRef>> at_level(n);
  for (const auto& it : items) {
    size_t lvl = 0;
    for (const auto& ch : it.needs) lvl = std::max(lvl, position.at(ch));
    at_level[lvl].push_back(it.proc);
  }
  ProcRef inner;  // the spine below the current level
  for (size_t i = n; i-- > 0;) {
    const Session& s = c.sessions[perm[i]];
    std::vector<ProcRef> parts;
    parts.push_back(Proc::named_orch(s.chan, s.orch));
    std::vector<ProcRef> lvl = at_level[i];
    std::sort(lvl.begin(), lvl.end(), [](const ProcRef& a, const ProcRef& b) {
      return structural_key(a) < structural_key(b);
    });
    parts.insert(parts.end(), lvl.begin(), lvl.end());
    if (inner) parts.push_back(inner);
    inner = Proc::restrict(s.chan, rebuild_par(parts));
  }
  return inner;
}

ProcRef normalize_cluster(const ProcRef& restrict_term) {
  Cluster c;
  collect_cluster(restrict_term, c);
  size_t n = c.sessions.size();

  std::set<std::string> session_names;
  for (const auto& s : c.sessions) session_names.insert(s.chan);
  std::vector<ClusterItem> items;
  items.reserve(c.items.size());
  for (const auto& it : c.items) {
    ClusterItem ci;
    ci.proc = it;
    for (const auto& ch : free_channels(it))
      if (session_names.count(ch)) ci.needs.insert(ch);
    items.push_back(std::move(ci));
  }

  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;

  // Small clusters: pick the least structural key over all session orders.
  // Larger ones fall back to a fixed heuristic order.
  if (n > 6) {
    std::stable_sort(perm.begin(), perm.end(), [&](size_t a, size_t b) {
      return pretty(c.sessions[a].orch) < pretty(c.sessions[b].orch);
    });
    return build_candidate(c, perm, items);
  }

  ProcRef best;
  std::string best_key;
  std::sort(perm.begin(), perm.end());
  do {
    ProcRef cand = build_candidate(c, perm, items);
    std::string key = structural_key(cand);
    if (!best || key < best_key) {
      best = cand;
      best_key = std::move(key);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Recursive normalization: flatten and sort parallels, normalize children,
// re-nest restriction clusters.
ProcRef normalize(const ProcRef& p) {
  switch (p->kind()) {
    case ProcKind::Inact:
    case ProcKind::NamedOrch:
      return p;
    case ProcKind::Par: {
      std::vector<ProcRef> items;
      for (const auto& it : flatten_par(p)) items.push_back(normalize(it));
      std::stable_sort(items.begin(), items.end(), [](const ProcRef& a, const ProcRef& b) {
        bool ao = a->kind() == ProcKind::NamedOrch;
        bool bo = b->kind() == ProcKind::NamedOrch;
        if (ao != bo) return ao;
        return structural_key(a) < structural_key(b);
      });
      return rebuild_par(items);
    }
    case ProcKind::Request:
      return Proc::request(p->port(), p->session_type(), p->binder(), normalize(p->body()));
    case ProcKind::Accept:
      return Proc::accept(p->port(), p->session_type(), p->binder(), normalize(p->body()));
    case ProcKind::SendValue:
      return Proc::send_value(p->channel(), p->expr(), normalize(p->cont()));
    case ProcKind::RecvValue:
      return Proc::recv_value(p->channel(), p->binder(), normalize(p->cont()));
    case ProcKind::Throw:
      return Proc::throw_chan(p->channel(), p->sent(), normalize(p->cont()));
    case ProcKind::Catch:
      return Proc::catch_chan(p->channel(), p->binder(), normalize(p->cont()));
    case ProcKind::SelectL:
      return Proc::select_l(p->channel(), p->label(), normalize(p->cont()));
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      std::vector<ProcArm> arms;
      arms.reserve(p->arms().size());
      for (const auto& a : p->arms()) arms.push_back({a.label, normalize(a.proc)});
      if (p->kind() == ProcKind::BranchL) return Proc::branch_l(p->channel(), std::move(arms));
      return Proc::spec_select(p->channel(), std::move(arms), p->prioritized());
    }
    case ProcKind::If:
      return Proc::if_then_else(p->expr(), normalize(p->then_branch()),
                                normalize(p->else_branch()));
    case ProcKind::Restrict:
      return normalize_cluster(p);
  }
  return p;
}

}  // namespace

ProcRef canonicalize(const ProcRef& p) {
  std::set<std::string> free = free_channels(p);

  // Phase 1: uniquify bound names so cluster bookkeeping is unambiguous.
  NameSupply temp;
  temp.prefix = "\x01u";
  ProcRef q = alpha_rename(p, temp);

  // Phase 2: structural normalization (order decided by alpha-invariant keys).
  q = normalize(q);

  // Phase 3: final deterministic supply, avoiding free names.
  NameSupply supply;
  supply.prefix = "k";
  supply.avoid = &free;
  return alpha_rename(q, supply);
}

bool congruent(const ProcRef& a, const ProcRef& b) {
  return equal(canonicalize(a), canonicalize(b));
}

// ---------------------------------------------------------------------------
// Rewrite oracle

namespace {

using Rebuild = std::function<ProcRef(const ProcRef&)>;

// Enumerates subterm positions as (subterm, plug) pairs.
void positions(const ProcRef& p, const Rebuild& plug,
               std::vector<std::pair<ProcRef, Rebuild>>& out) {
  out.emplace_back(p, plug);
  switch (p->kind()) {
    case ProcKind::Inact:
    case ProcKind::NamedOrch:
      return;
    case ProcKind::Par:
      positions(p->left(), [p, plug](const ProcRef& x) { return plug(Proc::par(x, p->right())); },
                out);
      positions(p->right(), [p, plug](const ProcRef& x) { return plug(Proc::par(p->left(), x)); },
                out);
      return;
    case ProcKind::Request:
    case ProcKind::Accept:
      positions(p->body(),
                [p, plug](const ProcRef& x) {
                  return plug(p->kind() == ProcKind::Request
                                  ? Proc::request(p->port(), p->session_type(), p->binder(), x)
                                  : Proc::accept(p->port(), p->session_type(), p->binder(), x));
                },
                out);
      return;
    case ProcKind::SendValue:
      positions(p->cont(), [p, plug](const ProcRef& x) {
        return plug(Proc::send_value(p->channel(), p->expr(), x));
      }, out);
      return;
    case ProcKind::RecvValue:
      positions(p->cont(), [p, plug](const ProcRef& x) {
        return plug(Proc::recv_value(p->channel(), p->binder(), x));
      }, out);
      return;
    case ProcKind::Throw:
      positions(p->cont(), [p, plug](const ProcRef& x) {
        return plug(Proc::throw_chan(p->channel(), p->sent(), x));
      }, out);
      return;
    case ProcKind::Catch:
      positions(p->cont(), [p, plug](const ProcRef& x) {
        return plug(Proc::catch_chan(p->channel(), p->binder(), x));
      }, out);
      return;
    case ProcKind::SelectL:
      positions(p->cont(), [p, plug](const ProcRef& x) {
        return plug(Proc::select_l(p->channel(), p->label(), x));
      }, out);
      return;
    case ProcKind::BranchL:
    case ProcKind::SpecSelectP: {
      for (size_t i = 0; i < p->arms().size(); ++i) {
        positions(p->arms()[i].proc,
                  [p, plug, i](const ProcRef& x) {
                    std::vector<ProcArm> arms = p->arms();
                    arms[i].proc = x;
                    return plug(p->kind() == ProcKind::BranchL
                                    ? Proc::branch_l(p->channel(), std::move(arms))
                                    : Proc::spec_select(p->channel(), std::move(arms),
                                                        p->prioritized()));
                  },
                  out);
      }
      return;
    }
    case ProcKind::If:
      positions(p->then_branch(), [p, plug](const ProcRef& x) {
        return plug(Proc::if_then_else(p->expr(), x, p->else_branch()));
      }, out);
      positions(p->else_branch(), [p, plug](const ProcRef& x) {
        return plug(Proc::if_then_else(p->expr(), p->then_branch(), x));
      }, out);
      return;
    case ProcKind::Restrict:
      positions(p->body(), [p, plug](const ProcRef& x) {
        return plug(Proc::restrict(p->binder(), x));
      }, out);
      return;
  }
}

uint64_t rewrite_fresh_counter = 0;

}  // namespace

std::vector<ProcRef> congruence_rewrites(const ProcRef& p) {
  std::vector<ProcRef> out;
  std::vector<std::pair<ProcRef, Rebuild>> pos;
  positions(p, [](const ProcRef& x) { return x; }, pos);

  std::set<std::string> free = free_channels(p);
  auto fresh = [&] {
    std::string n;
    do {
      n = "r" + std::to_string(rewrite_fresh_counter++);
    } while (free.count(n));
    return n;
  };

  for (const auto& [sub, plug] : pos) {
    // alphabetical change of a bound channel name
    if (sub->kind() == ProcKind::Restrict) {
      std::string nb = fresh();
      out.push_back(
          plug(Proc::restrict(nb, rename_free_channels(sub->body(), {{sub->binder(), nb}}))));
    }
    if (sub->kind() == ProcKind::Request || sub->kind() == ProcKind::Accept) {
      std::string nb = fresh();
      ProcRef body = rename_free_channels(sub->body(), {{sub->binder(), nb}});
      out.push_back(plug(sub->kind() == ProcKind::Request
                             ? Proc::request(sub->port(), sub->session_type(), nb, body)
                             : Proc::accept(sub->port(), sub->session_type(), nb, body)));
    }
    if (sub->kind() == ProcKind::Catch) {
      std::string nb = fresh();
      out.push_back(plug(Proc::catch_chan(
          sub->channel(), nb, rename_free_channels(sub->cont(), {{sub->binder(), nb}}))));
    }

    // commutativity / associativity away from named orchestrators
    if (sub->kind() == ProcKind::Par) {
      const ProcRef& x = sub->left();
      const ProcRef& y = sub->right();
      if (x->kind() != ProcKind::NamedOrch && y->kind() != ProcKind::NamedOrch)
        out.push_back(plug(Proc::par(y, x)));
      if (x->kind() == ProcKind::Par && x->left()->kind() != ProcKind::NamedOrch &&
          x->right()->kind() != ProcKind::NamedOrch && y->kind() != ProcKind::NamedOrch)
        out.push_back(plug(Proc::par(x->left(), Proc::par(x->right(), y))));
      if (y->kind() == ProcKind::Par && y->left()->kind() != ProcKind::NamedOrch &&
          y->right()->kind() != ProcKind::NamedOrch && x->kind() != ProcKind::NamedOrch)
        out.push_back(plug(Proc::par(Proc::par(x, y->left()), y->right())));
    }

    // orchestrated scope commutation
    //   (vk)(orch_k f | Q | (vk')(orch_k' g | Q' | R))
    //     == (vk')(orch_k' g | (vk)(orch_k f | Q | Q') | R)   k not free in R
    if (sub->kind() == ProcKind::Restrict) {
      const std::string& k = sub->binder();
      std::vector<ProcRef> items = flatten_par(sub->body());
      for (size_t i = 0; i < items.size(); ++i) {
        if (items[i]->kind() != ProcKind::Restrict) continue;
        const ProcRef& inner = items[i];
        const std::string& k2 = inner->binder();
        if (k2 == k) continue;  // shadowed; alpha first
        std::vector<ProcRef> inner_items = flatten_par(inner->body());
        ProcRef inner_orch;
        std::vector<ProcRef> movable, pinned;
        for (const auto& it : inner_items) {
          if (it->kind() == ProcKind::NamedOrch && it->binder() == k2 && !inner_orch)
            inner_orch = it;
          else if (!free_channels(it).count(k))
            movable.push_back(it);
          else
            pinned.push_back(it);
        }
        if (!inner_orch) continue;
        for (int variant = 0; variant < 2; ++variant) {
          std::vector<ProcRef> moving = variant == 0 ? movable : std::vector<ProcRef>{};
          std::vector<ProcRef> staying = variant == 0 ? std::vector<ProcRef>{} : movable;
          std::vector<ProcRef> new_k_items;
          for (size_t j = 0; j < items.size(); ++j)
            if (j != i) new_k_items.push_back(items[j]);
          new_k_items.insert(new_k_items.end(), pinned.begin(), pinned.end());
          new_k_items.insert(new_k_items.end(), staying.begin(), staying.end());
          ProcRef new_k = Proc::restrict(k, rebuild_par(new_k_items));
          std::vector<ProcRef> new_outer{inner_orch, new_k};
          new_outer.insert(new_outer.end(), moving.begin(), moving.end());
          out.push_back(plug(Proc::restrict(k2, rebuild_par(new_outer))));
          if (movable.empty()) break;  // both variants coincide
        }
      }
    }
  }
  return out;
}

}  // namespace ost
