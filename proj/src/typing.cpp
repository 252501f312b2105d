#include "ost/typing.hpp"

namespace ost {

std::string to_string(const PolName& k) { return k.name + polarity_char(k.pol); }

const TypeRef* Typing::lookup(const PolName& k) const {
  auto it = map_.find(k);
  return it == map_.end() ? nullptr : &it->second;
}

void Typing::insert(PolName k, TypeRef t) {
  if (!t) throw ConstructionError("typing: null type");
  auto [it, inserted] = map_.emplace(std::move(k), std::move(t));
  if (!inserted) throw ConstructionError("typing: duplicate key " + to_string(it->first));
}

bool operator==(const Typing& a, const Typing& b) {
  if (a.map_.size() != b.map_.size()) return false;
  auto ia = a.map_.begin();
  auto ib = b.map_.begin();
  for (; ia != a.map_.end(); ++ia, ++ib) {
    if (!(ia->first == ib->first)) return false;
    if (!equal(ia->second, ib->second)) return false;
  }
  return true;
}

std::optional<Typing> typing_compose(const Typing& a, const Typing& b,
                                     std::vector<PolName>* clashes) {
  bool ok = true;
  for (const auto& [k, t] : b.entries()) {
    if (a.lookup(k)) {
      ok = false;
      if (clashes) clashes->push_back(k);
    }
  }
  if (!ok) return std::nullopt;
  Typing out = a;
  for (const auto& [k, t] : b.entries()) out.insert(k, t);
  return out;
}

bool is_completed(const Typing& d) {
  for (const auto& [k, t] : d.entries())
    if (t->kind() != TypeKind::End) return false;
  return true;
}

bool admits(const Typing& inferred, const Typing& claimed) {
  for (const auto& [k, t] : inferred.entries()) {
    const TypeRef* c = claimed.lookup(k);
    if (!c || !equal(*c, t)) return false;
  }
  for (const auto& [k, t] : claimed.entries()) {
    if (!inferred.lookup(k) && t->kind() != TypeKind::End) return false;
  }
  return true;
}

}  // namespace ost
