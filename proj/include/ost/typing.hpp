#ifndef OST_TYPING_HPP
#define OST_TYPING_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ost/syntax.hpp"

namespace ost {

// A polarized channel name; the key sort of a typing. k+ and k- are distinct.
struct PolName {
  std::string name;
  Polarity pol;

  friend bool operator==(const PolName& a, const PolName& b) {
    return a.name == b.name && a.pol == b.pol;
  }
  friend bool operator<(const PolName& a, const PolName& b) {
    if (a.name != b.name) return a.name < b.name;
    return a.pol < b.pol;
  }
};

std::string to_string(const PolName& k);

// Finite map from polarized channel names to session types.
class Typing {
public:
  Typing() = default;

  bool empty() const { return map_.empty(); }
  size_t size() const { return map_.size(); }
  const TypeRef* lookup(const PolName& k) const;
  void insert(PolName k, TypeRef t);  // throws on duplicate key
  void erase(const PolName& k) { map_.erase(k); }
  const std::map<PolName, TypeRef>& entries() const { return map_; }

  friend bool operator==(const Typing& a, const Typing& b);

private:
  std::map<PolName, TypeRef> map_;
};

// Union of two typings; defined iff domains are disjoint. On clash the
// offending keys are reported through `clashes` when provided.
std::optional<Typing> typing_compose(const Typing& a, const Typing& b,
                                     std::vector<PolName>* clashes = nullptr);

// True iff every entry maps to end.
bool is_completed(const Typing& d);

// Declarative weakening: `claimed` extends `inferred` by end-entries only.
bool admits(const Typing& inferred, const Typing& claimed);

// Expression contexts.
using Context = std::map<std::string, GroundType>;

}  // namespace ost

#endif
