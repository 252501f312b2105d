#ifndef OST_PRETTY_HPP
#define OST_PRETTY_HPP

#include <string>

#include "ost/process.hpp"
#include "ost/typing.hpp"

namespace ost {

// Printers whose output reparses to a structurally equal value.
std::string pretty(const TypeRef& t);
std::string pretty(const OrchRef& f);
std::string pretty(const ProcRef& p);
std::string pretty(const ExprRef& e);
std::string pretty(const Value& v);
std::string pretty(const Typing& d);

uint64_t state_hash(const ProcRef& canonical);

}  // namespace ost

#endif
