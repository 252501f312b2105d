#ifndef OST_TESTS_HELPERS_HPP
#define OST_TESTS_HELPERS_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "ost/parser.hpp"
#include "ost/value.hpp"

namespace ost::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string sample_path(const std::string& name) {
  return std::string(OST_SOURCE_DIR) + "/samples/" + name;
}

inline const Module& movie_module() {
  static const Module m = parse_module(read_file(sample_path("movie.ost")), "movie.ost");
  return m;
}

inline const Module& deadlock_module() {
  static const Module m = parse_module(read_file(sample_path("deadlock.ost")), "deadlock.ost");
  return m;
}

// Default functions plus the availability fact the worked trace assumes.
inline FunctionTable movie_env() {
  FunctionTable t = FunctionTable::defaults();
  t.add_rule("available", {Value::str("zootropolis")}, Value::boolean(true));
  return t;
}

}  // namespace ost::testing

#endif
