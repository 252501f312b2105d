// ost: command-line front end over the shared-library C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ost.h"

using nlohmann::json;

namespace {

struct ModuleHandle {
  ost_module* m = nullptr;
  ~ModuleHandle() { ost_module_free(m); }
};

struct StringHandle {
  char* s = nullptr;
  ~StringHandle() { ost_string_free(s); }
};

[[noreturn]] void die(int code, const std::string& msg) {
  std::cerr << "ost: " << msg << "\n";
  std::exit(code);
}

ost_module* load_module_or_die(const std::string& path) {
  ost_module* m = nullptr;
  ost_status st = ost_module_load(path.c_str(), &m);
  if (st != OST_OK) die(2, ost_last_error());
  return m;
}

ost_type* type_or_die(const ost_module* m, const std::string& name) {
  ost_type* t = nullptr;
  if (ost_module_type(m, name.c_str(), &t) != OST_OK) die(2, ost_last_error());
  return t;
}

ost_mode parse_mode(const std::string& s) {
  if (s == "plain") return OST_MODE_PLAIN;
  if (s == "priority-type" || s == "pt") return OST_MODE_PRIORITY_TYPE;
  if (s == "priority-process" || s == "pp") return OST_MODE_PRIORITY_PROCESS;
  die(2, "unknown mode '" + s + "' (plain | priority-type | priority-process)");
}

ost_env* load_env(const std::string& path) {
  ost_env* env = nullptr;
  if (path.empty()) {
    if (ost_env_default(&env) != OST_OK) die(2, ost_last_error());
  } else if (ost_env_load(path.c_str(), &env) != OST_OK) {
    die(2, ost_last_error());
  }
  return env;
}

uint64_t state_line_hash(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orchestrated session types toolkit"};
  app.require_subcommand(1);

  // ---- comply ----
  std::string c_client, c_server, c_orch_file;
  std::string c_client_name, c_server_name, c_orch_name;
  auto* comply = app.add_subcommand("comply", "decide orchestrated compliance");
  comply->add_option("client", c_client, "client type file")->required();
  comply->add_option("server", c_server, "server type file")->required();
  comply->add_option("orch", c_orch_file, "orchestrator file (checks this orchestrator)");
  comply->add_option("--client-name", c_client_name, "binding name (default: last type)");
  comply->add_option("--server-name", c_server_name, "binding name (default: last type)");
  comply->add_option("--orch-name", c_orch_name, "binding name (default: last orchestrator)");

  // ---- synth ----
  std::string s_client, s_server, s_mode = "priority";
  std::string s_client_name, s_server_name;
  auto* synth_cmd = app.add_subcommand("synth", "synthesize a mediating orchestrator");
  synth_cmd->add_option("client", s_client, "client type file")->required();
  synth_cmd->add_option("server", s_server, "server type file")->required();
  synth_cmd->add_option("--mode", s_mode, "priority | all (default priority)");
  synth_cmd->add_option("--client-name", s_client_name, "binding name");
  synth_cmd->add_option("--server-name", s_server_name, "binding name");

  // ---- typecheck ----
  std::string t_file, t_name, t_mode = "plain", t_env;
  auto* tc = app.add_subcommand("typecheck", "typecheck a process");
  tc->add_option("file", t_file, "process file")->required();
  tc->add_option("--name", t_name, "binding name (default: last process)");
  tc->add_option("--mode", t_mode, "plain | priority-type | priority-process");
  tc->add_option("--env", t_env, "function table JSON");

  // ---- run ----
  std::string r_file, r_name, r_mode = "plain", r_env, r_trace, r_replay;
  bool r_cleanup = true, r_json = false;
  uint64_t r_seed = 0;
  bool r_has_seed = false;
  size_t r_steps = 10000;
  auto* run_cmd = app.add_subcommand("run", "execute a process system");
  run_cmd->add_option("file", r_file, "process file")->required();
  run_cmd->add_option("--name", r_name, "binding name (default: last process)");
  run_cmd->add_option("--mode", r_mode, "plain | priority-type | priority-process");
  run_cmd->add_flag("--cleanup,!--no-cleanup", r_cleanup, "enable clean-up reductions (default on)");
  run_cmd->add_option("--seed", r_seed, "randomized scheduling seed")
      ->each([&](const std::string&) { r_has_seed = true; });
  run_cmd->add_option("--step-limit", r_steps, "maximum reduction steps (default 10000)");
  run_cmd->add_option("--trace", r_trace, "write the JSON trace document here");
  run_cmd->add_option("--replay", r_replay, "comma-separated rule script (Rule or Rule:label)");
  run_cmd->add_flag("--json", r_json, "print the JSON trace document to stdout");
  run_cmd->add_option("--env", r_env, "function table JSON");

  // ---- fuzz ----
  std::string f_suite;
  int f_n = 100, f_depth = 4;
  uint64_t f_seed = 1;
  auto* fuzz = app.add_subcommand("fuzz", "run a property suite");
  fuzz->add_option("suite", f_suite,
                   "synth | subject-reduction | error-freeness | congruence | roundtrip")
      ->required();
  fuzz->add_option("--n", f_n, "number of cases (default 100)");
  fuzz->add_option("--seed", f_seed, "generator seed (default 1)");
  fuzz->add_option("--max-depth", f_depth, "maximum generated depth (default 4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (comply->parsed()) {
    ModuleHandle cm{load_module_or_die(c_client)};
    ModuleHandle sm{load_module_or_die(c_server)};
    ost_type* ct = type_or_die(cm.m, c_client_name);
    ost_type* st = type_or_die(sm.m, c_server_name);
    int compliant = 0;
    if (!c_orch_file.empty()) {
      ModuleHandle om{load_module_or_die(c_orch_file)};
      ost_orch* f = nullptr;
      if (ost_module_orch(om.m, c_orch_name.c_str(), &f) != OST_OK) die(2, ost_last_error());
      if (ost_check_compliance(f, ct, st, &compliant) != OST_OK) die(2, ost_last_error());
      StringHandle fp{ost_orch_pretty(f)};
      std::cout << (compliant ? "compliant" : "not compliant") << ": " << fp.s << "\n";
      ost_orch_free(f);
    } else {
      if (ost_oracle_compliant(ct, st, &compliant) != OST_OK) die(2, ost_last_error());
      std::cout << (compliant ? "compliant" : "not compliant") << "\n";
      ost_orch* f1 = nullptr;
      ost_orch* f2 = nullptr;
      if (ost_synth(ct, st, OST_SYNTH_PRIORITY, &f1) != OST_OK) die(2, ost_last_error());
      if (ost_synth(ct, st, OST_SYNTH_ALL_SAFE, &f2) != OST_OK) die(2, ost_last_error());
      if (f1) {
        StringHandle s1{ost_orch_pretty(f1)};
        std::cout << "synth:    " << s1.s << "\n";
        ost_orch_free(f1);
      } else {
        std::cout << "synth:    fail\n";
      }
      if (f2) {
        StringHandle s2{ost_orch_pretty(f2)};
        std::cout << "synth-ud: " << s2.s << "\n";
        ost_orch_free(f2);
      } else {
        std::cout << "synth-ud: fail\n";
      }
    }
    ost_type_free(ct);
    ost_type_free(st);
    return compliant ? 0 : 1;
  }

  if (synth_cmd->parsed()) {
    ModuleHandle cm{load_module_or_die(s_client)};
    ModuleHandle sm{load_module_or_die(s_server)};
    ost_type* ct = type_or_die(cm.m, s_client_name);
    ost_type* st = type_or_die(sm.m, s_server_name);
    ost_synth_mode mode;
    if (s_mode == "priority") mode = OST_SYNTH_PRIORITY;
    else if (s_mode == "all" || s_mode == "all-safe" || s_mode == "ud") mode = OST_SYNTH_ALL_SAFE;
    else die(2, "unknown synth mode '" + s_mode + "' (priority | all)");
    ost_orch* f = nullptr;
    if (ost_synth(ct, st, mode, &f) != OST_OK) die(2, ost_last_error());
    ost_type_free(ct);
    ost_type_free(st);
    if (!f) {
      std::cout << "fail\n";
      return 1;
    }
    StringHandle s{ost_orch_pretty(f)};
    std::cout << s.s << "\n";
    ost_orch_free(f);
    return 0;
  }

  if (tc->parsed()) {
    ModuleHandle m{load_module_or_die(t_file)};
    ost_process* p = nullptr;
    if (ost_module_process(m.m, t_name.c_str(), &p) != OST_OK) die(2, ost_last_error());
    ost_env* env = load_env(t_env);
    StringHandle report;
    int ok = 0;
    if (ost_typecheck(p, parse_mode(t_mode), env, &report.s, &ok) != OST_OK)
      die(2, ost_last_error());
    ost_process_free(p);
    ost_env_free(env);
    json doc = json::parse(report.s);
    if (ok) {
      std::cout << "typing: " << doc["typing"].get<std::string>() << "\n";
      return 0;
    }
    std::cout << "type error: " << doc["error"]["kind"].get<std::string>() << " at "
              << doc["error"]["path"].get<std::string>() << ": "
              << doc["error"]["detail"].get<std::string>() << "\n";
    return 1;
  }

  if (run_cmd->parsed()) {
    ModuleHandle m{load_module_or_die(r_file)};
    ost_process* p = nullptr;
    if (ost_module_process(m.m, r_name.c_str(), &p) != OST_OK) die(2, ost_last_error());
    ost_env* env = load_env(r_env);
    ost_run_opts opts{};
    opts.mode = parse_mode(r_mode);
    opts.cleanup = r_cleanup ? 1 : 0;
    opts.has_seed = r_has_seed ? 1 : 0;
    opts.seed = r_seed;
    opts.step_limit = r_steps;
    opts.replay = r_replay.empty() ? nullptr : r_replay.c_str();
    StringHandle trace;
    int exit_class = 0;
    if (ost_run(p, &opts, env, &trace.s, &exit_class) != OST_OK) die(2, ost_last_error());
    ost_process_free(p);
    ost_env_free(env);
    json doc = json::parse(trace.s);
    if (r_json) {
      std::cout << trace.s << "\n";
    } else {
      for (const auto& s : doc["steps"]) {
        std::string state = s["state"].get<std::string>();
        std::printf("[%3d] %-11s %-4s %-6s #%016llx %s\n", s["step"].get<int>(),
                    s["rule"].get<std::string>().c_str(),
                    s["channel"].get<std::string>().c_str(),
                    s["label"].get<std::string>().c_str(),
                    static_cast<unsigned long long>(state_line_hash(state)), state.c_str());
      }
      std::cout << "final: " << doc["final"]["state"].get<std::string>() << "\n";
      if (doc["final"]["errors"].empty()) {
        std::cout << "classification: not-an-error\n";
      } else {
        for (const auto& e : doc["final"]["errors"])
          std::cout << "classification: " << e["kind"].get<std::string>() << " on "
                    << e["channel"].get<std::string>() << "\n";
      }
    }
    if (!r_trace.empty()) {
      std::ofstream out(r_trace);
      if (!out) die(2, "cannot write '" + r_trace + "'");
      out << trace.s << "\n";
    }
    return exit_class;
  }

  if (fuzz->parsed()) {
    StringHandle report;
    int failures = 0;
    if (ost_fuzz(f_suite.c_str(), f_n, f_seed, f_depth, &report.s, &failures) != OST_OK)
      die(2, ost_last_error());
    json doc = json::parse(report.s);
    std::cout << doc["suite"].get<std::string>() << ": " << doc["cases"].get<int>()
              << " cases, " << failures << " failure(s)\n";
    if (failures > 0) {
      std::cout << "first counterexample:\n" << doc["counterexample"].get<std::string>() << "\n";
      return 1;
    }
    return 0;
  }

  return 2;
}
