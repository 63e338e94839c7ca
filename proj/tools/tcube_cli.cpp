// tcube: replay, generate and verify interaction traces.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tcube/config.hpp"
#include "tcube/error.hpp"
#include "tcube/scenarios.hpp"
#include "tcube/trace.hpp"

using namespace tcube;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kMalformed = 2;
constexpr int kUnresolved = 3;

struct Inputs {
  std::string dataset;
  std::string rulebook;
  std::string params;
};

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::resolution:
    case Errc::layout:
      return kUnresolved;
    default:
      return kMalformed;
  }
}

ReplayResult run_replay(const std::string& trace_path, const Inputs& in) {
  TraceFile trace = load_trace_file(trace_path);
  Catalog cat;
  cat.base_dir = std::filesystem::path(trace_path).parent_path().string();
  if (cat.base_dir.empty()) cat.base_dir = ".";
  Catalog flags;
  SpaceTimeCube data = in.dataset.empty() ? resolve_dataset(trace.header.dataset, cat) : resolve_dataset(in.dataset, flags);
  RuleBook book = in.rulebook.empty() ? resolve_rulebook(trace.header.rulebook, cat) : resolve_rulebook(in.rulebook, flags);
  EngineConfig cfg = resolve_config(trace.header);
  if (!in.params.empty()) {
    try {
      cfg = load_config_file(in.params, cfg);
    } catch (const Error& e) {
      throw Error(Errc::resolution, std::string("params: ") + e.what());
    }
  }
  Session session(std::move(data), std::move(book), cfg);
  return replay(session, trace);
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

int report(const Error& e, const std::string& what) {
  std::cerr << "tcube " << what << ": " << to_string(e.code()) << ": " << e.what() << "\n";
  return exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay, generate and verify tangible cube interaction traces"};
  app.require_subcommand(1);

  Inputs in;
  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--dataset", in.dataset, "Dataset name or .tcd path (overrides the trace header)");
    sub->add_option("--rulebook", in.rulebook, "Rulebook name or .tcr path (overrides the trace header)");
    sub->add_option("--params", in.params, "Config file with parameter overrides");
  };

  std::string trace_path, snapshot_path;
  bool quiet = false;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a trace and print the event log");
  replay_cmd->add_option("trace", trace_path, "Trace file")->required();
  replay_cmd->add_option("--snapshot", snapshot_path, "Write the final snapshot here ('-' for stdout)");
  replay_cmd->add_flag("-q,--quiet", quiet, "Do not print the event log");
  add_inputs(replay_cmd);

  std::string scenario, out_path;
  std::uint64_t seed = 1;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a scenario trace");
  gen_cmd->add_option("scenario", scenario, "Scenario name")->required();
  gen_cmd->add_option("--seed", seed, "Seed");
  gen_cmd->add_option("-o,--out", out_path, "Output file (default stdout)");
  bool list = false;
  auto* list_cmd = app.add_subcommand("scenarios", "List scenario names");
  list_cmd->callback([&] { list = true; });

  std::string golden_path;
  auto* verify_cmd = app.add_subcommand("verify", "Replay a trace and compare with a golden snapshot");
  verify_cmd->add_option("trace", trace_path, "Trace file")->required();
  verify_cmd->add_option("golden", golden_path, "Golden snapshot")->required();
  add_inputs(verify_cmd);

  app.add_subcommand("print-defaults", "Print the default engine parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kMalformed;
  }

  if (list) {
    for (const auto& n : scenario_names()) std::cout << n << "\n";
    return kOk;
  }

  if (app.got_subcommand("print-defaults")) {
    std::cout << config_text(EngineConfig{});
    return kOk;
  }

  if (*gen_cmd) {
    TraceFile f;
    try {
      f = generate_scenario(scenario, seed);
    } catch (const Error& e) {
      std::cerr << "tcube generate: " << e.what() << " (known:";
      for (const auto& n : scenario_names()) std::cerr << " " << n;
      std::cerr << ")\n";
      return kMalformed;
    }
    const std::string text = trace_text(f);
    if (out_path.empty()) {
      std::cout << text;
    } else if (!write_file(out_path, text)) {
      std::cerr << "tcube generate: cannot write " << out_path << "\n";
      return kUnresolved;
    }
    return kOk;
  }

  if (*replay_cmd) {
    ReplayResult r;
    try {
      r = run_replay(trace_path, in);
    } catch (const Error& e) {
      return report(e, "replay");
    }
    if (!quiet) std::cout << r.log;
    if (snapshot_path == "-") {
      std::cout << r.snapshot.text();
    } else if (!snapshot_path.empty() && !write_file(snapshot_path, r.snapshot.text())) {
      std::cerr << "tcube replay: cannot write " << snapshot_path << "\n";
      return kUnresolved;
    }
    return kOk;
  }

  if (*verify_cmd) {
    std::ifstream golden(golden_path, std::ios::binary);
    if (!golden) {
      std::cerr << "tcube verify: cannot open golden snapshot '" << golden_path << "'\n";
      return kUnresolved;
    }
    std::stringstream ss;
    ss << golden.rdbuf();
    ReplayResult r;
    try {
      r = run_replay(trace_path, in);
    } catch (const Error& e) {
      return report(e, "verify");
    }
    const std::string actual = r.snapshot.text();
    if (actual == ss.str()) {
      std::cout << "ok " << trace_path << "\n";
      return kOk;
    }
    const auto diff = diff_snapshots(ss.str(), actual);
    for (const auto& d : diff) std::cout << d << "\n";
    if (diff.empty()) std::cout << "snapshots differ in layout only (whitespace or line order)\n";
    std::cout << diff.size() << " difference" << (diff.size() == 1 ? "" : "s") << "\n";
    return kMismatch;
  }
  return kMalformed;
}
