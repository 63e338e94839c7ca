#include "tcube/trace.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tcube/error.hpp"
#include "tcube/text.hpp"

namespace tcube {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string read_file(const std::string& path, Errc code, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, "cannot open " + what + " '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string header_text(const TraceHeader& h) {
  std::string s = "#! tcube-trace 1\n#! dataset " + h.dataset + "\n#! rulebook " + h.rulebook + "\n";
  for (const auto& [k, v] : h.params) s += "#! param " + k + " = " + v + "\n";
  if (!h.flush) s += "#! flush no\n";
  return s;
}

std::string entry_text(const TraceEntry& e) {
  if (auto* r = std::get_if<SessionReset>(&e)) return "#! reset t=" + format_number(r->t);
  return to_text(std::get<InputSample>(e));
}

std::string trace_text(const TraceFile& f) {
  std::string s = header_text(f.header);
  for (const auto& e : f.body) s += entry_text(e) + "\n";
  return s;
}

std::optional<TraceEntry> TraceReader::line(std::string_view raw) {
  ++line_no_;
  const std::string_view text = strip(raw);
  auto fail = [&](const std::string& msg) -> Error { return Error(Errc::syntax, msg, line_no_, 1); };
  if (!seen_magic_) {
    if (text.starts_with("#! tcube-trace ")) {
      if (strip(text.substr(15)) != "1") throw fail("unsupported trace version '" + std::string(text.substr(15)) + "'");
      seen_magic_ = true;
      return std::nullopt;
    }
    throw fail("missing '#! tcube-trace 1' header");
  }
  if (text.empty()) return std::nullopt;
  if (text.starts_with("#!")) {
    const std::string_view d = strip(text.substr(2));
    if (d.starts_with("reset ")) {
      auto t = strip(d.substr(6));
      if (!t.starts_with("t=")) throw fail("expected 'reset t=<seconds>'");
      auto v = parse_number(t.substr(2));
      if (!v || !std::isfinite(*v)) throw fail("bad reset time");
      in_body_ = true;
      return SessionReset{*v};
    }
    if (in_body_) throw fail("header line after the first sample");
    if (d.starts_with("dataset ")) {
      header_.dataset = std::string(strip(d.substr(8)));
    } else if (d.starts_with("rulebook ")) {
      header_.rulebook = std::string(strip(d.substr(9)));
    } else if (d.starts_with("param ")) {
      const auto body = d.substr(6);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw fail("expected 'param key = value'");
      header_.params.emplace_back(std::string(strip(body.substr(0, eq))), std::string(strip(body.substr(eq + 1))));
    } else if (d == "flush no") {
      header_.flush = false;
    } else if (d == "flush yes") {
      header_.flush = true;
    } else {
      throw fail("unknown header line '" + std::string(text) + "'");
    }
    return std::nullopt;
  }
  if (text.starts_with("#")) return std::nullopt;
  in_body_ = true;
  return parse_sample(text, line_no_);
}

std::vector<TraceEntry> TraceReader::feed(std::string_view chunk) {
  std::vector<TraceEntry> out;
  pending_.append(chunk);
  std::size_t start = 0;
  for (;;) {
    const auto nl = pending_.find('\n', start);
    if (nl == std::string::npos) break;
    if (auto e = line(std::string_view(pending_).substr(start, nl - start))) {
      out.push_back(std::move(*e));
      entry_lines_.push_back(line_no_);
    }
    start = nl + 1;
  }
  pending_.erase(0, start);
  return out;
}

std::vector<TraceEntry> TraceReader::finish() {
  std::vector<TraceEntry> out;
  if (!pending_.empty()) {
    std::string rest = std::move(pending_);
    pending_.clear();
    if (auto e = line(rest)) {
      out.push_back(std::move(*e));
      entry_lines_.push_back(line_no_);
    }
  }
  if (!seen_magic_) throw Error(Errc::syntax, "missing '#! tcube-trace 1' header", 1, 1);
  in_body_ = true;
  return out;
}

TraceFile parse_trace(std::string_view text) {
  TraceReader r;
  TraceFile f;
  f.body = r.feed(text);
  for (auto& e : r.finish()) f.body.push_back(std::move(e));
  f.header = r.header();
  f.lines = r.entry_lines();
  return f;
}

TraceFile load_trace_file(const std::string& path) { return parse_trace(read_file(path, Errc::io, "trace")); }

namespace {

bool is_path(const std::string& ref, std::string_view ext) {
  return ref.find('/') != std::string::npos || (ref.size() > ext.size() && ref.ends_with(ext));
}

std::string locate(const std::string& ref, const std::string& dir, const Catalog& cat, std::string_view ext) {
  namespace fs = std::filesystem;
  if (is_path(ref, ext)) {
    fs::path p(ref);
    return (p.is_absolute() ? p : fs::path(cat.base_dir) / p).string();
  }
  return (fs::path(dir) / (ref + std::string(ext))).string();
}

}  // namespace

SpaceTimeCube resolve_dataset(const std::string& ref, const Catalog& cat) {
  const std::string path = locate(ref, cat.datasets_dir, cat, ".tcd");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::resolution, "cannot resolve dataset '" + ref + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return load_dataset(ss.str());
  } catch (const Error& e) {
    throw Error(Errc::resolution, "dataset '" + ref + "': " + e.what());
  }
}

RuleBook resolve_rulebook(const std::string& ref, const Catalog& cat) {
  if (!is_path(ref, ".tcr"))
    if (const RuleBook* b = builtin_rulebook(ref)) return *b;
  const std::string path = locate(ref, cat.rulebooks_dir, cat, ".tcr");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::resolution, "cannot resolve rulebook '" + ref + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_rulebook(ss.str());
  } catch (const Error& e) {
    throw Error(Errc::resolution, "rulebook '" + ref + "': " + e.what());
  }
}

EngineConfig resolve_config(const TraceHeader& h, EngineConfig base) {
  for (const auto& [k, v] : h.params) set_config_value(base, k, v);
  return base;
}

Session open_session(const TraceHeader& h, const Catalog& cat, const EngineConfig& base) {
  return Session(resolve_dataset(h.dataset, cat), resolve_rulebook(h.rulebook, cat), resolve_config(h, base));
}

namespace {

void run(Session& s, const TraceEntry& e, int line, std::string& log) {
  if (std::holds_alternative<SessionReset>(e)) {
    log += s.reset_all().text();
    return;
  }
  try {
    log += s.step(std::get<InputSample>(e)).text();
  } catch (const Error& err) {
    if (line <= 0) throw;
    throw Error(err.code(), err.what(), line, err.column());
  }
}

}  // namespace

ReplayResult replay(Session& session, const TraceFile& trace) {
  ReplayResult r;
  for (std::size_t i = 0; i < trace.body.size(); ++i)
    run(session, trace.body[i], i < trace.lines.size() ? trace.lines[i] : 0, r.log);
  if (trace.header.flush) r.log += session.finish(session.now()).text();
  r.snapshot = session.snapshot();
  return r;
}

ReplayResult replay(const TraceFile& trace, const Catalog& cat, const EngineConfig& base) {
  Session s = open_session(trace.header, cat, base);
  return replay(s, trace);
}

ReplayResult replay_chunked(std::string_view text, const std::vector<std::size_t>& chunk_sizes,
                            const Catalog& cat, const EngineConfig& base) {
  TraceReader reader;
  std::optional<Session> session;
  std::vector<TraceEntry> queued;
  std::size_t done = 0;
  ReplayResult r;
  auto drain = [&](std::vector<TraceEntry> entries) {
    for (auto& e : entries) queued.push_back(std::move(e));
    if (!session && reader.header_done()) session.emplace(open_session(reader.header(), cat, base));
    if (!session) return;
    for (const auto& e : queued) run(*session, e, reader.entry_lines()[done++], r.log);
    queued.clear();
  };
  std::size_t at = 0, k = 0;
  while (at < text.size()) {
    std::size_t n = chunk_sizes.empty() ? text.size() : std::max<std::size_t>(1, chunk_sizes[k++ % chunk_sizes.size()]);
    n = std::min(n, text.size() - at);
    drain(reader.feed(text.substr(at, n)));
    at += n;
  }
  drain(reader.finish());
  if (reader.header().flush) r.log += session->finish(session->now()).text();
  r.snapshot = session->snapshot();
  return r;
}

}  // namespace tcube
