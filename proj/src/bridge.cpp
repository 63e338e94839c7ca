#include "tcube/bridge.hpp"

#include <filesystem>

#include "tcube/error.hpp"
#include "tcube/text.hpp"

namespace tcube {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

std::string rect_text(const Rect& r) {
  return format_number(r.x0) + "," + format_number(r.y0) + "," + format_number(r.x1) + "," + format_number(r.y1);
}

std::string vec_text(const Vec3& v) {
  return format_number(v.x) + "," + format_number(v.y) + "," + format_number(v.z);
}

struct ProtocolError {
  Errc code;
  std::string message;
};

}  // namespace

std::string error_message(Errc code, std::string_view message) {
  return "error code=" + std::string(to_string(code)) + " message=" + escape_value(message) + "\n";
}

std::string welcome_message(const Session& s, long session_id) {
  const auto& l = s.layout();
  const auto& d = s.data();
  std::string m = "welcome version=" + std::to_string(kBridgeVersion) + " session=" + std::to_string(session_id) +
                  " dataset=" + escape_value(d.name) + " rulebook=" + escape_value(s.rulebook().name) + "\n";
  m += "layout map=" + rect_text(l.map_region) + " interaction=" + rect_text(l.interaction_region) +
       " anchor=" + vec_text(l.anchored_anchor) + " edge=" + format_number(l.cube_edge) + "\n";
  for (const auto& slot : l.slots) {
    const auto r = d.region_index(slot.region_id);
    m += "slot region=" + escape_value(slot.region_id) + " label=" + escape_value(d.regions[r].label) +
         " p=" + vec_text(slot.center) + "\n";
  }
  std::string bins;
  for (const auto& b : d.bins) bins += (bins.empty() ? "" : ",") + to_string(b);
  m += "dataset name=" + escape_value(d.name) + " unit=" + escape_value(d.unit) + " time_unit=" +
       escape_value(d.time_unit) + " regions=" + std::to_string(d.regions.size()) + " bins=" + bins + "\n";
  return m;
}

WireMessage parse_wire(std::string_view message) {
  WireMessage w;
  std::size_t at = 0;
  bool first = true;
  while (at <= message.size()) {
    auto nl = message.find('\n', at);
    if (nl == std::string_view::npos) nl = message.size();
    const auto line = message.substr(at, nl - at);
    at = nl + 1;
    if (first) {
      w.first_line = std::string(strip(line));
      w.head = w.first_line.substr(0, w.first_line.find(' '));
      first = false;
    } else if (!line.empty()) {
      w.body.emplace_back(line);
    }
    if (nl == message.size()) break;
  }
  return w;
}

BridgeConnection::BridgeConnection(BridgeOptions options) : opt_(std::move(options)) {}

BridgeConnection::~BridgeConnection() { finish(); }

void BridgeConnection::finish() {
  if (recorder_) stop_recording();
}

std::vector<std::string> BridgeConnection::handle(std::string_view message) {
  if (closed_) return {error_message(Errc::protocol, "connection is closed")};
  const std::string_view text = strip(message);
  const auto sp = text.find(' ');
  const std::string_view kind = text.substr(0, sp);
  const std::string_view rest = sp == std::string_view::npos ? std::string_view{} : strip(text.substr(sp + 1));
  try {
    if (kind == "hello") return hello(rest);
    if (!session_) throw ProtocolError{Errc::protocol, "expected hello before '" + std::string(kind) + "'"};
    if (kind == "sample") return sample(rest);
    if (kind == "snapshot_request") return {"snapshot\n" + session_->snapshot().text()};
    if (kind == "record") return record(rest);
    if (kind == "reset") return reset(rest);
    throw ProtocolError{Errc::protocol, "unknown message '" + std::string(kind) + "'"};
  } catch (const ProtocolError& e) {
    closed_ = true;
    finish();
    return {error_message(e.code, e.message)};
  }
}

std::vector<std::string> BridgeConnection::hello(std::string_view args) {
  if (session_) throw ProtocolError{Errc::protocol, "duplicate hello"};
  std::string dataset, rulebook;
  try {
    const std::string line = "hello " + std::string(args);
    FieldReader r(line, 0);
    const auto version = r.integer("version");
    if (version != kBridgeVersion)
      throw ProtocolError{Errc::protocol, "unsupported protocol version " + std::to_string(version)};
    dataset = unescape_value(r.take("dataset"));
    rulebook = unescape_value(r.take("rulebook"));
    r.finish();
  } catch (const Error& e) {
    throw ProtocolError{Errc::protocol, std::string("bad hello: ") + e.what()};
  }
  header_ = TraceHeader{};
  header_.dataset = dataset;
  header_.rulebook = rulebook;
  header_.flush = false;  // a live session never flushes; replay must match it
  const EngineConfig defaults;
  for (const auto& key : config_keys()) {
    const auto v = get_config_value(opt_.config, key);
    if (v != get_config_value(defaults, key)) header_.params.emplace_back(key, v);
  }
  try {
    session_.emplace(resolve_dataset(dataset, opt_.catalog), resolve_rulebook(rulebook, opt_.catalog), opt_.config);
  } catch (const Error& e) {
    throw ProtocolError{e.code(), e.what()};
  }
  return {welcome_message(*session_, opt_.session_id)};
}

std::string BridgeConnection::report(const StepReport& r) {
  return "report seq=" + std::to_string(++seq_) + "\n" + r.text();
}

std::vector<std::string> BridgeConnection::sample(std::string_view line) {
  InputSample s;
  StepReport r;
  try {
    s = parse_sample(line);
    r = session_->step(s);
  } catch (const Error& e) {
    return {error_message(e.code(), e.what())};
  }
  std::vector<std::string> out{report(r)};
  if (recorder_) {
    write(to_text(s));
    if (!recorder_) out.push_back(error_message(Errc::io, "recording failed; recording stopped"));
  }
  return out;
}

std::vector<std::string> BridgeConnection::reset(std::string_view) {
  std::vector<std::string> out{report(session_->reset_all())};
  if (recorder_) {
    write(entry_text(SessionReset{session_->now()}));
    if (!recorder_) out.push_back(error_message(Errc::io, "recording failed; recording stopped"));
  }
  return out;
}

void BridgeConnection::write(const std::string& line) {
  *recorder_ << line << '\n';
  recorder_->flush();
  if (!*recorder_) {
    recorder_.reset();
    return;
  }
  ++recorded_;
}

std::string BridgeConnection::stop_recording() {
  recorder_.reset();
  const std::string& path = recordings_.back();
  return "recording state=off file=" + escape_value(path) + " samples=" + std::to_string(recorded_) + "\n";
}

std::vector<std::string> BridgeConnection::record(std::string_view arg) {
  if (arg == "off") {
    if (!recorder_) return {error_message(Errc::invalid_argument, "not recording")};
    return {stop_recording()};
  }
  if (arg != "on") throw ProtocolError{Errc::protocol, "expected 'record on' or 'record off'"};
  if (recorder_) return {error_message(Errc::invalid_argument, "already recording")};
  namespace fs = std::filesystem;
  const fs::path path = fs::path(opt_.record_dir) / ("session-" + std::to_string(opt_.session_id) + "-" +
                                                     std::to_string(recordings_.size() + 1) + ".trace");
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
  *f << header_text(header_);
  f->flush();
  if (!*f) return {error_message(Errc::io, "cannot write recording '" + path.string() + "'")};
  recorder_ = std::move(f);
  recorded_ = 0;
  recordings_.push_back(path.string());
  return {"recording state=on file=" + escape_value(path.string()) + " samples=0\n"};
}

}  // namespace tcube
