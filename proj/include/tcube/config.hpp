#pragma once

// Tunable engine parameters as one flat `section.key = value` document.

#include <string>
#include <string_view>
#include <vector>

#include "tcube/recognizer.hpp"
#include "tcube/spatial.hpp"

namespace tcube {

struct SessionParams {
  double bind_dwell = 0.5;          // seconds on a slot before binding
  double bind_rest_band = 0.003;    // bottom within this of the table
  double map_width = 0.6;
  double map_depth = 0.4;
  double region_gap = 0.05;         // map region to interaction region
  double interaction_width = 0.4;
  double anchor_offset = 0.05;      // anchored charts behind the interaction region
};

struct EngineConfig {
  RecognizerParams recognizer;
  SpatialParams spatial;
  SessionParams session;
};

/// Every key, in print order.
std::vector<std::string> config_keys();

/// Sets one key from text. Throws Error{syntax} for an unknown key or a
/// value that is not a finite number (or integer, for integer keys).
void set_config_value(EngineConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const EngineConfig& cfg, std::string_view key);

/// `#! tcube-config 1` followed by `key = value` lines.
std::string config_text(const EngineConfig& cfg);
/// Applies overrides from a config document onto `base`.
EngineConfig parse_config(std::string_view text, EngineConfig base = {});
EngineConfig load_config_file(const std::string& path, EngineConfig base = {});

}  // namespace tcube
