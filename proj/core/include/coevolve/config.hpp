#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coevolve/experiments.hpp"

namespace coevolve {

/// A run configuration: a preset chosen by name plus overrides. The file
/// format is `key = value` lines grouped under `[section]` headers; `#` or
/// `;` starts a comment line. See config_keys() for the accepted keys.
struct RunConfig {
  std::string experiment = "custom";
  AppendixVariant variant = AppendixVariant::Both;
  bool paper_scale = false;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::string out = "out";
  ExperimentPreset preset = preset_custom();
};

/// Fully qualified keys ("section.key", or bare for the top level).
std::vector<std::string> config_keys();

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<bool> paper_scale;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

/// Throws ParseError (with line number), UnknownKey or RangeError.
RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Canonical rendering with every key spelled out; parsing it back yields
/// the same configuration.
std::string render_config(const RunConfig& cfg);

}  // namespace coevolve
