#include "coevolve/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "coevolve/error.hpp"
#include "coevolve/sampling.hpp"

namespace coevolve {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

using Entries = std::map<std::string, Entry>;

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "experiment",
      "variant",
      "paper_scale",
      "seed",
      "runs",
      "workers",
      "out",
      "training.N",
      "training.T",
      "training.K",
      "training.d",
      "training.text_updates",
      "training.image_updates",
      "training.cov_scale",
      "training.probs",
      "training.deterministic_counts",
      "text_injection.enabled",
      "text_injection.alpha",
      "text_injection.epsilon",
      "text_injection.new_cov_scale",
      "image_injection.enabled",
      "image_injection.N0",
      "sweep.param",
      "sweep.values",
      "fit.t_lo",
      "fit.t_hi",
      "snapshots.steps",
      "snapshots.samples",
      "overlays.alpha_samples",
  };
  return keys;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string where(const std::string& key, const Entry& e) {
  return "line " + std::to_string(e.line) + ": " + key;
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Typed access to the parsed entries with range checks.
class Reader {
 public:
  explicit Reader(const Entries& entries) : entries_(entries) {}

  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool has(const std::string& key) const { return find(key) != nullptr; }

  std::optional<std::uint64_t> u64(const std::string& key, std::uint64_t lo,
                                   std::uint64_t hi) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return parse_u64(key, *e, e->value, lo, hi);
  }

  std::optional<double> real(const std::string& key, double lo, double hi, bool lo_open = false,
                             bool hi_open = false) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return parse_real(key, *e, e->value, lo, hi, lo_open, hi_open);
  }

  std::optional<bool> boolean(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    const std::string& v = e->value;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw Error(ErrorCode::ParseError, where(key, *e) + ": expected true or false, got '" + v + "'");
  }

  std::optional<std::string> text(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return e->value;
  }

  std::optional<std::vector<double>> reals(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    for (const std::string& item : split(e->value)) {
      out.push_back(parse_real(key, *e, item, -HUGE_VAL, HUGE_VAL, false, false));
    }
    return out;
  }

  std::optional<std::vector<std::size_t>> counts(const std::string& key, std::uint64_t hi) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    std::vector<std::size_t> out;
    for (const std::string& item : split(e->value)) {
      out.push_back(static_cast<std::size_t>(parse_u64(key, *e, item, 0, hi)));
    }
    return out;
  }

  [[noreturn]] void range_error(const std::string& key, const std::string& msg) const {
    const Entry* e = find(key);
    throw Error(ErrorCode::RangeError, (e ? where(key, *e) : key) + ": " + msg);
  }

 private:
  static std::vector<std::string> split(const std::string& v) {
    std::vector<std::string> items;
    if (trim(v).empty()) return items;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) items.emplace_back(trim(item));
    return items;
  }

  static std::uint64_t parse_u64(const std::string& key, const Entry& e, std::string_view v,
                                 std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t out = 0;
    const bool negative = !v.empty() && v.front() == '-';
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (negative) {
      throw Error(ErrorCode::RangeError, where(key, e) + ": must be non-negative");
    }
    if (ec == std::errc::result_out_of_range) {
      throw Error(ErrorCode::RangeError, where(key, e) + ": value too large");
    }
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw Error(ErrorCode::ParseError,
                  where(key, e) + ": expected an integer, got '" + std::string(v) + "'");
    }
    if (out < lo || out > hi) {
      throw Error(ErrorCode::RangeError, where(key, e) + ": " + std::to_string(out) +
                                             " is outside [" + std::to_string(lo) + ", " +
                                             std::to_string(hi) + "]");
    }
    return out;
  }

  static double parse_real(const std::string& key, const Entry& e, std::string_view v, double lo,
                           double hi, bool lo_open, bool hi_open) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
      throw Error(ErrorCode::ParseError,
                  where(key, e) + ": expected a finite number, got '" + std::string(v) + "'");
    }
    const bool below = lo_open ? out <= lo : out < lo;
    const bool above = hi_open ? out >= hi : out > hi;
    if (below || above) {
      throw Error(ErrorCode::RangeError, where(key, e) + ": " + std::string(v) +
                                             " is outside " + (lo_open ? "(" : "[") + g17(lo) +
                                             ", " + g17(hi) + (hi_open ? ")" : "]"));
    }
    return out;
  }

  const Entries& entries_;
};

Entries tokenize(std::string_view text) {
  static const std::vector<std::string> sections = {"training", "text_injection",
                                                    "image_injection", "sweep", "fit",
                                                    "snapshots", "overlays"};
  const auto& keys = known_keys();
  Entries entries;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line.front() == '#' || line.front() == ';') {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
        throw Error(ErrorCode::UnknownKey,
                    "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      const std::string name(trim(line.substr(0, eq)));
      if (name.empty()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
      }
      const std::string key = section.empty() ? name : section + "." + name;
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw Error(ErrorCode::UnknownKey,
                    "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
      if (entries.count(key)) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
      }
      entries[key] = {std::string(trim(line.substr(eq + 1))), line_no};
    }
    if (end == text.size()) break;
  }
  return entries;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + g17(values[i]);
  return out;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + std::to_string(values[i]);
  return out;
}

const char* flag(bool b) { return b ? "true" : "false"; }

}  // namespace

std::vector<std::string> config_keys() { return known_keys(); }

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  const Entries entries = tokenize(text);
  const Reader in(entries);
  RunConfig cfg;

  if (auto v = in.text("experiment")) cfg.experiment = *v;
  if (auto v = in.text("variant")) {
    auto parsed = parse_appendix_variant(*v);
    if (!parsed) in.range_error("variant", "unknown appendixC variant '" + *v + "'");
    cfg.variant = *parsed;
  }
  if (auto v = in.boolean("paper_scale")) cfg.paper_scale = *v;
  if (overrides.paper_scale) cfg.paper_scale = *overrides.paper_scale;
  auto preset = preset_by_name(cfg.experiment, cfg.paper_scale, cfg.variant);
  if (!preset) in.range_error("experiment", "unknown experiment '" + cfg.experiment + "'");
  ExperimentPreset& p = *preset;

  if (auto v = in.u64("seed", 0, UINT64_MAX)) cfg.seed = *v;
  if (auto v = in.u64("runs", 1, 1000000)) p.runs = *v;
  if (auto v = in.u64("workers", 1, 1024)) cfg.workers = *v;
  if (auto v = in.text("out")) {
    if (v->empty()) in.range_error("out", "output directory must be non-empty");
    cfg.out = *v;
  }
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.runs) {
    if (*overrides.runs < 1 || *overrides.runs > 1000000) {
      throw Error(ErrorCode::RangeError, "--runs must be in [1, 1000000]");
    }
    p.runs = *overrides.runs;
  }
  if (overrides.workers) {
    if (*overrides.workers < 1 || *overrides.workers > 1024) {
      throw Error(ErrorCode::RangeError, "--workers must be in [1, 1024]");
    }
    cfg.workers = *overrides.workers;
  }
  if (overrides.out) {
    if (overrides.out->empty()) throw Error(ErrorCode::RangeError, "--out must be non-empty");
    cfg.out = *overrides.out;
  }

  // Training.
  if (auto v = in.u64("training.N", 1, 1000000000)) p.base.N = *v;
  if (auto v = in.u64("training.T", 0, 10000000)) {
    p.base.T = *v;
    if (!in.has("snapshots.steps")) {
      std::erase_if(p.snapshot_steps, [&](std::size_t t) { return t > p.base.T; });
    }
  }
  if (auto v = in.u64("training.d", 1, kMaxDim)) p.base.d = *v;
  const auto K = in.u64("training.K", 1, 100000);
  const auto probs = in.reals("training.probs");
  if (probs && !probs->empty()) {
    try {
      validate_distribution(*probs);
    } catch (const Error& e) {
      in.range_error("training.probs", e.what());
    }
    if (K && *K != probs->size()) {
      in.range_error("training.probs", "has " + std::to_string(probs->size()) +
                                           " entries but training.K = " + std::to_string(*K));
    }
    p.base.init.probs = *probs;
    p.base.init.K = probs->size();
  } else {
    if (probs) p.base.init.probs.clear();
    if (K) {
      p.base.init.K = *K;
      if (p.base.init.probs.size() != *K) p.base.init.probs.clear();
    }
  }
  if (auto v = in.real("training.cov_scale", 0.0, 1e12, true)) p.base.init.cov_scale = *v;
  if (auto v = in.u64("training.text_updates", 0, 1000000)) p.text_updates_per_step = *v;
  if (auto v = in.u64("training.image_updates", 0, 1000000)) p.image_updates_per_step = *v;
  if (auto v = in.boolean("training.deterministic_counts")) p.base.deterministic_counts = *v;

  // Text injection: setting any parameter enables it unless enabled = false.
  const auto text_enabled = in.boolean("text_injection.enabled");
  const bool text_touched = in.has("text_injection.alpha") || in.has("text_injection.epsilon") ||
                            in.has("text_injection.new_cov_scale");
  if (text_enabled == false) {
    p.text_injection.reset();
  } else if (text_enabled == true || text_touched) {
    if (!p.text_injection) p.text_injection = TextInjectionConfig{};
    if (auto v = in.real("text_injection.alpha", 0.0, 1.0)) p.text_injection->alpha = *v;
    if (auto v = in.real("text_injection.epsilon", 0.0, 1.0, true, true)) {
      p.text_injection->epsilon = *v;
    }
    if (auto v = in.real("text_injection.new_cov_scale", 0.0, 1e12, true)) {
      p.text_injection->new_component.cov_scale = *v;
    }
  }

  const auto image_enabled = in.boolean("image_injection.enabled");
  if (image_enabled == false) {
    p.image_injection.reset();
  } else if (image_enabled == true || in.has("image_injection.N0")) {
    if (!p.image_injection) p.image_injection = ImageInjectionConfig{};
    if (auto v = in.u64("image_injection.N0", 0, 10000000)) p.image_injection->N0 = *v;
  }

  if (auto v = in.text("sweep.param")) {
    auto parsed = parse_sweep_param(*v);
    if (!parsed) in.range_error("sweep.param", "unknown sweep parameter '" + *v + "'");
    if (*parsed != p.sweep.param) {
      p.sweep.param = *parsed;
      if (*parsed == SweepParam::None) {
        p.sweep.values = {0.0};
      } else if (!in.has("sweep.values")) {
        in.range_error("sweep.param", "sweep.values is required when the parameter changes");
      }
    }
  }
  if (auto v = in.reals("sweep.values")) {
    if (v->empty()) in.range_error("sweep.values", "must be non-empty");
    p.sweep.values = *v;
  }

  if (auto v = in.u64("fit.t_lo", 0, 10000000)) p.fit.t_lo = *v;
  if (auto v = in.u64("fit.t_hi", 1, 10000000)) p.fit.t_hi = *v;
  if (p.fit.t_lo >= p.fit.t_hi) in.range_error("fit.t_lo", "fit.t_lo must be below fit.t_hi");

  if (auto v = in.counts("snapshots.steps", 10000000)) {
    for (std::size_t t : *v) {
      if (t > p.base.T) in.range_error("snapshots.steps", "step " + std::to_string(t) + " exceeds T");
    }
    p.snapshot_steps = *v;
  }
  if (auto v = in.u64("snapshots.samples", 0, 1000000)) p.snapshot_samples = *v;
  if (auto v = in.u64("overlays.alpha_samples", 1, 100000000)) p.alpha_samples = *v;

  p.validate();
  cfg.preset = std::move(p);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << file.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string render_config(const RunConfig& cfg) {
  const ExperimentPreset& p = cfg.preset;
  std::ostringstream out;
  out << "experiment = " << cfg.experiment << "\n";
  out << "variant = " << appendix_variant_name(cfg.variant) << "\n";
  out << "paper_scale = " << flag(cfg.paper_scale) << "\n";
  out << "seed = " << cfg.seed.value_or(0) << "\n";
  out << "runs = " << p.runs << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "out = " << cfg.out << "\n";

  out << "\n[training]\n";
  out << "N = " << p.base.N << "\n";
  out << "T = " << p.base.T << "\n";
  out << "K = " << p.base.init.K << "\n";
  out << "d = " << p.base.d << "\n";
  out << "text_updates = " << p.text_updates_per_step << "\n";
  out << "image_updates = " << p.image_updates_per_step << "\n";
  out << "cov_scale = " << g17(p.base.init.cov_scale) << "\n";
  out << "probs = " << join(p.base.init.probs) << "\n";
  out << "deterministic_counts = " << flag(p.base.deterministic_counts) << "\n";

  out << "\n[text_injection]\n";
  out << "enabled = " << flag(p.text_injection.has_value()) << "\n";
  if (p.text_injection) {
    out << "alpha = " << g17(p.text_injection->alpha) << "\n";
    out << "epsilon = " << g17(p.text_injection->epsilon) << "\n";
    out << "new_cov_scale = " << g17(p.text_injection->new_component.cov_scale) << "\n";
  }

  out << "\n[image_injection]\n";
  out << "enabled = " << flag(p.image_injection.has_value()) << "\n";
  if (p.image_injection) out << "N0 = " << p.image_injection->N0 << "\n";

  out << "\n[sweep]\n";
  out << "param = " << sweep_param_name(p.sweep.param) << "\n";
  out << "values = " << join(p.sweep.values) << "\n";

  out << "\n[fit]\n";
  out << "t_lo = " << p.fit.t_lo << "\n";
  out << "t_hi = " << p.fit.t_hi << "\n";

  out << "\n[snapshots]\n";
  out << "steps = " << join(p.snapshot_steps) << "\n";
  out << "samples = " << p.snapshot_samples << "\n";

  out << "\n[overlays]\n";
  out << "alpha_samples = " << p.alpha_samples << "\n";
  return out.str();
}

}  // namespace coevolve
