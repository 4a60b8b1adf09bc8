#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coevolve/experiments.hpp"

namespace coevolve {

inline constexpr const char* kSeriesCsvHeader =
    "t,metric,text_id,sweep_param,sweep_value,mean,stderr,runs";
inline constexpr const char* kOverlayCsvHeader =
    "t,overlay,metric,text_id,sweep_param,sweep_value,value";

/// Rows sorted by (metric, sweep_value, text_id, t); steps with no
/// contributing runs are omitted. Floats use 17 significant digits.
std::string render_series_csv(std::span<const AggregateSeries> series);
void write_series_csv(std::span<const AggregateSeries> series, const std::filesystem::path& path);

std::string render_overlays_csv(std::span<const OverlaySeries> overlays);
void write_overlays_csv(std::span<const OverlaySeries> overlays,
                        const std::filesystem::path& path);

struct AxesSpec {
  Metric metric = Metric::H;
  bool log_y = true;
  std::string title;
  std::string x_label = "t";
  std::string y_label;  // defaults to the metric name
};

/// Self-contained 800x600 SVG: one polyline per series of the requested
/// metric, dashed polylines for matching overlays, legend and labels.
/// Throws EmptySeries when no series has the requested metric.
std::string render_svg_plot(std::span<const AggregateSeries> series,
                            std::span<const OverlaySeries> overlays, const AxesSpec& axes);
void write_svg_plot(std::span<const AggregateSeries> series,
                    std::span<const OverlaySeries> overlays, const AxesSpec& axes,
                    const std::filesystem::path& path);

/// JSON array of {t, probs, per_text: [{id, mean, cov, samples}]}, with cov
/// as nested rows and samples as a list of points.
std::string render_snapshot_json(std::span<const Snapshot> snapshots);
void write_snapshot_json(std::span<const Snapshot> snapshots, const std::filesystem::path& path);
std::vector<Snapshot> parse_snapshot_json(const std::string& text);

/// Provenance record: preset name, seed, run counts, aborted runs, drift
/// warnings, injections and (for per-text D series) fitted decay rates.
std::string render_metadata_json(const ExperimentPreset& preset, std::uint64_t seed,
                                 const ExperimentResult& result);

/// Writes `text` to `path` in binary mode; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace coevolve
