#include "coevolve/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <tuple>

#include "coevolve/error.hpp"
#include "coevolve/theory.hpp"

namespace coevolve {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }
std::string g6(double v) { return fmt("%.6g", v); }

std::string id_text(const std::optional<TextId>& id) {
  return id ? std::to_string(*id) : std::string();
}

// H series carry no text id and sort before any id.
TextId id_key(const std::optional<TextId>& id) {
  return id ? *id : std::numeric_limits<TextId>::min();
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr std::size_t kPaletteSize = sizeof kPalette / sizeof kPalette[0];

std::string series_label(SweepParam param, double value, const std::optional<TextId>& id) {
  std::string label;
  if (param != SweepParam::None) label = std::string(sweep_param_name(param)) + "=" + g6(value);
  if (id) label += (label.empty() ? "" : ", ") + std::string("text ") + std::to_string(*id);
  return label.empty() ? "series" : label;
}

ojson snapshot_to_json(const Snapshot& s) {
  ojson j;
  j["t"] = s.t;
  j["probs"] = s.probs;
  ojson texts = ojson::array();
  for (const SnapshotText& st : s.per_text) {
    ojson jt;
    jt["id"] = st.id;
    jt["mean"] = st.mean;
    ojson cov = ojson::array();
    for (std::size_t r = 0; r < st.cov.dim(); ++r) {
      ojson row = ojson::array();
      for (std::size_t c = 0; c < st.cov.dim(); ++c) row.push_back(st.cov(r, c));
      cov.push_back(std::move(row));
    }
    jt["cov"] = std::move(cov);
    ojson samples = ojson::array();
    for (std::size_t i = 0; i < st.samples.size(); ++i) {
      auto row = st.samples.row(i);
      samples.push_back(std::vector<double>(row.begin(), row.end()));
    }
    jt["samples"] = std::move(samples);
    texts.push_back(std::move(jt));
  }
  j["per_text"] = std::move(texts);
  return j;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::string render_series_csv(std::span<const AggregateSeries> series) {
  using Row = std::tuple<std::string_view, double, TextId, std::size_t, std::size_t>;
  std::vector<Row> rows;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const AggregateSeries& s = series[k];
    if (s.standard_error.size() != s.mean.size() || s.runs.size() != s.mean.size()) {
      throw Error(ErrorCode::DimMismatch, "series columns have inconsistent lengths");
    }
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      if (s.runs[t] > 0) rows.emplace_back(metric_name(s.metric), s.sweep_value, id_key(s.text_id), t, k);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a), std::get<3>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b), std::get<3>(b));
  });

  std::string out = std::string(kSeriesCsvHeader) + "\n";
  for (const auto& [metric, value, key, t, k] : rows) {
    const AggregateSeries& s = series[k];
    out += std::to_string(t) + ',' + std::string(metric) + ',' + id_text(s.text_id) + ',' +
           std::string(sweep_param_name(s.param)) + ',' + g17(value) + ',' + g17(s.mean[t]) +
           ',' + g17(s.standard_error[t]) + ',' + std::to_string(s.runs[t]) + '\n';
  }
  return out;
}

void write_series_csv(std::span<const AggregateSeries> series, const std::filesystem::path& path) {
  write_text_file(path, render_series_csv(series));
}

std::string render_overlays_csv(std::span<const OverlaySeries> overlays) {
  std::string out = std::string(kOverlayCsvHeader) + "\n";
  for (const OverlaySeries& o : overlays) {
    for (std::size_t t = 0; t < o.values.size(); ++t) {
      out += std::to_string(t) + ',' + std::string(overlay_name(o.kind)) + ',' +
             std::string(metric_name(o.metric)) + ',' + id_text(o.text_id) + ',' +
             std::string(sweep_param_name(o.param)) + ',' + g17(o.sweep_value) + ',' +
             g17(o.values[t]) + '\n';
    }
  }
  return out;
}

void write_overlays_csv(std::span<const OverlaySeries> overlays,
                        const std::filesystem::path& path) {
  write_text_file(path, render_overlays_csv(overlays));
}

std::string render_svg_plot(std::span<const AggregateSeries> series,
                            std::span<const OverlaySeries> overlays, const AxesSpec& axes) {
  std::vector<const AggregateSeries*> lines;
  for (const auto& s : series) {
    if (s.metric == axes.metric) lines.push_back(&s);
  }
  if (lines.empty()) {
    throw Error(ErrorCode::EmptySeries,
                "no series for metric " + std::string(metric_name(axes.metric)));
  }
  std::vector<const OverlaySeries*> dashed;
  for (const auto& o : overlays) {
    if (o.metric == axes.metric) dashed.push_back(&o);
  }

  auto usable = [&](double v) { return std::isfinite(v) && (!axes.log_y || v > 0.0); };
  std::size_t t_max = 1;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* s : lines) {
    for (std::size_t t = 0; t < s->mean.size(); ++t) {
      if (s->runs[t] == 0 || !usable(s->mean[t])) continue;
      lo = std::min(lo, s->mean[t]);
      hi = std::max(hi, s->mean[t]);
      t_max = std::max(t_max, t);
    }
  }
  for (const auto* o : dashed) {
    for (std::size_t t = 0; t < o->values.size(); ++t) {
      if (!usable(o->values[t])) continue;
      lo = std::min(lo, o->values[t]);
      hi = std::max(hi, o->values[t]);
    }
  }
  if (!(lo <= hi)) {
    lo = axes.log_y ? 0.1 : 0.0;
    hi = 1.0;
  }

  // Axis range in the plotted coordinate (log10 for log axes).
  double y0, y1;
  if (axes.log_y) {
    y0 = std::floor(std::log10(lo));
    y1 = std::ceil(std::log10(hi));
    if (y1 <= y0) y1 = y0 + 1.0;
  } else {
    const double span = hi - lo;
    const double pad = span > 0.0 ? 0.05 * span : (lo != 0.0 ? 0.05 * std::fabs(lo) : 1.0);
    y0 = lo - pad;
    y1 = hi + pad;
  }

  constexpr double left = 80.0, right = 600.0, top = 50.0, bottom = 530.0;
  auto px = [&](double t) { return left + (right - left) * t / static_cast<double>(t_max); };
  auto py = [&](double v) {
    const double u = axes.log_y ? std::log10(v) : v;
    return bottom - (bottom - top) * (u - y0) / (y1 - y0);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" "
         "height=\"600\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << xml_escape(axes.title) << "</text>\n";
  svg << "<rect x=\"" << g6(left) << "\" y=\"" << g6(top) << "\" width=\"" << g6(right - left)
      << "\" height=\"" << g6(bottom - top) << "\" fill=\"none\" stroke=\"#000000\"/>\n";

  // Ticks.
  for (int i = 0; i <= 5; ++i) {
    const double t = static_cast<double>(t_max) * i / 5.0;
    const double x = px(t);
    svg << "<line x1=\"" << g6(x) << "\" y1=\"" << g6(bottom) << "\" x2=\"" << g6(x)
        << "\" y2=\"" << g6(bottom + 5) << "\" stroke=\"#000000\"/>\n";
    svg << "<text x=\"" << g6(x) << "\" y=\"" << g6(bottom + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << g6(t)
        << "</text>\n";
  }
  std::vector<double> yticks;
  if (axes.log_y) {
    const int decades = static_cast<int>(y1 - y0);
    const int step = std::max(1, (decades + 7) / 8);
    for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); e += step) {
      yticks.push_back(std::pow(10.0, e));
    }
  } else {
    for (int i = 0; i <= 5; ++i) yticks.push_back(y0 + (y1 - y0) * i / 5.0);
  }
  for (double v : yticks) {
    const double y = py(v);
    svg << "<line x1=\"" << g6(left - 5) << "\" y1=\"" << g6(y) << "\" x2=\"" << g6(left)
        << "\" y2=\"" << g6(y) << "\" stroke=\"#000000\"/>\n";
    svg << "<text x=\"" << g6(left - 8) << "\" y=\"" << g6(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << g6(v)
        << "</text>\n";
  }
  svg << "<text x=\"" << g6((left + right) / 2) << "\" y=\"" << g6(bottom + 45)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape(axes.x_label) << "</text>\n";
  const std::string y_label =
      axes.y_label.empty() ? std::string(metric_name(axes.metric)) : axes.y_label;
  svg << "<text x=\"20\" y=\"" << g6((top + bottom) / 2) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 20 "
      << g6((top + bottom) / 2) << ")\">" << xml_escape(y_label) << "</text>\n";

  auto colour_of = [&](double value, const std::optional<TextId>& id) -> std::string {
    for (std::size_t k = 0; k < lines.size(); ++k) {
      if (lines[k]->sweep_value == value && (!id || lines[k]->text_id == id)) {
        return kPalette[k % kPaletteSize];
      }
    }
    return "#000000";
  };

  for (std::size_t k = 0; k < lines.size(); ++k) {
    const AggregateSeries& s = *lines[k];
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[k % kPaletteSize]
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      if (s.runs[t] == 0 || !usable(s.mean[t])) continue;
      svg << (first ? "" : " ") << g6(px(static_cast<double>(t))) << ',' << g6(py(s.mean[t]));
      first = false;
    }
    svg << "\"/>\n";
  }
  for (const auto* o : dashed) {
    svg << "<polyline fill=\"none\" stroke=\"" << colour_of(o->sweep_value, o->text_id)
        << "\" stroke-width=\"1\" stroke-dasharray=\"6,4\" points=\"";
    bool first = true;
    for (std::size_t t = 0; t < o->values.size() && t <= t_max; ++t) {
      if (!usable(o->values[t])) continue;
      svg << (first ? "" : " ") << g6(px(static_cast<double>(t))) << ',' << g6(py(o->values[t]));
      first = false;
    }
    svg << "\"/>\n";
  }

  // Legend: one entry per series, one per overlay kind.
  double ly = top + 10.0;
  auto legend_entry = [&](const std::string& colour, bool is_dashed, const std::string& label) {
    svg << "<line x1=\"615\" y1=\"" << g6(ly) << "\" x2=\"645\" y2=\"" << g6(ly)
        << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\""
        << (is_dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    svg << "<text x=\"650\" y=\"" << g6(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(label) << "</text>\n";
    ly += 18.0;
  };
  for (std::size_t k = 0; k < lines.size(); ++k) {
    legend_entry(kPalette[k % kPaletteSize], false,
                 series_label(lines[k]->param, lines[k]->sweep_value, lines[k]->text_id));
  }
  std::vector<OverlayKind> seen;
  for (const auto* o : dashed) {
    if (std::find(seen.begin(), seen.end(), o->kind) != seen.end()) continue;
    seen.push_back(o->kind);
    legend_entry("#000000", true, std::string(overlay_name(o->kind)));
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg_plot(std::span<const AggregateSeries> series,
                    std::span<const OverlaySeries> overlays, const AxesSpec& axes,
                    const std::filesystem::path& path) {
  write_text_file(path, render_svg_plot(series, overlays, axes));
}

std::string render_snapshot_json(std::span<const Snapshot> snapshots) {
  ojson arr = ojson::array();
  for (const Snapshot& s : snapshots) arr.push_back(snapshot_to_json(s));
  return arr.dump(1) + "\n";
}

void write_snapshot_json(std::span<const Snapshot> snapshots, const std::filesystem::path& path) {
  write_text_file(path, render_snapshot_json(snapshots));
}

std::vector<Snapshot> parse_snapshot_json(const std::string& text) {
  std::vector<Snapshot> out;
  try {
    const ojson arr = ojson::parse(text);
    if (!arr.is_array()) throw Error(ErrorCode::ParseError, "snapshot file must hold an array");
    for (const ojson& j : arr) {
      Snapshot s;
      s.t = j.at("t").get<std::size_t>();
      s.probs = j.at("probs").get<std::vector<double>>();
      for (const ojson& jt : j.at("per_text")) {
        SnapshotText st;
        st.id = jt.at("id").get<TextId>();
        st.mean = jt.at("mean").get<std::vector<double>>();
        const std::size_t d = st.mean.size();
        const auto rows = jt.at("cov").get<std::vector<std::vector<double>>>();
        if (rows.size() != d) throw Error(ErrorCode::DimMismatch, "cov rows do not match mean");
        std::vector<double> flat;
        for (const auto& r : rows) {
          if (r.size() != d) throw Error(ErrorCode::DimMismatch, "cov is not square");
          flat.insert(flat.end(), r.begin(), r.end());
        }
        st.cov = SymMatrix(d, std::move(flat));
        const auto pts = jt.at("samples").get<std::vector<std::vector<double>>>();
        st.samples = PointSet(d, pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (pts[i].size() != d) throw Error(ErrorCode::DimMismatch, "sample has wrong dimension");
          std::copy(pts[i].begin(), pts[i].end(), st.samples.row(i).begin());
        }
        s.per_text.push_back(std::move(st));
      }
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return out;
}

std::string render_metadata_json(const ExperimentPreset& preset, std::uint64_t seed,
                                 const ExperimentResult& result) {
  ojson j;
  j["experiment"] = preset.name;
  j["seed"] = seed;
  j["runs_per_value"] = preset.runs;
  j["T"] = preset.base.T;
  j["sweep_param"] = std::string(sweep_param_name(preset.sweep.param));
  j["sweep_values"] = preset.sweep.values;
  j["total_runs"] = result.metadata.total_runs;
  ojson aborted = ojson::array();
  for (const AbortedRun& a : result.metadata.aborted) {
    aborted.push_back({{"sweep_value", a.sweep_value}, {"run_index", a.run_index},
                       {"reason", a.reason}});
  }
  j["aborted_runs"] = std::move(aborted);
  j["mass_drift_warnings"] = result.metadata.mass_drift_warnings;
  j["injections"] = result.metadata.injections;

  ojson fits = ojson::array();
  const bool predict =
      std::find(preset.overlays.begin(), preset.overlays.end(), OverlayKind::ImageRate) !=
      preset.overlays.end();
  for (const AggregateSeries& s : result.series) {
    if (s.metric != Metric::D || !s.text_id) continue;
    try {
      const RateFit fit = fit_log_rate(s, preset.fit);
      ojson f{{"text_id", *s.text_id}, {"sweep_value", s.sweep_value}, {"slope", fit.slope},
              {"rate", fit.rate}, {"points", fit.points}};
      if (predict) {
        const SweepPoint point = apply_sweep(preset, s.sweep_value);
        const SystemState init = make_initial_state(point.cfg);
        for (std::size_t i = 0; i < init.text.size(); ++i) {
          if (init.text.ids[i] == *s.text_id && init.text.probs[i] > 0.0) {
            f["predicted_rate"] =
                image_rate_approx(point.cfg.d, point.cfg.N, init.text.probs[i]).rate;
          }
        }
      }
      fits.push_back(std::move(f));
    } catch (const Error&) {
      // Too few positive points in the window; nothing to report.
    }
  }
  j["rate_fits"] = std::move(fits);
  return j.dump(2) + "\n";
}

}  // namespace coevolve
