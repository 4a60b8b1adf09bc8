#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "coevolve/error.hpp"
#include "coevolve/report.hpp"
#include "coevolve/theory.hpp"

namespace coevolve::cli {

namespace {

namespace fs = std::filesystem;

std::string g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("COEVOLVE_SEED");
  if (!raw || !*raw) return std::nullopt;
  std::uint64_t value = 0;
  const char* end = raw + std::char_traits<char>::length(raw);
  auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::RangeError, std::string("COEVOLVE_SEED is not an unsigned integer: ") + raw);
  }
  return value;
}

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  bool paper_scale = false;

  ConfigOverrides overrides() const {
    ConfigOverrides o;
    if (paper_scale) o.paper_scale = true;
    o.seed = seed;
    o.runs = runs;
    o.workers = workers;
    o.out = out;
    return o;
  }
};

int run_config(const RunConfig& cfg, std::ostream& out) {
  std::uint64_t seed = 0;
  if (cfg.seed) {
    seed = *cfg.seed;
  } else if (auto env = env_seed()) {
    seed = *env;
  }
  return execute(cfg, seed, out);
}

}  // namespace

int execute(const RunConfig& cfg, std::uint64_t seed, std::ostream& out) {
  const ExperimentPreset& preset = cfg.preset;
  const ExperimentResult result = run_experiment(preset, seed, cfg.workers);

  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  RunConfig resolved = cfg;
  resolved.seed = seed;
  write_text_file(dir / "resolved-config.ini", render_config(resolved));
  write_series_csv(result.series, dir / (preset.name + ".csv"));
  write_overlays_csv(result.overlays, dir / (preset.name + "-overlays.csv"));
  for (const PlotSpec& plot : preset.plots) {
    AxesSpec axes;
    axes.metric = plot.metric;
    axes.log_y = plot.log_y;
    axes.title = plot.title;
    const fs::path svg = dir / (preset.name + "-" + std::string(metric_name(plot.metric)) + ".svg");
    write_svg_plot(result.series, result.overlays, axes, svg);
  }
  if (!preset.snapshot_steps.empty()) {
    write_snapshot_json(result.snapshots, dir / (preset.name + "-snapshots.json"));
  }
  write_text_file(dir / "run-metadata.json", render_metadata_json(preset, seed, result));

  out << preset.name << ": " << result.metadata.total_runs << " runs, "
      << result.metadata.aborted.size() << " aborted, seed " << seed << ", output in "
      << dir.string() << "\n";
  for (const AbortedRun& a : result.metadata.aborted) {
    out << "  aborted: " << sweep_param_name(preset.sweep.param) << "=" << g12(a.sweep_value)
        << " run " << a.run_index << ": " << a.reason << "\n";
  }
  return result.metadata.aborted.empty() ? kExitOk : kExitAborted;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Co-evolving text/image model collapse simulator"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Base seed (default: $COEVOLVE_SEED, else 0)");
  app.add_option("--runs", flags.runs, "Independent runs per sweep value");
  app.add_option("--workers", flags.workers, "Worker threads");
  app.add_option("--out", flags.out, "Output directory");
  app.add_flag("--paper-scale", flags.paper_scale, "Use the full run count and horizons");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->fallthrough();

  std::string figure;
  std::string variant = "both";
  auto* fig = app.add_subcommand("figure", "Run a named preset");
  fig->add_option("name", figure, "fig3|fig4|fig5|fig6|fig7|fig7-deterministic|appendixC")
      ->required();
  fig->add_option("--variant", variant,
                  "appendixC variant: frozen_image|frozen_text|both|text_inj|image_inj");
  fig->fallthrough();

  std::string bound;
  BoundInputs in;
  auto* bounds = app.add_subcommand("bounds", "Evaluate a closed-form bound");
  bounds->add_option("name", bound, "Bound name")->required();
  bounds->add_option("--d", in.d, "Image dimension");
  bounds->add_option("--N", in.N, "Samples per update");
  bounds->add_option("--K", in.K, "Number of texts");
  bounds->add_option("--t", in.t, "Macro step");
  bounds->add_option("--p", in.p_i, "Text probability");
  bounds->add_option("--H0", in.H0, "Initial text diversity");
  bounds->add_option("--C", in.C, "Diversity constant");
  bounds->add_option("--rho", in.rho, "Contraction rate");
  bounds->add_option("--alpha", in.alpha_inj, "Text injection probability");
  bounds->add_option("--eps", in.eps_inj, "Injected mass fraction");
  bounds->add_option("--N0", in.N0, "Injected user images per update");
  bounds->add_option("--tr-sigma0", in.tr_sigma0, "Trace of the reference covariance");
  bounds->add_option("--tr-sqrt-user", in.tr_sqrt_sigma_user,
                     "Trace of the user covariance square root");
  bounds->add_option("--alpha-wishart", in.alpha_wishart, "Wishart square-root scalar");
  bounds->fallthrough();

  std::size_t aw_d = 1, aw_dof = 3, aw_samples = 100000;
  auto* alpha = app.add_subcommand("alpha-wishart", "Estimate E[W^(1/2)] = alpha I");
  alpha->add_option("--d", aw_d, "Dimension");
  alpha->add_option("--dof", aw_dof, "Degrees of freedom");
  alpha->add_option("--samples", aw_samples, "Monte Carlo samples");
  alpha->fallthrough();

  std::vector<std::string> argv_tail(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      return run_config(load_config(config_path, flags.overrides()), out);
    }
    if (*fig) {
      const auto v = parse_appendix_variant(variant);
      if (!v) throw Error(ErrorCode::RangeError, "unknown appendixC variant '" + variant + "'");
      if (!preset_by_name(figure) || figure == "custom") {
        throw Error(ErrorCode::RangeError, "unknown figure '" + figure + "'");
      }
      const std::string text = "experiment = " + figure + "\nvariant = " + variant + "\n";
      return run_config(parse_config(text, flags.overrides()), out);
    }
    if (*bounds) {
      for (const auto& [name, value] : evaluate_bound(bound, in)) {
        out << name << "=" << g12(value) << "\n";
      }
      return kExitOk;
    }
    if (*alpha) {
      std::uint64_t seed = flags.seed ? *flags.seed : env_seed().value_or(0);
      RngStream rng = derive_stream(seed, 0, Phase::WishartAlpha);
      const AlphaEstimate est = estimate_wishart_sqrt_alpha(aw_d, aw_dof, aw_samples, rng);
      out << "alpha=" << g12(est.alpha) << "\nstderr=" << g12(est.standard_error) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  err << app.help();
  return kExitConfig;
}

int cli_main(int argc, char** argv) {
  return cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace coevolve::cli
