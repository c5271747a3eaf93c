#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "pcrf/error.hpp"
#include "pcrf/pipeline.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;

struct Options {
  std::string config;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string team = "home";
  int scale = 4;
};

pcrf::RunConfig resolve(const Options& o) {
  auto c = pcrf::load_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    c.synth.config.seed = *o.seed;
  }
  if (o.jobs) c.jobs = *o.jobs;
  if (!o.out.empty()) {
    c.run_dir = o.out;
    c.synth.out_dir = o.out;
  }
  c.validate();
  if (c.jobs > 0) omp_set_num_threads(c.jobs);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Possession-path inference from tracking data"};
  app.require_subcommand(1);
  Options o;

  using Command = std::function<void(const pcrf::RunConfig&)>;
  const std::map<std::string, std::pair<std::string, Command>> commands = {
      {"synth", {"Generate synthetic train/test matches",
                 [](const pcrf::RunConfig& c) { pcrf::command_synth(c, c.synth.out_dir); }}},
      {"prepare", {"Load, clean and resample tracking data; write the dataset manifest",
                   [](const pcrf::RunConfig& c) { pcrf::command_prepare(c, c.run_dir); }}},
      {"train", {"Train the scorer on the train split",
                 [](const pcrf::RunConfig& c) { pcrf::command_train(c, c.run_dir); }}},
      {"decode", {"Decode possession paths and events for the test split",
                  [](const pcrf::RunConfig& c) { pcrf::command_decode(c, c.run_dir); }}},
      {"evaluate", {"Score decoded paths and events against gold",
                    [](const pcrf::RunConfig& c) { pcrf::command_evaluate(c, c.run_dir); }}},
      {"report", {"Write possession, heatmap and pass-network analytics",
                  [](const pcrf::RunConfig& c) { pcrf::command_report(c, c.run_dir); }}},
      {"pipeline", {"prepare, train, decode, evaluate and report in one go",
                    [](const pcrf::RunConfig& c) { pcrf::command_pipeline(c, c.run_dir); }}},
      {"matrix", {"Run all seven baseline configurations",
                  [](const pcrf::RunConfig& c) { pcrf::command_matrix(c, c.run_dir); }}},
  };

  std::map<CLI::App*, Command> handlers;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run configuration (JSON)")->required();
    sub->add_option("--jobs", o.jobs, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", o.seed, "Override the configured seed");
    sub->add_option("--out", o.out, "Override the run directory (synth: data directory)");
  };
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    add_common(sub);
    handlers[sub] = entry.second;
  }
  auto* plot = app.add_subcommand("plot", "Render a team heatmap from the report bundle as a PPM image");
  add_common(plot);
  plot->add_option("--team", o.team, "home or away")->check(CLI::IsMember({"home", "away"}));
  plot->add_option("--scale", o.scale, "Pixels per grid cell")->check(CLI::PositiveNumber);
  handlers[plot] = [&o](const pcrf::RunConfig& c) {
    const auto dir = std::filesystem::path(c.run_dir) / "analytics";
    const auto csv = dir / ("heatmap_" + o.team + ".csv");
    if (!std::filesystem::exists(csv))
      throw pcrf::DataError("missing artifact " + csv.string() + " (run 'report' first)");
    const auto ppm = dir / ("heatmap_" + o.team + ".ppm");
    pcrf::command_plot(csv.string(), ppm.string(), o.scale);
    std::printf("%s\n", ppm.string().c_str());
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    for (auto* sub : app.get_subcommands()) handlers.at(sub)(resolve(o));
  } catch (const pcrf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const pcrf::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
