#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "scil/errors.hpp"
#include "scil/experiment.hpp"
#include "scil/streams.hpp"

namespace {

int run_command(const std::string& config_path, int runs_override, long seed_override,
                const std::string& output_override, int jobs_override) {
  scil::ExperimentConfig config = scil::ExperimentConfig::from_json_file(config_path);
  if (runs_override > 0) config.runs = runs_override;
  if (seed_override >= 0) config.base_seed = static_cast<std::uint64_t>(seed_override);
  if (!output_override.empty()) config.output_dir = output_override;
  if (jobs_override > 0) config.jobs = jobs_override;

  const scil::ExperimentSummary summary = scil::run_experiment(config);
  std::cout << "experiment " << summary.name << " (" << summary.runs << " runs)\n"
            << "  avg EN_Accuracy: " << summary.mean_avg_en_accuracy << " +- "
            << summary.stderr_avg_en_accuracy << "\n"
            << "  avg G-mean:      " << summary.mean_avg_g_mean << " +- "
            << summary.stderr_avg_g_mean << "\n"
            << "  mean FNR:        " << summary.mean_fnr << "\n"
            << "outputs under " << (std::filesystem::path(config.output_dir) / config.name).string()
            << "\n";
  return 0;
}

int generate_command(const std::string& dataset, std::uint64_t seed, long length,
                     double imbalance, const std::string& out_path) {
  scil::StreamSpec spec;
  if (dataset == "blob") spec = scil::blob_spec(seed);
  else if (dataset == "sea") spec = scil::sea_spec(seed);
  else if (dataset == "vib") spec = scil::vib_spec(seed);
  else scil::throw_config("generate expects dataset blob, sea, or vib");
  spec.seed = seed;
  if (length > 0) spec.length = length;
  if (imbalance > 0.0) spec.imbalance_rate = imbalance;

  const scil::Stream stream = scil::generate_stream(spec);
  if (out_path.empty() || out_path == "-") {
    scil::export_stream_csv(stream, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) scil::throw_io("cannot open output file: " + out_path);
    scil::export_stream_csv(stream, out);
    std::cout << "wrote " << stream.items.size() << " instances to " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCIL streaming class-incremental learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  int runs_override = 0;
  long seed_override = -1;
  std::string output_override;
  int jobs_override = 0;
  auto* run = app.add_subcommand("run", "Execute a multi-seed experiment from a config file");
  run->add_option("config", config_path, "Experiment config JSON")->required();
  run->add_option("--runs", runs_override, "Override the number of seeded runs");
  run->add_option("--seed", seed_override, "Override the base seed");
  run->add_option("--output", output_override, "Override the output directory");
  run->add_option("--jobs", jobs_override, "Run up to this many seeds in parallel");

  std::string dataset = "blob";
  std::uint64_t gen_seed = 1;
  long gen_length = 0;
  double gen_imbalance = 0.0;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Export a synthetic stream as CSV");
  generate->add_option("dataset", dataset, "blob, sea, or vib")->required();
  generate->add_option("--seed", gen_seed, "Stream seed");
  generate->add_option("--length", gen_length, "Stream length");
  generate->add_option("--imbalance", gen_imbalance, "Minority fraction");
  generate->add_option("-o,--output", gen_out, "Output file (default stdout)");

  std::string diff_a, diff_b;
  auto* diff = app.add_subcommand("diff", "Compare two exported stream CSVs");
  diff->add_option("a", diff_a, "First file")->required();
  diff->add_option("b", diff_b, "Second file")->required();

  std::string default_dataset = "blob";
  auto* print_default =
      app.add_subcommand("print-default-config", "Emit the default config for a dataset");
  print_default->add_option("dataset", default_dataset, "blob, sea, vib, or csv");

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      return run_command(config_path, runs_override, seed_override, output_override,
                         jobs_override);
    }
    if (generate->parsed()) {
      return generate_command(dataset, gen_seed, gen_length, gen_imbalance, gen_out);
    }
    if (diff->parsed()) {
      const scil::DiffReport report = scil::diff_streams(diff_a, diff_b);
      std::cout << report.to_string() << "\n";
      return 0;
    }
    if (print_default->parsed()) {
      std::cout << scil::default_experiment(default_dataset).to_json_string() << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const scil::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(scil::ErrorCategory::Internal);
  }
  return 0;
}
