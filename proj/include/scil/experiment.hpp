#ifndef SCIL_EXPERIMENT_HPP
#define SCIL_EXPERIMENT_HPP

#include <map>
#include <string>
#include <vector>

#include "scil/engine.hpp"
#include "scil/evaluation.hpp"
#include "scil/streams.hpp"

namespace scil {

struct ExperimentConfig {
  std::string name = "blob";
  int runs = 10;
  std::uint64_t base_seed = 1;
  std::string output_dir = "out";
  int jobs = 1;
  StreamSpec stream;
  EngineConfig engine;

  void validate() const;
  std::string to_json_string() const;
  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

// Table-default experiment for one of the named datasets ("blob",
// "sea", "vib") or a CSV replay shell ("csv").
ExperimentConfig default_experiment(const std::string& dataset);

struct StepRecord {
  long timestep = 0;  // online step, 1-based
  long source_t = 0;  // position in the full stream
  int true_label = -1;
  int predicted_label = 0;
  bool is_novel = false;
  double recon_loss = 0.0;
  double theta_of_predicted = 0.0;
  StepEvent event = StepEvent::None;
  bool class_promoted = false;
  double en_accuracy = 0.0;
  double g_mean = 0.0;
  std::map<int, double> faded_recalls;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  double avg_en_accuracy = 0.0;
  double avg_g_mean = 0.0;
  double final_en_accuracy = 0.0;
  double final_g_mean = 0.0;
  double false_negative_rate = 0.0;
  int new_model_events = 0;
  int incremental_events = 0;
  int promotions = 0;
  std::size_t peak_stored = 0;
  std::size_t capacity_bound = 0;
  std::vector<CorrectionEvent> corrections;
  std::string model_snapshot;
  std::string memory_csv;
};

// One full seeded run: generate, split, pretrain, stream, score.
RunResult execute_run(const ExperimentConfig& config, std::uint64_t seed);

struct ExperimentSummary {
  std::string name;
  int runs = 0;
  double mean_avg_en_accuracy = 0.0;
  double stderr_avg_en_accuracy = 0.0;
  double mean_avg_g_mean = 0.0;
  double stderr_avg_g_mean = 0.0;
  double mean_fnr = 0.0;
  std::vector<RunResult> per_run;

  std::string to_json_string() const;
};

// Executes every seeded run (in parallel up to config.jobs) and, when
// write_outputs is set, writes per-run CSVs plus summary.json and
// series.csv under output_dir/name/.
ExperimentSummary run_experiment(const ExperimentConfig& config, bool write_outputs = true);

void write_steps_csv(const RunResult& run, std::ostream& out);

struct DiffReport {
  bool identical = false;
  bool length_mismatch = false;
  long lines_a = 0;
  long lines_b = 0;
  long first_diff_line = 0;
  std::string line_a;
  std::string line_b;

  std::string to_string() const;
};

DiffReport diff_streams(const std::string& path_a, const std::string& path_b);

}  // namespace scil

#endif
