#include "scil/experiment.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "scil/csv.hpp"
#include "scil/errors.hpp"

namespace scil {

namespace fs = std::filesystem;
using json = nlohmann::json;

void ExperimentConfig::validate() const {
  if (runs < 1) throw_config("runs must be >= 1");
  if (jobs < 1) throw_config("jobs must be >= 1");
  engine.validate();
  stream.schedule.validate();
  if (stream.generator == GeneratorKind::CsvReplay && stream.csv_path.empty()) {
    throw_config("csv replay requires a csv_path");
  }
}

ExperimentConfig default_experiment(const std::string& dataset) {
  ExperimentConfig config;
  config.name = dataset;
  config.runs = 10;
  config.base_seed = 1;

  EngineConfig& eng = config.engine;
  eng.t_train = 2000;
  eng.majority_queue_size = 1000;
  eng.minority_queue_size = 30;
  eng.epochs_offline = 20;
  eng.epochs_online = 10;
  eng.alpha = 0.2;
  eng.pretrain_majority_count = 1000;
  eng.pretrain_minority_count = 30;
  eng.smote.k_neighbors = 5;
  eng.smote.target_count = 1000;

  if (dataset == "blob") {
    config.stream = blob_spec(0);
    // Table values use a 2% minority fraction; at that rate the shared
    // novel buffer cannot fill three more times inside the 8000 steps
    // that remain after the drift, so the runnable default raises it.
    config.stream.imbalance_rate = 0.10;
    eng.ae_hidden = {8};
    eng.bottleneck = 2;
    eng.mlp_hidden = {2};
  } else if (dataset == "sea") {
    config.stream = sea_spec(0);
    config.stream.imbalance_rate = 0.10;
    eng.ae_hidden = {8};
    eng.bottleneck = 2;
    eng.mlp_hidden = {2};
  } else if (dataset == "vib") {
    config.stream = vib_spec(0);
    config.stream.imbalance_rate = 0.10;
    eng.ae_hidden = {8};
    eng.bottleneck = 2;
    eng.mlp_hidden = {2};
  } else if (dataset == "csv") {
    config.stream.generator = GeneratorKind::CsvReplay;
    config.stream.initial_classes = 2;
    eng.ae_hidden = {32};
    eng.bottleneck = 20;
    eng.mlp_hidden = {16, 8};
  } else {
    throw_config("unknown dataset '" + dataset + "' (expected blob, sea, vib, or csv)");
  }
  return config;
}

namespace {

void expect_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw_config("unknown key '" + key + "' in " + where);
    }
  }
}

json stream_to_json(const StreamSpec& spec) {
  json j;
  j["generator"] = generator_name(spec.generator);
  j["length"] = spec.length;
  j["imbalance_rate"] = spec.imbalance_rate;
  j["initial_classes"] = spec.initial_classes;
  j["appearance"] = spec.appearance;
  if (!spec.csv_path.empty()) j["csv_path"] = spec.csv_path;
  if (!spec.csv_transforms.empty()) {
    json arr = json::array();
    for (const auto& tr : spec.csv_transforms) {
      arr.push_back({{"from_timestep", tr.from_timestep},
                     {"multiply", tr.multiply},
                     {"add", tr.add}});
    }
    j["csv_transforms"] = arr;
  }
  return j;
}

StreamSpec stream_from_json(const json& j) {
  expect_keys(j, {"generator", "length", "imbalance_rate", "initial_classes", "appearance",
                  "csv_path", "csv_transforms"},
              "stream");
  const std::string kind = j.at("generator").get<std::string>();
  StreamSpec spec;
  if (kind == "blob") spec = blob_spec(0);
  else if (kind == "sea") spec = sea_spec(0);
  else if (kind == "vib") spec = vib_spec(0);
  else spec.generator = generator_from_name(kind);
  if (j.contains("length")) spec.length = j.at("length").get<long>();
  if (j.contains("imbalance_rate")) spec.imbalance_rate = j.at("imbalance_rate").get<double>();
  if (j.contains("initial_classes")) spec.initial_classes = j.at("initial_classes").get<int>();
  if (j.contains("appearance")) spec.appearance = j.at("appearance").get<std::vector<long>>();
  if (j.contains("csv_path")) spec.csv_path = j.at("csv_path").get<std::string>();
  if (j.contains("csv_transforms")) {
    for (const auto& tj : j.at("csv_transforms")) {
      expect_keys(tj, {"from_timestep", "multiply", "add"}, "csv_transforms entry");
      CsvTransform tr;
      tr.from_timestep = tj.value("from_timestep", 0L);
      tr.multiply = tj.value("multiply", 1.0);
      tr.add = tj.value("add", 0.0);
      spec.csv_transforms.push_back(tr);
    }
  }
  return spec;
}

json engine_to_json(const EngineConfig& eng) {
  json j;
  j["t_train"] = eng.t_train;
  j["majority_queue_size"] = eng.majority_queue_size;
  j["minority_queue_size"] = eng.minority_queue_size;
  j["epochs_offline"] = eng.epochs_offline;
  j["epochs_online"] = eng.epochs_online;
  j["alpha"] = eng.alpha;
  j["pretrain_majority_count"] = eng.pretrain_majority_count;
  j["pretrain_minority_count"] = eng.pretrain_minority_count;
  j["incremental_enabled"] = eng.incremental_enabled;
  j["ae_hidden"] = eng.ae_hidden;
  j["bottleneck"] = eng.bottleneck;
  j["mlp_hidden"] = eng.mlp_hidden;
  j["recon_loss"] = recon_loss_name(eng.recon_loss);
  j["learning_rate"] = eng.optimizer.learning_rate;
  j["batch_size"] = eng.batch_size;
  j["smote"] = {{"k_neighbors", eng.smote.k_neighbors}, {"target_count", eng.smote.target_count}};
  j["retention"] = {{"keep_min", eng.retention.keep_min},
                    {"keep_max", eng.retention.keep_max},
                    {"lambda", eng.retention.lambda},
                    {"min_keep", eng.retention.min_keep},
                    {"k_density", eng.retention.k_density}};
  return j;
}

EngineConfig engine_from_json(const json& j) {
  expect_keys(j, {"t_train", "majority_queue_size", "minority_queue_size", "epochs_offline",
                  "epochs_online", "alpha", "pretrain_majority_count", "pretrain_minority_count",
                  "incremental_enabled", "ae_hidden", "bottleneck", "mlp_hidden", "recon_loss",
                  "learning_rate", "batch_size", "smote", "retention"},
              "engine");
  EngineConfig eng;
  eng.t_train = j.value("t_train", eng.t_train);
  eng.majority_queue_size = j.value("majority_queue_size", eng.majority_queue_size);
  eng.minority_queue_size = j.value("minority_queue_size", eng.minority_queue_size);
  eng.epochs_offline = j.value("epochs_offline", eng.epochs_offline);
  eng.epochs_online = j.value("epochs_online", eng.epochs_online);
  eng.alpha = j.value("alpha", eng.alpha);
  eng.pretrain_majority_count = j.value("pretrain_majority_count", eng.pretrain_majority_count);
  eng.pretrain_minority_count = j.value("pretrain_minority_count", eng.pretrain_minority_count);
  eng.incremental_enabled = j.value("incremental_enabled", true);
  if (j.contains("ae_hidden")) eng.ae_hidden = j.at("ae_hidden").get<std::vector<int>>();
  eng.bottleneck = j.value("bottleneck", eng.bottleneck);
  if (j.contains("mlp_hidden")) eng.mlp_hidden = j.at("mlp_hidden").get<std::vector<int>>();
  if (j.contains("recon_loss")) eng.recon_loss = recon_loss_from_name(j.at("recon_loss"));
  eng.optimizer.learning_rate = j.value("learning_rate", eng.optimizer.learning_rate);
  eng.batch_size = j.value("batch_size", eng.batch_size);
  if (j.contains("smote")) {
    expect_keys(j.at("smote"), {"k_neighbors", "target_count"}, "smote");
    eng.smote.k_neighbors = j.at("smote").value("k_neighbors", eng.smote.k_neighbors);
    eng.smote.target_count = j.at("smote").value("target_count", eng.smote.target_count);
  }
  if (j.contains("retention")) {
    const json& r = j.at("retention");
    expect_keys(r, {"keep_min", "keep_max", "lambda", "min_keep", "k_density"}, "retention");
    eng.retention.keep_min = r.value("keep_min", eng.retention.keep_min);
    eng.retention.keep_max = r.value("keep_max", eng.retention.keep_max);
    eng.retention.lambda = r.value("lambda", eng.retention.lambda);
    eng.retention.min_keep = r.value("min_keep", eng.retention.min_keep);
    eng.retention.k_density = r.value("k_density", eng.retention.k_density);
  }
  return eng;
}

}  // namespace

std::string ExperimentConfig::to_json_string() const {
  json j;
  j["name"] = name;
  j["runs"] = runs;
  j["base_seed"] = base_seed;
  j["output_dir"] = output_dir;
  j["jobs"] = jobs;
  j["stream"] = stream_to_json(stream);
  j["engine"] = engine_to_json(engine);
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_config(std::string("config parse error: ") + e.what());
  }
  expect_keys(j, {"name", "runs", "base_seed", "output_dir", "jobs", "stream", "engine"},
              "experiment config");
  ExperimentConfig config;
  config.name = j.value("name", config.name);
  config.runs = j.value("runs", config.runs);
  config.base_seed = j.value("base_seed", config.base_seed);
  config.output_dir = j.value("output_dir", config.output_dir);
  config.jobs = j.value("jobs", config.jobs);
  if (j.contains("stream")) config.stream = stream_from_json(j.at("stream"));
  if (j.contains("engine")) config.engine = engine_from_json(j.at("engine"));
  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str());
}

RunResult execute_run(const ExperimentConfig& config, std::uint64_t seed) {
  StreamSpec spec = config.stream;
  spec.seed = seed;
  const Stream stream = generate_stream(spec);

  const SplitResult split = split_pretraining(stream, config.engine.pretrain_majority_count,
                                              config.engine.pretrain_minority_count);

  EngineConfig engine_config = config.engine;
  engine_config.seed = seed;
  Engine engine(engine_config);
  engine.pretrain(split.pretrain);

  PrequentialScorer scorer(0.99, stream.initial_classes);

  RunResult result;
  result.seed = seed;
  result.steps.reserve(split.online.size());

  double en_sum = 0.0;
  double gmean_sum = 0.0;
  for (const auto& item : split.online) {
    const StepOutcome outcome = engine.step(item.x, item.label);
    scorer.record(item.label, outcome.predicted_label, outcome.is_novel);
    if (outcome.class_promoted) {
      scorer.update_label_map(engine.memory().class_count() - 1, outcome.promoted_truths);
    }

    StepRecord rec;
    rec.timestep = outcome.timestep;
    rec.source_t = item.t;
    rec.true_label = item.label;
    rec.predicted_label = outcome.predicted_label;
    rec.is_novel = outcome.is_novel;
    rec.recon_loss = outcome.recon_loss;
    rec.theta_of_predicted = outcome.theta_of_predicted;
    rec.event = outcome.event;
    rec.class_promoted = outcome.class_promoted;
    rec.en_accuracy = scorer.en_accuracy();
    rec.g_mean = scorer.g_mean();
    for (int cls : scorer.appeared_classes()) rec.faded_recalls[cls] = scorer.faded_recall(cls);

    en_sum += rec.en_accuracy;
    gmean_sum += rec.g_mean;
    if (outcome.event == StepEvent::NewModelTrained) ++result.new_model_events;
    if (outcome.event == StepEvent::IncrementalTrained) ++result.incremental_events;
    if (outcome.class_promoted) ++result.promotions;
    result.steps.push_back(std::move(rec));
  }

  const double n = static_cast<double>(result.steps.size());
  result.avg_en_accuracy = n > 0 ? en_sum / n : 0.0;
  result.avg_g_mean = n > 0 ? gmean_sum / n : 0.0;
  result.final_en_accuracy = scorer.en_accuracy();
  result.final_g_mean = scorer.g_mean();
  result.false_negative_rate = scorer.false_negative_rate();
  result.peak_stored = engine.peak_stored();
  result.capacity_bound = engine.memory().capacity_bound();
  result.corrections = engine.correction_log();
  result.model_snapshot = engine.model().to_json_string();
  {
    std::ostringstream mem;
    engine.memory().export_csv(mem);
    result.memory_csv = mem.str();
  }
  return result;
}

void write_steps_csv(const RunResult& run, std::ostream& out) {
  out << "timestep,true_label,predicted_label,recon_loss,theta_of_predicted,event\n";
  for (const auto& rec : run.steps) {
    out << rec.timestep << "," << rec.true_label << "," << rec.predicted_label << ","
        << csv::format_double(rec.recon_loss) << ","
        << csv::format_double(rec.theta_of_predicted) << "," << step_event_name(rec.event)
        << "\n";
  }
}

namespace {

void write_metrics_csv(const RunResult& run, std::ostream& out) {
  std::vector<int> classes;
  if (!run.steps.empty()) {
    for (const auto& [cls, r] : run.steps.back().faded_recalls) classes.push_back(cls);
  }
  out << "timestep,en_accuracy,g_mean";
  for (int cls : classes) out << ",recall_" << cls;
  out << "\n";
  for (const auto& rec : run.steps) {
    out << rec.timestep << "," << csv::format_double(rec.en_accuracy) << ","
        << csv::format_double(rec.g_mean);
    for (int cls : classes) {
      const auto it = rec.faded_recalls.find(cls);
      out << "," << csv::format_double(it == rec.faded_recalls.end() ? 0.0 : it->second);
    }
    out << "\n";
  }
}

void write_corrections_csv(const RunResult& run, std::ostream& out) {
  out << "timestep,class,rho,s,rho_comp,r,kept,tau,mdc_before,mdc_after\n";
  for (const auto& event : run.corrections) {
    for (const auto& rec : event.records) {
      out << event.timestep << "," << rec.class_index << "," << csv::format_double(rec.rho) << ","
          << csv::format_double(rec.s) << "," << csv::format_double(rec.rho_comp) << ","
          << csv::format_double(rec.r) << "," << rec.kept << "," << csv::format_double(rec.tau)
          << "," << csv::format_double(rec.mdc_before) << "," << csv::format_double(rec.mdc_after)
          << "\n";
    }
  }
}

double sample_stderr(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return sd / std::sqrt(static_cast<double>(values.size()));
}

}  // namespace

std::string ExperimentSummary::to_json_string() const {
  json j;
  j["experiment"] = name;
  j["runs"] = runs;
  j["mean_avg_en_accuracy"] = mean_avg_en_accuracy;
  j["stderr_avg_en_accuracy"] = stderr_avg_en_accuracy;
  j["mean_avg_g_mean"] = mean_avg_g_mean;
  j["stderr_avg_g_mean"] = stderr_avg_g_mean;
  j["mean_fnr"] = mean_fnr;
  json per = json::array();
  for (const auto& run : per_run) {
    per.push_back({{"seed", run.seed},
                   {"avg_en_accuracy", run.avg_en_accuracy},
                   {"avg_g_mean", run.avg_g_mean},
                   {"final_en_accuracy", run.final_en_accuracy},
                   {"final_g_mean", run.final_g_mean},
                   {"false_negative_rate", run.false_negative_rate},
                   {"new_model_events", run.new_model_events},
                   {"incremental_events", run.incremental_events},
                   {"promotions", run.promotions},
                   {"peak_stored", run.peak_stored},
                   {"capacity_bound", run.capacity_bound}});
  }
  j["per_run"] = per;
  return j.dump(2);
}

ExperimentSummary run_experiment(const ExperimentConfig& config, bool write_outputs) {
  config.validate();

  std::vector<RunResult> results(static_cast<std::size_t>(config.runs));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(config.runs));

  const int jobs = std::min(config.jobs, config.runs);
  std::vector<std::thread> workers;
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= config.runs) break;
      try {
        results[static_cast<std::size_t>(i)] =
            execute_run(config, config.base_seed + static_cast<std::uint64_t>(i));
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    for (int j = 0; j < jobs; ++j) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  for (int i = 0; i < config.runs; ++i) {
    if (failures[static_cast<std::size_t>(i)]) {
      try {
        std::rethrow_exception(failures[static_cast<std::size_t>(i)]);
      } catch (const std::exception& e) {
        throw_internal("run with seed " +
                       std::to_string(config.base_seed + static_cast<std::uint64_t>(i)) +
                       " failed: " + e.what());
      }
    }
  }

  ExperimentSummary summary;
  summary.name = config.name;
  summary.runs = config.runs;
  std::vector<double> ens, gms;
  double fnr_sum = 0.0;
  for (const auto& run : results) {
    ens.push_back(run.avg_en_accuracy);
    gms.push_back(run.avg_g_mean);
    fnr_sum += run.false_negative_rate;
  }
  for (double v : ens) summary.mean_avg_en_accuracy += v;
  for (double v : gms) summary.mean_avg_g_mean += v;
  summary.mean_avg_en_accuracy /= static_cast<double>(config.runs);
  summary.mean_avg_g_mean /= static_cast<double>(config.runs);
  summary.stderr_avg_en_accuracy = sample_stderr(ens, summary.mean_avg_en_accuracy);
  summary.stderr_avg_g_mean = sample_stderr(gms, summary.mean_avg_g_mean);
  summary.mean_fnr = fnr_sum / static_cast<double>(config.runs);
  summary.per_run = std::move(results);

  if (write_outputs) {
    const fs::path root = fs::path(config.output_dir) / config.name;
    fs::create_directories(root);
    for (const auto& run : summary.per_run) {
      const fs::path dir = root / std::to_string(run.seed);
      fs::create_directories(dir);
      {
        std::ofstream out(dir / "steps.csv");
        write_steps_csv(run, out);
      }
      {
        std::ofstream out(dir / "metrics.csv");
        write_metrics_csv(run, out);
      }
      {
        std::ofstream out(dir / "corrections.csv");
        write_corrections_csv(run, out);
      }
      {
        std::ofstream out(dir / "model.json");
        out << run.model_snapshot;
      }
      {
        std::ofstream out(dir / "memory.csv");
        out << run.memory_csv;
      }
    }
    {
      std::ofstream out(root / "summary.json");
      out << summary.to_json_string() << "\n";
    }
    {
      std::ofstream out(root / "series.csv");
      out << "run,seed,timestep,en_accuracy,g_mean\n";
      for (std::size_t i = 0; i < summary.per_run.size(); ++i) {
        const auto& run = summary.per_run[i];
        for (const auto& rec : run.steps) {
          out << i << "," << run.seed << "," << rec.timestep << ","
              << csv::format_double(rec.en_accuracy) << "," << csv::format_double(rec.g_mean)
              << "\n";
        }
      }
    }
  }
  return summary;
}

std::string DiffReport::to_string() const {
  if (identical) return "identical";
  std::ostringstream oss;
  if (length_mismatch) {
    oss << "length mismatch: " << lines_a << " vs " << lines_b << " lines";
    if (first_diff_line > 0) {
      oss << "; first differing line " << first_diff_line;
    }
    return oss.str();
  }
  oss << "first difference at line " << first_diff_line << ":\n< " << line_a << "\n> " << line_b;
  return oss.str();
}

DiffReport diff_streams(const std::string& path_a, const std::string& path_b) {
  std::ifstream a(path_a);
  if (!a) throw_io("cannot open " + path_a);
  std::ifstream b(path_b);
  if (!b) throw_io("cannot open " + path_b);

  DiffReport report;
  std::string la, lb;
  long line = 0;
  while (true) {
    const bool got_a = static_cast<bool>(std::getline(a, la));
    const bool got_b = static_cast<bool>(std::getline(b, lb));
    ++line;
    if (!got_a && !got_b) {
      report.identical = report.first_diff_line == 0;
      report.lines_a = report.lines_b = line - 1;
      return report;
    }
    if (got_a != got_b) {
      report.length_mismatch = true;
      long extra_a = got_a ? 1 : 0;
      long extra_b = got_b ? 1 : 0;
      while (got_a && std::getline(a, la)) ++extra_a;
      while (got_b && std::getline(b, lb)) ++extra_b;
      report.lines_a = line - 1 + extra_a;
      report.lines_b = line - 1 + extra_b;
      if (report.first_diff_line == 0) report.first_diff_line = line;
      return report;
    }
    if (la != lb && report.first_diff_line == 0) {
      report.first_diff_line = line;
      report.line_a = la;
      report.line_b = lb;
      report.identical = false;
      report.lines_a = report.lines_b = 0;
      // keep counting lines to report totals
      long count = line;
      while (std::getline(a, la)) ++count;
      report.lines_a = count;
      count = line;
      while (std::getline(b, lb)) ++count;
      report.lines_b = count;
      return report;
    }
  }
}

}  // namespace scil
