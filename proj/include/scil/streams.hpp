#ifndef SCIL_STREAMS_HPP
#define SCIL_STREAMS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "scil/rng.hpp"

namespace scil {

using Eigen::VectorXd;

enum class DriftKind { Abrupt, Incremental, Recurrent, Gradual };
enum class GeneratorKind { Sea, Blob, Vib, CsvReplay };

const char* generator_name(GeneratorKind kind);
GeneratorKind generator_from_name(const std::string& name);

struct DriftEvent {
  long t_start = 0;
  long t_end = 0;  // == t_start for point events; window for incremental
  DriftKind kind = DriftKind::Abrupt;
};

struct DriftSchedule {
  std::vector<DriftEvent> events;
  // Event times must be strictly increasing and incremental windows
  // must satisfy t_start < t_end.
  void validate() const;
};

struct CsvTransform {
  long from_timestep = 0;
  double multiply = 1.0;
  double add = 0.0;
};

struct StreamSpec {
  GeneratorKind generator = GeneratorKind::Blob;
  long length = 15000;
  double imbalance_rate = 0.02;
  // appearance[c] is the first timestep class c may emit (1-based).
  std::vector<long> appearance;
  DriftSchedule schedule;
  std::uint64_t seed = 0;
  int initial_classes = 2;

  std::string csv_path;
  std::vector<CsvTransform> csv_transforms;
};

// Table-default specs for the three synthetic datasets.
StreamSpec blob_spec(std::uint64_t seed);
StreamSpec sea_spec(std::uint64_t seed);
StreamSpec vib_spec(std::uint64_t seed);

struct StreamItem {
  VectorXd x;
  int label = 0;
  long t = 0;  // 1-based source timestep
};

struct Stream {
  std::vector<StreamItem> items;
  int initial_classes = 2;
  int feature_dim = 0;
  // True for CSV replays, whose features are min-max scaled with
  // pretraining-split statistics at split time. Synthetic generators
  // emit already-scaled features.
  bool needs_scaling = false;
};

Stream generate_stream(const StreamSpec& spec);

void export_stream_csv(const Stream& stream, std::ostream& out);

// Diverts the first majority_count majority instances plus the first
// minority_count instances of each initial minority class into labeled
// pretraining sets; everything else stays online in order. For streams
// that need scaling, min-max statistics come from the diverted rows
// only and later values are not clipped.
struct SplitResult {
  std::vector<std::vector<VectorXd>> pretrain;  // by class 0..initial-1
  std::vector<StreamItem> online;
  VectorXd scale_min;  // empty when no rescaling was applied
  VectorXd scale_max;
};

SplitResult split_pretraining(const Stream& stream, int majority_count, int minority_count);

// Raw (unscaled) per-class samplers and concept parameters, exposed so
// tests can check the schedules directly.
namespace concepts {

constexpr double kBlobLo = -20.0, kBlobHi = 40.0;
constexpr double kVibLo = -5.0, kVibHi = 25.0;
constexpr double kSeaLo = 0.0, kSeaHi = 10.0;

Eigen::Vector3d blob_center(int cls, long t);
VectorXd blob_sample(int cls, long t, Rng& rng);

double vib_mean(int cls, long t);
VectorXd vib_sample(int cls, long t, Rng& rng);

bool sea_accepts(int cls, long t, double coord_sum);
VectorXd sea_sample(int cls, long t, Rng& rng);

int total_classes(GeneratorKind kind);

}  // namespace concepts

}  // namespace scil

#endif
