#include "scil/streams.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "scil/csv.hpp"
#include "scil/errors.hpp"

namespace scil {

const char* generator_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Sea: return "sea";
    case GeneratorKind::Blob: return "blob";
    case GeneratorKind::Vib: return "vib";
    case GeneratorKind::CsvReplay: return "csv";
  }
  return "?";
}

GeneratorKind generator_from_name(const std::string& name) {
  if (name == "sea") return GeneratorKind::Sea;
  if (name == "blob") return GeneratorKind::Blob;
  if (name == "vib") return GeneratorKind::Vib;
  if (name == "csv") return GeneratorKind::CsvReplay;
  throw_config("unknown generator: " + name);
}

void DriftSchedule::validate() const {
  long prev = -1;
  for (const auto& ev : events) {
    if (ev.t_start <= prev) throw_config("drift event times must be strictly increasing");
    if (ev.kind == DriftKind::Incremental) {
      if (ev.t_end <= ev.t_start) throw_config("incremental drift window needs t_start < t_end");
    } else if (ev.t_end != ev.t_start) {
      throw_config("point drift event must have t_end == t_start");
    }
    prev = ev.t_start;
  }
}

namespace concepts {

namespace {

constexpr long kBlobDrift = 7000;
constexpr long kSeaDrift1 = 5000, kSeaDrift2 = 10000;
constexpr long kVibW1a = 5000, kVibW1b = 5050, kVibW2a = 10000, kVibW2b = 10050;

double scale_to(double v, double lo, double hi) { return (v - lo) / (hi - lo); }

}  // namespace

int total_classes(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Sea: return 4;
    case GeneratorKind::Blob: return 7;
    case GeneratorKind::Vib: return 4;
    case GeneratorKind::CsvReplay: return 0;
  }
  return 0;
}

Eigen::Vector3d blob_center(int cls, long t) {
  switch (cls) {
    case 0:
      return t >= kBlobDrift ? Eigen::Vector3d(-9.5, -9.5, -9.5)
                             : Eigen::Vector3d(-10.0, -10.0, -10.0);
    case 1: return {0.0, 0.0, 0.0};
    case 2: return {5.0, 5.0, 5.0};
    case 3: return {15.0, 15.0, 15.0};
    case 4: return {25.0, 25.0, 25.0};
    case 5: return {-15.0, -15.0, -15.0};
    case 6: return {35.0, 35.0, 35.0};
    default: throw_config("blob class out of range");
  }
}

VectorXd blob_sample(int cls, long t, Rng& rng) {
  const Eigen::Vector3d c = blob_center(cls, t);
  VectorXd x(3);
  for (int i = 0; i < 3; ++i) x(i) = rng.normal(c(i), 1.0);
  return x;
}

double vib_mean(int cls, long t) {
  double before = 0.0;
  switch (cls) {
    case 0: before = 0.0; break;
    case 1: before = 5.0; break;
    case 2: before = 10.0; break;
    case 3: return 20.0;  // absent from the after-drift spec, so constant
    default: throw_config("vib class out of range");
  }
  const double after = before + 0.5;
  if (t < kVibW1a) return before;
  if (t <= kVibW1b) {
    const double frac = static_cast<double>(t - kVibW1a) / static_cast<double>(kVibW1b - kVibW1a);
    return before + frac * (after - before);
  }
  if (t < kVibW2a) return after;
  if (t <= kVibW2b) {
    const double frac = static_cast<double>(t - kVibW2a) / static_cast<double>(kVibW2b - kVibW2a);
    return after + frac * (before - after);  // recurrent return
  }
  return before;
}

VectorXd vib_sample(int cls, long t, Rng& rng) {
  const double mean = vib_mean(cls, t);
  VectorXd x(10);
  for (int i = 0; i < 10; ++i) x(i) = rng.normal(mean, 1.0);
  return x;
}

bool sea_accepts(int cls, long t, double sum) {
  const bool drifted = t >= kSeaDrift1 && t < kSeaDrift2;
  switch (cls) {
    case 0: return drifted ? sum > 16.0 : sum > 15.0;
    case 1: return drifted ? sum <= 1.5 : sum <= 2.0;
    case 2: return drifted ? (sum > 5.0 && sum < 6.5) : (sum > 5.0 && sum < 6.0);
    case 3: return sum > 9.0 && sum < 10.0;  // absent from the after-drift spec
    default: throw_config("sea class out of range");
  }
}

VectorXd sea_sample(int cls, long t, Rng& rng) {
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    VectorXd x(2);
    x(0) = rng.uniform(kSeaLo, kSeaHi);
    x(1) = rng.uniform(kSeaLo, kSeaHi);
    if (sea_accepts(cls, t, x(0) + x(1))) return x;
  }
  throw_config("sea concept region infeasible under coordinate range");
}

}  // namespace concepts

StreamSpec blob_spec(std::uint64_t seed) {
  StreamSpec spec;
  spec.generator = GeneratorKind::Blob;
  spec.length = 15000;
  spec.imbalance_rate = 0.02;
  spec.initial_classes = 2;
  spec.appearance = {1, 1, 2500, 4500, 7000, 8600, 10400};
  spec.schedule.events = {{7000, 7000, DriftKind::Abrupt}};
  spec.seed = seed;
  return spec;
}

StreamSpec sea_spec(std::uint64_t seed) {
  StreamSpec spec;
  spec.generator = GeneratorKind::Sea;
  spec.length = 15000;
  spec.imbalance_rate = 0.013;
  spec.initial_classes = 2;
  spec.appearance = {1, 1, 2000, 6500};
  spec.schedule.events = {{5000, 5000, DriftKind::Recurrent}, {10000, 10000, DriftKind::Recurrent}};
  spec.seed = seed;
  return spec;
}

StreamSpec vib_spec(std::uint64_t seed) {
  StreamSpec spec;
  spec.generator = GeneratorKind::Vib;
  spec.length = 15000;
  spec.imbalance_rate = 0.02;
  spec.initial_classes = 2;
  spec.appearance = {1, 1, 2000, 5200};
  spec.schedule.events = {{5000, 5050, DriftKind::Incremental},
                          {10000, 10050, DriftKind::Incremental}};
  spec.seed = seed;
  return spec;
}

namespace {

Stream generate_synthetic(const StreamSpec& spec) {
  spec.schedule.validate();
  const int classes = concepts::total_classes(spec.generator);
  if (spec.appearance.size() != static_cast<std::size_t>(classes)) {
    throw_config("appearance times must cover every class of the generator");
  }
  if (spec.imbalance_rate <= 0.0 || spec.imbalance_rate >= 1.0) {
    throw_config("imbalance rate must lie in (0, 1)");
  }

  Rng rng(spec.seed);
  Stream stream;
  stream.initial_classes = spec.initial_classes;
  stream.needs_scaling = false;
  stream.feature_dim = spec.generator == GeneratorKind::Vib ? 10
                       : spec.generator == GeneratorKind::Blob ? 3 : 2;
  stream.items.reserve(static_cast<std::size_t>(spec.length));

  std::vector<int> available;
  for (long t = 1; t <= spec.length; ++t) {
    available.clear();
    for (int c = 1; c < classes; ++c) {
      if (spec.appearance[static_cast<std::size_t>(c)] <= t) available.push_back(c);
    }
    int cls = 0;
    if (!available.empty() && rng.uniform() < spec.imbalance_rate) {
      cls = available[rng.uniform_int(available.size())];
    }
    VectorXd raw;
    double lo = 0.0, hi = 1.0;
    switch (spec.generator) {
      case GeneratorKind::Blob:
        raw = concepts::blob_sample(cls, t, rng);
        lo = concepts::kBlobLo;
        hi = concepts::kBlobHi;
        break;
      case GeneratorKind::Vib:
        raw = concepts::vib_sample(cls, t, rng);
        lo = concepts::kVibLo;
        hi = concepts::kVibHi;
        break;
      case GeneratorKind::Sea:
        raw = concepts::sea_sample(cls, t, rng);
        lo = concepts::kSeaLo;
        hi = concepts::kSeaHi;
        break;
      default:
        throw_internal("generate_synthetic on csv spec");
    }
    StreamItem item;
    item.x = (raw.array() - lo) / (hi - lo);
    item.label = cls;
    item.t = t;
    stream.items.push_back(std::move(item));
  }
  return stream;
}

Stream ingest_csv(const StreamSpec& spec) {
  std::ifstream in(spec.csv_path);
  if (!in) throw_io("cannot open stream file: " + spec.csv_path);

  Stream stream;
  stream.initial_classes = spec.initial_classes;
  stream.needs_scaling = true;

  std::string line;
  if (!std::getline(in, line)) {
    return stream;  // empty file: empty stream
  }
  const std::size_t field_count = csv::split_line(line).size();
  if (field_count < 2) throw_config("stream file header needs label plus features");
  stream.feature_dim = static_cast<int>(field_count) - 1;

  int line_number = 1;
  long t = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != field_count) {
      throw_config("row at line " + std::to_string(line_number) + " has " +
                   std::to_string(fields.size()) + " fields, header has " +
                   std::to_string(field_count));
    }
    StreamItem item;
    item.label = static_cast<int>(csv::parse_long(fields[0], line_number));
    if (item.label < 0) {
      throw_ingestion("negative class label at line " + std::to_string(line_number));
    }
    item.x.resize(stream.feature_dim);
    for (int i = 0; i < stream.feature_dim; ++i) {
      item.x(i) = csv::parse_double(fields[static_cast<std::size_t>(i) + 1], line_number);
    }
    item.t = ++t;
    for (const auto& tr : spec.csv_transforms) {
      if (item.t >= tr.from_timestep) {
        item.x = (item.x.array() * tr.multiply + tr.add).matrix();
      }
    }
    stream.items.push_back(std::move(item));
  }
  return stream;
}

}  // namespace

Stream generate_stream(const StreamSpec& spec) {
  if (spec.generator == GeneratorKind::CsvReplay) return ingest_csv(spec);
  return generate_synthetic(spec);
}

void export_stream_csv(const Stream& stream, std::ostream& out) {
  out << "label";
  for (int i = 0; i < stream.feature_dim; ++i) out << ",f" << (i + 1);
  out << "\n";
  for (const auto& item : stream.items) {
    out << item.label;
    for (Eigen::Index i = 0; i < item.x.size(); ++i) {
      out << "," << csv::format_double(item.x(i));
    }
    out << "\n";
  }
}

SplitResult split_pretraining(const Stream& stream, int majority_count, int minority_count) {
  SplitResult result;
  result.pretrain.resize(static_cast<std::size_t>(stream.initial_classes));

  std::vector<int> want(static_cast<std::size_t>(stream.initial_classes), minority_count);
  want[0] = majority_count;

  for (const auto& item : stream.items) {
    if (item.label < stream.initial_classes &&
        static_cast<int>(result.pretrain[static_cast<std::size_t>(item.label)].size()) <
            want[static_cast<std::size_t>(item.label)]) {
      result.pretrain[static_cast<std::size_t>(item.label)].push_back(item.x);
    } else {
      result.online.push_back(item);
    }
  }

  for (int c = 0; c < stream.initial_classes; ++c) {
    const auto have = static_cast<int>(result.pretrain[static_cast<std::size_t>(c)].size());
    if (have < want[static_cast<std::size_t>(c)]) {
      std::ostringstream oss;
      oss << "insufficient pretraining instances for class " << c << ": need "
          << want[static_cast<std::size_t>(c)] << ", stream provides " << have;
      throw_config(oss.str());
    }
  }

  if (stream.needs_scaling && stream.feature_dim > 0) {
    VectorXd lo = VectorXd::Constant(stream.feature_dim, std::numeric_limits<double>::infinity());
    VectorXd hi = VectorXd::Constant(stream.feature_dim, -std::numeric_limits<double>::infinity());
    for (const auto& cls : result.pretrain) {
      for (const auto& x : cls) {
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
      }
    }
    VectorXd range = hi - lo;
    for (Eigen::Index i = 0; i < range.size(); ++i) {
      if (range(i) <= 0.0) range(i) = 1.0;  // constant column maps to 0
    }
    auto apply = [&](VectorXd& x) { x = ((x - lo).array() / range.array()).matrix(); };
    for (auto& cls : result.pretrain) {
      for (auto& x : cls) apply(x);
    }
    for (auto& item : result.online) apply(item.x);
    result.scale_min = lo;
    result.scale_max = hi;
  }
  return result;
}

}  // namespace scil
