#include "scil/memory.hpp"

#include <ostream>
#include <sstream>

#include "scil/csv.hpp"
#include "scil/errors.hpp"

namespace scil {

ClassQueue::ClassQueue(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw_config("queue capacity must be positive");
}

void ClassQueue::append(StoredInstance item) {
  items_.push_back(std::move(item));
  if (items_.size() > static_cast<std::size_t>(capacity_)) {
    items_.pop_front();
  }
}

void ClassQueue::replace_items(std::vector<StoredInstance> kept) {
  if (kept.size() > static_cast<std::size_t>(capacity_)) {
    throw_internal("queue replacement exceeds capacity");
  }
  items_.assign(std::make_move_iterator(kept.begin()), std::make_move_iterator(kept.end()));
}

DynamicMemory::DynamicMemory(int majority_capacity, int minority_capacity,
                             int initial_minority_count)
    : minority_capacity_(minority_capacity),
      majority_(majority_capacity),
      novel_(minority_capacity) {
  if (minority_capacity > majority_capacity) {
    throw_config("minority queue capacity must not exceed majority capacity");
  }
  for (int i = 0; i < initial_minority_count; ++i) {
    minorities_.emplace_back(minority_capacity);
  }
}

void DynamicMemory::append(int class_index, StoredInstance item) {
  if (class_index == 0) {
    majority_.append(std::move(item));
  } else if (class_index >= 1 && class_index <= minority_count()) {
    minorities_[static_cast<std::size_t>(class_index - 1)].append(std::move(item));
  } else {
    std::ostringstream oss;
    oss << "append to nonexistent class queue " << class_index;
    throw_internal(oss.str());
  }
}

void DynamicMemory::append_novel(StoredInstance item) { novel_.append(std::move(item)); }

void DynamicMemory::promote_novel() {
  if (!novel_.full()) throw_internal("promote_novel requires a full buffer");
  minorities_.push_back(std::move(novel_));
  novel_ = ClassQueue(minority_capacity_);
}

const ClassQueue& DynamicMemory::minority(int i) const {
  if (i < 1 || i > minority_count()) throw_internal("minority queue index out of range");
  return minorities_[static_cast<std::size_t>(i - 1)];
}

ClassQueue& DynamicMemory::minority_mut(int i) {
  if (i < 1 || i > minority_count()) throw_internal("minority queue index out of range");
  return minorities_[static_cast<std::size_t>(i - 1)];
}

const ClassQueue& DynamicMemory::class_queue(int class_index) const {
  return class_index == 0 ? majority_ : minority(class_index);
}

std::size_t DynamicMemory::total_stored() const {
  std::size_t total = majority_.size() + novel_.size();
  for (const auto& q : minorities_) total += q.size();
  return total;
}

std::size_t DynamicMemory::capacity_bound() const {
  return static_cast<std::size_t>(majority_.capacity()) +
         static_cast<std::size_t>(minority_count() + 1) *
             static_cast<std::size_t>(minority_capacity_);
}

std::vector<std::vector<VectorXd>> DynamicMemory::snapshot_for_training() const {
  std::vector<std::vector<VectorXd>> classes(static_cast<std::size_t>(class_count()));
  for (const auto& item : majority_.items()) classes[0].push_back(item.features);
  for (int i = 1; i <= minority_count(); ++i) {
    for (const auto& item : minority(i).items()) {
      classes[static_cast<std::size_t>(i)].push_back(item.features);
    }
  }
  return classes;
}

void DynamicMemory::export_csv(std::ostream& out) const {
  out << "timestep,queue_id";
  const Eigen::Index dim = majority_.items().empty()
                               ? (minorities_.empty() || minorities_[0].items().empty()
                                      ? 0
                                      : minorities_[0].items().front().features.size())
                               : majority_.items().front().features.size();
  for (Eigen::Index i = 0; i < dim; ++i) out << ",f" << (i + 1);
  out << "\n";
  auto dump_queue = [&](const ClassQueue& q, int id) {
    for (const auto& item : q.items()) {
      out << item.timestep << "," << id;
      for (Eigen::Index i = 0; i < item.features.size(); ++i) {
        out << "," << csv::format_double(item.features(i));
      }
      out << "\n";
    }
  };
  dump_queue(majority_, 0);
  for (int i = 1; i <= minority_count(); ++i) dump_queue(minority(i), i);
  dump_queue(novel_, minority_count() + 1);
}

}  // namespace scil
