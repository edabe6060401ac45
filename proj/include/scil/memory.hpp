#ifndef SCIL_MEMORY_HPP
#define SCIL_MEMORY_HPP

#include <Eigen/Dense>
#include <deque>
#include <iosfwd>
#include <vector>

namespace scil {

using Eigen::VectorXd;

struct StoredInstance {
  VectorXd features;
  long timestep = 0;
  // Ride-along ground truth for scoring only; -1 when unavailable. No
  // training or detection path may read it.
  int true_label = -1;
};

// Bounded FIFO queue; appending past capacity evicts the oldest item.
class ClassQueue {
public:
  explicit ClassQueue(int capacity);

  void append(StoredInstance item);
  std::size_t size() const { return items_.size(); }
  bool full() const { return items_.size() == static_cast<std::size_t>(capacity_); }
  int capacity() const { return capacity_; }
  const std::deque<StoredInstance>& items() const { return items_; }

  // Used by the corrector to install a purified subset; the replacement
  // must not exceed capacity.
  void replace_items(std::vector<StoredInstance> kept);

private:
  int capacity_;
  std::deque<StoredInstance> items_;
};

// Queue q_0 for the majority class (capacity m), q_1..q_n for minority
// classes and one buffer q_{n+1} for suspected-new-class instances
// (capacity l each). Total storage never exceeds m + (n+1)*l.
class DynamicMemory {
public:
  DynamicMemory(int majority_capacity, int minority_capacity, int initial_minority_count);

  // class_index 0 is the majority queue; 1..n are minority queues.
  void append(int class_index, StoredInstance item);
  void append_novel(StoredInstance item);

  bool novel_full() const { return novel_.full(); }

  // Turns the full novel buffer into minority queue q_{n+1} and starts a
  // fresh empty buffer.
  void promote_novel();

  int minority_count() const { return static_cast<int>(minorities_.size()); }
  // Number of class queues, i.e. n + 1.
  int class_count() const { return minority_count() + 1; }

  const ClassQueue& majority() const { return majority_; }
  const ClassQueue& minority(int i) const;
  ClassQueue& minority_mut(int i);
  const ClassQueue& novel_buffer() const { return novel_; }

  const ClassQueue& class_queue(int class_index) const;

  std::size_t total_stored() const;
  std::size_t capacity_bound() const;

  // Per-class feature snapshot; index is the pseudo-label (queue index).
  std::vector<std::vector<VectorXd>> snapshot_for_training() const;

  // One row per stored instance: timestep,queue_id,f1,...,fd. The novel
  // buffer exports as queue_id n+1.
  void export_csv(std::ostream& out) const;

private:
  int minority_capacity_;
  ClassQueue majority_;
  std::vector<ClassQueue> minorities_;
  ClassQueue novel_;
};

}  // namespace scil

#endif
