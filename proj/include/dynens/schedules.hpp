#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dynens {

/// Cosine annealing restarted every ceil(T / N) epochs.
struct CyclicCosineSchedule {
  double alpha0 = 0.0;
  std::size_t total_epochs = 0;  ///< T
  std::size_t cycles = 0;        ///< N

  std::size_t window() const;
  void validate() const;
};

/// lr(t) = alpha0 * multiplier of the last milestone reached (alpha0 before
/// the first one). Multipliers are relative to alpha0, not cumulative.
struct StepDecaySchedule {
  struct Milestone {
    std::size_t epoch = 0;
    double multiplier = 1.0;
  };

  double alpha0 = 0.0;
  std::vector<Milestone> milestones;

  /// Milestones at 40%, 60% and 80% of T with multipliers 1e-1, 1e-2, 1e-3.
  /// T = 200 gives epochs 80, 120, 160.
  static StepDecaySchedule staircase(double alpha0, std::size_t total_epochs);
  void validate() const;
};

/// t is 1-based and must lie in [1, T].
double cyclic_cosine_lr(std::size_t t, const CyclicCosineSchedule& sched);
/// t is 1-based.
double step_decay_lr(std::size_t t, const StepDecaySchedule& sched);

/// Validation accuracy of the parameters at the end of one epoch. `handle`
/// indexes whatever store holds that epoch's parameters.
struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based
  double val_acc = 0.0;
  std::size_t handle = 0;
};

/// Best record of each ceil(T/N)-epoch window, ordered by window. Ties go to
/// the earlier epoch. Throws std::invalid_argument if the history does not
/// cover epochs 1..T or fewer than N windows are non-empty.
std::vector<EpochRecord> cyclic_snapshot_select(std::span<const EpochRecord> history,
                                                std::size_t total_epochs, std::size_t cycles);

/// The N best records by val_acc, best first, earlier epoch on ties.
std::vector<EpochRecord> topn_snapshot_select(std::span<const EpochRecord> history,
                                              std::size_t n);

}  // namespace dynens
