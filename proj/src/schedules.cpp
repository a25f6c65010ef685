#include "dynens/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dynens {

std::size_t CyclicCosineSchedule::window() const {
  return (total_epochs + cycles - 1) / cycles;
}

void CyclicCosineSchedule::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw std::invalid_argument("alpha0 must be positive");
  }
  if (cycles == 0) throw std::invalid_argument("cyclic schedule needs N >= 1");
  if (total_epochs < cycles) throw std::invalid_argument("cyclic schedule needs T >= N");
}

StepDecaySchedule StepDecaySchedule::staircase(double alpha0, std::size_t total_epochs) {
  StepDecaySchedule s{alpha0, {}};
  const std::size_t at[] = {total_epochs * 2 / 5, total_epochs * 3 / 5, total_epochs * 4 / 5};
  const double mult[] = {1e-1, 1e-2, 1e-3};
  for (int k = 0; k < 3; ++k) {
    if (at[k] == 0 || (!s.milestones.empty() && at[k] <= s.milestones.back().epoch)) continue;
    s.milestones.push_back({at[k], mult[k]});
  }
  return s;
}

void StepDecaySchedule::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw std::invalid_argument("alpha0 must be positive");
  }
  for (std::size_t k = 0; k < milestones.size(); ++k) {
    if (!(milestones[k].multiplier > 0.0)) {
      throw std::invalid_argument("milestone multipliers must be positive");
    }
    if (k > 0 && milestones[k].epoch <= milestones[k - 1].epoch) {
      throw std::invalid_argument("milestone epochs must be strictly increasing");
    }
  }
}

double cyclic_cosine_lr(std::size_t t, const CyclicCosineSchedule& sched) {
  sched.validate();
  if (t < 1 || t > sched.total_epochs) {
    throw std::invalid_argument("epoch " + std::to_string(t) + " outside [1, " +
                                std::to_string(sched.total_epochs) + "]");
  }
  const auto w = sched.window();
  const double phase = static_cast<double>((t - 1) % w) / static_cast<double>(w);
  return sched.alpha0 / 2.0 * (std::cos(std::numbers::pi * phase) + 1.0);
}

double step_decay_lr(std::size_t t, const StepDecaySchedule& sched) {
  sched.validate();
  if (t < 1) throw std::invalid_argument("epochs are 1-based");
  double mult = 1.0;
  for (const auto& m : sched.milestones) {
    if (m.epoch <= t) mult = m.multiplier;
  }
  return sched.alpha0 * mult;
}

namespace {

bool better(const EpochRecord& a, const EpochRecord& b) {
  if (a.val_acc != b.val_acc) return a.val_acc > b.val_acc;
  return a.epoch < b.epoch;
}

}  // namespace

std::vector<EpochRecord> cyclic_snapshot_select(std::span<const EpochRecord> history,
                                                std::size_t total_epochs, std::size_t cycles) {
  CyclicCosineSchedule{1.0, total_epochs, cycles}.validate();
  std::vector<bool> seen(total_epochs + 1, false);
  for (const auto& r : history) {
    if (r.epoch >= 1 && r.epoch <= total_epochs) seen[r.epoch] = true;
  }
  if (std::count(seen.begin() + 1, seen.end(), true) != static_cast<std::ptrdiff_t>(total_epochs)) {
    throw std::invalid_argument("history does not cover epochs 1.." + std::to_string(total_epochs));
  }
  const auto w = (total_epochs + cycles - 1) / cycles;
  const auto windows = (total_epochs + w - 1) / w;
  if (windows < cycles) {
    throw std::invalid_argument("T=" + std::to_string(total_epochs) + " and N=" +
                                std::to_string(cycles) + " give only " + std::to_string(windows) +
                                " non-empty windows");
  }
  std::vector<EpochRecord> best(cycles);
  std::vector<bool> filled(cycles, false);
  for (const auto& r : history) {
    if (r.epoch < 1 || r.epoch > total_epochs) continue;
    const auto win = (r.epoch - 1) / w;
    if (!filled[win] || better(r, best[win])) {
      best[win] = r;
      filled[win] = true;
    }
  }
  return best;
}

std::vector<EpochRecord> topn_snapshot_select(std::span<const EpochRecord> history,
                                              std::size_t n) {
  if (n == 0) throw std::invalid_argument("top-N selection needs N >= 1");
  if (history.size() < n) {
    throw std::invalid_argument("history has " + std::to_string(history.size()) +
                                " records, fewer than N=" + std::to_string(n));
  }
  std::vector<EpochRecord> sorted(history.begin(), history.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n), sorted.end(),
                    better);
  sorted.resize(n);
  return sorted;
}

}  // namespace dynens
