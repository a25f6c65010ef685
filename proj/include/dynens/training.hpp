#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "dynens/data.hpp"
#include "dynens/schedules.hpp"
#include "dynens/tiny_net.hpp"

namespace dynens {

/// Per-epoch history of one training run. snapshots[k] holds the
/// parameters after epoch k + 1 and history[k].handle == k.
struct TrainingRun {
  std::vector<EpochRecord> history;
  std::vector<NetParams> snapshots;
  /// Training rows consumed across all epochs; the cost unit for reports.
  std::uint64_t samples_processed = 0;
};

using LrSchedule = std::function<double(std::size_t epoch)>;

/// Trains from init_params(config) for `epochs` epochs, shuffling with
/// `shuffle_seed`, recording validation accuracy and parameters after every
/// epoch. Throws TrainingDiverged on a non-finite loss.
TrainingRun train_with_snapshots(const NetConfig& config, const LabeledDataset& train,
                                 const LabeledDataset& valid, std::size_t epochs,
                                 const LrSchedule& lr, std::uint64_t shuffle_seed);

}  // namespace dynens
