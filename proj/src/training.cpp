#include "dynens/training.hpp"

#include <stdexcept>

namespace dynens {

TrainingRun train_with_snapshots(const NetConfig& config, const LabeledDataset& train,
                                 const LabeledDataset& valid, std::size_t epochs,
                                 const LrSchedule& lr, std::uint64_t shuffle_seed) {
  if (epochs == 0) throw std::invalid_argument("training needs at least one epoch");
  if (train.dims() != config.input_dim || valid.dims() != config.input_dim) {
    throw std::invalid_argument("dataset dimension does not match network input");
  }
  auto state = TrainState::start(config, shuffle_seed);
  TrainingRun run;
  run.history.reserve(epochs);
  run.snapshots.reserve(epochs);
  for (std::size_t t = 1; t <= epochs; ++t) {
    train_epoch(state, train, config.batch_size, lr(t));
    run.samples_processed += train.size();
    run.history.push_back({t, evaluate(state.params, valid), run.snapshots.size()});
    run.snapshots.push_back(state.params);
  }
  return run;
}

}  // namespace dynens
