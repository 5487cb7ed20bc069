#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pio/physics.hpp"
#include "pio/tensor.hpp"
#include "pio/wno.hpp"

namespace pio {

enum class TrainMode { physics, data };

struct TrainConfig {
  TrainMode mode = TrainMode::physics;
  int epochs = 300;
  int batch = 10;          // 20 for the 1-D problems, 10 for the 2-D ones
  double lr = 1e-3;        // constant; no schedule
  double weight_decay = 1e-6;
  uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int log_every = 0;       // epochs between progress lines, 0 = silent
};

// One training example: the operator input before coordinate channels
// (H, W, in_channels) plus whatever the physics loss consumes for the sample
// (per-system shapes in the PhysicsLoss header, minus the batch axis).
struct TrainSample {
  Array model_input;
  Array physics_input;
};

struct TrainResult {
  ParamMap params;       // after the final epoch
  ParamMap best_params;  // after the epoch with the lowest mean loss
  std::vector<double> history;
  double best_loss = 0.0;
  int64_t best_epoch = -1;
};

// Adam with decoupled weight decay applied directly to the parameter:
//   theta <- (1 - wd) theta - lr * mhat / (sqrt(vhat) + eps)
class Adam {
 public:
  Adam(const ParamMap& params, const TrainConfig& cfg);
  void step(ParamMap& params, const std::map<std::string, Array>& grads);
  int64_t steps() const { return t_; }

 private:
  double lr_, wd_, b1_, b2_, eps_;
  int64_t t_ = 0;
  std::map<std::string, Array> m_, v_;
};

// Physics-informed training: minimizes the physics loss of model outputs;
// no solution data enters. Aborts with diagnostics on a non-finite loss.
TrainResult train_pio(const Wno& model, const std::vector<TrainSample>& samples,
                      const PhysicsLoss& physics, const TrainConfig& cfg);

// Data-driven training: minimizes the mean relative L2 error between
// predictions and targets[i] of shape (H, W, out_channels).
TrainResult train_data_driven(const Wno& model, const std::vector<Array>& inputs,
                              const std::vector<Array>& targets, const TrainConfig& cfg);

// Mean relative L2 prediction error over a bank (plain evaluation).
double mean_relative_l2(const Wno& model, const ParamMap& params,
                        const std::vector<Array>& inputs,
                        const std::vector<Array>& targets);

// Largest symmetric relative disagreement between the reverse-mode gradient
// of the physics loss and central finite differences, over n_coords randomly
// chosen parameter coordinates.
double gradient_check(const Wno& model, const PhysicsLoss& physics, const ParamMap& params,
                      const std::vector<TrainSample>& samples, int n_coords, uint64_t seed,
                      double step = 1e-5);

struct Checkpoint {
  WnoConfig model;
  ParamMap params;
  std::vector<double> history;
  std::string config_json;  // resolved experiment configuration, may be empty
};

// Named-array container; load(save(x)) reproduces parameters bitwise.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pio
