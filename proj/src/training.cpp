#include "pio/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pio/array_io.hpp"

namespace pio {

namespace {

void check_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("training: epochs must be >= 1");
  if (cfg.batch < 1) throw std::invalid_argument("training: batch size must be >= 1");
  if (cfg.lr < 0.0) throw std::invalid_argument("training: learning rate must be >= 0");
  if (cfg.weight_decay < 0.0 || cfg.weight_decay >= 1.0)
    throw std::invalid_argument("training: weight decay must be in [0, 1)");
}

Array stack(const std::vector<const Array*>& rows) {
  const Array& first = *rows.front();
  std::vector<int64_t> shape;
  shape.push_back(static_cast<int64_t>(rows.size()));
  for (int64_t d : first.shape()) shape.push_back(d);
  Array out(shape);
  const int64_t per = first.size();
  for (size_t b = 0; b < rows.size(); ++b) {
    if (!rows[b]->same_shape(first))
      throw std::invalid_argument("training: samples disagree in shape");
    std::copy(rows[b]->data(), rows[b]->data() + per, out.data() + b * per);
  }
  return out;
}

VarMap make_leaves(const ParamMap& params) {
  VarMap vars;
  for (const auto& [key, value] : params) vars.emplace(key, ad::Var::leaf(value, true));
  return vars;
}

std::map<std::string, Array> collect_grads(const VarMap& vars) {
  std::map<std::string, Array> grads;
  for (const auto& [key, var] : vars) {
    const Array& g = var.grad();
    grads.emplace(key, g.size() > 0 ? g : Array(var.value().shape()));
  }
  return grads;
}

// mean over the batch of |pred - target| / |target| in the L2 sense;
// zero-norm targets fall back to the absolute norm
ad::Var relative_l2(const ad::Var& pred, const Array& targets) {
  const int64_t b = targets.dim(0);
  Array inv_norm({b});
  const int64_t per = targets.size() / b;
  for (int64_t s = 0; s < b; ++s) {
    double nsq = 0.0;
    for (int64_t i = 0; i < per; ++i) {
      const double v = targets[s * per + i];
      nsq += v * v;
    }
    const double n = std::sqrt(nsq);
    inv_norm[s] = n > 0.0 ? 1.0 / n : 1.0;
  }
  ad::Var per_sample = ad::sqrt_v(ad::sum_per_sample(ad::square(ad::sub_const(pred, targets))));
  return ad::mean(ad::mul_const(per_sample, inv_norm));
}

struct BatchPlan {
  std::vector<std::vector<int64_t>> batches;
};

BatchPlan plan_epoch(std::vector<int64_t>& order, std::mt19937_64& eng, int batch) {
  std::shuffle(order.begin(), order.end(), eng);
  BatchPlan plan;
  for (size_t start = 0; start < order.size(); start += batch) {
    const size_t stop = std::min(order.size(), start + batch);
    plan.batches.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return plan;
}

}  // namespace

Adam::Adam(const ParamMap& params, const TrainConfig& cfg)
    : lr_(cfg.lr), wd_(cfg.weight_decay), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.adam_eps) {
  for (const auto& [key, value] : params) {
    m_.emplace(key, Array(value.shape()));
    v_.emplace(key, Array(value.shape()));
  }
}

void Adam::step(ParamMap& params, const std::map<std::string, Array>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (auto& [key, theta] : params) {
    auto git = grads.find(key);
    if (git == grads.end()) throw std::invalid_argument("Adam: missing gradient for " + key);
    const Array& g = git->second;
    Array& m = m_.at(key);
    Array& v = v_.at(key);
    for (int64_t i = 0; i < theta.size(); ++i) {
      m[i] = b1_ * m[i] + (1.0 - b1_) * g[i];
      v[i] = b2_ * v[i] + (1.0 - b2_) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      theta[i] = (1.0 - wd_) * theta[i] - lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

namespace {

// shared epoch loop; build_loss returns the scalar loss Var for one batch
template <typename BuildLoss>
TrainResult run_training(const Wno& model, int64_t n_samples, const TrainConfig& cfg,
                         const BuildLoss& build_loss) {
  check_config(cfg);
  if (n_samples == 0) throw std::invalid_argument("training: no samples");

  TrainResult result;
  result.params = model.init_params(cfg.seed);
  Adam opt(result.params, cfg);
  std::mt19937_64 eng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<int64_t> order(n_samples);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    BatchPlan plan = plan_epoch(order, eng, cfg.batch);
    double epoch_loss = 0.0;
    for (size_t bi = 0; bi < plan.batches.size(); ++bi) {
      const auto& idxs = plan.batches[bi];
      VarMap leaves = make_leaves(result.params);
      ad::Var loss = build_loss(idxs, leaves, epoch, bi);
      const double value = loss.value()[0];
      epoch_loss += value * static_cast<double>(idxs.size());
      ad::backward(loss);
      opt.step(result.params, collect_grads(leaves));
    }
    epoch_loss /= static_cast<double>(n_samples);
    result.history.push_back(epoch_loss);
    if (result.best_epoch < 0 || epoch_loss < result.best_loss) {
      result.best_loss = epoch_loss;
      result.best_epoch = epoch;
      result.best_params = result.params;
    }
    if (cfg.log_every > 0 && (epoch % cfg.log_every == 0 || epoch == cfg.epochs - 1))
      std::printf("epoch %4d  loss %.6e\n", epoch, epoch_loss);
  }
  return result;
}

}  // namespace

TrainResult train_pio(const Wno& model, const std::vector<TrainSample>& samples,
                      const PhysicsLoss& physics, const TrainConfig& cfg) {
  auto build = [&](const std::vector<int64_t>& idxs, const VarMap& leaves, int epoch,
                   size_t batch_index) {
    std::vector<const Array*> xin, pin;
    for (int64_t i : idxs) {
      xin.push_back(&samples[i].model_input);
      pin.push_back(&samples[i].physics_input);
    }
    Array x = model.encode(stack(xin));
    Array phys = stack(pin);
    ad::Var pred = model.forward(ad::Var::leaf(std::move(x)), leaves);
    ad::Var loss = physics.loss(pred, phys);
    const double value = loss.value()[0];
    if (!std::isfinite(value)) {
      LossTerms terms = physics.loss_terms(pred.value(), phys);
      std::ostringstream msg;
      msg << "train_pio: non-finite loss at epoch " << epoch << ", batch " << batch_index
          << " (residual " << terms.residual << ", boundary " << terms.boundary
          << ", initial " << terms.initial << ")";
      throw std::runtime_error(msg.str());
    }
    return loss;
  };
  return run_training(model, static_cast<int64_t>(samples.size()), cfg, build);
}

TrainResult train_data_driven(const Wno& model, const std::vector<Array>& inputs,
                              const std::vector<Array>& targets, const TrainConfig& cfg) {
  if (inputs.size() != targets.size())
    throw std::invalid_argument("train_data_driven: inputs/targets size mismatch");
  auto build = [&](const std::vector<int64_t>& idxs, const VarMap& leaves, int epoch,
                   size_t batch_index) {
    std::vector<const Array*> xin, yin;
    for (int64_t i : idxs) {
      xin.push_back(&inputs[i]);
      yin.push_back(&targets[i]);
    }
    Array x = model.encode(stack(xin));
    Array y = stack(yin);
    ad::Var pred = model.forward(ad::Var::leaf(std::move(x)), leaves);
    ad::Var loss = relative_l2(pred, y);
    if (!std::isfinite(loss.value()[0])) {
      std::ostringstream msg;
      msg << "train_data_driven: non-finite loss at epoch " << epoch << ", batch "
          << batch_index;
      throw std::runtime_error(msg.str());
    }
    return loss;
  };
  return run_training(model, static_cast<int64_t>(inputs.size()), cfg, build);
}

double mean_relative_l2(const Wno& model, const ParamMap& params,
                        const std::vector<Array>& inputs,
                        const std::vector<Array>& targets) {
  if (inputs.size() != targets.size() || inputs.empty())
    throw std::invalid_argument("mean_relative_l2: bad bank sizes");
  double total = 0.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    Array x = model.encode(stack({&inputs[i]}));
    Array pred = model.forward_value(x, params);
    const Array& y = targets[i];
    if (pred.size() != y.size())
      throw std::invalid_argument("mean_relative_l2: target shape mismatch");
    double dsq = 0.0, nsq = 0.0;
    for (int64_t k = 0; k < y.size(); ++k) {
      const double d = pred[k] - y[k];
      dsq += d * d;
      nsq += y[k] * y[k];
    }
    total += std::sqrt(dsq) / (nsq > 0.0 ? std::sqrt(nsq) : 1.0);
  }
  return total / static_cast<double>(inputs.size());
}

double gradient_check(const Wno& model, const PhysicsLoss& physics, const ParamMap& params,
                      const std::vector<TrainSample>& samples, int n_coords, uint64_t seed,
                      double step) {
  if (samples.empty()) throw std::invalid_argument("gradient_check: no samples");
  std::vector<const Array*> xin, pin;
  for (const auto& s : samples) {
    xin.push_back(&s.model_input);
    pin.push_back(&s.physics_input);
  }
  Array x = model.encode(stack(xin));
  Array phys = stack(pin);

  VarMap leaves = make_leaves(params);
  ad::Var loss = physics.loss(model.forward(ad::Var::leaf(x), leaves), phys);
  ad::backward(loss);
  auto grads = collect_grads(leaves);

  std::vector<std::pair<std::string, int64_t>> coords;
  int64_t total = 0;
  for (const auto& [key, value] : params) total += value.size();
  std::mt19937_64 eng(seed);
  for (int c = 0; c < n_coords; ++c) {
    int64_t pick = static_cast<int64_t>(eng() % static_cast<uint64_t>(total));
    for (const auto& [key, value] : params) {
      if (pick < value.size()) {
        coords.emplace_back(key, pick);
        break;
      }
      pick -= value.size();
    }
  }

  double worst = 0.0;
  ParamMap probe = params;
  for (const auto& [key, idx] : coords) {
    const double saved = probe.at(key)[idx];
    probe.at(key)[idx] = saved + step;
    const double up = physics.loss_value(model.forward_value(x, probe), phys);
    probe.at(key)[idx] = saved - step;
    const double dn = physics.loss_value(model.forward_value(x, probe), phys);
    probe.at(key)[idx] = saved;
    const double fd = (up - dn) / (2.0 * step);
    const double ad_g = grads.at(key)[idx];
    const double rel =
        std::abs(ad_g - fd) / std::max({std::abs(ad_g), std::abs(fd), 1e-10});
    worst = std::max(worst, rel);
  }
  return worst;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  ArchiveContent content;
  for (const auto& [key, value] : ckpt.params) content.arrays.emplace("param." + key, value);
  content.arrays.emplace("history",
                         Array({static_cast<int64_t>(ckpt.history.size())}, ckpt.history));
  const WnoConfig& m = ckpt.model;
  content.ints.emplace(
      "model", std::vector<int64_t>{m.in_channels, m.out_channels, m.width, m.levels,
                                    m.blocks, static_cast<int64_t>(m.wavelet),
                                    static_cast<int64_t>(m.activation),
                                    m.include_coordinates ? 1 : 0, m.project_hidden});
  if (!ckpt.config_json.empty()) content.texts.emplace("config", ckpt.config_json);
  save_archive(path, content);
}

Checkpoint load_checkpoint(const std::string& path) {
  ArchiveContent content = load_archive(path);
  Checkpoint ckpt;
  auto mit = content.ints.find("model");
  if (mit == content.ints.end() || mit->second.size() != 9)
    throw std::runtime_error("checkpoint missing model header: " + path);
  const auto& m = mit->second;
  if (m[5] < 0 || m[5] > 1 || m[6] < 0 || m[6] > 2)
    throw std::runtime_error("checkpoint model header out of range: " + path);
  ckpt.model.in_channels = m[0];
  ckpt.model.out_channels = m[1];
  ckpt.model.width = m[2];
  ckpt.model.levels = static_cast<int>(m[3]);
  ckpt.model.blocks = static_cast<int>(m[4]);
  ckpt.model.wavelet = static_cast<WaveletFamily>(m[5]);
  ckpt.model.activation = static_cast<ad::Activation>(m[6]);
  ckpt.model.include_coordinates = m[7] != 0;
  ckpt.model.project_hidden = m[8];
  for (auto& [name, arr] : content.arrays) {
    if (name.rfind("param.", 0) == 0)
      ckpt.params.emplace(name.substr(6), std::move(arr));
    else if (name == "history")
      ckpt.history = arr.vec();
  }
  auto tit = content.texts.find("config");
  if (tit != content.texts.end()) ckpt.config_json = tit->second;
  return ckpt;
}

}  // namespace pio
