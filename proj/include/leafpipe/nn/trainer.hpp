#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "leafpipe/dataset.hpp"
#include "leafpipe/metrics.hpp"
#include "leafpipe/nn/network.hpp"

namespace leafpipe::nn {

enum class FloatWidth { f32 = 32, f64 = 64 };

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 42;
  std::string weight_init = "he";
  FloatWidth float_width = FloatWidth::f32;
  bool augment = true;
  bool strict = false;
  std::size_t threads = 1;

  /// Throws std::invalid_argument: epochs >= 1, batch_size >= 1, lr > 0,
  /// momentum in [0, 1), weight_init == "he".
  void validate() const;
};

using MetricsSink = std::function<void(const EpochRecord&)>;

struct EvalResult {
  double loss = 0.0;
  ConfusionMatrix confusion;
  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
  std::vector<std::string> skipped;
};

/// Mean loss and confusion matrix over a source, in index order, no augmentation.
template <typename T>
EvalResult evaluate(Network<T>& net, const SampleSource& source, std::size_t batch_size = 32,
                    std::size_t threads = 1, bool strict = false);

/// Runs exactly cfg.epochs epochs of momentum SGD, appending one EpochRecord per
/// epoch (training figures accumulate over the epoch's batches; validation runs on
/// `validation` after the epoch, zeros when it is null or empty). Throws
/// NumericError on a non-finite loss. lr == 0 is accepted here so that callers can
/// verify a frozen run; validate() is the user-facing check.
template <typename T>
std::vector<EpochRecord> train(Network<T>& net, const SampleSource& training,
                               const SampleSource* validation, const TrainConfig& cfg,
                               const MetricsSink& sink = {});

}  // namespace leafpipe::nn
