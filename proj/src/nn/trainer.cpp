#include "leafpipe/nn/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "leafpipe/error.hpp"
#include "leafpipe/nn/loss.hpp"
#include "leafpipe/nn/optim.hpp"

namespace leafpipe::nn {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (weight_init != "he") throw std::invalid_argument("unsupported weight_init '" + weight_init + "'");
}

template <typename T>
EvalResult evaluate(Network<T>& net, const SampleSource& source, std::size_t batch_size,
                    std::size_t threads, bool strict) {
  EvalResult r;
  r.confusion = ConfusionMatrix(net.num_classes());
  BatchOptions opts;
  opts.batch_size = batch_size;
  opts.shuffle = false;
  opts.threads = threads;
  opts.strict = strict;
  BatchStream stream(source, opts);
  double loss_sum = 0.0;
  while (auto batch = stream.next()) {
    const Tensor<T> x = batch->inputs.template cast<T>();
    const auto res = softmax_cross_entropy(net.logits(x), batch->labels);
    const std::size_t k = net.num_classes();
    for (std::size_t b = 0; b < batch->labels.size(); ++b) {
      const std::span<const T> row(res.probabilities.data() + b * k, k);
      const std::size_t pred = argmax<T>(row);
      r.confusion.add(batch->labels[b], pred);
      r.truth.push_back(batch->labels[b]);
      r.predicted.push_back(pred);
    }
    loss_sum += res.loss * static_cast<double>(batch->labels.size());
  }
  r.skipped = stream.skipped();
  if (!r.truth.empty()) r.loss = loss_sum / static_cast<double>(r.truth.size());
  return r;
}

template <typename T>
std::vector<EpochRecord> train(Network<T>& net, const SampleSource& training,
                               const SampleSource* validation, const TrainConfig& cfg,
                               const MetricsSink& sink) {
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw std::invalid_argument("epochs and batch_size must be >= 1");
  if (training.size() == 0) throw DataError("training set is empty");
  if (training.sample_shape() != net.input_shape())
    throw std::invalid_argument("training samples " + shape_string(training.sample_shape()) +
                                " do not match network input " + shape_string(net.input_shape()));

  Sgd<T> opt(cfg.learning_rate, cfg.momentum);
  std::vector<EpochRecord> history;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    BatchOptions opts;
    opts.batch_size = cfg.batch_size;
    opts.seed = cfg.seed;
    opts.epoch = epoch;
    opts.augment = cfg.augment;
    opts.strict = cfg.strict;
    opts.threads = cfg.threads;
    BatchStream stream(training, opts);

    double loss_sum = 0.0;
    std::size_t seen = 0, correct = 0, step = 0;
    while (auto batch = stream.next()) {
      const Tensor<T> x = batch->inputs.template cast<T>();
      const auto res = softmax_cross_entropy(net.logits(x), batch->labels);
      if (!std::isfinite(res.loss))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(step));
      net.backward(res.dlogits);
      opt.step(net.parameters());

      const std::size_t k = net.num_classes();
      for (std::size_t b = 0; b < batch->labels.size(); ++b) {
        const std::span<const T> row(res.probabilities.data() + b * k, k);
        correct += argmax<T>(row) == batch->labels[b];
      }
      loss_sum += res.loss * static_cast<double>(batch->labels.size());
      seen += batch->labels.size();
      ++step;
    }
    if (seen == 0) throw DataError("no readable training samples in epoch " + std::to_string(epoch + 1));

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    if (validation && validation->size() > 0) {
      const EvalResult ev = evaluate(net, *validation, cfg.batch_size, cfg.threads, cfg.strict);
      if (!ev.truth.empty()) {
        rec.val_loss = ev.loss;
        rec.val_acc = accuracy(ev.confusion);
      }
    }
    history.push_back(rec);
    if (sink) sink(rec);
  }
  return history;
}

template EvalResult evaluate<float>(Network<float>&, const SampleSource&, std::size_t, std::size_t, bool);
template EvalResult evaluate<double>(Network<double>&, const SampleSource&, std::size_t, std::size_t, bool);
template std::vector<EpochRecord> train<float>(Network<float>&, const SampleSource&, const SampleSource*,
                                               const TrainConfig&, const MetricsSink&);
template std::vector<EpochRecord> train<double>(Network<double>&, const SampleSource&, const SampleSource*,
                                                const TrainConfig&, const MetricsSink&);

}  // namespace leafpipe::nn
