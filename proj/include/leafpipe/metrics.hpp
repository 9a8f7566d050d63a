#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace leafpipe {

/// K x K counts; rows are the true class, columns the predicted class.
class ConfusionMatrix {
public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k);

  std::size_t num_classes() const { return k_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  void add(std::size_t truth, std::size_t predicted);

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> counts_;
};

/// Throws std::invalid_argument on a length mismatch or a label outside [0, K).
ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t k);

/// trace / total. Throws std::invalid_argument on an empty matrix.
double accuracy(const ConfusionMatrix& cm);
/// cm[k][k] / column k sum; nullopt when class k was never predicted.
std::vector<std::optional<double>> precision(const ConfusionMatrix& cm);
/// cm[k][k] / row k sum; nullopt when class k never occurs.
std::vector<std::optional<double>> recall(const ConfusionMatrix& cm);
/// Mean over the defined entries; nullopt when none is defined.
std::optional<double> macro_average(std::span<const std::optional<double>> values);

/// One row of the training curves.
struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

/// "epoch,train_loss,train_acc,val_loss,val_acc" plus one fixed 6-decimal row per record.
void export_history(std::span<const EpochRecord> records, const std::filesystem::path& path);
std::string format_history_csv(std::span<const EpochRecord> records);

/// K x K CSV; first header cell "true\predicted", then class names. Empty
/// class_names fall back to indices.
void export_confusion(const ConfusionMatrix& cm, const std::vector<std::string>& class_names,
                      const std::filesystem::path& path);
std::string format_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);

/// "class,precision,recall,support"; undefined values are empty cells.
void export_class_metrics(const ConfusionMatrix& cm, const std::vector<std::string>& class_names,
                          const std::filesystem::path& path);
std::string format_class_metrics_csv(const ConfusionMatrix& cm,
                                     const std::vector<std::string>& class_names);

}  // namespace leafpipe
