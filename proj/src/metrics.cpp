#include "leafpipe/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "leafpipe/error.hpp"

namespace leafpipe {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string class_label(const std::vector<std::string>& names, std::size_t k) {
  return k < names.size() ? names[k] : std::to_string(k);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {
  if (k == 0) throw std::invalid_argument("confusion matrix needs K >= 1");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= k_ || predicted >= k_) throw std::invalid_argument("label out of range");
  ++counts_[truth * k_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < k_; ++i) t += at(i, i);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < k_; ++j) s += at(truth, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, predicted);
  return s;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t k) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("true and predicted label lists differ in length");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw std::invalid_argument("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(n);
}

std::vector<std::optional<double>> precision(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("precision of an empty confusion matrix");
  std::vector<std::optional<double>> out(cm.num_classes());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto col = cm.col_sum(k);
    if (col) out[k] = static_cast<double>(cm.at(k, k)) / static_cast<double>(col);
  }
  return out;
}

std::vector<std::optional<double>> recall(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("recall of an empty confusion matrix");
  std::vector<std::optional<double>> out(cm.num_classes());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto row = cm.row_sum(k);
    if (row) out[k] = static_cast<double>(cm.at(k, k)) / static_cast<double>(row);
  }
  return out;
}

std::optional<double> macro_average(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::string format_history_csv(std::span<const EpochRecord> records) {
  std::string s = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& r : records) {
    s += std::to_string(r.epoch) + "," + fixed6(r.train_loss) + "," + fixed6(r.train_acc) + "," +
         fixed6(r.val_loss) + "," + fixed6(r.val_acc) + "\n";
  }
  return s;
}

void export_history(std::span<const EpochRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("no history records to export");
  write_text(path, format_history_csv(records));
}

std::string format_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names) {
  const std::size_t k = cm.num_classes();
  std::string s = "true\\predicted";
  for (std::size_t j = 0; j < k; ++j) s += "," + class_label(names, j);
  s += "\n";
  for (std::size_t i = 0; i < k; ++i) {
    s += class_label(names, i);
    for (std::size_t j = 0; j < k; ++j) s += "," + std::to_string(cm.at(i, j));
    s += "\n";
  }
  return s;
}

void export_confusion(const ConfusionMatrix& cm, const std::vector<std::string>& names,
                      const std::filesystem::path& path) {
  if (cm.num_classes() == 0) throw std::invalid_argument("empty confusion matrix");
  write_text(path, format_confusion_csv(cm, names));
}

std::string format_class_metrics_csv(const ConfusionMatrix& cm,
                                     const std::vector<std::string>& names) {
  const auto prec = precision(cm);
  const auto rec = recall(cm);
  std::string s = "class,precision,recall,support\n";
  for (std::size_t k = 0; k < cm.num_classes(); ++k) {
    s += class_label(names, k) + "," + (prec[k] ? fixed6(*prec[k]) : "") + "," +
         (rec[k] ? fixed6(*rec[k]) : "") + "," + std::to_string(cm.row_sum(k)) + "\n";
  }
  return s;
}

void export_class_metrics(const ConfusionMatrix& cm, const std::vector<std::string>& names,
                          const std::filesystem::path& path) {
  write_text(path, format_class_metrics_csv(cm, names));
}

}  // namespace leafpipe
