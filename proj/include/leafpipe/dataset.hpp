#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "leafpipe/augment.hpp"
#include "leafpipe/nn/tensor.hpp"
#include "leafpipe/preprocess.hpp"
#include "leafpipe/rng.hpp"

namespace leafpipe {

struct DatasetItem {
  std::filesystem::path path;  ///< relative to the dataset root
  std::size_t label = 0;

  friend bool operator==(const DatasetItem&, const DatasetItem&) = default;
};

/// `<root>/<class_name>/<image files>`; classes sorted lexicographically.
struct LabeledDataset {
  std::filesystem::path root;
  std::vector<std::string> classes;
  std::vector<DatasetItem> items;

  std::size_t num_classes() const { return classes.size(); }
};

struct SplitDataset {
  std::vector<DatasetItem> train;
  std::vector<DatasetItem> test;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

/// True for the extensions load_image() understands (.pgm .ppm .pnm).
bool is_image_file(const std::filesystem::path& p);

/// Throws DataError on a missing root, fewer than two classes, or an empty class folder.
LabeledDataset scan_dataset(const std::filesystem::path& root);

/// Seeded shuffle then cut at round(ratio * N). Stratified mode allots each class
/// floor(ratio * n_c) training items and hands out the remaining training slots by
/// largest fractional remainder (ties to the lower class index), so the total stays
/// round(ratio * N) and each class is within one item of its exact share.
/// Throws std::invalid_argument unless 0 < ratio < 1, and DataError when a class has
/// fewer than two items in stratified mode.
SplitDataset split(const LabeledDataset& ds, double ratio, std::uint64_t seed, bool stratified = true);

/// CSV "path,class,partition" with paths relative to the dataset root.
void write_split_manifest(const SplitDataset& s, const LabeledDataset& ds,
                          const std::filesystem::path& path);
/// Class names resolve against `classes`; unknown classes or partitions throw DataError.
SplitDataset read_split_manifest(const std::filesystem::path& path,
                                 const std::vector<std::string>& classes);

/// Indexed source of training samples, each a planar [C, H, W] vector.
class SampleSource {
public:
  virtual ~SampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual std::size_t label(std::size_t i) const = 0;
  virtual std::vector<std::size_t> sample_shape() const = 0;
  /// rng is non-null only when augmentation should be applied.
  virtual std::vector<double> load(std::size_t i, Rng* rng) const = 0;
  virtual std::string describe(std::size_t i) const { return "#" + std::to_string(i); }
};

/// Files on disk: load -> prepare_image -> (augment) -> normalize -> CHW.
class FileSampleSource final : public SampleSource {
public:
  FileSampleSource(std::filesystem::path root, std::vector<DatasetItem> items, PreprocessConfig pre,
                   std::optional<AugmentConfig> aug = std::nullopt,
                   std::optional<ColorPCA> pca = std::nullopt);

  std::size_t size() const override { return items_.size(); }
  std::size_t label(std::size_t i) const override { return items_[i].label; }
  std::vector<std::size_t> sample_shape() const override;
  std::vector<double> load(std::size_t i, Rng* rng) const override;
  std::string describe(std::size_t i) const override { return (root_ / items_[i].path).string(); }

  /// Storage-form image after prepare_image, before augmentation.
  ImageBuffer prepared(std::size_t i) const;
  const std::vector<DatasetItem>& items() const { return items_; }

private:
  std::filesystem::path root_;
  std::vector<DatasetItem> items_;
  PreprocessConfig pre_;
  std::optional<AugmentConfig> aug_;
  std::optional<ColorPCA> pca_;
};

/// Pre-built samples held in memory; augmentation is not applied.
class MemorySampleSource final : public SampleSource {
public:
  MemorySampleSource(std::vector<std::size_t> sample_shape, std::vector<std::vector<double>> samples,
                     std::vector<std::size_t> labels);
  std::size_t size() const override { return samples_.size(); }
  std::size_t label(std::size_t i) const override { return labels_[i]; }
  std::vector<std::size_t> sample_shape() const override { return shape_; }
  std::vector<double> load(std::size_t i, Rng*) const override { return samples_[i]; }

private:
  std::vector<std::size_t> shape_;
  std::vector<std::vector<double>> samples_;
  std::vector<std::size_t> labels_;
};

struct Batch {
  nn::Tensor<double> inputs;        ///< [B, C, H, W]
  std::vector<std::size_t> labels;  ///< length B
  std::vector<std::size_t> indices; ///< source indices, in batch order
};

struct BatchOptions {
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  bool shuffle = true;
  bool augment = false;
  bool strict = false;   ///< unreadable files abort instead of being skipped
  std::size_t threads = 1;
};

/// One epoch over a source. The visiting order is a permutation seeded by
/// (seed, epoch); sample i draws augmentation from the substream (seed, epoch, i),
/// so the output does not depend on the thread count.
class BatchStream {
public:
  BatchStream(const SampleSource& source, BatchOptions opts);

  /// Next batch, or nullopt at the end of the epoch.
  std::optional<Batch> next();
  const std::vector<std::string>& skipped() const { return skipped_; }
  const std::vector<std::size_t>& order() const { return order_; }

private:
  const SampleSource& source_;
  BatchOptions opts_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::vector<std::string> skipped_;
};

/// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace leafpipe
