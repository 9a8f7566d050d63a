#include "leafpipe/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "leafpipe/error.hpp"
#include "leafpipe/parallel.hpp"

namespace leafpipe {

namespace fs = std::filesystem;

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

LabeledDataset scan_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw DataError("dataset root not found: " + root.string());
  LabeledDataset ds;
  ds.root = root;
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (class_dirs.size() < 2)
    throw DataError("dataset needs at least 2 class folders under " + root.string());

  for (const auto& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    if (files.empty()) throw DataError("empty class folder: " + dir.string());
    std::sort(files.begin(), files.end());
    const std::size_t label = ds.classes.size();
    ds.classes.push_back(dir.filename().string());
    for (const auto& f : files) ds.items.push_back({fs::relative(f, root), label});
  }
  return ds;
}

SplitDataset split(const LabeledDataset& ds, double ratio, std::uint64_t seed, bool stratified) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must lie in (0, 1)");
  SplitDataset out;
  out.seed = seed;
  out.ratio = ratio;
  const std::size_t n = ds.items.size();
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));

  if (!stratified) {
    Rng rng(seed);
    const auto order = shuffled_indices(n, rng);
    for (std::size_t i = 0; i < n; ++i)
      (i < n_train ? out.train : out.test).push_back(ds.items[order[i]]);
    return out;
  }

  std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.items[i].label >= by_class.size()) throw DataError("item label out of range");
    by_class[ds.items[i].label].push_back(i);
  }
  std::vector<std::size_t> quota(by_class.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t allotted = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() < 2)
      throw DataError("class '" + ds.classes[c] + "' has fewer than 2 items; cannot stratify");
    const double exact = ratio * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    allotted += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; allotted < n_train && i < remainders.size(); ++i, ++allotted)
    ++quota[remainders[i].second];

  for (std::size_t c = 0; c < by_class.size(); ++c) {
    Rng rng = Rng::substream(seed, c);
    const auto order = shuffled_indices(by_class[c].size(), rng);
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < quota[c] ? out.train : out.test).push_back(ds.items[by_class[c][order[i]]]);
  }
  return out;
}

void write_split_manifest(const SplitDataset& s, const LabeledDataset& ds, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "path,class,partition\n";
  auto emit = [&](const std::vector<DatasetItem>& items, const char* part) {
    for (const auto& it : items)
      out << csv_field(it.path.generic_string()) << ',' << csv_field(ds.classes.at(it.label)) << ','
          << part << '\n';
  };
  emit(s.train, "train");
  emit(s.test, "test");
  if (!out) throw DataError("write failed: " + path.string());
}

SplitDataset read_split_manifest(const fs::path& path, const std::vector<std::string>& classes) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw DataError("split manifest not found: " + path.string());
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || parse_csv_line(line) != std::vector<std::string>{"path", "class", "partition"})
    throw DataError("bad split manifest header in " + path.string());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;

  SplitDataset s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = parse_csv_line(line);
    if (f.size() != 3) throw DataError("malformed manifest line " + std::to_string(lineno));
    const auto it = index.find(f[1]);
    if (it == index.end()) throw DataError("unknown class '" + f[1] + "' in manifest");
    DatasetItem item{fs::path(f[0]), it->second};
    if (f[2] == "train") s.train.push_back(item);
    else if (f[2] == "test") s.test.push_back(item);
    else throw DataError("unknown partition '" + f[2] + "' in manifest");
  }
  return s;
}

// ------------------------------------------------------------ sources

FileSampleSource::FileSampleSource(fs::path root, std::vector<DatasetItem> items, PreprocessConfig pre,
                                   std::optional<AugmentConfig> aug, std::optional<ColorPCA> pca)
    : root_(std::move(root)), items_(std::move(items)), pre_(pre), aug_(std::move(aug)), pca_(std::move(pca)) {
  pre_.validate();
  if (aug_) aug_->validate();
}

std::vector<std::size_t> FileSampleSource::sample_shape() const {
  return {pre_.output_channels(), pre_.image_size, pre_.image_size};
}

ImageBuffer FileSampleSource::prepared(std::size_t i) const {
  return prepare_image(load_image(root_ / items_[i].path), pre_);
}

std::vector<double> FileSampleSource::load(std::size_t i, Rng* rng) const {
  ImageBuffer img = prepared(i);
  if (rng && aug_) img = augment(img, *aug_, *rng, pca_ ? &*pca_ : nullptr);
  return to_chw(normalize(img, pre_.normalization));
}

MemorySampleSource::MemorySampleSource(std::vector<std::size_t> sample_shape,
                                       std::vector<std::vector<double>> samples,
                                       std::vector<std::size_t> labels)
    : shape_(std::move(sample_shape)), samples_(std::move(samples)), labels_(std::move(labels)) {
  if (samples_.size() != labels_.size()) throw std::invalid_argument("sample/label count mismatch");
  const std::size_t n = nn::shape_product(shape_);
  for (const auto& s : samples_)
    if (s.size() != n) throw std::invalid_argument("sample does not match the declared shape");
}

// ------------------------------------------------------------ batches

BatchStream::BatchStream(const SampleSource& source, BatchOptions opts) : source_(source), opts_(opts) {
  if (opts_.batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  if (opts_.shuffle) {
    Rng rng = Rng::substream(opts_.seed, 2 * opts_.epoch + 1);
    order_ = shuffled_indices(source_.size(), rng);
  } else {
    order_.resize(source_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }
}

std::optional<Batch> BatchStream::next() {
  const auto shape = source_.sample_shape();
  const std::size_t sample_size = nn::shape_product(shape);
  const std::uint64_t aug_seed = Rng::substream(opts_.seed, 2 * opts_.epoch + 2).next_u64();

  while (pos_ < order_.size()) {
    const std::size_t end = std::min(order_.size(), pos_ + opts_.batch_size);
    const std::size_t count = end - pos_;
    std::vector<std::vector<double>> samples(count);
    std::vector<std::string> errors(count);
    parallel_for(count, opts_.threads, [&](std::size_t j) {
      const std::size_t idx = order_[pos_ + j];
      try {
        Rng rng = Rng::substream(aug_seed, idx);
        samples[j] = source_.load(idx, opts_.augment ? &rng : nullptr);
      } catch (const DataError& e) {
        errors[j] = e.what();
      }
    });

    Batch batch;
    std::vector<double> data;
    data.reserve(count * sample_size);
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t idx = order_[pos_ + j];
      if (!errors[j].empty()) {
        if (opts_.strict) throw DataError(source_.describe(idx) + ": " + errors[j]);
        skipped_.push_back(source_.describe(idx) + ": " + errors[j]);
        continue;
      }
      data.insert(data.end(), samples[j].begin(), samples[j].end());
      batch.labels.push_back(source_.label(idx));
      batch.indices.push_back(idx);
    }
    pos_ = end;
    if (batch.labels.empty()) continue;
    std::vector<std::size_t> bshape{batch.labels.size()};
    bshape.insert(bshape.end(), shape.begin(), shape.end());
    batch.inputs = nn::Tensor<double>(bshape, std::move(data));
    return batch;
  }
  return std::nullopt;
}

}  // namespace leafpipe
