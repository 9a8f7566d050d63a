#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "leafpipe/dataset.hpp"
#include "leafpipe/error.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace leafpipe;
using leafpipe::testing::TempDir;
namespace fs = std::filesystem;

namespace {

void make_tree(const fs::path& root, const std::map<std::string, int>& counts) {
  for (const auto& [name, n] : counts) {
    fs::create_directories(root / name);
    for (int i = 0; i < n; ++i)
      save_image(ImageBuffer(4, 4, 3, 0.1 * (i % 10)), root / name / ("img" + std::to_string(i) + ".ppm"));
  }
}

LabeledDataset fake_dataset(std::size_t classes, std::size_t per_class) {
  LabeledDataset ds;
  for (std::size_t c = 0; c < classes; ++c) {
    ds.classes.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < per_class; ++i)
      ds.items.push_back({fs::path(ds.classes.back()) / ("f" + std::to_string(i) + ".ppm"), c});
  }
  return ds;
}

LabeledDataset random_dataset(Rng& rng, std::size_t n) {
  const std::size_t k = 2 + rng.below(5);
  LabeledDataset ds;
  for (std::size_t c = 0; c < k; ++c) ds.classes.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) ds.items.push_back({fs::path("x" + std::to_string(i)), i % k});
  return ds;
}

std::set<std::string> names(const std::vector<DatasetItem>& items) {
  std::set<std::string> out;
  for (const auto& it : items) out.insert(it.path.generic_string());
  return out;
}

MemorySampleSource numbered_source(std::size_t n, std::size_t k) {
  std::vector<std::vector<double>> samples;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < n; ++i) {
    samples.push_back({static_cast<double>(i)});
    labels.push_back(i % k);
  }
  return MemorySampleSource({1, 1, 1}, samples, labels);
}

}  // namespace

TEST_CASE("scan a class-per-folder tree") {
  TempDir dir("ds");
  make_tree(dir.path(), {{"healthy", 3}, {"rust", 2}});
  std::ofstream(dir / "healthy" / "notes.txt") << "ignored";
  const LabeledDataset ds = scan_dataset(dir.path());
  CHECK(ds.num_classes() == 2);
  CHECK(ds.items.size() == 5);
  CHECK(ds.classes == std::vector<std::string>{"healthy", "rust"});
  for (const auto& it : ds.items) CHECK(it.path.is_relative());
  CHECK(std::count_if(ds.items.begin(), ds.items.end(), [](const auto& it) { return it.label == 1; }) == 2);
  CHECK(scan_dataset(dir.path()).items == ds.items);
}

TEST_CASE("scan infers K from the tree") {
  TempDir dir("ds");
  std::map<std::string, int> counts;
  for (int c = 0; c < 15; ++c) counts["class" + std::string(c < 10 ? "0" : "") + std::to_string(c)] = 1;
  make_tree(dir.path(), counts);
  const LabeledDataset ds = scan_dataset(dir.path());
  CHECK(ds.num_classes() == 15);
  CHECK(std::is_sorted(ds.classes.begin(), ds.classes.end()));
}

TEST_CASE("scan errors") {
  TempDir dir("ds");
  CHECK_THROWS_AS(scan_dataset(dir / "missing"), DataError);
  CHECK_THROWS_AS(scan_dataset(dir.path()), DataError);  // empty root
  make_tree(dir.path(), {{"only", 2}});
  CHECK_THROWS_AS(scan_dataset(dir.path()), DataError);  // one class
  fs::create_directories(dir / "empty");
  CHECK_THROWS_AS(scan_dataset(dir.path()), DataError);  // empty class folder
}

TEST_CASE("split sizes and determinism") {
  const LabeledDataset ds = fake_dataset(4, 25);
  const SplitDataset a = split(ds, 0.8, 42, false);
  CHECK(a.train.size() == 80);
  CHECK(a.test.size() == 20);
  const SplitDataset b = split(ds, 0.8, 42, false);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  const SplitDataset c = split(ds, 0.8, 43, false);
  CHECK(a.train != c.train);
  CHECK_THROWS_AS(split(ds, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(ds, 1.0, 1), std::invalid_argument);
}

TEST_CASE("stratified split gives each class its share") {
  const LabeledDataset ds = fake_dataset(5, 20);
  const SplitDataset s = split(ds, 0.8, 7, true);
  std::vector<int> train(5), test(5);
  for (const auto& it : s.train) ++train[it.label];
  for (const auto& it : s.test) ++test[it.label];
  for (int c = 0; c < 5; ++c) {
    CHECK(train[c] == 16);
    CHECK(test[c] == 4);
  }
  LabeledDataset tiny = fake_dataset(2, 5);
  tiny.items.pop_back();
  tiny.items.pop_back();
  tiny.items.pop_back();
  tiny.items.pop_back();
  CHECK_THROWS_AS(split(tiny, 0.8, 1, true), DataError);
  CHECK_NOTHROW(split(tiny, 0.8, 1, false));
}

TEST_CASE("split partition invariants over random inputs") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 12 + rng.below(300);
    const double ratio = rng.uniform(0.05, 0.95);
    const std::uint64_t seed = rng.next_u64();
    const LabeledDataset ds = random_dataset(rng, n);
    for (bool stratified : {false, true}) {
      const SplitDataset s = split(ds, ratio, seed, stratified);
      const auto tr = names(s.train), te = names(s.test);
      std::vector<std::string> both;
      std::set_intersection(tr.begin(), tr.end(), te.begin(), te.end(), std::back_inserter(both));
      CHECK(both.empty());
      CHECK(tr.size() + te.size() == n);
      CHECK(s.train.size() == static_cast<std::size_t>(std::llround(ratio * n)));
      if (stratified) {
        for (std::size_t c = 0; c < ds.num_classes(); ++c) {
          const double nc = static_cast<double>(std::count_if(ds.items.begin(), ds.items.end(),
                                                              [c](const auto& it) { return it.label == c; }));
          const double got = static_cast<double>(std::count_if(s.train.begin(), s.train.end(),
                                                               [c](const auto& it) { return it.label == c; }));
          CHECK(std::abs(got - ratio * nc) <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("split manifest round trip") {
  TempDir dir("ds");
  LabeledDataset ds = fake_dataset(3, 10);
  ds.items[0].path = fs::path("c0") / "comma, quote\".ppm";
  const SplitDataset s = split(ds, 0.8, 3);
  write_split_manifest(s, ds, dir / "split.csv");
  const SplitDataset back = read_split_manifest(dir / "split.csv", ds.classes);
  CHECK(back.train == s.train);
  CHECK(back.test == s.test);
  CHECK_THROWS_AS(read_split_manifest(dir / "split.csv", {"c0", "c1"}), DataError);
  CHECK_THROWS_AS(read_split_manifest(dir / "absent.csv", ds.classes), DataError);
  std::ofstream(dir / "bad.csv") << "path,class,partition\nx.ppm,c0,validation\n";
  CHECK_THROWS_AS(read_split_manifest(dir / "bad.csv", ds.classes), DataError);
}

TEST_CASE("batch sizes and epoch coverage") {
  const MemorySampleSource src = numbered_source(10, 3);
  BatchStream stream(src, {4, 9, 0, true, false, false, 1});
  std::vector<std::size_t> sizes;
  std::multiset<std::size_t> labels, seen;
  while (auto b = stream.next()) {
    sizes.push_back(b->labels.size());
    CHECK(b->inputs.shape() == std::vector<std::size_t>{b->labels.size(), 1, 1, 1});
    for (std::size_t j = 0; j < b->labels.size(); ++j) {
      labels.insert(b->labels[j]);
      seen.insert(static_cast<std::size_t>(b->inputs[j]));
      CHECK(b->labels[j] == b->indices[j] % 3);
    }
  }
  CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
  std::multiset<std::size_t> expected_labels;
  for (std::size_t i = 0; i < 10; ++i) expected_labels.insert(i % 3);
  CHECK(labels == expected_labels);
  CHECK(seen.size() == 10);
  CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == 10);
}

TEST_CASE("epoch orders differ but replay exactly") {
  const MemorySampleSource src = numbered_source(50, 2);
  const auto order = [&](std::size_t epoch) { return BatchStream(src, {8, 5, epoch, true}).order(); };
  CHECK(order(0) != order(1));
  CHECK(order(0) == order(0));
  CHECK(order(3) == BatchStream(src, {8, 5, 3, true}).order());
  CHECK_THROWS_AS(BatchStream(src, {0, 5, 0, true}), std::invalid_argument);
}

TEST_CASE("file source prepares, augments per substream, and tolerates bad files") {
  TempDir dir("ds");
  synth::SyntheticSpec spec;
  spec.classes = 2;
  spec.per_class = 6;
  spec.size = 16;
  synth::write_dataset(dir.path(), spec);
  const LabeledDataset ds = scan_dataset(dir.path());
  PreprocessConfig pre;
  pre.image_size = 8;
  AugmentConfig aug;
  const FileSampleSource src(dir.path(), ds.items, pre, aug);
  CHECK(src.sample_shape() == std::vector<std::size_t>{3, 8, 8});

  auto run_epoch = [&](std::size_t threads) {
    BatchStream s(src, {5, 11, 2, true, true, true, threads});
    std::vector<double> all;
    while (auto b = s.next()) all.insert(all.end(), b->inputs.storage().begin(), b->inputs.storage().end());
    return all;
  };
  const auto one = run_epoch(1);
  CHECK(one == run_epoch(3));
  CHECK(one.size() == 12 * 3 * 8 * 8);

  // Corrupt one file: lenient streams skip it with its path, strict ones abort.
  std::ofstream(dir.path() / ds.items[3].path, std::ios::trunc) << "garbage";
  BatchStream lenient(src, {4, 1, 0, false, false, false, 1});
  std::size_t count = 0;
  while (auto b = lenient.next()) count += b->labels.size();
  CHECK(count == 11);
  REQUIRE(lenient.skipped().size() == 1);
  CHECK(lenient.skipped()[0].find(ds.items[3].path.filename().string()) != std::string::npos);
  BatchStream strict(src, {4, 1, 0, false, false, true, 1});
  CHECK_THROWS_AS(while (strict.next()) {}, DataError);
}

TEST_CASE("training epochs never yield test items") {
  const LabeledDataset ds = fake_dataset(3, 30);
  const SplitDataset s = split(ds, 0.8, 9);
  const auto test_names = names(s.test);
  std::vector<std::vector<double>> samples;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    samples.push_back({static_cast<double>(i)});
    labels.push_back(s.train[i].label);
  }
  const MemorySampleSource src({1, 1, 1}, samples, labels);
  for (std::size_t epoch = 0; epoch < 3; ++epoch) {
    BatchStream stream(src, {7, 9, epoch, true});
    while (auto b = stream.next())
      for (std::size_t idx : b->indices) CHECK(test_names.count(s.train[idx].path.generic_string()) == 0);
  }
}
