#include "leafpipe/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <stdexcept>

#include "leafpipe/error.hpp"

namespace leafpipe::nn {

namespace {

class Writer {
public:
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const std::string& s) { bytes.insert(bytes.end(), s.begin(), s.end()); }

  std::vector<std::uint8_t> bytes;
};

class Reader {
public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw DataError(std::string("truncated ") + what);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t narrow_u32(std::size_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("value too large for checkpoint field");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw DataError("file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const Network<T>& net,
                                            const std::vector<std::string>& class_names) {
  const Architecture& arch = net.architecture();
  if (!class_names.empty() && class_names.size() != arch.num_classes)
    throw std::invalid_argument("class name count does not match the network's class count");
  Writer w;
  w.raw("LPNN");
  w.u16(kCheckpointVersion);
  for (std::size_t d : arch.input) w.u32(narrow_u32(d));
  w.u32(narrow_u32(arch.num_classes));
  w.u32(narrow_u32(arch.layers.size()));
  for (const auto& s : arch.layers) {
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u32(s.out);
    w.u32(s.kernel);
    w.u32(s.stride);
    w.u32(s.pad);
  }
  w.u32(narrow_u32(class_names.size()));
  for (const auto& name : class_names) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max())
      throw std::invalid_argument("class name too long");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(name);
  }
  for (const auto* p : net.parameters()) {
    w.u32(narrow_u32(p->value.size()));
    for (T v : p->value.values()) w.f32(static_cast<float>(v));
  }
  return std::move(w.bytes);
}

template <typename T>
Checkpoint<T> decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "LPNN", 4) != 0)
    throw DataError("not a checkpoint");
  r.str(4, "magic");
  const std::uint16_t version = r.u16("header");
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));

  Architecture arch;
  for (auto& d : arch.input) d = r.u32("header");
  arch.num_classes = r.u32("header");
  const std::uint32_t layer_count = r.u32("layer table");
  if (layer_count > 4096) throw DataError("implausible layer count in checkpoint");
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    LayerSpec s;
    const std::uint8_t kind = r.u8("layer table");
    if (kind < 1 || kind > 5) throw DataError("unknown layer kind in checkpoint");
    s.kind = static_cast<LayerKind>(kind);
    s.out = r.u32("layer table");
    s.kernel = r.u32("layer table");
    s.stride = r.u32("layer table");
    s.pad = r.u32("layer table");
    if (s.out > (1u << 20) || s.kernel > 4096 || s.stride > 4096 || s.pad > 4096)
      throw DataError("implausible layer parameters in checkpoint");
    arch.layers.push_back(s);
  }
  const std::uint32_t name_count = r.u32("class table");
  if (name_count != 0 && name_count != arch.num_classes)
    throw DataError("class table size does not match class count");
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < name_count; ++i) {
    const std::uint16_t len = r.u16("class table");
    names.push_back(r.str(len, "class table"));
  }

  // Refuse absurd geometry before allocating.
  const std::size_t input_size = arch.input[0] * arch.input[1] * arch.input[2];
  if (input_size == 0 || input_size > (std::size_t{1} << 28))
    throw DataError("invalid input geometry in checkpoint");

  std::optional<Network<T>> net;
  try {
    net.emplace(arch, 0);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid layer table: ") + e.what());
  }
  for (auto* p : net->parameters()) {
    const std::uint32_t count = r.u32("parameter block");
    if (count != p->value.size()) throw DataError("parameter count mismatch");
    r.need(static_cast<std::size_t>(count) * 4, "parameter block");
    for (T& v : p->value.values()) v = static_cast<T>(r.f32("parameter block"));
  }
  if (!r.done()) throw DataError("trailing data after parameter blocks");
  return Checkpoint<T>{std::move(*net), std::move(names)};
}

template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path,
                     const std::vector<std::string>& class_names) {
  const auto bytes = encode_checkpoint(net, class_names);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint<T>(read_file_bytes(path));
}

template std::vector<std::uint8_t> encode_checkpoint<float>(const Network<float>&, const std::vector<std::string>&);
template std::vector<std::uint8_t> encode_checkpoint<double>(const Network<double>&, const std::vector<std::string>&);
template Checkpoint<float> decode_checkpoint<float>(const std::vector<std::uint8_t>&);
template Checkpoint<double> decode_checkpoint<double>(const std::vector<std::uint8_t>&);
template void save_checkpoint<float>(const Network<float>&, const std::filesystem::path&, const std::vector<std::string>&);
template void save_checkpoint<double>(const Network<double>&, const std::filesystem::path&, const std::vector<std::string>&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace leafpipe::nn
