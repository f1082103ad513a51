#include "teda/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace teda {

namespace {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

constexpr char kMagic[4] = {'T', 'D', 'A', 'C'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeFloat32 = 0;
constexpr std::uint8_t kDtypeInt16 = 1;
constexpr std::uint32_t kMaxModelTensors = 1u << 20;
constexpr std::uint32_t kMaxNameBytes = 1u << 16;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw ContainerFormatError(std::string("truncated container: missing ") + what);
  }
  return value;
}

}  // namespace

void write_tensor(std::ostream& out, const AnyTensor& tensor) {
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  const bool quant = is_quantized(tensor);
  write_pod(out, quant ? kDtypeInt16 : kDtypeFloat32);
  write_pod(out, std::uint8_t{0});
  const double scale = quant ? std::get<QuantizedTensor>(tensor).scale : 1.0;
  write_pod(out, scale);
  for (std::uint32_t d : shape_of(tensor)) {
    write_pod(out, d);
  }
  if (quant) {
    const auto& q = std::get<QuantizedTensor>(tensor);
    out.write(reinterpret_cast<const char*>(q.data.data()),
              static_cast<std::streamsize>(q.data.size() * sizeof(std::int16_t)));
  } else {
    const auto& t = std::get<Tensor>(tensor);
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!out) {
    throw ContainerFormatError("failed writing tensor container");
  }
}

AnyTensor read_tensor(std::istream& in) {
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ContainerFormatError("bad magic: not a tensor container");
  }
  const auto version = read_pod<std::uint16_t>(in, "version");
  if (version != kVersion) {
    throw ContainerFormatError("unsupported container version " +
                               std::to_string(version));
  }
  const auto dtype = read_pod<std::uint8_t>(in, "dtype");
  if (dtype != kDtypeFloat32 && dtype != kDtypeInt16) {
    throw ContainerFormatError("unknown dtype code " + std::to_string(dtype));
  }
  read_pod<std::uint8_t>(in, "reserved byte");
  const auto scale = read_pod<double>(in, "scale");
  std::array<std::uint32_t, 4> shape{};
  std::uint64_t count = 1;
  for (auto& d : shape) {
    d = read_pod<std::uint32_t>(in, "dimension");
    count *= d;
  }
  if (count > (1ull << 31)) {
    throw ContainerFormatError("tensor dimensions unreasonably large");
  }

  if (dtype == kDtypeInt16) {
    QuantizedTensor q;
    q.shape = shape;
    q.scale = scale;
    q.data.resize(count);
    in.read(reinterpret_cast<char*>(q.data.data()),
            static_cast<std::streamsize>(count * sizeof(std::int16_t)));
    if (static_cast<std::uint64_t>(in.gcount()) != count * sizeof(std::int16_t)) {
      throw ContainerFormatError("truncated container: short int16 payload");
    }
    q.validate();
    return q;
  }
  Tensor t;
  t.shape = shape;
  t.data.resize(count);
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::uint64_t>(in.gcount()) != count * sizeof(float)) {
    throw ContainerFormatError("truncated container: short float32 payload");
  }
  return t;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ContainerFormatError("cannot open '" + path + "' for writing");
  }
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ContainerFormatError("cannot open '" + path + "' for reading");
  }
  return in;
}

}  // namespace

void write_tensor_file(const std::string& path, const AnyTensor& tensor) {
  auto out = open_out(path);
  write_tensor(out, tensor);
}

AnyTensor read_tensor_file(const std::string& path) {
  auto in = open_in(path);
  return read_tensor(in);
}

void write_model_file(const std::string& path, const std::vector<NamedTensor>& tensors) {
  auto out = open_out(path);
  write_pod(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& nt : tensors) {
    write_pod(out, static_cast<std::uint32_t>(nt.name.size()));
    out.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
    write_tensor(out, nt.tensor);
  }
  if (!out) {
    throw ContainerFormatError("failed writing model file '" + path + "'");
  }
}

std::vector<NamedTensor> read_model_file(const std::string& path) {
  auto in = open_in(path);
  const auto count = read_pod<std::uint32_t>(in, "tensor count");
  if (count == 0 || count > kMaxModelTensors) {
    throw ContainerFormatError("implausible tensor count " + std::to_string(count));
  }
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in, "name length");
    if (name_len > kMaxNameBytes) {
      throw ContainerFormatError("implausible tensor name length");
    }
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (static_cast<std::uint32_t>(in.gcount()) != name_len) {
      throw ContainerFormatError("truncated model file: short tensor name");
    }
    tensors.push_back({std::move(name), read_tensor(in)});
  }
  return tensors;
}

bool is_single_tensor_file(const std::string& path) {
  auto in = open_in(path);
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  return in && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0;
}

bool is_quantized(const AnyTensor& t) {
  return std::holds_alternative<QuantizedTensor>(t);
}

const std::array<std::uint32_t, 4>& shape_of(const AnyTensor& t) {
  if (is_quantized(t)) {
    return std::get<QuantizedTensor>(t).shape;
  }
  return std::get<Tensor>(t).shape;
}

std::uint64_t payload_checksum(const AnyTensor& t) {
  const unsigned char* bytes = nullptr;
  std::size_t size = 0;
  if (is_quantized(t)) {
    const auto& q = std::get<QuantizedTensor>(t);
    bytes = reinterpret_cast<const unsigned char*>(q.data.data());
    size = q.data.size() * sizeof(std::int16_t);
  } else {
    const auto& f = std::get<Tensor>(t);
    bytes = reinterpret_cast<const unsigned char*>(f.data.data());
    size = f.data.size() * sizeof(float);
  }
  std::uint64_t hash = 1469598103934665603ull;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace teda
