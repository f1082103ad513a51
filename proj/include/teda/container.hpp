#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "teda/tensor.hpp"

namespace teda {

/// Little-endian tensor container:
///   "TDAC" | u16 version=1 | u8 dtype (0=float32, 1=int16) | u8 reserved=0 |
///   f64 scale (1.0 for float tensors) | u32 N,C,H,W | raw payload, row-major.
/// A model file packs several: u32 count, then per tensor a u32 name length,
/// the UTF-8 name bytes, and a full single-tensor container.
using AnyTensor = std::variant<Tensor, QuantizedTensor>;

struct NamedTensor {
  std::string name;
  AnyTensor tensor;
};

/// Thrown for bad magic/version/dims or truncated payloads. CLI maps it to exit 1.
class ContainerFormatError : public std::runtime_error {
 public:
  explicit ContainerFormatError(const std::string& what)
      : std::runtime_error(what) {}
};

void write_tensor(std::ostream& out, const AnyTensor& tensor);
AnyTensor read_tensor(std::istream& in);

void write_tensor_file(const std::string& path, const AnyTensor& tensor);
AnyTensor read_tensor_file(const std::string& path);

void write_model_file(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_model_file(const std::string& path);

/// True when the file starts with the single-tensor magic rather than a
/// model-file tensor count.
bool is_single_tensor_file(const std::string& path);

bool is_quantized(const AnyTensor& t);
const std::array<std::uint32_t, 4>& shape_of(const AnyTensor& t);

/// FNV-1a over the raw payload bytes as stored; used by `inspect`.
std::uint64_t payload_checksum(const AnyTensor& t);

}  // namespace teda
