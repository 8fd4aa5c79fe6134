// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tqt/tensor.hpp"

namespace tqt {

// TQT1 tensor file:
//   magic "TQT1" | version u8 (=1) | order u8 | order x extent u64 LE |
//   row-major IEEE-754 f64 LE payload.
std::vector<std::uint8_t> serialize_tensor(const DenseTensor& t);
DenseTensor parse_tensor(const std::vector<std::uint8_t>& bytes);

DenseTensor read_tensor_file(const std::string& path);
void write_tensor_file(const DenseTensor& t, const std::string& path);

// TQP1 packed variant for the memory-compression demonstration:
//   magic "TQP1" | version u8 | bits u8 | order u8 | extents u64 LE |
//   step f64 LE | bit-packed signed levels (ceil(numel*bits/8) bytes).
std::vector<std::uint8_t> serialize_packed(const DenseTensor& t, int bits);
DenseTensor parse_packed(const std::vector<std::uint8_t>& bytes);
void write_packed_file(const DenseTensor& t, int bits, const std::string& path);

/// Payload length in bytes of the packed form, headers excluded.
std::size_t packed_payload_bytes(std::size_t numel, int bits);

/// Write-temp-then-rename; partial writes never leave a corrupt file.
void atomic_write_file(const std::string& path, const void* data, std::size_t size);
void atomic_write_file(const std::string& path, const std::string& text);

}  // namespace tqt
