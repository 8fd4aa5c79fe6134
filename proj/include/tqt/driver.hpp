// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "tqt/manifest.hpp"

namespace tqt {

// Subcommand drivers shared by the C API and the CLI. Each returns its
// human-readable stdout text; files are written atomically.

std::string cmd_decompose(const std::string& manifest_path, const std::string& layer,
                          std::size_t r3, std::size_t r4,
                          const std::string& out_prefix);

std::string cmd_quantize(const std::string& in_path, int bits,
                         const std::string& scheme, bool packed,
                         const std::string& out_path);

/// CompressionReport CSV: name, shape, rank, P, M, bits, reconstruction
/// error, memory bytes before (fp32) / after (bit-width-aware).
std::string cmd_ratio(const std::string& manifest_path, const std::string& out_csv);

std::string cmd_search(const std::string& manifest_path, const std::string& algorithm,
                       double threshold, int passes, std::uint64_t seed,
                       const std::string& out_plan_json,
                       const std::string& out_audit_csv);

std::string cmd_baseline(const std::string& manifest_path, const std::string& layer,
                         const std::string& method,
                         const std::vector<std::size_t>& ranks, std::uint64_t seed,
                         const std::string& out_prefix);

/// Verifies the factorized convolution against the direct one on a seeded
/// random input; returns the report and the max relative deviation.
std::string cmd_check(const std::string& manifest_path, const std::string& layer,
                      std::uint64_t seed, double* max_rel_deviation = nullptr);

}  // namespace tqt
