// SPDX-License-Identifier: Apache-2.0
//
// Median-of-k wall-time measurements. Each row also carries a checksum of
// the operation's output so runs with equal seeds can be compared, and so
// the SIMD and scalar rows of one operation can be checked for equality.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lskdet/config.hpp"

namespace lskdet {

struct BenchRow {
  std::string op;
  std::string isa;
  std::size_t size = 0;
  int repeats = 0;
  double median_us = 0.0;
  std::uint64_t checksum = 0;
};

/// Operation names accepted by run_bench.
const std::vector<std::string>& bench_ops();

/// Runs every operation (or only `op`) at every size, `repeats` times each.
/// Kernel-backed operations get one row per available ISA. Throws
/// ConfigError for an unknown op, repeats < 1 or a zero size.
std::vector<BenchRow> run_bench(const RunConfig& cfg, std::span<const std::size_t> sizes, int repeats,
                                const std::optional<std::string>& op = std::nullopt);

/// "op,isa,size,repeats,median_us,checksum" with a hex checksum.
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace lskdet
