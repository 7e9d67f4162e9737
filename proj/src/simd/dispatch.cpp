// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string>

#include "lskdet/error.hpp"
#include "lskdet/simd/kernels.hpp"

namespace lskdet::simd {
namespace {

constexpr KernelTable kScalarTable{Isa::kScalar, &scalar::depthwise_plane, &scalar::iou_one_to_many,
                                   &scalar::hardswish};
#if defined(LSKDET_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::kAvx2, &avx2::depthwise_plane, &avx2::iou_one_to_many, &avx2::hardswish};
#endif

bool cpu_has_avx2() {
#if defined(LSKDET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* select_default() {
  if (const char* env = std::getenv("LSKDET_ISA")) {
    if (auto isa = parse_isa(env); isa && isa_available(*isa)) return &kernels_for(*isa);
  }
  const auto isas = available_isas();
  return &kernels_for(isas.back());
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  return std::nullopt;
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2: {
      static const bool has = cpu_has_avx2();
      return has;
    }
  }
  return false;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::kScalar};
  if (isa_available(Isa::kAvx2)) out.push_back(Isa::kAvx2);
  return out;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) throw ConfigError("kernel variant '" + std::string(isa_name(isa)) + "' is not available");
#if defined(LSKDET_HAVE_AVX2)
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

void force_isa(std::optional<Isa> isa) {
  active().store(isa ? &kernels_for(*isa) : select_default(), std::memory_order_release);
}

}  // namespace lskdet::simd
