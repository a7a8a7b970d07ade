#pragma once

#include "bdss/kernels.hpp"

// Internal: per-ISA table accessors. A translation unit returns nullptr when
// its ISA is not compiled in for this target.
namespace bdss::kernels {

const Table<float>* scalar_f32();
const Table<double>* scalar_f64();
const Table<float>* avx2_f32();
const Table<double>* avx2_f64();
const Table<float>* neon_f32();
const Table<double>* neon_f64();

bool avx2_runtime_ok();

}  // namespace bdss::kernels
