#include "bdss/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "bdss/errors.hpp"
#include "kernel_tables.hpp"

namespace bdss::kernels {

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return avx2_f32() != nullptr && avx2_runtime_ok();
    case Isa::neon: return neon_f32() != nullptr;
  }
  return false;
}

Isa best_supported() {
  if (supported(Isa::avx2)) return Isa::avx2;
  if (supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("BDSS_KERNELS")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == isa_name(isa)) {
        if (!supported(isa))
          throw config_error("BDSS_KERNELS=" + want + " is not supported on this host");
        return isa;
      }
    }
    throw config_error("BDSS_KERNELS=" + want + " (expected scalar, avx2 or neon)");
  }
  return best_supported();
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

Isa active_isa() { return active_slot().load(); }

void set_active(Isa isa) {
  if (!supported(isa))
    throw config_error(std::string("kernel isa '") + isa_name(isa) +
                       "' is not supported on this host");
  active_slot().store(isa);
}

template <>
const Table<float>& table<float>(Isa isa) {
  const Table<float>* t = nullptr;
  switch (isa) {
    case Isa::scalar: t = scalar_f32(); break;
    case Isa::avx2: t = avx2_f32(); break;
    case Isa::neon: t = neon_f32(); break;
  }
  if (!t)
    throw config_error(std::string("kernel isa '") + isa_name(isa) + "' not compiled in");
  return *t;
}

template <>
const Table<double>& table<double>(Isa isa) {
  const Table<double>* t = nullptr;
  switch (isa) {
    case Isa::scalar: t = scalar_f64(); break;
    case Isa::avx2: t = avx2_f64(); break;
    case Isa::neon: t = neon_f64(); break;
  }
  if (!t)
    throw config_error(std::string("kernel isa '") + isa_name(isa) + "' not compiled in");
  return *t;
}

}  // namespace bdss::kernels
