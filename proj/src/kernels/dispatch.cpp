#include "fedmr/kernels.hpp"

namespace fedmr::kernels {
namespace {

const Backend* g_active = nullptr;

bool cpu_ok(const std::string& name) {
#if defined(FEDMR_HAVE_AVX2_TU)
  if (name == "avx2")
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#endif
#if defined(FEDMR_HAVE_NEON_TU)
  if (name == "neon") return true;  // baseline on aarch64
#endif
  return name == "scalar";
}

const Backend* find(const std::string& name) {
  if (name == "scalar") return &scalar_backend();
#if defined(FEDMR_HAVE_AVX2_TU)
  if (name == "avx2") return avx2_backend();
#endif
#if defined(FEDMR_HAVE_NEON_TU)
  if (name == "neon") return neon_backend();
#endif
  return nullptr;
}

}  // namespace

std::vector<std::string> available() {
  std::vector<std::string> out{"scalar"};
#if defined(FEDMR_HAVE_AVX2_TU)
  if (avx2_backend() && cpu_ok("avx2")) out.push_back("avx2");
#endif
#if defined(FEDMR_HAVE_NEON_TU)
  if (neon_backend()) out.push_back("neon");
#endif
  return out;
}

bool select(const std::string& name, std::string& err) {
  if (name == "auto") {
    const Backend* best = &scalar_backend();
    for (const auto& cand : available())
      if (cand != "scalar") best = find(cand);
    g_active = best;
    return true;
  }
  const Backend* b = find(name);
  if (!b) {
    err = "kernel backend '" + name + "' is not built into this binary";
    return false;
  }
  if (!cpu_ok(name)) {
    err = "kernel backend '" + name + "' is not supported by this cpu";
    return false;
  }
  g_active = b;
  return true;
}

const Backend& active() {
  if (!g_active) {
    std::string err;
    select("auto", err);
  }
  return *g_active;
}

}  // namespace fedmr::kernels
