#pragma once

#include "renorm/simd.hpp"

namespace renorm::kernels {

const KernelTable& scalar_table();
#if defined(RENORM_WITH_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace renorm::kernels
