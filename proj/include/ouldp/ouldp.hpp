#ifndef OULDP_OULDP_HPP
#define OULDP_OULDP_HPP

#include "ouldp/cgf.hpp"
#include "ouldp/concentration.hpp"
#include "ouldp/error.hpp"
#include "ouldp/extended_real.hpp"
#include "ouldp/golden.hpp"
#include "ouldp/ldp_rates.hpp"
#include "ouldp/mc_harness.hpp"
#include "ouldp/ou_core.hpp"
#include "ouldp/parallel.hpp"
#include "ouldp/rng.hpp"

namespace ouldp {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace ouldp

#endif  // OULDP_OULDP_HPP
