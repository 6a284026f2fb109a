#ifndef STMRF_STMRF_HPP
#define STMRF_STMRF_HPP

/* Umbrella header: spatial-temporal MRF inference of differential
 * expression states from two-condition time-course data.
 */

#include "stmrf/evaluate.hpp"
#include "stmrf/gamma_gamma.hpp"
#include "stmrf/inference.hpp"
#include "stmrf/io.hpp"
#include "stmrf/math.hpp"
#include "stmrf/mrf_prior.hpp"
#include "stmrf/network.hpp"
#include "stmrf/rng.hpp"
#include "stmrf/simulate.hpp"
#include "stmrf/state_matrix.hpp"

namespace stmrf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stmrf

#endif
