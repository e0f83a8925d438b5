#pragma once

#include "spoc/nlp.hpp"

namespace spoc::detail {

/// Adapter to Ipopt's C interface. Only compiled when Ipopt was found at configure time.
NlpResult solve_ipopt(const NlpProblem& problem, const NlpSolveOptions& options);

}  // namespace spoc::detail
