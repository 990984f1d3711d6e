#pragma once

#include <functional>
#include <string>

#include "dynmap/core/rng.hpp"
#include "dynmap/nn/tensor.hpp"

namespace dynmap::nn {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;  // "name[index]"
    bool passed = false;
    int probes = 0;
};

// Compares analytic gradients against central finite differences.
// `loss_and_grad` must build a fresh tape over the current parameter
// values, run backward, and return the loss in double precision (use
// Tape::dval); gradients accumulate into the ParamSet. Probes favour the
// entries with the largest analytic magnitude and skip those below 5% of
// their tensor's peak: in float32 the finite-difference signal h·g of a
// tiny-gradient entry drowns in forward rounding noise, so such probes
// measure the arithmetic, not the backward pass. An optional name filter
// restricts which parameters are probed.
GradCheckReport grad_check(ParamSet& params, const std::function<double()>& loss_and_grad,
                           double h, double tolerance, int probes_per_param = 8,
                           const std::function<bool(const std::string&)>& probe_filter = {});

}  // namespace dynmap::nn
