#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "attrseq/core/errors.hpp"
#include "attrseq/core/params.hpp"

namespace attrseq {

/// Central-difference verification of an analytic gradient. `loss` must
/// re-evaluate the scalar objective against the current parameter values;
/// `analytic` holds the gradient refs in the same tensor order as `params`.
/// Returns max over entries of |a - n| / max(1, |a|, |n|).
inline double grad_check(const std::function<double()>& loss, ParamRefs params,
                         const ParamRefs& analytic, double epsilon = 1e-6) {
    if (!(epsilon > 0.0) || epsilon > 1e-3)
        throw ConfigError("grad_check: epsilon must lie in (0, 1e-3]");
    if (params.size() != analytic.size())
        throw DimensionError("grad_check: ref count mismatch");

    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != analytic[i].size())
            throw DimensionError("grad_check: tensor size mismatch at " + params[i].name);
        double* p = params[i].data();
        const double* a = analytic[i].data();
        for (std::size_t k = 0; k < params[i].size(); ++k) {
            const double saved = p[k];
            p[k] = saved + epsilon;
            const double up = loss();
            p[k] = saved - epsilon;
            const double down = loss();
            p[k] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw NumericalError("grad_check: non-finite loss at " + params[i].name);
            const double numeric = (up - down) / (2.0 * epsilon);
            const double denom = std::max({1.0, std::abs(a[k]), std::abs(numeric)});
            worst = std::max(worst, std::abs(a[k] - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace attrseq
