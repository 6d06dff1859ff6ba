#pragma once

#include <vector>

namespace diskpatch {

// Gauss-Legendre rule mapped to [0,1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Cached, n in [1, 64].
const GaussRule& gauss_legendre(int n);

}  // namespace diskpatch
