#include "diskpatch/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "diskpatch/error.hpp"

namespace diskpatch {

namespace {

GaussRule build(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = z; p0 = 1.0; }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // ascending order on [0,1]
        r.x[n - 1 - i] = 0.5 * (1.0 + z);
        r.w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static const std::array<GaussRule, 65> table = [] {
        std::array<GaussRule, 65> t;
        for (int k = 1; k <= 64; ++k) t[k] = build(k);
        return t;
    }();
    if (n < 1 || n > 64) throw Error(ErrorKind::Misuse, "gauss_legendre order out of range");
    return table[n];
}

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::DegenerateInput: return "degenerate input";
        case ErrorKind::InvalidResolution: return "invalid resolution";
        case ErrorKind::DegenerateGeometry: return "degenerate geometry";
        case ErrorKind::InvalidPatch: return "invalid patch";
        case ErrorKind::Domain: return "domain error";
        case ErrorKind::NearSingular: return "near-singular evaluation";
        case ErrorKind::Stability: return "stability error";
        case ErrorKind::Topology: return "topology error";
        case ErrorKind::Degeneracy: return "degeneracy error";
        case ErrorKind::ResolutionExhausted: return "resolution exhausted";
        case ErrorKind::Misuse: return "misuse";
        case ErrorKind::Config: return "config error";
        case ErrorKind::Io: return "io error";
    }
    return "error";
}

}  // namespace diskpatch
