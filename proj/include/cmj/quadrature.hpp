#pragma once

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cmj/weights.hpp"

namespace cmj {

/// E[g(X)] for X drawn from `law`, by quadrature over the survival level.
///
/// Writes E[g(X)] = int_0^1 g(Q(s)) ds with Q the inverse survival function
/// and substitutes s = e^{-y}. Dyadic panels in y keep the far tail (large X,
/// tiny s) resolved, which matters for heavy laws.
template <class F>
double expectation(const ScalarLaw& law, F&& g) {
    if (const auto* p = std::get_if<PointMass>(&law)) return g(p->value);
    using boost::math::quadrature::gauss_kronrod;
    auto integrand = [&](double y) {
        const double s = std::exp(-y);
        if (s <= 0.0) return 0.0;
        return g(quantile_upper(law, s)) * s;
    };
    double total = 0.0;
    double a = 0.0;
    double b = 0.5;
    while (a < 745.0) {
        total += gauss_kronrod<double, 21>::integrate(integrand, a, b, 8, 1e-12);
        a = b;
        b = std::min(745.0, 2.0 * b);
    }
    return total;
}

}  // namespace cmj
