#pragma once

// Central finite-difference checks of gradient_J against functional_J and of
// hessian_apply against gradient_J.

#include <array>
#include <cmath>

#include "sinhpoisson/model.hpp"

namespace sinhp::testing {

inline constexpr std::array<double, 3> fd_steps{1e-3, 1e-4, 1e-5};

struct FdOrders {
    std::array<double, 3> error{};
    double order = 0.0;  // least-squares slope of log error against log h
};

inline double fitted_order(const std::array<double, 3>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double x = std::log(fd_steps[i]), y = std::log(std::max(err[i], 1e-300));
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
}

inline FdOrders gradient_fd(const Field& v, const Field& phi, const Parameters& p) {
    FdOrders out;
    const double exact = inner(gradient_J(v, p), phi);
    for (std::size_t i = 0; i < 3; ++i) {
        const double h = fd_steps[i];
        Field vp = v, vm = v;
        vp.axpy(h, phi);
        vm.axpy(-h, phi);
        out.error[i] = std::abs((functional_J(vp, p) - functional_J(vm, p)) / (2 * h) - exact);
    }
    out.order = fitted_order(out.error);
    return out;
}

inline FdOrders hessian_fd(const Field& v, const Field& phi, const Parameters& p) {
    FdOrders out;
    const Field exact = hessian_apply(v, phi, p);
    for (std::size_t i = 0; i < 3; ++i) {
        const double h = fd_steps[i];
        Field vp = v, vm = v;
        vp.axpy(h, phi);
        vm.axpy(-h, phi);
        Field d = gradient_J(vp, p) - gradient_J(vm, p);
        d *= 1.0 / (2 * h);
        d -= exact;
        out.error[i] = l2_norm(d);
    }
    out.order = fitted_order(out.error);
    return out;
}

}  // namespace sinhp::testing
