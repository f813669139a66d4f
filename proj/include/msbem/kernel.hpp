/**
 * \file kernel.hpp
 * \brief Helmholtz fundamental solution exp(i k r) / (4 pi r).
 */
#ifndef MSBEM_KERNEL_HPP
#define MSBEM_KERNEL_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace msbem {

using cplx = std::complex<double>;

struct KernelConfig {
    cplx kappa{0.0, 0.0};

    void validate() const {
        if (kappa.real() < 0.0) throw std::invalid_argument("wavenumber must have nonnegative real part");
        if (!std::isfinite(kappa.real()) || !std::isfinite(kappa.imag()))
            throw std::invalid_argument("wavenumber must be finite");
    }
};

class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double inv_4pi = 1.0 / (4.0 * std::numbers::pi);

/// G(z) = exp(i kappa |z|) / (4 pi |z|).
inline cplx greens(const KernelConfig &cfg, const Eigen::Vector3d &z) {
    const double r = z.norm();
    if (r == 0.0) throw SingularityError("Green's function evaluated at zero distance");
    return std::exp(cplx(0.0, 1.0) * cfg.kappa * r) * (inv_4pi / r);
}

/// Kernel functor used by the assembly loops; no zero check (the quadrature
/// rules never sample coincident points).
struct HelmholtzKernel {
    cplx ik;
    bool static_case;

    explicit HelmholtzKernel(cplx kappa) : ik(cplx(0.0, 1.0) * kappa), static_case(kappa == cplx(0.0, 0.0)) {}

    cplx operator()(const Eigen::Vector3d &x, const Eigen::Vector3d &y) const {
        const double r = (x - y).norm();
        if (static_case) return {inv_4pi / r, 0.0};
        if (ik.real() == 0.0) {
            const double kr = ik.imag() * r;
            return cplx(std::cos(kr), std::sin(kr)) * (inv_4pi / r);
        }
        return std::exp(ik * r) * (inv_4pi / r);
    }
};

/// Normal derivative of G(x - y) with respect to y along n:
/// exp(i k r) (i k r - 1) / (4 pi r^3) * (y - x) . n.
inline cplx greens_dny(cplx kappa, const Eigen::Vector3d &x, const Eigen::Vector3d &y, const Eigen::Vector3d &n) {
    const Eigen::Vector3d d = x - y;
    const double r = d.norm();
    if (r == 0.0) throw SingularityError("double-layer kernel evaluated at zero distance");
    const cplx ikr = cplx(0.0, 1.0) * kappa * r;
    // dG/dr = G (ik - 1/r); dr/dy = -(x - y)/r
    return std::exp(ikr) * (ikr - 1.0) * inv_4pi / (r * r * r) * (-d.dot(n));
}

}  // namespace msbem

#endif  // MSBEM_KERNEL_HPP
