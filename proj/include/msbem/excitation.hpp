/**
 * \file excitation.hpp
 * \brief Plane-wave excitation, its traces, probe sets and scattered fields
 * of solved densities.
 */
#ifndef MSBEM_EXCITATION_HPP
#define MSBEM_EXCITATION_HPP

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "msbem/geometry.hpp"
#include "msbem/solver.hpp"

namespace msbem {

/// exp(i kappa d . x).
cplx plane_wave(const Eigen::Vector3d &direction, cplx kappa, const Eigen::Vector3d &point);

/// (u_inc, du_inc/dn) at a point with unit normal n.
std::pair<cplx, cplx> plane_wave_traces(const Eigen::Vector3d &direction, cplx kappa, const Eigen::Vector3d &point,
                                        const Eigen::Vector3d &normal);

struct ProbeSet {
    std::vector<Eigen::Vector3d> points;
};

/// Eight corners of a cube of side 4 x diameter centred at the centroid of
/// the screen's vertices.
ProbeSet default_probes(const MultiScreen &screen);

/// Checks that every probe keeps 1e-3 x screen diameter away from the screen.
void validate_probes(const MultiScreen &screen, const ProbeSet &probes);

/// Single-layer potential (Dirichlet) or double-layer potential (Neumann) of
/// a solved density.
Eigen::VectorXcd scattered_field(const Eigen::VectorXcd &coefficients, const FunctionSpace &space, Problem problem,
                                 cplx kappa, const ProbeSet &probes);
Eigen::VectorXcd scattered_field(const SolveReport &report, const FunctionSpace &space, Problem problem, cplx kappa,
                                 const ProbeSet &probes);

}  // namespace msbem

#endif  // MSBEM_EXCITATION_HPP
