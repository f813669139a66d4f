#include "msbem/excitation.hpp"

#include <cmath>
#include <limits>

namespace msbem {

cplx plane_wave(const Eigen::Vector3d &direction, cplx kappa, const Eigen::Vector3d &point) {
    if (std::abs(direction.norm() - 1.0) > 1e-12) throw std::invalid_argument("direction must be a unit vector");
    return std::exp(cplx(0.0, 1.0) * kappa * direction.dot(point));
}

std::pair<cplx, cplx> plane_wave_traces(const Eigen::Vector3d &direction, cplx kappa, const Eigen::Vector3d &point,
                                        const Eigen::Vector3d &normal) {
    if (std::abs(normal.norm() - 1.0) > 1e-12) throw std::invalid_argument("normal must be a unit vector");
    const cplx u = plane_wave(direction, kappa, point);
    return {u, cplx(0.0, 1.0) * kappa * direction.dot(normal) * u};
}

ProbeSet default_probes(const MultiScreen &screen) {
    const TriMesh &s = *screen.surface();
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const Vec3 &v : s.vertices) c += v;
    c /= static_cast<double>(s.num_vertices());
    const double half = 2.0 * s.bounding_diameter();
    ProbeSet p;
    for (int i = 0; i < 8; ++i)
        p.points.push_back(c + half * Eigen::Vector3d((i & 1) ? 1 : -1, (i & 2) ? 1 : -1, (i & 4) ? 1 : -1));
    return p;
}

void validate_probes(const MultiScreen &screen, const ProbeSet &probes) {
    const TriMesh &s = *screen.surface();
    const double tol = 1e-3 * s.bounding_diameter();
    for (const Eigen::Vector3d &x : probes.points)
        for (int t = 0; t < s.num_triangles(); ++t)
            if (point_triangle_distance(x, s.corner(t, 0), s.corner(t, 1), s.corner(t, 2)) <= tol)
                throw SingularityError("probe point too close to the screen");
}

Eigen::VectorXcd scattered_field(const Eigen::VectorXcd &coefficients, const FunctionSpace &space, Problem problem,
                                 cplx kappa, const ProbeSet &probes) {
    KernelConfig cfg{kappa};
    return eval_potential(coefficients, space, cfg, probes.points,
                          problem == Problem::dirichlet ? Layer::single : Layer::double_);
}

Eigen::VectorXcd scattered_field(const SolveReport &report, const FunctionSpace &space, Problem problem, cplx kappa,
                                 const ProbeSet &probes) {
    if (!report.converged) throw SolverError("scattered field requested for an unconverged solve");
    return scattered_field(report.coefficients, space, problem, kappa, probes);
}

}  // namespace msbem
