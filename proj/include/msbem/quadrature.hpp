/**
 * \file quadrature.hpp
 * \brief Gauss rules, triangle rules and Sauter-Schwab rules for pairs of
 * flat triangles.
 *
 * Reference triangle: T = {(x1, x2) : 0 <= x2 <= x1 <= 1}, mapped to a
 * physical triangle (P0, P1, P2) by P0 + x1 (P1 - P0) + x2 (P2 - P1). The
 * barycentric coordinates are then (1 - x1, x1 - x2, x2).
 */
#ifndef MSBEM_QUADRATURE_HPP
#define MSBEM_QUADRATURE_HPP

#include <array>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace msbem {

using cplx = std::complex<double>;
using Mat3c = Eigen::Matrix<cplx, 3, 3>;

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gauss-Legendre rule with n points on [0, 1].
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

/// Rule on the reference triangle; weights sum to 1/2.
struct TriangleRule {
    std::vector<Eigen::Vector2d> points;
    std::vector<double> weights;
    int size() const { return static_cast<int>(weights.size()); }
};
/// Collapsed (Duffy) tensor Gauss rule with n x n points.
TriangleRule collapsed_gauss(int n);
/// Three-point rule, exact for quadratics.
TriangleRule three_point_rule();

inline std::array<double, 3> barycentric(const Eigen::Vector2d &x) { return {1.0 - x[0], x[0] - x[1], x[1]}; }

enum class PairClass { identical, common_edge, common_vertex, disjoint };

/// A 4D rule on T x T: points (x, y) and weights, integrating functions that
/// are singular on the set where the two charts touch.
struct PairRule {
    std::vector<Eigen::Vector2d> x, y;
    std::vector<double> weights;
    /// products l_a(x) l_b(y) at every point, row-major in (a, b)
    std::vector<std::array<double, 9>> products;
    /// true when only one of each pair of mirrored maps is kept; the full
    /// integral is then Q + Q^T (identical pairs, symmetric kernels)
    bool half_symmetric = false;
    int size() const { return static_cast<int>(weights.size()); }
};

/// Sauter-Schwab rule for a touching pair. After the regularizing maps the
/// kernel's distance factors out as a polynomial in some of the four cube
/// variables times |v(eta)| for the rest; those angular directions
/// (eta3 for identical pairs, eta2..eta3 for a shared edge, eta1..eta3 for a
/// shared vertex) get `singular_order` points, the others `order`.
/// common_edge assumes the shared edge is P0-P1 = Q0-Q1 in both charts;
/// common_vertex assumes P0 = Q0. With `half` the identical-pair rule keeps
/// only three of its six maps (see PairRule::half_symmetric).
PairRule sauter_schwab_rule(PairClass c, int order, int singular_order, bool half = false);

struct QuadratureConfig {
    int order = 5;                 // Gauss points per regular dimension, touching and near pairs
    int singular_order = 8;        // Gauss points per angular dimension of touching pairs
    int far_order = 3;             // collapsed Gauss order for moderately separated pairs
    double near_threshold = 1.5;   // distance / diameter below which `order` is used
    double far_threshold = 4.0;    // distance / diameter above which the 3-point rule is used

    void validate() const;
};

using Kernel = std::function<cplx(const Eigen::Vector3d &x, const Eigen::Vector3d &y)>;
using Corners = std::array<Eigen::Vector3d, 3>;

/// Classifies a pair from corner vertex ids on a common carrier mesh.
PairClass classify(const std::array<int, 3> &a, const std::array<int, 3> &b);

/**
 * Moment matrix Q(a, b) = int_S int_T k(x, y) l_a(x) l_b(y) dy dx for the
 * barycentric coordinates l of triangles S (test) and T (trial).
 *
 * Vertex ids drive the pair classification; coordinates must be consistent
 * with them. The kernel is assumed to depend on x - y only through |x - y|
 * for the reciprocity guarantee: moment(S, T) = moment(T, S)^T exactly.
 */
template <class K>
Mat3c pair_moments(const K &kernel, const Corners &s, const std::array<int, 3> &sid, const Corners &t,
                   const std::array<int, 3> &tid, const QuadratureConfig &cfg);

/// Scalar form: int_S int_T k(x, y) f(x) g(y) with shape values given as
/// barycentric-linear nodal values.
cplx sauter_schwab_integral(const Kernel &kernel, const Corners &s, const std::array<int, 3> &sid,
                            const Corners &t, const std::array<int, 3> &tid, const QuadratureConfig &cfg,
                            const Eigen::Vector3d &fs = Eigen::Vector3d::Ones(),
                            const Eigen::Vector3d &ft = Eigen::Vector3d::Ones());

// ---------------------------------------------------------------------------
// Implementation details shared by the template.

namespace detail {

const PairRule &cached_rule(PairClass c, int order, int singular_order);
const TriangleRule &cached_collapsed(int order);
const TriangleRule &cached_three_point();

inline Eigen::Vector3d chart(const Corners &p, const Eigen::Vector2d &x) {
    return p[0] + x[0] * (p[1] - p[0]) + x[1] * (p[2] - p[1]);
}

inline double twice_area(const Corners &p) { return (p[1] - p[0]).cross(p[2] - p[0]).norm(); }

/// Reorders corners so that shared ids come first, in the same order in both
/// triangles. perm_s[k] is the original corner index placed at position k.
PairClass align(const std::array<int, 3> &sid, const std::array<int, 3> &tid, std::array<int, 3> &perm_s,
                std::array<int, 3> &perm_t);

template <class K>
Mat3c tensor_moments(const K &kernel, const Corners &s, const Corners &t, const TriangleRule &rs,
                     const TriangleRule &rt) {
    const double js = twice_area(s), jt = twice_area(t);
    const int ns = rs.size(), nt = rt.size();
    thread_local std::vector<Eigen::Vector3d> yt;
    thread_local std::vector<std::array<double, 3>> lt;
    yt.resize(nt);
    lt.resize(nt);
    for (int j = 0; j < nt; ++j) {
        yt[j] = chart(t, rt.points[j]);
        const auto l = barycentric(rt.points[j]);
        lt[j] = {l[0] * rt.weights[j], l[1] * rt.weights[j], l[2] * rt.weights[j]};
    }
    double re[9] = {}, im[9] = {};
    for (int i = 0; i < ns; ++i) {
        const Eigen::Vector3d x = chart(s, rs.points[i]);
        double ar[3] = {}, ai[3] = {};
        for (int j = 0; j < nt; ++j) {
            const cplx k = kernel(x, yt[j]);
            for (int b = 0; b < 3; ++b) {
                ar[b] += k.real() * lt[j][b];
                ai[b] += k.imag() * lt[j][b];
            }
        }
        const auto ls = barycentric(rs.points[i]);
        for (int a = 0; a < 3; ++a) {
            const double w = rs.weights[i] * ls[a];
            for (int b = 0; b < 3; ++b) {
                re[3 * a + b] += w * ar[b];
                im[3 * a + b] += w * ai[b];
            }
        }
    }
    Mat3c q;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) q(a, b) = cplx(re[3 * a + b], im[3 * a + b]) * (js * jt);
    return q;
}

template <class K>
Mat3c singular_moments(const K &kernel, const Corners &s, const Corners &t, const PairRule &rule) {
    double re[9] = {}, im[9] = {};
    const Eigen::Vector3d s0 = s[0], s1 = s[1] - s[0], s2 = s[2] - s[1];
    const Eigen::Vector3d t0 = t[0], t1 = t[1] - t[0], t2 = t[2] - t[1];
    for (int i = 0; i < rule.size(); ++i) {
        const Eigen::Vector3d x = s0 + rule.x[i][0] * s1 + rule.x[i][1] * s2;
        const Eigen::Vector3d y = t0 + rule.y[i][0] * t1 + rule.y[i][1] * t2;
        const cplx k = kernel(x, y) * rule.weights[i];
        const auto &pr = rule.products[i];
        for (int m = 0; m < 9; ++m) {
            re[m] += k.real() * pr[m];
            im[m] += k.imag() * pr[m];
        }
    }
    const double jac = twice_area(s) * twice_area(t);
    Mat3c q;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) q(a, b) = cplx(re[3 * a + b], im[3 * a + b]) * jac;
    if (rule.half_symmetric) q = (q + q.transpose()).eval();
    return q;
}

template <class K>
Mat3c pair_moments_ordered(const K &kernel, const Corners &s, const std::array<int, 3> &sid, const Corners &t,
                           const std::array<int, 3> &tid, const QuadratureConfig &cfg) {
    std::array<int, 3> ps{}, pt{};
    const PairClass c = align(sid, tid, ps, pt);
    if (c == PairClass::disjoint) {
        Eigen::Vector3d cs = (s[0] + s[1] + s[2]) / 3.0, ct = (t[0] + t[1] + t[2]) / 3.0;
        double diam = 0.0;
        for (int a = 0; a < 3; ++a) {
            diam = std::max(diam, (s[a] - s[(a + 1) % 3]).norm());
            diam = std::max(diam, (t[a] - t[(a + 1) % 3]).norm());
        }
        const double ratio = (cs - ct).norm() / diam;
        const TriangleRule &r = ratio < cfg.near_threshold ? cached_collapsed(cfg.order)
                                : ratio < cfg.far_threshold ? cached_collapsed(cfg.far_order)
                                                            : cached_three_point();
        return tensor_moments(kernel, s, t, r, r);
    }
    const Corners sa{s[ps[0]], s[ps[1]], s[ps[2]]}, ta{t[pt[0]], t[pt[1]], t[pt[2]]};
    const Mat3c qa = singular_moments(kernel, sa, ta, cached_rule(c, cfg.order, cfg.singular_order));
    Mat3c q;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) q(ps[a], pt[b]) = qa(a, b);
    return q;
}

inline bool id_less(const std::array<int, 3> &a, const std::array<int, 3> &b) { return a < b; }

}  // namespace detail

template <class K>
Mat3c pair_moments(const K &kernel, const Corners &s, const std::array<int, 3> &sid, const Corners &t,
                   const std::array<int, 3> &tid, const QuadratureConfig &cfg) {
    // Evaluate in a canonical order so that swapping the pair gives the exact transpose.
    if (detail::id_less(tid, sid)) return detail::pair_moments_ordered(kernel, t, tid, s, sid, cfg).transpose();
    return detail::pair_moments_ordered(kernel, s, sid, t, tid, cfg);
}

}  // namespace msbem

#endif  // MSBEM_QUADRATURE_HPP
