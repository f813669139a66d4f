#include "msbem/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace msbem {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw QuadratureError("Gauss rule needs at least one point");
    GaussRule r;
    r.points.resize(n);
    r.weights.resize(n);
    // Newton iteration on P_n, starting from the Chebyshev-like guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute the derivative at the converged root
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.points[i] = 0.5 * (1.0 - z);
        r.points[n - 1 - i] = 0.5 * (1.0 + z);
        r.weights[i] = r.weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) r.points[n / 2] = 0.5;
    return r;
}

TriangleRule collapsed_gauss(int n) {
    const GaussRule g = gauss_legendre(n);
    TriangleRule r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = g.points[i], v = g.points[j];
            r.points.emplace_back(u, u * v);
            r.weights.push_back(g.weights[i] * g.weights[j] * u);
        }
    return r;
}

TriangleRule three_point_rule() {
    // Edge-midpoint-free interior rule: barycentric (2/3, 1/6, 1/6) and permutations.
    TriangleRule r;
    const std::array<std::array<double, 3>, 3> lam{{{2.0 / 3, 1.0 / 6, 1.0 / 6},
                                                     {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                                     {1.0 / 6, 1.0 / 6, 2.0 / 3}}};
    for (const auto &l : lam) {
        // l = (1 - x1, x1 - x2, x2)
        r.points.emplace_back(1.0 - l[0], l[2]);
        r.weights.push_back(1.0 / 6.0);
    }
    return r;
}

PairRule sauter_schwab_rule(PairClass c, int order, int singular_order, bool half) {
    if (c == PairClass::disjoint) throw QuadratureError("no singular rule for disjoint pairs");
    if (order < 1 || singular_order < 1) throw QuadratureError("quadrature order must be at least 1");
    // first angular variable: e3 (identical), e2 (edge), e1 (vertex)
    const int first_angular = c == PairClass::identical ? 3 : c == PairClass::common_edge ? 2 : 1;
    std::array<GaussRule, 4> g;
    for (int d = 0; d < 4; ++d) g[d] = gauss_legendre(d >= first_angular ? singular_order : order);
    PairRule r;
    auto add = [&r](double x1, double x2, double y1, double y2, double w) {
        r.x.emplace_back(x1, x2);
        r.y.emplace_back(y1, y2);
        r.weights.push_back(w);
    };
    for (int i = 0; i < static_cast<int>(g[0].points.size()); ++i)
        for (int j = 0; j < static_cast<int>(g[1].points.size()); ++j)
            for (int k = 0; k < static_cast<int>(g[2].points.size()); ++k)
                for (int l = 0; l < static_cast<int>(g[3].points.size()); ++l) {
                    const double xi = g[0].points[i], e1 = g[1].points[j], e2 = g[2].points[k],
                                 e3 = g[3].points[l];
                    const double w0 = g[0].weights[i] * g[1].weights[j] * g[2].weights[k] * g[3].weights[l];
                    switch (c) {
                        case PairClass::identical: {
                            const double w = w0 * xi * xi * xi * e1 * e1 * e2;
                            // three maps and their mirror images (x <-> y)
                            const double m[3][4] = {
                                {xi, xi * (1 - e1 + e1 * e2), xi * (1 - e1 * e2 * e3), xi * (1 - e1)},
                                {xi, xi * e1 * (1 - e2 + e2 * e3), xi * (1 - e1 * e2), xi * e1 * (1 - e2)},
                                {xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * (1 - e2)}};
                            for (const auto &mm : m) {
                                add(mm[0], mm[1], mm[2], mm[3], w);
                                if (!half) add(mm[2], mm[3], mm[0], mm[1], w);
                            }
                            break;
                        }
                        case PairClass::common_edge: {
                            const double w1 = w0 * xi * xi * xi * e1 * e1;
                            const double w = w1 * e2;
                            add(xi, xi * e1 * e3, xi * (1 - e1 * e2), xi * e1 * (1 - e2), w1);
                            add(xi, xi * e1, xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), w);
                            add(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * e2 * e3, w);
                            add(xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), xi, xi * e1, w);
                            add(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * e2, w);
                            break;
                        }
                        case PairClass::common_vertex: {
                            const double w = w0 * xi * xi * xi * e2;
                            add(xi, xi * e1, xi * e2, xi * e2 * e3, w);
                            add(xi * e2, xi * e2 * e3, xi, xi * e1, w);
                            break;
                        }
                        default: break;
                    }
                }
    r.half_symmetric = half && c == PairClass::identical;
    r.products.resize(r.weights.size());
    for (int i = 0; i < r.size(); ++i) {
        const auto lx = barycentric(r.x[i]), ly = barycentric(r.y[i]);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) r.products[i][3 * a + b] = lx[a] * ly[b];
    }
    return r;
}

void QuadratureConfig::validate() const {
    if (order < 1 || singular_order < 1 || far_order < 1) throw QuadratureError("quadrature order must be at least 1");
    if (!(near_threshold > 0.0) || !(far_threshold >= near_threshold))
        throw QuadratureError("quadrature thresholds must satisfy 0 < near <= far");
}

PairClass classify(const std::array<int, 3> &a, const std::array<int, 3> &b) {
    int shared = 0;
    for (int i : a)
        for (int j : b) shared += i == j;
    switch (shared) {
        case 3: return PairClass::identical;
        case 2: return PairClass::common_edge;
        case 1: return PairClass::common_vertex;
        default: return PairClass::disjoint;
    }
}

namespace detail {

namespace {
std::mutex cache_mutex;
}

const PairRule &cached_rule(PairClass c, int order, int singular_order) {
    static std::map<std::array<int, 3>, std::unique_ptr<PairRule>> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto &slot = cache[{static_cast<int>(c), order, singular_order}];
    if (!slot) slot = std::make_unique<PairRule>(sauter_schwab_rule(c, order, singular_order, true));
    return *slot;
}

const TriangleRule &cached_collapsed(int order) {
    static std::map<int, std::unique_ptr<TriangleRule>> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto &slot = cache[order];
    if (!slot) slot = std::make_unique<TriangleRule>(collapsed_gauss(order));
    return *slot;
}

const TriangleRule &cached_three_point() {
    static const TriangleRule rule = three_point_rule();
    return rule;
}

PairClass align(const std::array<int, 3> &sid, const std::array<int, 3> &tid, std::array<int, 3> &ps,
                std::array<int, 3> &pt) {
    int ns = 0;
    std::array<bool, 3> used_s{}, used_t{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (sid[a] == tid[b]) {
                ps[ns] = a;
                pt[ns] = b;
                used_s[a] = used_t[b] = true;
                ++ns;
            }
    int ks = ns, kt = ns;
    for (int a = 0; a < 3; ++a) {
        if (!used_s[a]) ps[ks++] = a;
        if (!used_t[a]) pt[kt++] = a;
    }
    switch (ns) {
        case 3: return PairClass::identical;
        case 2: return PairClass::common_edge;
        case 1: return PairClass::common_vertex;
        case 0: return PairClass::disjoint;
        default: throw QuadratureError("triangle with repeated vertex ids");
    }
}

}  // namespace detail

cplx sauter_schwab_integral(const Kernel &kernel, const Corners &s, const std::array<int, 3> &sid, const Corners &t,
                            const std::array<int, 3> &tid, const QuadratureConfig &cfg, const Eigen::Vector3d &fs,
                            const Eigen::Vector3d &ft) {
    cfg.validate();
    for (const Corners *c : {&s, &t})
        if (!(detail::twice_area(*c) > 0.0)) throw QuadratureError("degenerate triangle");
    const Mat3c q = pair_moments(kernel, s, sid, t, tid, cfg);
    return fs.cast<cplx>().dot(q * ft.cast<cplx>());
}

}  // namespace msbem
