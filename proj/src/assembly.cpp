#include "msbem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "msbem/parallel.hpp"

namespace msbem {

Eigen::VectorXcd BlockDiagonal::apply(const Eigen::VectorXcd &x) const {
    if (x.size() != dim()) throw std::invalid_argument("block-diagonal apply: wrong vector length");
    Eigen::VectorXcd y(x.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int o = offsets[b], n = offsets[b + 1] - offsets[b];
        y.segment(o, n).noalias() = blocks[b] * x.segment(o, n);
    }
    return y;
}

Eigen::MatrixXcd BlockDiagonal::dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim(), dim());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int o = offsets[b], n = offsets[b + 1] - offsets[b];
        m.block(o, o, n, n) = blocks[b];
    }
    return m;
}

void IncidentWave::validate() const {
    if (std::abs(direction.norm() - 1.0) > 1e-12) throw std::invalid_argument("incident direction must be a unit vector");
    if (kappa.real() < 0.0) throw std::invalid_argument("wavenumber must have nonnegative real part");
}

namespace {

struct ElementGeometry {
    Corners corners;
    std::array<int, 3> ids;
    Eigen::Vector3d normal;
    std::array<Eigen::Vector3d, 3> grad;  // surface gradients of the barycentric coordinates
};

std::vector<ElementGeometry> element_geometry(const TriMesh &mesh) {
    std::vector<ElementGeometry> out(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        ElementGeometry &g = out[t];
        for (int k = 0; k < 3; ++k) g.corners[k] = mesh.corner(t, k);
        g.ids = mesh.triangles[t];
        const Eigen::Vector3d cr = (g.corners[1] - g.corners[0]).cross(g.corners[2] - g.corners[0]);
        const double twice = cr.norm();
        if (!(twice > 0.0)) throw QuadratureError("degenerate triangle in carrier mesh");
        g.normal = cr / twice;
        for (int k = 0; k < 3; ++k)
            g.grad[k] = g.normal.cross(g.corners[(k + 2) % 3] - g.corners[(k + 1) % 3]) / twice;
    }
    return out;
}

std::vector<int> elements_with_pieces(const FunctionSpace &s) {
    std::vector<int> out;
    for (int e = 0; e < s.carrier->num_triangles(); ++e)
        if (s.element_begin(e + 1) > s.element_begin(e)) out.push_back(e);
    return out;
}

/// Surface curl (grad v x n0) of each piece, without the panel sign.
std::vector<Eigen::Vector3d> piece_curls(const FunctionSpace &s, const std::vector<ElementGeometry> &geo) {
    std::vector<Eigen::Vector3d> out(s.pieces.size());
    for (std::size_t i = 0; i < s.pieces.size(); ++i) {
        const Piece &p = s.pieces[i];
        const ElementGeometry &g = geo[p.element];
        Eigen::Vector3d grad = p.vals[0] * g.grad[0] + p.vals[1] * g.grad[1] + p.vals[2] * g.grad[2];
        out[i] = grad.cross(g.normal);
    }
    return out;
}

Eigen::MatrixXcd combine(const Eigen::MatrixXd &re, const Eigen::MatrixXd &im) {
    Eigen::MatrixXcd out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
}

/// a * t for a real sparse t.
Eigen::MatrixXcd times_sparse(const Eigen::MatrixXcd &a, const Eigen::SparseMatrix<double> &t) {
    const Eigen::MatrixXd re = a.real() * t, im = a.imag() * t;
    return combine(re, im);
}

/// t^T * a for a real sparse t.
Eigen::MatrixXcd transpose_times(const Eigen::SparseMatrix<double> &t, const Eigen::MatrixXcd &a) {
    const Eigen::MatrixXd re = t.transpose() * a.real(), im = t.transpose() * a.imag();
    return combine(re, im);
}

inline cplx bilinear(const Piece &p, const Mat3c &q, const Piece &r) {
    if (p.corner >= 0 && r.corner >= 0) return q(p.corner, r.corner);
    cplx acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        if (p.vals[a] == 0.0) continue;
        cplx row = 0.0;
        for (int b = 0; b < 3; ++b) row += q(a, b) * r.vals[b];
        acc += p.vals[a] * row;
    }
    return acc;
}

/// Shape-level matrix of V or W, then mapped through the shape transforms.
Eigen::MatrixXcd assemble_operator(const FunctionSpace &test, const FunctionSpace &trial, const KernelConfig &cfg,
                                   const QuadratureConfig &q, bool hypersingular) {
    cfg.validate();
    q.validate();
    if (test.carrier != trial.carrier && test.carrier->vertices != trial.carrier->vertices)
        throw std::invalid_argument("operator assembly needs test and trial spaces on one carrier");
    const TriMesh &mesh = *test.carrier;
    const std::vector<ElementGeometry> geo = element_geometry(mesh);
    const std::vector<int> rows = elements_with_pieces(test), cols = elements_with_pieces(trial);
    std::vector<Eigen::Vector3d> curl_test, curl_trial;
    if (hypersingular) {
        curl_test = piece_curls(test, geo);
        curl_trial = piece_curls(trial, geo);
    }
    const cplx k2 = cfg.kappa * cfg.kappa;
    const HelmholtzKernel kernel(cfg.kappa);

    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(test.num_shapes, trial.num_shapes);
    auto scatter = [&](int es, int et, const Mat3c &qm) {
        if (!hypersingular) {
            for (int a = test.element_begin(es); a < test.element_begin(es + 1); ++a) {
                const Piece &p = test.pieces[a];
                for (int c = trial.element_begin(et); c < trial.element_begin(et + 1); ++c) {
                    const Piece &r = trial.pieces[c];
                    s(p.shape, r.shape) += bilinear(p, qm, r);
                }
            }
            return;
        }
        const cplx qsum = qm.sum();
        const double nn = geo[es].normal.dot(geo[et].normal);
        for (int a = test.element_begin(es); a < test.element_begin(es + 1); ++a) {
            const Piece &p = test.pieces[a];
            for (int c = trial.element_begin(et); c < trial.element_begin(et + 1); ++c) {
                const Piece &r = trial.pieces[c];
                const double sg = p.sign * r.sign;
                s(p.shape, r.shape) += sg * (curl_test[a].dot(curl_trial[c]) * qsum - k2 * nn * bilinear(p, qm, r));
            }
        }
    };
    // With test == trial only pairs j >= i are integrated; the swapped pair is
    // the exact transpose because moments are evaluated in canonical order.
    const bool symmetric = &test == &trial;
    const int nrows = static_cast<int>(rows.size()), ncols = static_cast<int>(cols.size());
    const int chunk = std::max(1, 400000 / std::max(1, ncols));
    std::vector<Mat3c> buffer;
    for (int r0 = 0; r0 < nrows; r0 += chunk) {
        const int r1 = std::min(nrows, r0 + chunk);
        buffer.resize(static_cast<std::size_t>(r1 - r0) * ncols);
        parallel_for(r1 - r0, [&](int b, int e) {
            for (int i = b; i < e; ++i) {
                const ElementGeometry &gs = geo[rows[r0 + i]];
                for (int j = symmetric ? r0 + i : 0; j < ncols; ++j) {
                    const ElementGeometry &gt = geo[cols[j]];
                    buffer[static_cast<std::size_t>(i) * ncols + j] =
                        pair_moments(kernel, gs.corners, gs.ids, gt.corners, gt.ids, q);
                }
            }
        });
        // Sequential scatter keeps the summation order fixed.
        for (int i = r0; i < r1; ++i)
            for (int j = symmetric ? i : 0; j < ncols; ++j) {
                const Mat3c &qm = buffer[static_cast<std::size_t>(i - r0) * ncols + j];
                scatter(rows[i], cols[j], qm);
                if (symmetric && j != i) scatter(cols[j], rows[i], qm.transpose());
            }
    }
    if (!trial.identity_transform()) s = times_sparse(s, trial.transform);
    if (!test.identity_transform()) s = transpose_times(test.transform, s);
    return s;
}

void require_continuous(const FunctionSpace &s) {
    if (s.kind != SpaceKind::continuous_p1 && s.kind != SpaceKind::dual_p1)
        throw std::invalid_argument("hypersingular requires continuous densities");
}

}  // namespace

GalerkinMatrix assemble_single_layer(const FunctionSpace &test, const FunctionSpace &trial, const KernelConfig &cfg,
                                     const QuadratureConfig &q) {
    GalerkinMatrix m;
    m.entries = assemble_operator(test, trial, cfg, q, false);
    m.form = FormTag::V;
    m.test_kind = test.kind;
    m.trial_kind = trial.kind;
    return m;
}

GalerkinMatrix assemble_hypersingular(const FunctionSpace &test, const FunctionSpace &trial, const KernelConfig &cfg,
                                      const QuadratureConfig &q) {
    require_continuous(test);
    require_continuous(trial);
    GalerkinMatrix m;
    m.entries = assemble_operator(test, trial, cfg, q, true);
    m.form = FormTag::W;
    m.test_kind = test.kind;
    m.trial_kind = trial.kind;
    return m;
}

std::optional<Eigen::MatrixXcd> BlockCache::find(std::uint64_t key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = blocks_.find(key);
    if (it == blocks_.end()) return std::nullopt;
    ++hits_;
    return it->second;
}

void BlockCache::store(std::uint64_t key, const Eigen::MatrixXcd &block) {
    std::lock_guard<std::mutex> lock(mutex_);
    blocks_[key] = block;
}

std::size_t BlockCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return blocks_.size();
}

namespace {

struct Fnv {
    std::uint64_t h = 1469598103934665603ull;
    void bytes(const void *p, std::size_t n) {
        const auto *c = static_cast<const unsigned char *>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= c[i];
            h *= 1099511628211ull;
        }
    }
    template <class T>
    void add(const T &v) {
        bytes(&v, sizeof v);
    }
};

}  // namespace

std::uint64_t block_fingerprint(const FunctionSpace &block, FormTag form, const KernelConfig &cfg,
                                const QuadratureConfig &q) {
    Fnv f;
    f.add(static_cast<int>(form));
    f.add(static_cast<int>(block.kind));
    f.add(cfg.kappa);
    f.add(q.order);
    f.add(q.singular_order);
    f.add(q.far_order);
    f.add(q.near_threshold);
    f.add(q.far_threshold);
    f.add(block.num_shapes);
    f.add(block.dim());
    const TriMesh &mesh = *block.carrier;
    for (const Piece &p : block.pieces) {
        for (int k = 0; k < 3; ++k) {
            const Vec3 &v = mesh.vertices[mesh.triangles[p.element][k]];
            f.add(v[0]);
            f.add(v[1]);
            f.add(v[2]);
            f.add(mesh.triangles[p.element][k]);
        }
        f.add(p.shape);
        f.add(p.sign);
        f.add(p.corner);
        for (double v : p.vals) f.add(v);
    }
    const Eigen::SparseMatrix<double> &t = block.transform;
    for (int k = 0; k < t.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(t, k); it; ++it) {
            f.add(it.row());
            f.add(it.col());
            f.add(it.value());
        }
    return f.h;
}

BlockDiagonal assemble_block_diagonal(const FunctionSpace &space, FormTag form, const KernelConfig &cfg,
                                      const QuadratureConfig &q, BlockCache *cache) {
    if (form != FormTag::V && form != FormTag::W) throw std::invalid_argument("block-diagonal form must be V or W");
    if (form == FormTag::W) require_continuous(space);
    BlockDiagonal out;
    out.offsets = space.block_offsets;
    for (int b = 0; b < space.num_blocks(); ++b) {
        const FunctionSpace blk = space.block(b);
        std::uint64_t key = 0;
        if (cache) {
            key = block_fingerprint(blk, form, cfg, q);
            if (auto hit = cache->find(key)) {
                out.blocks.push_back(std::move(*hit));
                continue;
            }
        }
        out.blocks.push_back(assemble_operator(blk, blk, cfg, q, form == FormTag::W));
        if (cache) cache->store(key, out.blocks.back());
    }
    return out;
}

// ---------------------------------------------------------------------------

Eigen::SparseMatrix<double> assemble_duality(const FunctionSpace &test, const FunctionSpace &trial) {
    if (test.dim() != trial.dim()) throw std::invalid_argument("duality pairing needs spaces of equal dimension");
    if (test.block_panels != trial.block_panels || test.block_offsets != trial.block_offsets)
        throw std::invalid_argument("duality pairing needs matching panel blocks");
    const TriMesh &coarse = *test.carrier;
    const TriMesh &fine = *trial.carrier;
    std::vector<Eigen::Triplet<double>> trip;

    auto p1_mass = [](double area, const std::array<double, 3> &u, const std::array<double, 3> &v) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) s += u[k] * v[l] * (k == l ? 2.0 : 1.0);
        return s * area / 12.0;
    };

    if (test.carrier == trial.carrier) {
        for (int e = 0; e < coarse.num_triangles(); ++e)
            for (int a = test.element_begin(e); a < test.element_begin(e + 1); ++a)
                for (int b = trial.element_begin(e); b < trial.element_begin(e + 1); ++b) {
                    const Piece &p = test.pieces[a], &r = trial.pieces[b];
                    if (p.panel != r.panel) continue;
                    trip.emplace_back(p.shape, r.shape, p1_mass(coarse.area(e), p.vals, r.vals));
                }
    } else {
        if (fine.num_triangles() != 6 * coarse.num_triangles() || fine.parent.empty())
            throw std::invalid_argument("trial carrier must be the barycentric refinement of the test carrier");
        for (int c = 0; c < fine.num_triangles(); ++c) {
            if (trial.element_begin(c + 1) == trial.element_begin(c)) continue;
            const int t = fine.parent[c];
            if (test.element_begin(t + 1) == test.element_begin(t)) continue;
            // barycentric coordinates of the child's corners in the parent
            std::array<std::array<double, 3>, 3> beta{};
            const Tri &pt = coarse.triangles[t];
            for (int k = 0; k < 3; ++k) {
                const NodeOrigin &o = fine.node_origin[fine.triangles[c][k]];
                beta[k] = {0.0, 0.0, 0.0};
                switch (o.kind) {
                    case NodeKind::vertex:
                        for (int a = 0; a < 3; ++a)
                            if (pt[a] == o.ids[0]) beta[k][a] = 1.0;
                        break;
                    case NodeKind::edge_midpoint:
                        for (int a = 0; a < 3; ++a)
                            if (pt[a] == o.ids[0] || pt[a] == o.ids[1]) beta[k][a] = 0.5;
                        break;
                    case NodeKind::barycenter: beta[k] = {1.0 / 3, 1.0 / 3, 1.0 / 3}; break;
                }
            }
            const double area = fine.area(c);
            for (int a = test.element_begin(t); a < test.element_begin(t + 1); ++a) {
                const Piece &p = test.pieces[a];
                std::array<double, 3> u{};
                for (int k = 0; k < 3; ++k)
                    u[k] = p.vals[0] * beta[k][0] + p.vals[1] * beta[k][1] + p.vals[2] * beta[k][2];
                for (int b = trial.element_begin(c); b < trial.element_begin(c + 1); ++b) {
                    const Piece &r = trial.pieces[b];
                    if (p.panel != r.panel) continue;
                    trip.emplace_back(p.shape, r.shape, p1_mass(area, u, r.vals));
                }
            }
        }
    }
    Eigen::SparseMatrix<double> s(test.num_shapes, trial.num_shapes);
    s.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> m = s;
    if (!trial.identity_transform()) m = Eigen::SparseMatrix<double>(m * trial.transform);
    if (!test.identity_transform()) m = Eigen::SparseMatrix<double>(test.transform.transpose() * m);
    m.prune(0.0);
    m.makeCompressed();
    return m;
}

// ---------------------------------------------------------------------------

Eigen::VectorXcd assemble_rhs(const FunctionSpace &space, const IncidentWave &wave, Problem problem) {
    wave.validate();
    const TriMesh &mesh = *space.carrier;
    const TriangleRule rule = collapsed_gauss(6);
    const cplx i1(0.0, 1.0);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(space.num_shapes);
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        if (space.element_begin(e + 1) == space.element_begin(e)) continue;
        const Corners c{mesh.corner(e, 0), mesh.corner(e, 1), mesh.corner(e, 2)};
        const double jac = detail::twice_area(c);
        // int_e u_inc l_a, computed once per element so front and back copies agree exactly
        std::array<cplx, 3> mom{};
        for (int k = 0; k < rule.size(); ++k) {
            const Eigen::Vector3d x = detail::chart(c, rule.points[k]);
            const cplx u = wave.amplitude * std::exp(i1 * wave.kappa * wave.direction.dot(x));
            const auto l = barycentric(rule.points[k]);
            for (int a = 0; a < 3; ++a) mom[a] += rule.weights[k] * jac * l[a] * u;
        }
        const double dn = wave.direction.dot(mesh.normal(e));
        for (int a = space.element_begin(e); a < space.element_begin(e + 1); ++a) {
            const Piece &p = space.pieces[a];
            cplx v = p.vals[0] * mom[0] + p.vals[1] * mom[1] + p.vals[2] * mom[2];
            if (problem == Problem::dirichlet) b[p.shape] -= v;
            else b[p.shape] -= static_cast<double>(p.sign) * (i1 * wave.kappa * dn) * v;
        }
    }
    if (space.identity_transform()) return b;
    return transpose_times(space.transform, b);
}

// ---------------------------------------------------------------------------

double point_triangle_distance(const Eigen::Vector3d &p, const Eigen::Vector3d &a, const Eigen::Vector3d &b,
                               const Eigen::Vector3d &c) {
    // Ericson, closest point on triangle by Voronoi regions.
    const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
    const Eigen::Vector3d bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return bp.norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
    const Eigen::Vector3d cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return cp.norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return (p - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return (p - (a + ab * v + ac * w)).norm();
}

Eigen::VectorXcd eval_potential(const Eigen::VectorXcd &coefficients, const FunctionSpace &space,
                                const KernelConfig &cfg, const std::vector<Eigen::Vector3d> &points, Layer layer) {
    cfg.validate();
    const TriMesh &mesh = *space.carrier;
    const double tol = 1e-6 * mesh.bounding_diameter();
    for (const Eigen::Vector3d &x : points)
        for (int e = 0; e < mesh.num_triangles(); ++e)
            if (space.element_begin(e + 1) > space.element_begin(e) &&
                point_triangle_distance(x, mesh.corner(e, 0), mesh.corner(e, 1), mesh.corner(e, 2)) <= tol)
                throw SingularityError("evaluation point too close to the screen");

    const Eigen::VectorXcd c = space.shape_coefficients(coefficients);
    const TriangleRule &rule = detail::cached_collapsed(5);
    const HelmholtzKernel kernel(cfg.kappa);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(points.size()));
    parallel_for(static_cast<int>(points.size()), [&](int b, int e_end) {
        for (int i = b; i < e_end; ++i) {
            const Eigen::Vector3d &x = points[i];
            cplx acc = 0.0;
            for (int e = 0; e < mesh.num_triangles(); ++e) {
                if (space.element_begin(e + 1) == space.element_begin(e)) continue;
                const Corners cr{mesh.corner(e, 0), mesh.corner(e, 1), mesh.corner(e, 2)};
                const double jac = detail::twice_area(cr);
                const Eigen::Vector3d n0 = mesh.normal(e);
                std::array<cplx, 3> mom{};
                std::array<cplx, 3> dmom{};
                for (int k = 0; k < rule.size(); ++k) {
                    const Eigen::Vector3d y = detail::chart(cr, rule.points[k]);
                    const auto l = barycentric(rule.points[k]);
                    const double w = rule.weights[k] * jac;
                    if (layer == Layer::single) {
                        const cplx g = kernel(x, y) * w;
                        for (int a = 0; a < 3; ++a) mom[a] += g * l[a];
                    } else {
                        const cplx g = greens_dny(cfg.kappa, x, y, n0) * w;
                        for (int a = 0; a < 3; ++a) dmom[a] += g * l[a];
                    }
                }
                for (int a = space.element_begin(e); a < space.element_begin(e + 1); ++a) {
                    const Piece &p = space.pieces[a];
                    if (layer == Layer::single)
                        acc += c[p.shape] * (p.vals[0] * mom[0] + p.vals[1] * mom[1] + p.vals[2] * mom[2]);
                    else
                        acc += c[p.shape] * static_cast<double>(p.sign) *
                               (p.vals[0] * dmom[0] + p.vals[1] * dmom[1] + p.vals[2] * dmom[2]);
                }
            }
            out[i] = acc;
        }
    });
    return out;
}

void write_matrix_csv(std::ostream &os, const Eigen::MatrixXcd &m) {
    const auto old = os.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j).real() << ',' << m(i, j).imag();
        }
        os << '\n';
    }
    os.precision(old);
}

}  // namespace msbem
