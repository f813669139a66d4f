#include "msbem/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace msbem {

std::string to_string(SpaceKind k) {
    switch (k) {
        case SpaceKind::pw_constant: return "pw-constant";
        case SpaceKind::continuous_p1: return "continuous-p1";
        case SpaceKind::dual_constant: return "dual-constant";
        case SpaceKind::dual_p1: return "dual-p1";
    }
    return "?";
}

std::string to_string(Problem p) { return p == Problem::dirichlet ? "dirichlet" : "neumann"; }

Reduction Reduction::FixedOverlap(double delta) {
    if (!(delta > 0.0)) throw SpaceError("fixed-overlap width must be positive");
    return {fixed_overlap, delta};
}

std::string Reduction::name() const {
    switch (variant) {
        case full: return "full";
        case partial: return "partial";
        case single_strip: return "single-strip";
        case fixed_overlap: {
            std::ostringstream os;
            os << "fixed-overlap:" << delta;
            return os.str();
        }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// FunctionSpace

void FunctionSpace::finalize() {
    if (!carrier) throw SpaceError("space without carrier mesh");
    if (dofs.empty()) throw SpaceError("space is empty");
    std::stable_sort(pieces.begin(), pieces.end(),
                     [](const Piece &a, const Piece &b) { return a.element < b.element; });
    element_offsets_.assign(carrier->num_triangles() + 1, 0);
    for (const Piece &p : pieces) {
        if (p.element < 0 || p.element >= carrier->num_triangles()) throw SpaceError("piece on unknown element");
        if (p.shape < 0 || p.shape >= num_shapes) throw SpaceError("piece references unknown shape");
        for (double v : p.vals)
            if (!std::isfinite(v)) throw SpaceError("non-finite basis weight");
        ++element_offsets_[p.element + 1];
    }
    std::partial_sum(element_offsets_.begin(), element_offsets_.end(), element_offsets_.begin());
    if (!identity_transform() && (transform.rows() != num_shapes || transform.cols() != dim()))
        throw SpaceError("shape transform has wrong dimensions");
    if (identity_transform() && num_shapes != dim()) throw SpaceError("shape count differs from dimension");
    if (block_offsets.size() != block_panels.size() + 1 || block_offsets.back() != dim())
        throw SpaceError("inconsistent block structure");
}

Eigen::VectorXd FunctionSpace::shape_coefficients(const Eigen::VectorXd &c) const {
    if (c.size() != dim()) throw SpaceError("coefficient vector has wrong length");
    if (identity_transform()) return c;
    return transform * c;
}

Eigen::VectorXcd FunctionSpace::shape_coefficients(const Eigen::VectorXcd &c) const {
    if (c.size() != dim()) throw SpaceError("coefficient vector has wrong length");
    if (identity_transform()) return c;
    Eigen::VectorXd re = transform * c.real(), im = transform * c.imag();
    Eigen::VectorXcd out(re.size());
    for (Eigen::Index i = 0; i < re.size(); ++i) out[i] = {re[i], im[i]};
    return out;
}

std::vector<std::array<double, 3>> FunctionSpace::element_corner_values(const Eigen::VectorXd &c) const {
    const Eigen::VectorXd s = shape_coefficients(c);
    std::vector<std::array<double, 3>> out(carrier->num_triangles(), {0.0, 0.0, 0.0});
    for (const Piece &p : pieces)
        for (int k = 0; k < 3; ++k) out[p.element][k] += s[p.shape] * p.vals[k];
    return out;
}

Eigen::VectorXd FunctionSpace::integrals() const {
    Eigen::VectorXd shape_int = Eigen::VectorXd::Zero(num_shapes);
    for (const Piece &p : pieces)
        shape_int[p.shape] += carrier->area(p.element) / 3.0 * (p.vals[0] + p.vals[1] + p.vals[2]);
    if (identity_transform()) return shape_int;
    return transform.transpose() * shape_int;
}

FunctionSpace FunctionSpace::restrict_to(const std::vector<int> &keep) const {
    FunctionSpace out;
    out.kind = kind;
    out.carrier = carrier;
    out.reduction = reduction;
    out.block_panels = block_panels;
    out.supports = supports;
    std::vector<int> block_of(dim());
    for (int b = 0; b < num_blocks(); ++b)
        for (int i = block_offsets[b]; i < block_offsets[b + 1]; ++i) block_of[i] = b;
    std::vector<int> counts(num_blocks(), 0);
    int prev_block = 0;
    for (int i : keep) {
        if (i < 0 || i >= dim()) throw SpaceError("restrict_to: dof out of range");
        if (block_of[i] < prev_block) throw SpaceError("restrict_to: dofs must follow block order");
        prev_block = block_of[i];
        ++counts[block_of[i]];
        DofMeta m = dofs[i];
        if (m.source < 0) m.source = i;
        out.dofs.push_back(m);
    }
    out.block_offsets.assign(1, 0);
    for (int c : counts) out.block_offsets.push_back(out.block_offsets.back() + c);

    if (identity_transform()) {
        std::vector<int> new_index(dim(), -1);
        for (std::size_t k = 0; k < keep.size(); ++k) new_index[keep[k]] = static_cast<int>(k);
        for (const Piece &p : pieces)
            if (new_index[p.shape] >= 0) {
                Piece q = p;
                q.shape = new_index[p.shape];
                out.pieces.push_back(q);
            }
        out.num_shapes = static_cast<int>(keep.size());
    } else {
        out.pieces = pieces;
        out.num_shapes = num_shapes;
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t k = 0; k < keep.size(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(transform, keep[k]); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(k), it.value());
        out.transform.resize(num_shapes, static_cast<Eigen::Index>(keep.size()));
        out.transform.setFromTriplets(trip.begin(), trip.end());
    }
    out.finalize();
    return out;
}

FunctionSpace FunctionSpace::block(int b) const {
    if (b < 0 || b >= num_blocks()) throw SpaceError("block index out of range");
    std::vector<int> keep(block_offsets[b + 1] - block_offsets[b]);
    std::iota(keep.begin(), keep.end(), block_offsets[b]);
    FunctionSpace sub = restrict_to(keep);
    // Collapse to a single block and drop shapes of other blocks.
    FunctionSpace out;
    out.kind = kind;
    out.carrier = carrier;
    out.reduction = reduction;
    out.block_panels = {block_panels[b]};
    out.block_offsets = {0, sub.dim()};
    if (b < static_cast<int>(supports.size())) out.supports = {supports[b]};
    out.dofs.assign(dofs.begin() + block_offsets[b], dofs.begin() + block_offsets[b + 1]);
    if (identity_transform()) {
        out.pieces = sub.pieces;
        out.num_shapes = sub.num_shapes;
    } else {
        std::vector<int> used(num_shapes, -1);
        int n = 0;
        for (int k = 0; k < sub.transform.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sub.transform, k); it; ++it)
                if (used[it.row()] < 0) used[it.row()] = 0;
        for (const Piece &p : pieces)
            if (used[p.shape] == 0 && p.panel == block_panels[b]) used[p.shape] = 1;
        std::vector<int> index(num_shapes, -1);
        for (int s = 0; s < num_shapes; ++s)
            if (used[s] >= 0) index[s] = n++;
        for (const Piece &p : pieces)
            if (index[p.shape] >= 0) {
                Piece q = p;
                q.shape = index[p.shape];
                out.pieces.push_back(q);
            }
        std::vector<Eigen::Triplet<double>> trip;
        for (int k = 0; k < sub.transform.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sub.transform, k); it; ++it)
                trip.emplace_back(index[it.row()], k, it.value());
        out.num_shapes = n;
        out.transform.resize(n, sub.dim());
        out.transform.setFromTriplets(trip.begin(), trip.end());
    }
    out.finalize();
    return out;
}

std::string FunctionSpace::summary() const {
    std::ostringstream os;
    os << "space " << to_string(kind) << " dim " << dim() << " shapes " << num_shapes << " pieces "
       << pieces.size() << " reduction " << reduction.name() << '\n';
    for (int b = 0; b < num_blocks(); ++b)
        os << "  block " << b << " panel " << block_panels[b] << " dofs [" << block_offsets[b] << ", "
           << block_offsets[b + 1] << ")\n";
    return os.str();
}

FunctionSpace product_space(const std::vector<FunctionSpace> &parts) {
    if (parts.empty()) throw SpaceError("product of no spaces");
    FunctionSpace out;
    out.kind = parts[0].kind;
    out.carrier = parts[0].carrier;
    out.reduction = parts[0].reduction;
    out.block_offsets = {0};
    bool any_transform = false;
    for (const FunctionSpace &p : parts) {
        if (p.carrier != out.carrier) throw SpaceError("product of spaces on different carriers");
        if (p.kind != out.kind) throw SpaceError("product of spaces of different kinds");
        any_transform |= !p.identity_transform();
    }
    std::vector<Eigen::Triplet<double>> trip;
    int shape_off = 0;
    for (const FunctionSpace &p : parts) {
        const int dof_off = out.dim();
        for (Piece q : p.pieces) {
            q.shape += shape_off;
            out.pieces.push_back(q);
        }
        for (const DofMeta &m : p.dofs) out.dofs.push_back(m);
        for (int b = 0; b < p.num_blocks(); ++b) {
            out.block_panels.push_back(p.block_panels[b]);
            out.block_offsets.push_back(dof_off + p.block_offsets[b + 1]);
        }
        for (const Patch &s : p.supports) out.supports.push_back(s);
        if (any_transform) {
            if (p.identity_transform()) {
                for (int i = 0; i < p.dim(); ++i) trip.emplace_back(shape_off + i, dof_off + i, 1.0);
            } else {
                for (int k = 0; k < p.transform.outerSize(); ++k)
                    for (Eigen::SparseMatrix<double>::InnerIterator it(p.transform, k); it; ++it)
                        trip.emplace_back(shape_off + static_cast<int>(it.row()), dof_off + k, it.value());
            }
        }
        shape_off += p.num_shapes;
    }
    out.num_shapes = shape_off;
    if (any_transform) {
        out.transform.resize(shape_off, out.dim());
        out.transform.setFromTriplets(trip.begin(), trip.end());
    }
    out.finalize();
    return out;
}

// ---------------------------------------------------------------------------
// Patch topology

namespace {

struct PatchTopology {
    // vertex -> (position in patch, corner index)
    std::vector<std::vector<std::pair<int, int>>> vertex_uses;
    std::map<Edge, int> edge_count;
    std::vector<bool> boundary;
    std::vector<int> vertices;  // ascending

    PatchTopology(const TriMesh &surface, const Patch &patch) {
        vertex_uses.resize(surface.num_vertices());
        boundary.assign(surface.num_vertices(), false);
        for (int i = 0; i < static_cast<int>(patch.triangles.size()); ++i) {
            const Tri &t = surface.triangles.at(patch.triangles[i]);
            for (int j = 0; j < 3; ++j) {
                vertex_uses[t[j]].push_back({i, j});
                ++edge_count[make_edge(t[j], t[(j + 1) % 3])];
            }
        }
        for (const auto &[e, c] : edge_count) {
            if (c > 2) throw SpaceError("patch is not a simple screen");
            if (c == 1) boundary[e.first] = boundary[e.second] = true;
        }
        for (int v = 0; v < surface.num_vertices(); ++v)
            if (!vertex_uses[v].empty()) vertices.push_back(v);
    }
};

void check_patch(const TriMesh &surface, const Patch &patch) {
    if (patch.triangles.empty()) throw SpaceError("space is empty");
    if (patch.signs.size() != patch.triangles.size()) throw SpaceError("patch signs do not match triangles");
    for (int t : patch.triangles)
        if (t < 0 || t >= surface.num_triangles()) throw SpaceError("patch triangle out of range");
}

void check_refinement(const TriMesh &surface, const TriMesh &refined) {
    if (refined.num_triangles() != 6 * surface.num_triangles() || refined.node_origin.empty())
        throw SpaceError("dual spaces need the barycentric refinement of the surface");
}

FunctionSpace single_block(SpaceKind kind, std::shared_ptr<const TriMesh> carrier, const Patch &patch) {
    FunctionSpace s;
    s.kind = kind;
    s.carrier = std::move(carrier);
    s.block_panels = {patch.panel};
    s.supports = {patch};
    return s;
}

void close_block(FunctionSpace &s) {
    s.block_offsets = {0, s.dim()};
    s.finalize();
}

}  // namespace

Patch whole_mesh_patch(const TriMesh &mesh) {
    Patch p;
    p.triangles.resize(mesh.num_triangles());
    std::iota(p.triangles.begin(), p.triangles.end(), 0);
    p.signs.assign(mesh.num_triangles(), 1);
    return p;
}

FunctionSpace pw_constant_space(std::shared_ptr<const TriMesh> surface, const Patch &patch) {
    check_patch(*surface, patch);
    FunctionSpace s = single_block(SpaceKind::pw_constant, surface, patch);
    for (int i = 0; i < static_cast<int>(patch.triangles.size()); ++i) {
        const int t = patch.triangles[i];
        s.pieces.push_back({t, patch.panel, patch.signs[i], i, -1, {1.0, 1.0, 1.0}});
        s.dofs.push_back({AnchorKind::triangle, t, patch.panel, -1, patch.signs[i], surface->centroid(t)});
    }
    s.num_shapes = s.dim();
    close_block(s);
    return s;
}

FunctionSpace continuous_p1_space(std::shared_ptr<const TriMesh> surface, const Patch &patch, bool zero_boundary) {
    check_patch(*surface, patch);
    const PatchTopology topo(*surface, patch);
    FunctionSpace s = single_block(SpaceKind::continuous_p1, surface, patch);
    for (int v : topo.vertices) {
        if (zero_boundary && topo.boundary[v]) continue;
        const int dof = s.dim();
        for (auto [i, j] : topo.vertex_uses[v]) {
            std::array<double, 3> vals{0.0, 0.0, 0.0};
            vals[j] = 1.0;
            s.pieces.push_back({patch.triangles[i], patch.panel, patch.signs[i], dof, j, vals});
        }
        s.dofs.push_back({AnchorKind::vertex, v, patch.panel, -1, 1, surface->vertices[v]});
    }
    s.num_shapes = s.dim();
    close_block(s);
    return s;
}

FunctionSpace dual_constant_space(const TriMesh &surface, std::shared_ptr<const TriMesh> refined,
                                  const Patch &patch) {
    check_patch(surface, patch);
    check_refinement(surface, *refined);
    const PatchTopology topo(surface, patch);
    FunctionSpace s = single_block(SpaceKind::dual_constant, refined, patch);
    for (int v : topo.vertices) {
        if (topo.boundary[v]) continue;
        const int dof = s.dim();
        for (auto [i, j] : topo.vertex_uses[v]) {
            const int t = patch.triangles[i];
            for (int c : {6 * t + 2 * j, 6 * t + (2 * j + 5) % 6})
                s.pieces.push_back({c, patch.panel, patch.signs[i], dof, -1, {1.0, 1.0, 1.0}});
        }
        s.dofs.push_back({AnchorKind::vertex, v, patch.panel, -1, 1, surface.vertices[v]});
    }
    if (s.dofs.empty()) throw SpaceError("space is empty");
    s.num_shapes = s.dim();
    close_block(s);
    return s;
}

FunctionSpace dual_p1_space(const TriMesh &surface, std::shared_ptr<const TriMesh> refined, const Patch &patch) {
    check_patch(surface, patch);
    check_refinement(surface, *refined);
    const PatchTopology topo(surface, patch);
    const int nv = surface.num_vertices();

    // refined node id of each coarse edge midpoint
    std::map<Edge, int> midpoint;
    for (int n = nv; n < refined->num_vertices(); ++n) {
        const NodeOrigin &o = refined->node_origin[n];
        if (o.kind == NodeKind::edge_midpoint) midpoint[make_edge(o.ids[0], o.ids[1])] = n;
    }
    const int barycenter_base = refined->num_vertices() - surface.num_triangles();

    FunctionSpace s = single_block(SpaceKind::dual_p1, refined, patch);
    // Shapes: hats of refined nodes, restricted to the patch.
    std::map<int, int> shape_of;
    auto shape = [&shape_of](int node) {
        auto [it, inserted] = shape_of.try_emplace(node, static_cast<int>(shape_of.size()));
        return it->second;
    };
    for (int i = 0; i < static_cast<int>(patch.triangles.size()); ++i) {
        const int t = patch.triangles[i];
        for (int c = 6 * t; c < 6 * t + 6; ++c) {
            const Tri &ct = refined->triangles[c];
            for (int k = 0; k < 3; ++k) {
                std::array<double, 3> vals{0.0, 0.0, 0.0};
                vals[k] = 1.0;
                s.pieces.push_back({c, patch.panel, patch.signs[i], shape(ct[k]), k, vals});
            }
        }
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < static_cast<int>(patch.triangles.size()); ++i) {
        const int t = patch.triangles[i];
        const Tri &tri = surface.triangles[t];
        trip.emplace_back(shape(barycenter_base + t), i, 1.0);
        for (int j = 0; j < 3; ++j) {
            const Edge e = make_edge(tri[j], tri[(j + 1) % 3]);
            trip.emplace_back(shape(midpoint.at(e)), i, topo.edge_count.at(e) == 1 ? 1.0 : 0.5);
            trip.emplace_back(shape(tri[j]), i, 1.0 / static_cast<double>(topo.vertex_uses[tri[j]].size()));
        }
        s.dofs.push_back({AnchorKind::triangle, t, patch.panel, -1, patch.signs[i], surface.centroid(t)});
    }
    s.num_shapes = static_cast<int>(shape_of.size());
    s.transform.resize(s.num_shapes, s.dim());
    s.transform.setFromTriplets(trip.begin(), trip.end());
    close_block(s);
    return s;
}

FunctionSpace pw_constant_space(const TriMesh &mesh) {
    auto m = std::make_shared<const TriMesh>(mesh);
    return pw_constant_space(m, whole_mesh_patch(*m));
}

FunctionSpace continuous_p1_space(const TriMesh &mesh, bool zero_boundary) {
    auto m = std::make_shared<const TriMesh>(mesh);
    return continuous_p1_space(m, whole_mesh_patch(*m), zero_boundary);
}

FunctionSpace dual_constant_space(const TriMesh &mesh) {
    auto r = std::make_shared<const TriMesh>(barycentric_refine(mesh));
    return dual_constant_space(mesh, r, whole_mesh_patch(mesh));
}

FunctionSpace dual_p1_space(const TriMesh &mesh) {
    auto r = std::make_shared<const TriMesh>(barycentric_refine(mesh));
    return dual_p1_space(mesh, r, whole_mesh_patch(mesh));
}

// ---------------------------------------------------------------------------
// Multi-trace spaces

double default_overlap(const MultiScreen &screen) { return 0.25 * screen.side_length; }

namespace {

std::vector<int> kept_panels(const MultiScreen &screen, const Reduction &r) {
    std::vector<int> out;
    for (int l = 0; l < screen.num_panels(); ++l)
        if (r.variant == Reduction::full || l == 0 || l % 2 == 1) out.push_back(l);
    return out;
}

/// Sheet of every dof of an identity-transform space: the common sheet of
/// its support triangles, or -1.
std::vector<int> dof_sheets(const MultiScreen &screen, const FunctionSpace &s) {
    std::vector<int> sheet(s.dim(), -2);
    for (const Piece &p : s.pieces) {
        const int sh = screen.triangle_sheet(p.element);
        int &cur = sheet[p.shape];
        if (cur == -2) cur = sh;
        else if (cur != sh) cur = -1;
    }
    for (int &v : sheet) v = std::max(v, -1);
    return sheet;
}

bool touches_junction(const MultiScreen &screen, const DofMeta &m) {
    if (m.anchor == AnchorKind::vertex) return screen.is_junction_vertex(m.anchor_id);
    for (int v : screen.surface()->triangles[m.anchor_id])
        if (screen.is_junction_vertex(v)) return true;
    return false;
}

/// Patch covered by the pieces of a primal block, in panel order.
Patch support_patch(const FunctionSpace &primal, const Patch &panel) {
    std::set<int> used;
    for (const Piece &p : primal.pieces) used.insert(p.element);
    Patch out;
    out.panel = panel.panel;
    for (std::size_t i = 0; i < panel.triangles.size(); ++i)
        if (used.count(panel.triangles[i])) {
            out.triangles.push_back(panel.triangles[i]);
            out.signs.push_back(panel.signs[i]);
        }
    return out;
}

}  // namespace

SpacePair multitrace_pair(const MultiScreen &screen, Problem problem, const Reduction &reduction) {
    if (reduction.variant != Reduction::full && screen.kind() != ScreenKind::junction)
        throw SpaceError("reductions are only defined for junction screens");
    if (reduction.variant == Reduction::fixed_overlap && !(reduction.delta > 0.0))
        throw SpaceError("fixed-overlap width must be positive");
    auto surf = screen.surface();
    auto ref = screen.refined_surface();

    // Full primal blocks, for dof bookkeeping against the unreduced space.
    std::vector<FunctionSpace> full_blocks;
    std::vector<int> full_offset{0};
    for (int l = 0; l < screen.num_panels(); ++l) {
        const Patch patch = screen.panel_patch(l);
        full_blocks.push_back(problem == Problem::dirichlet ? pw_constant_space(surf, patch)
                                                            : continuous_p1_space(surf, patch, true));
        FunctionSpace &b = full_blocks.back();
        const std::vector<int> sheets = dof_sheets(screen, b);
        for (int i = 0; i < b.dim(); ++i) {
            b.dofs[i].sheet = sheets[i];
            b.dofs[i].source = full_offset.back() + i;
        }
        full_offset.push_back(full_offset.back() + b.dim());
    }

    std::vector<FunctionSpace> primal_parts, dual_parts;
    for (int l : kept_panels(screen, reduction)) {
        FunctionSpace primal = full_blocks[l];
        if (l == 0 && (reduction.variant == Reduction::single_strip || reduction.variant == Reduction::fixed_overlap)) {
            std::vector<int> keep;
            for (int i = 0; i < primal.dim(); ++i) {
                const DofMeta &m = primal.dofs[i];
                bool drop = m.sheet == 1 && !touches_junction(screen, m);
                if (drop && reduction.variant == Reduction::fixed_overlap)
                    drop = screen.distance_to_junction(m.position) > reduction.delta;
                if (!drop) keep.push_back(i);
            }
            primal = primal.restrict_to(keep);
            primal.supports = {support_patch(primal, screen.panel_patch(l))};
        }
        const Patch &support = primal.supports.at(0);
        FunctionSpace dual = problem == Problem::dirichlet ? dual_p1_space(*surf, ref, support)
                                                           : dual_constant_space(*surf, ref, support);
        if (dual.dim() != primal.dim())
            throw SpaceError("reduced dual space dimension differs from its primal partner on panel " +
                             std::to_string(l));
        for (int i = 0; i < dual.dim(); ++i) dual.dofs[i].sheet = primal.dofs[i].sheet;
        primal_parts.push_back(std::move(primal));
        dual_parts.push_back(std::move(dual));
    }
    SpacePair out{product_space(primal_parts), product_space(dual_parts)};
    out.primal.reduction = out.dual.reduction = reduction;
    return out;
}

FunctionSpace multitrace_space(const MultiScreen &screen, Problem problem, Side side, const Reduction &reduction) {
    SpacePair p = multitrace_pair(screen, problem, reduction);
    return side == Side::primal ? std::move(p.primal) : std::move(p.dual);
}

Eigen::MatrixXd singletrace_basis(const MultiScreen &screen, const FunctionSpace &space) {
    if (screen.covering() != CoveringKind::exact) throw SpaceError("single-trace basis needs a type A screen");
    if (space.reduction.variant != Reduction::full)
        throw SpaceError("single-trace basis is only available for unreduced spaces");
    if (space.kind != SpaceKind::pw_constant && space.kind != SpaceKind::continuous_p1)
        throw SpaceError("single-trace basis needs a primal multi-trace space");
    std::map<int, std::vector<int>> by_anchor;
    for (int i = 0; i < space.dim(); ++i) by_anchor[space.dofs[i].anchor_id].push_back(i);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(space.dim(), static_cast<Eigen::Index>(by_anchor.size()));
    int col = 0;
    for (const auto &[anchor, ids] : by_anchor) {
        for (int i : ids) z(i, col) = space.kind == SpaceKind::pw_constant ? space.dofs[i].sign : 1.0;
        ++col;
    }
    return z;
}

}  // namespace msbem
