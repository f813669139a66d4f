#include <doctest.h>

#include <set>

#include "msbem/spaces.hpp"

using namespace msbem;

namespace {

TriMesh single_triangle() { return TriMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {Tri{0, 1, 2}}); }

/// Corner values of all basis functions summed, per carrier element.
std::vector<std::array<double, 3>> sum_of_basis(const FunctionSpace &s) {
    return s.element_corner_values(Eigen::VectorXd::Ones(s.dim()));
}

std::set<int> support(const FunctionSpace &s, int j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(s.dim());
    e[j] = 1.0;
    const auto vals = s.element_corner_values(e);
    std::set<int> out;
    for (int t = 0; t < static_cast<int>(vals.size()); ++t)
        if (vals[t][0] != 0.0 || vals[t][1] != 0.0 || vals[t][2] != 0.0) out.insert(t);
    return out;
}

}  // namespace

TEST_CASE("piecewise constants") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.5);
    const TriMesh &sheet = s.sheets()[0];
    const FunctionSpace pc = pw_constant_space(sheet);
    CHECK(pc.dim() == 8);
    const Eigen::VectorXd ints = pc.integrals();
    for (int j = 0; j < pc.dim(); ++j) CHECK(ints[j] == doctest::Approx(sheet.area(pc.dofs[j].anchor_id)).epsilon(1e-14));
    for (const auto &v : sum_of_basis(pc))
        for (double c : v) CHECK(c == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("continuous p1") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.5);
    const TriMesh &sheet = s.sheets()[0];
    CHECK(continuous_p1_space(sheet, false).dim() == sheet.num_vertices());
    CHECK(continuous_p1_space(sheet, true).dim() == 1);

    // panel = two 2x2 sheets glued at the junction: 15 vertices, 12 on the perimeter
    const Patch panel = s.panel_patch(0);
    const FunctionSpace p1 = continuous_p1_space(s.surface(), panel, true);
    CHECK(p1.dim() == 3);

    // affine interpolation is exact at vertices
    const FunctionSpace full = continuous_p1_space(sheet, false);
    auto f = [](const Vec3 &x) { return 0.3 + 2.0 * x.x() - 1.5 * x.y() + 0.25 * x.z(); };
    Eigen::VectorXd c(full.dim());
    for (int j = 0; j < full.dim(); ++j) c[j] = f(sheet.vertices[full.dofs[j].anchor_id]);
    const auto vals = full.element_corner_values(c);
    for (int t = 0; t < sheet.num_triangles(); ++t)
        for (int k = 0; k < 3; ++k) CHECK(vals[t][k] == doctest::Approx(f(sheet.corner(t, k))).epsilon(1e-14));
}

TEST_CASE("dual constants") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.5);
    const Patch panel = s.panel_patch(1);
    const FunctionSpace dc = dual_constant_space(*s.surface(), s.refined_surface(), panel);
    CHECK(dc.dim() == 3);

    for (double h : {0.5, 0.25, 0.2}) {
        const MultiScreen t = make_junction_screen(3, 1.0, h);
        const TriMesh &sheet = t.sheets()[2];
        CHECK(dual_constant_space(sheet).dim() == continuous_p1_space(sheet, true).dim());
        CHECK(dual_p1_space(sheet).dim() == sheet.num_triangles());
    }

    const MultiScreen fine = make_junction_screen(3, 1.0, 0.25);
    const TriMesh &sheet = fine.sheets()[0];
    const FunctionSpace d = dual_constant_space(sheet);
    const TriMesh &refined = *d.carrier;
    const auto cells = dual_cells(sheet, refined);
    const Eigen::VectorXd ints = d.integrals();
    std::set<int> seen;
    for (int j = 0; j < d.dim(); ++j) {
        double area = 0.0;
        for (int t : cells[d.dofs[j].anchor_id]) area += refined.area(t);
        CHECK(ints[j] == doctest::Approx(area).epsilon(1e-13));
        for (int t : support(d, j)) CHECK(seen.insert(t).second);
    }
    // sum of the basis is 1 on every interior cell, 0 elsewhere
    const auto vals = sum_of_basis(d);
    for (int t : seen)
        for (double v : vals[t]) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(dual_constant_space(single_triangle()), SpaceError);
}

TEST_CASE("dual p1 partition of unity and boundary values") {
    const MultiScreen screen = make_junction_screen(3, 1.0, 0.25);
    const TriMesh &sheet = screen.sheets()[1];
    const FunctionSpace d = dual_p1_space(sheet);
    for (const auto &v : sum_of_basis(d))
        for (double c : v) CHECK(std::abs(c - 1.0) <= 1e-12);

    // a triangle with a boundary edge: its function is 1 at that edge's midpoint
    const TriMesh &refined = *d.carrier;
    std::set<Edge> boundary;
    for (const Edge &e : sheet.boundary_edges()) boundary.insert(e);
    int checked = 0;
    for (int j = 0; j < d.dim(); ++j) {
        const int tau = d.dofs[j].anchor_id;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(d.dim());
        e[j] = 1.0;
        const auto vals = d.element_corner_values(e);
        for (int t = 0; t < refined.num_triangles(); ++t) {
            if (refined.parent[t] != tau) continue;
            for (int k = 0; k < 3; ++k) {
                const NodeOrigin &o = refined.node_origin[refined.triangles[t][k]];
                if (o.kind == NodeKind::edge_midpoint && boundary.count(Edge{o.ids[0], o.ids[1]})) {
                    CHECK(vals[t][k] == doctest::Approx(1.0).epsilon(1e-15));
                    ++checked;
                }
                if (o.kind == NodeKind::barycenter) CHECK(vals[t][k] == doctest::Approx(1.0).epsilon(1e-15));
            }
        }
    }
    CHECK(checked > 0);

    const FunctionSpace one = dual_p1_space(single_triangle());
    REQUIRE(one.dim() == 1);
    for (const auto &v : sum_of_basis(one))
        for (double c : v) CHECK(c == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("multi-trace dimensions") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.5);
    CHECK(multitrace_space(s, Problem::dirichlet, Side::primal).dim() == 48);
    CHECK(multitrace_space(s, Problem::dirichlet, Side::primal, Reduction::Partial()).dim() == 32);
    CHECK(multitrace_space(s, Problem::neumann, Side::primal).dim() == 9);
    CHECK(multitrace_space(s, Problem::dirichlet, Side::dual).dim() == 48);
    CHECK(multitrace_space(s, Problem::neumann, Side::dual).dim() == 9);

    for (Reduction r : {Reduction::Full(), Reduction::Partial(), Reduction::SingleStrip(), Reduction::FixedOverlap(0.25)})
        for (Problem p : {Problem::dirichlet, Problem::neumann}) {
            const SpacePair sp = multitrace_pair(make_junction_screen(3, 1.0, 0.25), p, r);
            CHECK(sp.primal.dim() == sp.dual.dim());
            // blocks are contiguous and in panel order
            const FunctionSpace &x = sp.primal;
            REQUIRE(static_cast<int>(x.block_offsets.size()) == x.num_blocks() + 1);
            CHECK(x.block_offsets.front() == 0);
            CHECK(x.block_offsets.back() == x.dim());
            for (int b = 0; b < x.num_blocks(); ++b) {
                if (b > 0) CHECK(x.block_panels[b] > x.block_panels[b - 1]);
                for (int i = x.block_offsets[b]; i < x.block_offsets[b + 1]; ++i) CHECK(x.dofs[i].panel == x.block_panels[b]);
            }
        }
}

TEST_CASE("reductions shrink panel 0 only") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.1);
    for (Problem p : {Problem::dirichlet, Problem::neumann}) {
        const FunctionSpace full = multitrace_space(s, p, Side::primal);
        const FunctionSpace part = multitrace_space(s, p, Side::primal, Reduction::Partial());
        const FunctionSpace strip = multitrace_space(s, p, Side::primal, Reduction::SingleStrip());
        const FunctionSpace wide = multitrace_space(s, p, Side::primal, Reduction::FixedOverlap(0.3));
        const FunctionSpace narrow = multitrace_space(s, p, Side::primal, Reduction::FixedOverlap(0.1));
        CHECK(part.dim() < full.dim());
        CHECK(strip.dim() < part.dim());
        CHECK(narrow.dim() <= wide.dim());
        CHECK(wide.dim() < part.dim());
        CHECK(strip.block(1).dim() == part.block(1).dim());
    }
}

TEST_CASE("single-trace basis") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.5);
    const FunctionSpace xd = multitrace_space(s, Problem::dirichlet, Side::primal);
    const FunctionSpace xn = multitrace_space(s, Problem::neumann, Side::primal);
    const Eigen::MatrixXd zd = singletrace_basis(s, xd);
    const Eigen::MatrixXd zn = singletrace_basis(s, xn);
    CHECK(zd.cols() == 24);
    CHECK(zn.cols() == 4);
    CHECK(zd.rows() == 48);
    CHECK(zn.rows() == 9);

    // columns are independent
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(zd).rank() == 24);
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(zn).rank() == 4);
    // pw-constant pairs have opposite signs, p1 columns equal entries
    for (int c = 0; c < zd.cols(); ++c) CHECK(zd.col(c).sum() == doctest::Approx(0.0));
    for (int c = 0; c < zn.cols(); ++c) CHECK(zn.col(c).minCoeff() >= 0.0);

    const FunctionSpace reduced = multitrace_space(s, Problem::dirichlet, Side::primal, Reduction::Partial());
    CHECK_THROWS_AS(singletrace_basis(s, reduced), SpaceError);
    const MultiScreen b = make_typeB_screen(0.5);
    CHECK_THROWS_AS(singletrace_basis(b, multitrace_space(b, Problem::dirichlet, Side::primal)), SpaceError);
}

TEST_CASE("space errors") {
    const MultiScreen b = make_typeB_screen(0.5);
    CHECK_THROWS_AS(multitrace_space(b, Problem::neumann, Side::primal, Reduction::Partial()), SpaceError);
    CHECK_THROWS_AS(Reduction::FixedOverlap(0.0), SpaceError);
    CHECK_THROWS_AS(Reduction::FixedOverlap(-0.1), SpaceError);
    const FunctionSpace x = multitrace_space(make_junction_screen(3, 1.0, 0.5), Problem::neumann, Side::primal);
    CHECK_THROWS_AS(x.shape_coefficients(Eigen::VectorXd(Eigen::VectorXd::Ones(x.dim() + 1))), SpaceError);
    CHECK(default_overlap(make_junction_screen(3, 2.0, 0.5)) == doctest::Approx(0.5));
}
