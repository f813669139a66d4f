#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "msbem/geometry.hpp"

using namespace msbem;

namespace {

TriMesh single_triangle() { return TriMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {Tri{0, 1, 2}}); }

int count_edges(const TriMesh &m) { return static_cast<int>(m.edges().size()); }

}  // namespace

TEST_CASE("junction screen counts") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.5);
    REQUIRE(s.sheets().size() == 3);
    int total = 0;
    for (const TriMesh &sh : s.sheets()) {
        CHECK(sh.num_triangles() == 8);
        CHECK(sh.num_vertices() == 9);
        total += sh.num_triangles();
    }
    CHECK(total == 24);
    REQUIRE(s.junctions().size() == 1);
    for (const auto &chain : s.junctions()[0].chains) CHECK(chain.size() == 3);
    CHECK(s.surface()->num_triangles() == 24);
    // three sheets of nine vertices sharing a three-vertex chain
    CHECK(s.surface()->num_vertices() == 3 * 9 - 2 * 3);

    const MultiScreen five = make_junction_screen(5, 1.0, 0.25);
    CHECK(five.num_panels() == 5);
    for (int l = 0; l < 5; ++l) CHECK(five.panel_patch(l).triangles.size() == 64);
}

TEST_CASE("each sheet appears in two panels with opposite faces") {
    for (int m : {3, 4, 5}) {
        const MultiScreen s = make_junction_screen(m, 1.0, 0.5);
        std::vector<std::vector<int>> signs(m);
        for (const Panel &p : s.panels())
            for (const PanelFace &f : p.faces) signs[f.sheet].push_back(f.sign);
        for (const auto &sg : signs) {
            REQUIRE(sg.size() == 2);
            CHECK(sg[0] == -sg[1]);
        }
    }
}

TEST_CASE("junction vertices are bit-identical across sheets") {
    const MultiScreen s = make_junction_screen(4, 1.0, 0.25);
    const Junction &j = s.junctions()[0];
    for (std::size_t k = 0; k < j.chains[0].size(); ++k) {
        const Vec3 &ref = s.sheets()[j.sheets[0]].vertices[j.chains[0][k]];
        for (std::size_t c = 1; c < j.sheets.size(); ++c) {
            const Vec3 &v = s.sheets()[j.sheets[c]].vertices[j.chains[c][k]];
            CHECK(v.x() == ref.x());
            CHECK(v.y() == ref.y());
            CHECK(v.z() == ref.z());
        }
    }
}

TEST_CASE("geometry errors") {
    CHECK_THROWS_AS(make_junction_screen(3, 1.0, 0.0), GeometryError);
    CHECK_THROWS_AS(make_junction_screen(3, 1.0, -1.0), GeometryError);
    CHECK_THROWS_AS(make_typeB_screen(0.0), GeometryError);
    CHECK_THROWS_AS(make_junction_screen(2, 1.0, 0.5), GeometryError);
    CHECK_THROWS_AS(TriMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, {Tri{0, 1, 2}}), GeometryError);
    CHECK_THROWS_AS(TriMesh({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Tri{0, 1, 2}}), GeometryError);
}

TEST_CASE("type B screen") {
    const MultiScreen s = make_typeB_screen(0.5);
    CHECK(s.covering() == CoveringKind::overlapping);
    CHECK_FALSE(s.overlaps().empty());

    // some sheet is touched by at least three panels (both faces counted)
    int max_panels = 0;
    for (std::size_t sh = 0; sh < s.sheets().size(); ++sh) {
        std::set<int> touching;
        for (int l = 0; l < s.num_panels(); ++l)
            for (const PanelFace &f : s.panels()[l].faces)
                if (f.sheet == static_cast<int>(sh)) touching.insert(l);
        max_panels = std::max(max_panels, static_cast<int>(touching.size()));
    }
    CHECK(max_panels >= 3);

    // the chain end at the interior point carries the irregular marker
    const Junction &j = s.junctions()[0];
    bool found = false;
    for (std::size_t c = 0; c < j.sheets.size(); ++c) {
        const TriMesh &sh = s.sheets()[j.sheets[c]];
        for (int v : {j.chains[c].front(), j.chains[c].back()})
            if (sh.vertices[v].norm() < 1e-14) {
                CHECK(sh.has_marker(v, marker_irregular));
                found = true;
            }
    }
    CHECK(found);

    const MultiScreen fine = make_typeB_screen(0.25);
    for (std::size_t sh = 0; sh < s.sheets().size(); ++sh)
        CHECK(fine.sheets()[sh].num_triangles() == 4 * s.sheets()[sh].num_triangles());
}

TEST_CASE("barycentric refinement") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.5);
    const TriMesh &sheet = s.sheets()[0];
    const TriMesh r = barycentric_refine(sheet);
    CHECK(r.num_triangles() == 48);
    CHECK(r.num_vertices() == sheet.num_vertices() + count_edges(sheet) + sheet.num_triangles());
    CHECK(r.total_area() == doctest::Approx(sheet.total_area()).epsilon(1e-12));

    // parent map total and 6-to-1
    std::vector<int> children(sheet.num_triangles(), 0);
    REQUIRE(r.parent.size() == 48);
    for (int p : r.parent) ++children.at(p);
    for (int c : children) CHECK(c == 6);

    const TriMesh rs = barycentric_refine(*s.surface());
    CHECK(rs.num_triangles() == 6 * s.surface()->num_triangles());
}

TEST_CASE("dual cells partition the mesh") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.25);
    const TriMesh &sheet = s.sheets()[1];
    const TriMesh r = barycentric_refine(sheet);
    const auto cells = dual_cells(sheet, r);
    REQUIRE(static_cast<int>(cells.size()) == sheet.num_vertices());

    std::vector<int> owner(r.num_triangles(), 0);
    double area = 0.0;
    for (const auto &cell : cells)
        for (int t : cell) {
            ++owner[t];
            area += r.area(t);
        }
    for (int o : owner) CHECK(o == 1);
    CHECK(area == doctest::Approx(sheet.total_area()).epsilon(1e-12));

    const auto val = sheet.valence();
    const auto bnd = sheet.boundary_vertices();
    for (int v = 0; v < sheet.num_vertices(); ++v)
        if (!bnd[v]) CHECK(static_cast<int>(cells[v].size()) == 2 * val[v]);

    const auto one = dual_cells(single_triangle());
    const TriMesh r1 = barycentric_refine(single_triangle());
    REQUIRE(one.size() == 3);
    for (const auto &cell : one) {
        double a = 0.0;
        for (int t : cell) a += r1.area(t);
        CHECK(a == doctest::Approx(0.5 / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("OFF round trip is exact") {
    const MultiScreen s = make_junction_screen(3, 1.0, 0.3);
    for (const TriMesh &sheet : s.sheets()) {
        std::stringstream ss;
        write_off(ss, sheet);
        const TriMesh back = read_off(ss);
        REQUIRE(back.num_vertices() == sheet.num_vertices());
        REQUIRE(back.num_triangles() == sheet.num_triangles());
        for (int v = 0; v < sheet.num_vertices(); ++v) CHECK(back.vertices[v] == sheet.vertices[v]);
        for (int t = 0; t < sheet.num_triangles(); ++t) CHECK(back.triangles[t] == sheet.triangles[t]);
    }
    std::stringstream bad("NOFF\n1 0 0\n");
    CHECK_THROWS_AS(read_off(bad), GeometryError);
}

TEST_CASE("screen directory round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "msbem_geometry_roundtrip";
    std::filesystem::remove_all(dir);
    for (const MultiScreen &s : {make_junction_screen(3, 1.0, 0.5), make_typeB_screen(0.5)}) {
        save_screen(s, dir);
        const MultiScreen back = load_screen(dir);
        CHECK(back.covering() == s.covering());
        REQUIRE(back.num_panels() == s.num_panels());
        REQUIRE(back.sheets().size() == s.sheets().size());
        for (std::size_t k = 0; k < s.sheets().size(); ++k) {
            CHECK(back.sheets()[k].vertices == s.sheets()[k].vertices);
            CHECK(back.sheets()[k].triangles == s.sheets()[k].triangles);
        }
        for (int l = 0; l < s.num_panels(); ++l) {
            REQUIRE(back.panels()[l].faces.size() == s.panels()[l].faces.size());
            for (std::size_t f = 0; f < s.panels()[l].faces.size(); ++f) {
                CHECK(back.panels()[l].faces[f].sheet == s.panels()[l].faces[f].sheet);
                CHECK(back.panels()[l].faces[f].sign == s.panels()[l].faces[f].sign);
            }
        }
        CHECK(back.junctions()[0].chains == s.junctions()[0].chains);
        std::filesystem::remove_all(dir);
    }
}
