#include "msbem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

namespace msbem {

TriMesh::TriMesh(std::vector<Vec3> v, std::vector<Tri> t) : vertices(std::move(v)), triangles(std::move(t)) {
    validate();
}

double TriMesh::area(int t) const {
    const Vec3 &a = corner(t, 0);
    return 0.5 * (corner(t, 1) - a).cross(corner(t, 2) - a).norm();
}

Vec3 TriMesh::normal(int t) const {
    const Vec3 &a = corner(t, 0);
    return (corner(t, 1) - a).cross(corner(t, 2) - a).normalized();
}

Vec3 TriMesh::centroid(int t) const { return (corner(t, 0) + corner(t, 1) + corner(t, 2)) / 3.0; }

double TriMesh::diameter(int t) const {
    const Vec3 &a = corner(t, 0), &b = corner(t, 1), &c = corner(t, 2);
    return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

double TriMesh::total_area() const {
    double s = 0.0;
    for (int t = 0; t < num_triangles(); ++t) s += area(t);
    return s;
}

std::vector<Edge> TriMesh::edges() const {
    std::vector<Edge> out;
    std::set<Edge> seen;
    for (const Tri &t : triangles)
        for (int k = 0; k < 3; ++k) {
            Edge e = make_edge(t[k], t[(k + 1) % 3]);
            if (seen.insert(e).second) out.push_back(e);
        }
    return out;
}

std::map<Edge, std::vector<int>> TriMesh::edge_triangles() const {
    std::map<Edge, std::vector<int>> out;
    for (int i = 0; i < num_triangles(); ++i)
        for (int k = 0; k < 3; ++k) out[make_edge(triangles[i][k], triangles[i][(k + 1) % 3])].push_back(i);
    return out;
}

std::vector<Edge> TriMesh::boundary_edges() const {
    std::vector<Edge> out;
    for (const auto &[e, ts] : edge_triangles())
        if (ts.size() == 1) out.push_back(e);
    return out;
}

std::vector<bool> TriMesh::boundary_vertices() const {
    std::vector<bool> b(vertices.size(), false);
    for (const Edge &e : boundary_edges()) b[e.first] = b[e.second] = true;
    return b;
}

std::vector<int> TriMesh::valence() const {
    std::vector<int> val(vertices.size(), 0);
    for (const Tri &t : triangles)
        for (int v : t) ++val[v];
    return val;
}

std::pair<double, double> TriMesh::edge_length_range() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const Edge &e : edges()) {
        double l = (vertices[e.first] - vertices[e.second]).norm();
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    return {lo, hi};
}

double TriMesh::bounding_diameter() const {
    if (vertices.empty()) return 0.0;
    Vec3 lo = vertices[0], hi = vertices[0];
    for (const Vec3 &v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
}

void TriMesh::validate() const {
    const int nv = num_vertices();
    for (int t = 0; t < num_triangles(); ++t) {
        for (int v : triangles[t])
            if (v < 0 || v >= nv) throw GeometryError("triangle " + std::to_string(t) + " references vertex out of range");
        const Tri &tri = triangles[t];
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw GeometryError("triangle " + std::to_string(t) + " repeats a vertex");
        double scale = diameter(t);
        if (!(area(t) > 1e-14 * scale * scale)) throw GeometryError("triangle " + std::to_string(t) + " is degenerate");
    }
    if (!vertex_markers.empty() && vertex_markers.size() != vertices.size())
        throw GeometryError("vertex marker count does not match vertex count");
}

void TriMesh::validate_manifold() const {
    std::map<Edge, std::vector<std::pair<int, int>>> directed;
    for (const Tri &t : triangles)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            directed[make_edge(a, b)].push_back({a, b});
        }
    for (const auto &[e, uses] : directed) {
        if (uses.size() > 2) throw GeometryError("edge shared by more than two triangles");
        if (uses.size() == 2 && uses[0].first == uses[1].first)
            throw GeometryError("inconsistent triangle orientation across an edge");
    }
}

TriMesh barycentric_refine(const TriMesh &mesh) {
    TriMesh out;
    const int nv = mesh.num_vertices();
    const std::vector<Edge> edges = mesh.edges();
    std::map<Edge, int> edge_id;
    for (int i = 0; i < static_cast<int>(edges.size()); ++i) edge_id[edges[i]] = i;
    const int ne = static_cast<int>(edges.size());

    out.vertices.reserve(nv + ne + mesh.num_triangles());
    out.node_origin.reserve(out.vertices.capacity());
    for (int v = 0; v < nv; ++v) {
        out.vertices.push_back(mesh.vertices[v]);
        out.node_origin.push_back({NodeKind::vertex, {v, -1}});
    }
    for (const Edge &e : edges) {
        out.vertices.push_back(0.5 * (mesh.vertices[e.first] + mesh.vertices[e.second]));
        out.node_origin.push_back({NodeKind::edge_midpoint, {e.first, e.second}});
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        out.vertices.push_back(mesh.centroid(t));
        out.node_origin.push_back({NodeKind::barycenter, {t, -1}});
    }
    out.triangles.reserve(6 * mesh.num_triangles());
    out.parent.reserve(6 * mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Tri &tri = mesh.triangles[t];
        const int g = nv + ne + t;
        for (int j = 0; j < 3; ++j) {
            const int a = tri[j], b = tri[(j + 1) % 3];
            const int m = nv + edge_id.at(make_edge(a, b));
            out.triangles.push_back({a, m, g});
            out.triangles.push_back({m, b, g});
            out.parent.push_back(t);
            out.parent.push_back(t);
        }
    }
    if (!mesh.vertex_markers.empty()) {
        out.vertex_markers.assign(out.vertices.size(), marker_none);
        std::copy(mesh.vertex_markers.begin(), mesh.vertex_markers.end(), out.vertex_markers.begin());
    }
    return out;
}

std::vector<std::vector<int>> dual_cells(const TriMesh &mesh, const TriMesh &refined) {
    if (refined.num_triangles() != 6 * mesh.num_triangles())
        throw GeometryError("dual_cells: refinement does not match the mesh");
    std::vector<std::vector<int>> cells(mesh.num_vertices());
    for (int t = 0; t < mesh.num_triangles(); ++t)
        for (int j = 0; j < 3; ++j) {
            const int v = mesh.triangles[t][j];
            cells[v].push_back(6 * t + 2 * j);
            cells[v].push_back(6 * t + (2 * j + 5) % 6);
        }
    return cells;
}

std::vector<std::vector<int>> dual_cells(const TriMesh &mesh) { return dual_cells(mesh, barycentric_refine(mesh)); }

// ---------------------------------------------------------------------------

namespace {

using Key = std::tuple<double, double, double>;
Key key_of(const Vec3 &p) { return {p.x(), p.y(), p.z()}; }

/// Structured n x n sheet; coord(a, b) gives the vertex at grid position (a, b).
template <class Coord>
TriMesh grid_sheet(int n, Coord coord) {
    std::vector<Vec3> verts;
    verts.reserve((n + 1) * (n + 1));
    for (int b = 0; b <= n; ++b)
        for (int a = 0; a <= n; ++a) verts.push_back(coord(a, b));
    auto id = [n](int a, int b) { return b * (n + 1) + a; };
    std::vector<Tri> tris;
    tris.reserve(2 * n * n);
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            tris.push_back({id(a, b), id(a + 1, b), id(a + 1, b + 1)});
            tris.push_back({id(a, b), id(a + 1, b + 1), id(a, b + 1)});
        }
    TriMesh m(std::move(verts), std::move(tris));
    m.vertex_markers.assign(m.vertices.size(), marker_none);
    std::vector<bool> bnd = m.boundary_vertices();
    for (int v = 0; v < m.num_vertices(); ++v)
        if (bnd[v]) m.vertex_markers[v] |= marker_boundary;
    return m;
}

double lerp(double lo, double hi, int i, int n) { return i == n ? hi : lo + (hi - lo) * i / n; }

int cells_for(double side, double h) {
    if (!(h > 0.0)) throw GeometryError("mesh width must be positive");
    return std::max(1, static_cast<int>(std::ceil(side / h - 1e-12)));
}

double point_segment_distance(const Vec3 &p, const Vec3 &a, const Vec3 &b) {
    Vec3 d = b - a;
    double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * d)).norm();
}

}  // namespace

MultiScreen::MultiScreen(std::vector<TriMesh> sheets, std::vector<Junction> junctions, std::vector<Panel> panels,
                         CoveringKind covering, ScreenKind kind)
    : sheets_(std::move(sheets)), junctions_(std::move(junctions)), panels_(std::move(panels)),
      covering_(covering), kind_(kind) {
    if (sheets_.empty()) throw GeometryError("multi-screen without sheets");
    for (const TriMesh &s : sheets_) {
        s.validate();
        s.validate_manifold();
    }
    weld();
    check_panels();
}

void MultiScreen::weld() {
    auto surf = std::make_shared<TriMesh>();
    std::map<Key, int> ids;
    sheet_vertex_map_.assign(sheets_.size(), {});
    sheet_triangle_offset_.clear();
    triangle_sheet_.clear();
    for (int s = 0; s < static_cast<int>(sheets_.size()); ++s) {
        const TriMesh &sh = sheets_[s];
        auto &map = sheet_vertex_map_[s];
        map.resize(sh.vertices.size());
        for (int v = 0; v < sh.num_vertices(); ++v) {
            auto [it, inserted] = ids.try_emplace(key_of(sh.vertices[v]), surf->num_vertices());
            if (inserted) {
                surf->vertices.push_back(sh.vertices[v]);
                surf->vertex_markers.push_back(marker_none);
            }
            map[v] = it->second;
            if (!sh.vertex_markers.empty()) surf->vertex_markers[it->second] |= sh.vertex_markers[v];
        }
        sheet_triangle_offset_.push_back(surf->num_triangles());
        for (const Tri &t : sh.triangles) {
            surf->triangles.push_back({map[t[0]], map[t[1]], map[t[2]]});
            triangle_sheet_.push_back(s);
        }
    }
    sheet_triangle_offset_.push_back(surf->num_triangles());

    junction_vertex_.assign(surf->vertices.size(), false);
    junction_segments_.clear();
    for (const Junction &j : junctions_) {
        if (j.sheets.size() != j.chains.size() || j.sheets.empty())
            throw GeometryError("junction chain list does not match its sheets");
        const std::vector<int> &first = j.chains[0];
        for (std::size_t k = 0; k < j.sheets.size(); ++k) {
            const int s = j.sheets[k];
            if (s < 0 || s >= static_cast<int>(sheets_.size())) throw GeometryError("junction references unknown sheet");
            if (j.chains[k].size() != first.size()) throw GeometryError("junction chains differ in length");
            for (std::size_t i = 0; i < first.size(); ++i) {
                const Vec3 &p = sheets_[s].vertices.at(j.chains[k][i]);
                const Vec3 &q = sheets_[j.sheets[0]].vertices.at(first[i]);
                if (!(p.x() == q.x() && p.y() == q.y() && p.z() == q.z()))
                    throw GeometryError("sheet meshes do not conform along a junction");
            }
        }
        for (std::size_t i = 0; i < first.size(); ++i) {
            const int w = sheet_vertex_map_[j.sheets[0]][first[i]];
            junction_vertex_[w] = true;
            surf->vertex_markers[w] |= marker_junction;
            if (i + 1 < first.size())
                junction_segments_.push_back(
                    {sheets_[j.sheets[0]].vertices[first[i]], sheets_[j.sheets[0]].vertices[first[i + 1]]});
        }
    }
    surf->validate();
    surface_ = surf;
    refined_ = std::make_shared<TriMesh>(barycentric_refine(*surf));
}

Patch MultiScreen::panel_patch(int l) const {
    Patch p;
    p.panel = l;
    for (const PanelFace &f : panels_.at(l).faces)
        for (int t = sheet_triangle_offset_[f.sheet]; t < sheet_triangle_offset_[f.sheet + 1]; ++t) {
            p.triangles.push_back(t);
            p.signs.push_back(f.sign);
        }
    return p;
}

void MultiScreen::check_panels() const {
    if (panels_.empty()) throw GeometryError("multi-screen without panels");
    std::map<std::pair<int, int>, int> face_count;
    for (int l = 0; l < num_panels(); ++l) {
        std::set<int> used;
        for (const PanelFace &f : panels_[l].faces) {
            if (f.sheet < 0 || f.sheet >= static_cast<int>(sheets_.size()))
                throw GeometryError("panel references unknown sheet");
            if (f.sign != 1 && f.sign != -1) throw GeometryError("panel face sign must be +1 or -1");
            if (!used.insert(f.sheet).second) throw GeometryError("panel uses a sheet twice");
            ++face_count[{f.sheet, f.sign}];
        }
        // A panel must be a consistently oriented simple screen.
        Patch p = panel_patch(l);
        std::map<Edge, std::vector<std::pair<int, int>>> directed;
        for (std::size_t i = 0; i < p.triangles.size(); ++i) {
            Tri t = surface_->triangles[p.triangles[i]];
            if (p.signs[i] < 0) std::swap(t[1], t[2]);
            for (int k = 0; k < 3; ++k) directed[make_edge(t[k], t[(k + 1) % 3])].push_back({t[k], t[(k + 1) % 3]});
        }
        for (const auto &[e, uses] : directed) {
            if (uses.size() > 2)
                throw GeometryError("panel " + std::to_string(l) + " is not a simple screen (edge with >2 triangles)");
            if (uses.size() == 2 && uses[0].first == uses[1].first)
                throw GeometryError("panel " + std::to_string(l) + " is not consistently oriented");
        }
    }
    for (int s = 0; s < static_cast<int>(sheets_.size()); ++s)
        for (int sign : {1, -1}) {
            auto it = face_count.find({s, sign});
            const int c = it == face_count.end() ? 0 : it->second;
            if (c == 0) throw GeometryError("panels do not cover the inflated screen");
            if (covering_ == CoveringKind::exact && c != 1)
                throw GeometryError("exact covering uses a sheet face more than once");
        }
}

double MultiScreen::distance_to_junction(const Vec3 &p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto &[a, b] : junction_segments_) d = std::min(d, point_segment_distance(p, a, b));
    return d;
}

std::vector<std::pair<PanelFace, std::vector<int>>> MultiScreen::overlaps() const {
    std::map<std::pair<int, int>, std::vector<int>> by_face;
    for (int l = 0; l < num_panels(); ++l)
        for (const PanelFace &f : panels_[l].faces) by_face[{f.sheet, f.sign}].push_back(l);
    std::vector<std::pair<PanelFace, std::vector<int>>> out;
    for (const auto &[face, ls] : by_face)
        if (ls.size() > 1) out.push_back({PanelFace{face.first, face.second}, ls});
    return out;
}

MultiScreen make_junction_screen(int num_sheets, double side_length, double h) {
    if (num_sheets < 3) throw GeometryError("a junction needs at least three sheets");
    if (!(side_length > 0.0)) throw GeometryError("side length must be positive");
    if (!(h > 0.0)) throw GeometryError("mesh width must be positive");
    if (h > side_length) throw GeometryError("mesh width exceeds the side length");
    const int n = cells_for(side_length, h);
    const int m = num_sheets;

    std::vector<TriMesh> sheets;
    for (int i = 0; i < m; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / m;
        const double c = std::cos(theta), s = std::sin(theta);
        sheets.push_back(grid_sheet(n, [&](int a, int b) {
            const double x = lerp(0.0, side_length, a, n);
            if (b == 0) return Vec3(x, 0.0, 0.0);
            const double r = lerp(0.0, side_length, b, n);
            return Vec3(x, r * c, r * s);
        }));
    }
    Junction j;
    for (int i = 0; i < m; ++i) {
        j.sheets.push_back(i);
        std::vector<int> chain(n + 1);
        for (int a = 0; a <= n; ++a) chain[a] = a;
        j.chains.push_back(chain);
        for (int a = 0; a <= n; ++a) sheets[i].vertex_markers[a] |= marker_junction;
    }
    std::vector<Panel> panels;
    for (int l = 0; l < m; ++l) panels.push_back(Panel{{PanelFace{l, -1}, PanelFace{(l + 1) % m, +1}}});

    MultiScreen screen(std::move(sheets), {j}, std::move(panels), CoveringKind::exact, ScreenKind::junction);
    screen.nominal_h = h;
    screen.side_length = side_length;
    screen.name = m == 3 ? "trijunction" : "mjunction:" + std::to_string(m);
    return screen;
}

MultiScreen make_typeB_screen(double h) {
    if (!(h > 0.0)) throw GeometryError("mesh width must be positive");
    const double half = 0.5;
    const int n = cells_for(half, h);

    auto flat = [&](double x0, double x1, double y0, double y1) {
        return grid_sheet(n, [&](int a, int b) { return Vec3(lerp(x0, x1, a, n), lerp(y0, y1, b, n), 0.0); });
    };
    std::vector<TriMesh> sheets;
    sheets.push_back(flat(-half, 0.0, -half, 0.0));  // 0: A, left-front quadrant
    sheets.push_back(flat(0.0, half, -half, 0.0));   // 1: B, right-front
    sheets.push_back(flat(-half, 0.0, 0.0, half));   // 2: C, left-back
    sheets.push_back(flat(0.0, half, 0.0, half));    // 3: D, right-back
    sheets.push_back(grid_sheet(n, [&](int a, int b) {  // 4: vertical half-sheet in the plane x = 0
        return Vec3(0.0, lerp(-half, 0.0, a, n), lerp(0.0, half, b, n));
    }));

    // Junction from the irregular point (0,0,0) to (0,-0.5,0), shared by A, B and the vertical sheet.
    auto id = [n](int a, int b) { return b * (n + 1) + a; };
    Junction j;
    j.sheets = {0, 1, 4};
    std::vector<int> ca, cb, cv;
    for (int k = n; k >= 0; --k) {
        ca.push_back(id(n, k));
        cb.push_back(id(0, k));
        cv.push_back(id(k, 0));
    }
    j.chains = {ca, cb, cv};
    for (std::size_t k = 0; k < j.sheets.size(); ++k)
        for (int v : j.chains[k]) sheets[j.sheets[k]].vertex_markers[v] |= marker_junction;
    sheets[0].vertex_markers[id(n, n)] |= marker_irregular;
    sheets[1].vertex_markers[id(0, n)] |= marker_irregular;
    sheets[2].vertex_markers[id(n, 0)] |= marker_irregular;
    sheets[3].vertex_markers[id(0, 0)] |= marker_irregular;
    sheets[4].vertex_markers[id(n, 0)] |= marker_irregular;

    // Panel 0: underside of the horizontal sheet. Panels 1 and 2: the two faces of the
    // vertical sheet, each extended over the upper side of the horizontal sheet across
    // the whole line x = 0, so the upper back half (C, D) is covered twice.
    std::vector<Panel> panels = {
        Panel{{{0, +1}, {1, +1}, {2, +1}, {3, +1}}},
        Panel{{{4, +1}, {0, -1}, {2, -1}, {3, -1}}},
        Panel{{{4, -1}, {1, -1}, {3, -1}, {2, -1}}},
    };
    MultiScreen screen(std::move(sheets), {j}, std::move(panels), CoveringKind::overlapping, ScreenKind::type_b);
    screen.nominal_h = h;
    screen.side_length = 1.0;
    screen.name = "typeb";
    return screen;
}

// ---------------------------------------------------------------------------

std::string to_string(CoveringKind k) { return k == CoveringKind::exact ? "exact" : "overlapping"; }

void write_off(std::ostream &os, const TriMesh &mesh) {
    os << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
    os << std::setprecision(17);
    for (const Vec3 &v : mesh.vertices) os << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const Tri &t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

namespace {
bool next_data_line(std::istream &is, std::string &line) {
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}
}  // namespace

TriMesh read_off(std::istream &is) {
    std::string line;
    if (!next_data_line(is, line) || line.rfind("OFF", 0) != 0) throw GeometryError("OFF: missing header");
    if (!next_data_line(is, line)) throw GeometryError("OFF: missing counts line");
    std::istringstream counts(line);
    int nv = 0, nf = 0;
    if (!(counts >> nv >> nf) || nv < 0 || nf < 0) throw GeometryError("OFF: bad counts line");
    std::vector<Vec3> verts(nv);
    for (int i = 0; i < nv; ++i) {
        if (!next_data_line(is, line)) throw GeometryError("OFF: truncated vertex list");
        std::istringstream ls(line);
        if (!(ls >> verts[i].x() >> verts[i].y() >> verts[i].z())) throw GeometryError("OFF: bad vertex line");
    }
    std::vector<Tri> tris(nf);
    for (int i = 0; i < nf; ++i) {
        if (!next_data_line(is, line)) throw GeometryError("OFF: truncated face list");
        std::istringstream ls(line);
        int k = 0;
        if (!(ls >> k >> tris[i][0] >> tris[i][1] >> tris[i][2]) || k != 3)
            throw GeometryError("OFF: only triangular faces are supported");
    }
    return TriMesh(std::move(verts), std::move(tris));
}

void write_off(const std::filesystem::path &path, const TriMesh &mesh) {
    std::ofstream os(path);
    if (!os) throw GeometryError("cannot write " + path.string());
    write_off(os, mesh);
    if (!os) throw GeometryError("failed writing " + path.string());
}

TriMesh read_off(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is) throw GeometryError("cannot read " + path.string());
    return read_off(is);
}

namespace {
std::string kind_name(ScreenKind k) {
    switch (k) {
        case ScreenKind::junction: return "junction";
        case ScreenKind::type_b: return "typeb";
        default: return "custom";
    }
}
}  // namespace

void save_screen(const MultiScreen &screen, const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw GeometryError("cannot create directory " + dir.string() + ": " + ec.message());
    const auto &sheets = screen.sheets();
    for (std::size_t s = 0; s < sheets.size(); ++s) write_off(dir / ("sheet_" + std::to_string(s) + ".off"), sheets[s]);

    std::ofstream os(dir / "manifest.txt");
    if (!os) throw GeometryError("cannot write manifest in " + dir.string());
    os << std::setprecision(17);
    os << "msbem-manifest v1\n";
    os << "name " << (screen.name.empty() ? "custom" : screen.name) << '\n';
    os << "kind " << kind_name(screen.kind()) << '\n';
    os << "covering " << to_string(screen.covering()) << '\n';
    os << "nominal_h " << screen.nominal_h << '\n';
    os << "side_length " << screen.side_length << '\n';
    os << "sheets " << sheets.size() << '\n';
    for (std::size_t s = 0; s < sheets.size(); ++s) os << "sheet " << s << " sheet_" << s << ".off\n";
    os << "panels " << screen.num_panels() << '\n';
    for (int l = 0; l < screen.num_panels(); ++l) {
        os << "panel " << l;
        for (const PanelFace &f : screen.panels()[l].faces) os << ' ' << (f.sign > 0 ? '+' : '-') << f.sheet;
        os << '\n';
    }
    os << "junctions " << screen.junctions().size() << '\n';
    for (std::size_t j = 0; j < screen.junctions().size(); ++j) {
        const Junction &jn = screen.junctions()[j];
        os << "junction " << j << " sheets";
        for (int s : jn.sheets) os << ' ' << s;
        os << '\n';
        for (std::size_t k = 0; k < jn.sheets.size(); ++k) {
            os << "chain " << jn.sheets[k];
            for (int v : jn.chains[k]) os << ' ' << v;
            os << '\n';
        }
    }
    for (std::size_t s = 0; s < sheets.size(); ++s)
        for (int v = 0; v < sheets[s].num_vertices(); ++v)
            if (sheets[s].has_marker(v, marker_irregular)) os << "irregular " << s << ' ' << v << '\n';
    for (const auto &[face, ls] : screen.overlaps()) {
        os << "overlap " << (face.sign > 0 ? '+' : '-') << face.sheet << " panels";
        for (int l : ls) os << ' ' << l;
        os << '\n';
    }
    if (!os) throw GeometryError("failed writing manifest");
}

MultiScreen load_screen(const std::filesystem::path &dir) {
    std::ifstream is(dir / "manifest.txt");
    if (!is) throw GeometryError("cannot read manifest in " + dir.string());
    std::string line;
    if (!std::getline(is, line) || line.rfind("msbem-manifest v1", 0) != 0)
        throw GeometryError("manifest: unsupported header");

    std::string name = "custom", kind = "custom", covering = "exact";
    double h = 0.0, side = 0.0;
    std::vector<TriMesh> sheets;
    std::vector<Panel> panels;
    std::vector<Junction> junctions;
    std::vector<std::pair<int, int>> irregular;

    auto parse_face = [](const std::string &tok) {
        if (tok.size() < 2 || (tok[0] != '+' && tok[0] != '-')) throw GeometryError("manifest: bad panel face " + tok);
        return PanelFace{std::stoi(tok.substr(1)), tok[0] == '+' ? 1 : -1};
    };

    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "name") ls >> name;
        else if (tag == "kind") ls >> kind;
        else if (tag == "covering") ls >> covering;
        else if (tag == "nominal_h") ls >> h;
        else if (tag == "side_length") ls >> side;
        else if (tag == "sheet") {
            int idx;
            std::string file;
            ls >> idx >> file;
            if (idx != static_cast<int>(sheets.size())) throw GeometryError("manifest: sheets out of order");
            sheets.push_back(read_off(dir / file));
        } else if (tag == "panel") {
            int idx;
            ls >> idx;
            Panel p;
            std::string tok;
            while (ls >> tok) p.faces.push_back(parse_face(tok));
            panels.push_back(p);
        } else if (tag == "junction") {
            int idx;
            std::string word;
            ls >> idx >> word;
            Junction j;
            int s;
            while (ls >> s) j.sheets.push_back(s);
            junctions.push_back(j);
        } else if (tag == "chain") {
            if (junctions.empty()) throw GeometryError("manifest: chain before junction");
            int s;
            ls >> s;
            std::vector<int> chain;
            int v;
            while (ls >> v) chain.push_back(v);
            junctions.back().chains.push_back(chain);
        } else if (tag == "irregular") {
            int s, v;
            ls >> s >> v;
            irregular.push_back({s, v});
        }
        // "sheets", "panels", "junctions" counts and "overlap" lines are informational.
    }

    for (TriMesh &m : sheets) {
        m.vertex_markers.assign(m.vertices.size(), marker_none);
        std::vector<bool> bnd = m.boundary_vertices();
        for (int v = 0; v < m.num_vertices(); ++v)
            if (bnd[v]) m.vertex_markers[v] |= marker_boundary;
    }
    for (const Junction &j : junctions)
        for (std::size_t k = 0; k < j.sheets.size() && k < j.chains.size(); ++k)
            for (int v : j.chains[k]) sheets.at(j.sheets[k]).vertex_markers.at(v) |= marker_junction;
    for (auto [s, v] : irregular) sheets.at(s).vertex_markers.at(v) |= marker_irregular;

    ScreenKind sk = kind == "junction" ? ScreenKind::junction : kind == "typeb" ? ScreenKind::type_b : ScreenKind::custom;
    MultiScreen screen(std::move(sheets), std::move(junctions), std::move(panels),
                       covering == "overlapping" ? CoveringKind::overlapping : CoveringKind::exact, sk);
    screen.name = name;
    screen.nominal_h = h;
    screen.side_length = side;
    return screen;
}

}  // namespace msbem
