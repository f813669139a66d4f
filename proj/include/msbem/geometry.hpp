/**
 * \file geometry.hpp
 * \brief Triangle surface meshes, multi-screen geometries with their panel
 * coverings, barycentric refinement and dual cells.
 */
#ifndef MSBEM_GEOMETRY_HPP
#define MSBEM_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace msbem {

using Vec3 = Eigen::Vector3d;
using Tri = std::array<int, 3>;
using Edge = std::pair<int, int>;  // always stored with first < second

inline Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-vertex labels; combined as a bit mask.
enum VertexMarker : std::uint8_t {
    marker_none = 0,
    marker_boundary = 1,
    marker_junction = 2,
    marker_irregular = 4,
};

enum class NodeKind : std::uint8_t { vertex, edge_midpoint, barycenter };

/// Provenance of a node of a barycentric refinement.
/// vertex: ids = {v, -1}; edge_midpoint: ids = {a, b} (a < b); barycenter: ids = {parent triangle, -1}.
struct NodeOrigin {
    NodeKind kind;
    std::array<int, 2> ids;
};

/// Oriented triangle surface mesh. The vertex order of each triangle defines
/// its unit normal by the right-hand rule.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
    std::vector<std::uint8_t> vertex_markers;  // empty or one entry per vertex

    // Filled by barycentric_refine only.
    std::vector<int> parent;               // refined triangle -> coarse triangle
    std::vector<NodeOrigin> node_origin;   // refined vertex -> provenance

    TriMesh() = default;
    TriMesh(std::vector<Vec3> v, std::vector<Tri> t);

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    bool is_refinement() const { return !parent.empty(); }

    const Vec3 &corner(int t, int k) const { return vertices[triangles[t][k]]; }
    double area(int t) const;
    Vec3 normal(int t) const;
    Vec3 centroid(int t) const;
    double diameter(int t) const;
    double total_area() const;

    /// Unique undirected edges in order of first appearance.
    std::vector<Edge> edges() const;
    /// Edge -> incident triangles.
    std::map<Edge, std::vector<int>> edge_triangles() const;
    std::vector<Edge> boundary_edges() const;
    std::vector<bool> boundary_vertices() const;
    /// Number of triangles containing each vertex.
    std::vector<int> valence() const;
    std::pair<double, double> edge_length_range() const;
    double bounding_diameter() const;

    bool has_marker(int v, VertexMarker m) const {
        return !vertex_markers.empty() && (vertex_markers[v] & m);
    }

    /// Checks index ranges and strictly positive triangle areas.
    void validate() const;
    /// Checks that every edge has at most two triangles and that orientations
    /// agree across interior edges (a simple screen).
    void validate_manifold() const;
};

/// Barycentric refinement: every triangle is split into six children through its
/// barycenter and edge midpoints. Children of triangle t are 6t..6t+5; child 2j
/// contains primal vertex j of t at local position 0, child 2j+1 contains primal
/// vertex (j+1)%3 at local position 1, and every child has the barycenter at
/// local position 2.
TriMesh barycentric_refine(const TriMesh &mesh);

/// Vertex -> barycentric sub-triangles (indices into the refinement) forming its
/// dual cell.
std::vector<std::vector<int>> dual_cells(const TriMesh &mesh, const TriMesh &refined);
std::vector<std::vector<int>> dual_cells(const TriMesh &mesh);

// ---------------------------------------------------------------------------

enum class CoveringKind { exact, overlapping };
enum class ScreenKind { junction, type_b, custom };

/// One face of a sheet taking part in a panel: `sign` = +1 when the panel's
/// outward normal agrees with the sheet's own triangle orientation.
struct PanelFace {
    int sheet;
    int sign;
};

struct Panel {
    std::vector<PanelFace> faces;
};

/// Junction curve: per incident sheet, the ordered local vertex indices of the chain.
struct Junction {
    std::vector<int> sheets;
    std::vector<std::vector<int>> chains;
};

/// Subset of the welded surface forming one panel (or a reduced panel).
struct Patch {
    std::vector<int> triangles;  // indices into the welded surface
    std::vector<int> signs;      // orientation relative to the welded triangle
    int panel = 0;
};

/**
 * Multi-screen: simple sheets meeting at junctions, plus a covering of the
 * inflated screen by panels (simple screens made of sheet faces).
 *
 * The welded surface merges all sheets into one (possibly non-manifold)
 * mesh by exact coordinate identity; it is the geometric carrier of every
 * multi-trace space. Its barycentric refinement carries the dual spaces.
 */
class MultiScreen {
public:
    MultiScreen(std::vector<TriMesh> sheets, std::vector<Junction> junctions, std::vector<Panel> panels,
                CoveringKind covering, ScreenKind kind = ScreenKind::custom);

    const std::vector<TriMesh> &sheets() const { return sheets_; }
    const std::vector<Junction> &junctions() const { return junctions_; }
    const std::vector<Panel> &panels() const { return panels_; }
    CoveringKind covering() const { return covering_; }
    ScreenKind kind() const { return kind_; }
    int num_panels() const { return static_cast<int>(panels_.size()); }

    std::shared_ptr<const TriMesh> surface() const { return surface_; }
    std::shared_ptr<const TriMesh> refined_surface() const { return refined_; }

    int triangle_sheet(int t) const { return triangle_sheet_[t]; }
    /// Welded vertex id of local vertex v of sheet s.
    int welded_vertex(int s, int v) const { return sheet_vertex_map_[s][v]; }
    /// First welded triangle of sheet s; sheet triangles are contiguous.
    int sheet_offset(int s) const { return sheet_triangle_offset_[s]; }
    bool is_junction_vertex(int welded_v) const { return junction_vertex_[welded_v]; }

    /// Panel l as a patch of the welded surface.
    Patch panel_patch(int l) const;

    /// Euclidean distance from p to the union of junction polylines.
    double distance_to_junction(const Vec3 &p) const;

    /// Faces (sheet, sign) covered by more than one panel.
    std::vector<std::pair<PanelFace, std::vector<int>>> overlaps() const;

    double nominal_h = 0.0;
    double side_length = 0.0;
    std::string name;

private:
    std::vector<TriMesh> sheets_;
    std::vector<Junction> junctions_;
    std::vector<Panel> panels_;
    CoveringKind covering_;
    ScreenKind kind_;

    std::shared_ptr<TriMesh> surface_;
    std::shared_ptr<TriMesh> refined_;
    std::vector<int> triangle_sheet_;
    std::vector<int> sheet_triangle_offset_;
    std::vector<std::vector<int>> sheet_vertex_map_;
    std::vector<bool> junction_vertex_;
    std::vector<std::pair<Vec3, Vec3>> junction_segments_;

    void weld();
    void check_panels() const;
};

/// `num_sheets` square sheets of the given side sharing one straight junction
/// along the x axis, at equal dihedral angles. Panel l = sheet l (back) and
/// sheet l+1 (front), with outward normals.
MultiScreen make_junction_screen(int num_sheets, double side_length, double h);

/// Horizontal unit square with a vertical half-sheet attached along the
/// segment (0,0,0)-(0,-0.5,0); overlapping covering of the inflated screen.
MultiScreen make_typeB_screen(double h);

// ---------------------------------------------------------------------------
// Serialization

void write_off(std::ostream &os, const TriMesh &mesh);
TriMesh read_off(std::istream &is);
void write_off(const std::filesystem::path &path, const TriMesh &mesh);
TriMesh read_off(const std::filesystem::path &path);

/// Writes sheet_<i>.off files plus manifest.txt into `dir`.
void save_screen(const MultiScreen &screen, const std::filesystem::path &dir);
MultiScreen load_screen(const std::filesystem::path &dir);

std::string to_string(CoveringKind k);

}  // namespace msbem

#endif  // MSBEM_GEOMETRY_HPP
