/**
 * \file spaces.hpp
 * \brief Primal and dual boundary element spaces on panels, multi-trace
 * product spaces with reductions, and the discrete single-trace basis.
 */
#ifndef MSBEM_SPACES_HPP
#define MSBEM_SPACES_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "msbem/geometry.hpp"

namespace msbem {

class SpaceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SpaceKind { pw_constant, continuous_p1, dual_constant, dual_p1 };
enum class Problem { dirichlet, neumann };
enum class Side { primal, dual };

std::string to_string(SpaceKind k);
std::string to_string(Problem p);

struct Reduction {
    enum Variant { full, partial, single_strip, fixed_overlap };
    Variant variant = full;
    double delta = 0.0;  // FixedOverlap only

    static Reduction Full() { return {full, 0.0}; }
    static Reduction Partial() { return {partial, 0.0}; }
    static Reduction SingleStrip() { return {single_strip, 0.0}; }
    static Reduction FixedOverlap(double delta);

    std::string name() const;
};

/// Restriction of a shape function to one carrier element: a linear function
/// with nodal values `vals` at the element's corners. corner >= 0 marks the
/// plain hat of that corner (vals = unit vector).
struct Piece {
    int element;
    int panel;
    int sign;   // panel orientation of the element (+1 / -1 relative to its own normal)
    int shape;
    int corner;
    std::array<double, 3> vals;
};

enum class AnchorKind { vertex, triangle };

struct DofMeta {
    AnchorKind anchor;
    int anchor_id;   // vertex or triangle id on the coarse welded surface
    int panel;
    int sheet;       // -1 when the anchor touches several sheets
    int sign;        // panel orientation at a triangle anchor; +1 for vertex anchors
    Vec3 position;
    int source = -1; // index in the unreduced space, when derived from one
};

/**
 * Finite-dimensional space of functions on (a copy of) panels of a carrier
 * mesh. Shape functions are sums of pieces; basis function j is
 * sum_k transform(k, j) shape_k (identity when `transform` is empty).
 */
class FunctionSpace {
public:
    SpaceKind kind = SpaceKind::pw_constant;
    std::shared_ptr<const TriMesh> carrier;
    std::vector<Piece> pieces;             // sorted by element
    int num_shapes = 0;
    Eigen::SparseMatrix<double> transform; // num_shapes x dim, or empty
    std::vector<DofMeta> dofs;
    std::vector<int> block_panels;         // panel id of each block
    std::vector<int> block_offsets;        // dof range of block b: [offsets[b], offsets[b+1])
    std::vector<Patch> supports;           // supporting patch (coarse surface) per block
    Reduction reduction;

    int dim() const { return static_cast<int>(dofs.size()); }
    int num_blocks() const { return static_cast<int>(block_panels.size()); }
    bool identity_transform() const { return transform.size() == 0; }

    /// Pieces on carrier element e: [element_begin(e), element_begin(e+1)).
    int element_begin(int e) const { return element_offsets_[e]; }

    /// Rebuilds the element index; call after editing pieces.
    void finalize();

    /// Coefficients of shapes for basis coefficients c.
    Eigen::VectorXd shape_coefficients(const Eigen::VectorXd &c) const;
    Eigen::VectorXcd shape_coefficients(const Eigen::VectorXcd &c) const;

    /// Values at the corners of every carrier element, summed over pieces.
    std::vector<std::array<double, 3>> element_corner_values(const Eigen::VectorXd &c) const;
    /// Integral of every basis function.
    Eigen::VectorXd integrals() const;

    /// Subspace spanned by the listed dofs (in the given order); block
    /// structure is kept. dofs[i].source records the original index.
    FunctionSpace restrict_to(const std::vector<int> &keep) const;
    /// Block b as a standalone space.
    FunctionSpace block(int b) const;

    std::string summary() const;

private:
    std::vector<int> element_offsets_;
};

/// Concatenates spaces on a common carrier; block order follows the input.
FunctionSpace product_space(const std::vector<FunctionSpace> &parts);

// Standalone builders on a whole mesh (one panel, positive orientation).
FunctionSpace pw_constant_space(const TriMesh &mesh);
FunctionSpace continuous_p1_space(const TriMesh &mesh, bool zero_boundary);
FunctionSpace dual_constant_space(const TriMesh &mesh);
FunctionSpace dual_p1_space(const TriMesh &mesh);

// Builders on a patch of a surface. Dual builders need the barycentric
// refinement of `surface` as carrier.
FunctionSpace pw_constant_space(std::shared_ptr<const TriMesh> surface, const Patch &patch);
FunctionSpace continuous_p1_space(std::shared_ptr<const TriMesh> surface, const Patch &patch, bool zero_boundary);
FunctionSpace dual_constant_space(const TriMesh &surface, std::shared_ptr<const TriMesh> refined, const Patch &patch);
FunctionSpace dual_p1_space(const TriMesh &surface, std::shared_ptr<const TriMesh> refined, const Patch &patch);

/// Patch made of all triangles of a mesh with positive orientation.
Patch whole_mesh_patch(const TriMesh &mesh);

/// Multi-trace space of a problem. Primal: pw-constant (Dirichlet) or
/// zero-boundary continuous p1 (Neumann) per kept panel; dual: dual-p1 or
/// dual-constant on the supporting patch of the matching primal block.
FunctionSpace multitrace_space(const MultiScreen &screen, Problem problem, Side side,
                               const Reduction &reduction = Reduction::Full());

/// Primal and dual multi-trace spaces built together (the dual blocks use the
/// primal supports).
struct SpacePair {
    FunctionSpace primal, dual;
};
SpacePair multitrace_pair(const MultiScreen &screen, Problem problem, const Reduction &reduction);

/// Columns spanning the discrete single-trace subspace of a Full space on a
/// type A screen: (+1, -1) pairs relative to panel orientation for
/// pw-constant (Neumann-type data), all-ones per vertex for continuous p1
/// (Dirichlet-type data).
Eigen::MatrixXd singletrace_basis(const MultiScreen &screen, const FunctionSpace &space);

/// Default overlap width for FixedOverlap: a quarter of the side length.
double default_overlap(const MultiScreen &screen);

}  // namespace msbem

#endif  // MSBEM_SPACES_HPP
