/**
 * \file assembly.hpp
 * \brief Galerkin matrices of the weakly singular and hypersingular Helmholtz
 * operators, the duality Gram matrix, right-hand sides and potentials.
 *
 * All pairings are bilinear (no complex conjugation).
 */
#ifndef MSBEM_ASSEMBLY_HPP
#define MSBEM_ASSEMBLY_HPP

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "msbem/kernel.hpp"
#include "msbem/quadrature.hpp"
#include "msbem/spaces.hpp"

namespace msbem {

enum class FormTag { V, W, Gram, B_block };

struct GalerkinMatrix {
    Eigen::MatrixXcd entries;
    FormTag form = FormTag::V;
    SpaceKind test_kind = SpaceKind::pw_constant;
    SpaceKind trial_kind = SpaceKind::pw_constant;

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
};

/// Block-diagonal operator, one dense block per panel block of a space.
struct BlockDiagonal {
    std::vector<Eigen::MatrixXcd> blocks;
    std::vector<int> offsets;  // size blocks + 1
    FormTag form = FormTag::B_block;

    int dim() const { return offsets.empty() ? 0 : offsets.back(); }
    Eigen::VectorXcd apply(const Eigen::VectorXcd &x) const;
    Eigen::MatrixXcd dense() const;
};

struct IncidentWave {
    Eigen::Vector3d direction{0.0, 0.0, 1.0};
    cplx kappa{1.0, 0.0};
    cplx amplitude{1.0, 0.0};

    void validate() const;
};

/// Weakly singular operator: entries(i, j) = <<V phi_j, phi_i>>.
GalerkinMatrix assemble_single_layer(const FunctionSpace &test, const FunctionSpace &trial, const KernelConfig &cfg,
                                     const QuadratureConfig &q = {});

/// Hypersingular operator through its curl-curl form.
GalerkinMatrix assemble_hypersingular(const FunctionSpace &test, const FunctionSpace &trial, const KernelConfig &cfg,
                                      const QuadratureConfig &q = {});

/// Memo of assembled panel blocks keyed by a fingerprint of the block's
/// geometry, pieces, transform, form, wavenumber and quadrature. Lets
/// reductions that leave a panel untouched reuse its block.
class BlockCache {
public:
    std::optional<Eigen::MatrixXcd> find(std::uint64_t key) const;
    void store(std::uint64_t key, const Eigen::MatrixXcd &block);
    std::size_t size() const;
    long hits() const { return hits_; }

private:
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, Eigen::MatrixXcd> blocks_;
    mutable long hits_ = 0;
};

std::uint64_t block_fingerprint(const FunctionSpace &block, FormTag form, const KernelConfig &cfg,
                                const QuadratureConfig &q);

/// Block-diagonal operator of `form` (V or W) over the panel blocks of a space.
BlockDiagonal assemble_block_diagonal(const FunctionSpace &space, FormTag form, const KernelConfig &cfg,
                                      const QuadratureConfig &q = {}, BlockCache *cache = nullptr);

/// Duality Gram matrix entries(i, j) = int phi_i psi_j over matching panels.
/// The test space lives on the coarse surface and the trial space either on
/// the same carrier or on its barycentric refinement.
Eigen::SparseMatrix<double> assemble_duality(const FunctionSpace &test, const FunctionSpace &trial);

/// Right-hand side <<datum, test_i>>: Dirichlet datum -u_inc, Neumann datum
/// -du_inc/dn with the panel-outward normal.
Eigen::VectorXcd assemble_rhs(const FunctionSpace &space, const IncidentWave &wave, Problem problem);

enum class Layer { single, double_ };

/// Single- or double-layer potential of a density at points off the screen.
Eigen::VectorXcd eval_potential(const Eigen::VectorXcd &coefficients, const FunctionSpace &space,
                                const KernelConfig &cfg, const std::vector<Eigen::Vector3d> &points, Layer layer);

/// Distance from p to triangle (a, b, c).
double point_triangle_distance(const Eigen::Vector3d &p, const Eigen::Vector3d &a, const Eigen::Vector3d &b,
                               const Eigen::Vector3d &c);

/// Plain-text complex CSV: one matrix row per line, "re,im" pairs.
void write_matrix_csv(std::ostream &os, const Eigen::MatrixXcd &m);

}  // namespace msbem

#endif  // MSBEM_ASSEMBLY_HPP
