#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "superlambda/integrator.hpp"
#include "superlambda/meanfield.hpp"
#include "superlambda/model.hpp"
#include "superlambda/trajectory.hpp"

namespace superlambda {

/// Largest ensemble the exact solver accepts (Hilbert dimension 81).
constexpr std::int64_t kMaxExactAtoms = 4;

using SparseOperator = Eigen::SparseMatrix<std::complex<double>>;

/// Hilbert dimension 3^N. Basis index digits are base 3 with atom 0 most
/// significant; level alpha in {1,2,3} maps to digit alpha - 1.
Eigen::Index hilbert_dim(int n_atoms);

/// Single-site matrix |alpha><beta|.
Eigen::Matrix3cd site_basis(int alpha, int beta);

/// X acting on atom j, identity elsewhere.
SparseOperator site_operator(int n_atoms, int j, const Eigen::Matrix3cd& x);

/// sum_j X^(j).
SparseOperator collective_operator(int n_atoms, const Eigen::Matrix3cd& x);

/// sum_{j != l} X^(j) Y^(l).
SparseOperator pair_sum_operator(int n_atoms, const Eigen::Matrix3cd& x,
                                 const Eigen::Matrix3cd& y);

/// Unitary exchanging atoms j and l.
SparseOperator atom_swap(int n_atoms, int j, int l);

struct DensityInvariants
{
    double trace_error;        ///< |Tr rho - 1|
    double hermiticity_error;  ///< max |rho - rho^dagger| elementwise
    double min_eigenvalue;
};

/// Exact state on the 3^N space.
class DensityMatrix
{
public:
    DensityMatrix(int n_atoms, Eigen::MatrixXcd rho);

    /// Tensor product of per-atom 3x3 density matrices, atom 0 first.
    static DensityMatrix product(std::span<const Eigen::Matrix3cd> sites);
    /// |l_0 l_1 ...><l_0 l_1 ...| with levels in {1,2,3}.
    static DensityMatrix product_levels(std::span<const int> levels);
    static DensityMatrix fully_excited(int n_atoms);
    static DensityMatrix maximally_mixed(int n_atoms);

    int n_atoms() const { return n_atoms_; }
    Eigen::Index dim() const { return rho_.rows(); }
    const Eigen::MatrixXcd& matrix() const { return rho_; }

    DensityInvariants invariants() const;

    /// Throws IntegrationError when the invariants exceed the slacks.
    void validate(double trace_slack = 1e-10, double hermitian_slack = 1e-12,
                  double eigen_slack = 1e-8) const;

private:
    int n_atoms_;
    Eigen::MatrixXcd rho_;
};

/// Observable selector.
///
/// population(a) and transition(a,b) address S_ab on one atom or, with
/// atom == kCollective, sum over atoms. pair(a,b,c,d) is
/// sum_{j != l} S_ab^(j) S_cd^(l); site_pair fixes j and l.
struct OperatorSpec
{
    static constexpr int kCollective = -1;
    enum class Kind { population, transition, pair };

    Kind kind = Kind::population;
    int a = 3, b = 3, c = 0, d = 0;
    int atom = kCollective;
    int atom2 = kCollective;

    static OperatorSpec population(int alpha, int atom = kCollective);
    static OperatorSpec transition(int alpha, int beta, int atom = kCollective);
    /// sum_{j != l} <S_ab^(j) S_ba^(l)>.
    static OperatorSpec pair_correlator(int alpha, int beta);
    static OperatorSpec pair(int a, int b, int c, int d);
    static OperatorSpec site_pair(int a, int b, int j, int c, int d, int l);

    /// Throws ConfigError on levels outside {1,2,3} or bad atom indices.
    void validate(int n_atoms) const;
    bool hermitian() const;
};

SparseOperator operator_matrix(int n_atoms, const OperatorSpec& spec);

/// Tr(rho O). Hermitian specs have their imaginary residue checked
/// (<= 1e-10) and dropped.
std::complex<double> expectation(const DensityMatrix& rho,
                                 const OperatorSpec& spec);
std::complex<double> expectation(const DensityMatrix& rho,
                                 const SparseOperator& op);

/// Superoperator on column-stacked vec(rho): vec(A rho B) = (B^T (x) A) vec(rho).
class Liouvillian
{
public:
    Liouvillian(int n_atoms, SparseOperator matrix);

    int n_atoms() const { return n_atoms_; }
    Eigen::Index hilbert_dim() const { return dim_; }
    const SparseOperator& matrix() const { return matrix_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& vec_rho) const;
    /// d rho / dt as a matrix.
    Eigen::MatrixXcd derivative(const DensityMatrix& rho) const;

private:
    int n_atoms_;
    Eigen::Index dim_;
    SparseOperator matrix_;
};

/// Full master equation: drive Omega sum_j (S12 + S21) plus both channels'
/// pair dissipators with the given rate matrices (Lamb parts included).
/// N > kMaxExactAtoms throws CapacityError.
Liouvillian build_liouvillian(const SystemParams& params,
                              const CouplingSet& couplings);

enum class PropagationMode {
    adaptive,   ///< DP5 on vec(rho)
    propagator  ///< exp(L dt) per distinct grid spacing; N <= 3
};

struct EvolveOptions
{
    Tolerances tol{1e-11, 1e-14};
    PropagationMode mode = PropagationMode::adaptive;
    bool check_invariants = true;
};

/// rho(t) at each grid time (first entry is rho0 at grid[0]).
std::vector<DensityMatrix> evolve(const DensityMatrix& rho0,
                                  const Liouvillian& liouvillian,
                                  std::span<const double> grid,
                                  const EvolveOptions& options = {});

/// Collective observables of rho. w12 is the true pair value here.
CorrelatorState<double> observe(const DensityMatrix& rho);

/// Dressed pair sums evaluated directly from rho, in raw (unscaled) form.
struct DressedExpectations
{
    double d_mm;
    double d_pp;
    std::complex<double> cross;
};
DressedExpectations dressed_expectations(const DensityMatrix& rho);

/// Exact run on a physical-time grid, with the mean-field column schema
/// (intensities q/N^2, dressed columns in intensity units).
Trajectory exact_trajectory(const SystemParams& params,
                            const CouplingSet& couplings,
                            const DensityMatrix& rho0,
                            std::span<const double> grid,
                            const EvolveOptions& options = {});

} // namespace superlambda
