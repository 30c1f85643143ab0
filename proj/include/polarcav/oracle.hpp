// oracle.hpp: exact diagonalization of the full Hamiltonian in a truncated
// Fock space. Independent of the perturbative code path; used to validate it.
//
// Product basis ordering: index 2m is |g,m>, index 2m+1 is |e,m>, m = 0..N.

#pragma once

#include "polarcav/model.hpp"
#include "polarcav/perturbation.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace polarcav::oracle {

constexpr int default_fock_cutoff = 40;

struct TruncatedHamiltonian {
    int fock_cutoff{0};
    Eigen::MatrixXd matrix;

    [[nodiscard]] Eigen::Index dimension() const { return matrix.rows(); }
};

[[nodiscard]] constexpr Eigen::Index ground_index(int m) { return 2 * m; }
[[nodiscard]] constexpr Eigen::Index excited_index(int m) { return 2 * m + 1; }

/// H_JC + H_CR + H_AS including g_S_prime. Throws CutoffTooSmall unless
/// fock_cutoff >= max_manifold + 4 (and >= 1).
[[nodiscard]] TruncatedHamiltonian build_hamiltonian(const ModelParams& p, int fock_cutoff,
                                                     int max_manifold = 0);

struct Eigensystem {
    int fock_cutoff{0};
    Eigen::VectorXd energies;  ///< ascending
    Eigen::MatrixXd vectors;   ///< orthonormal columns
};

/// Dense symmetric eigensolve. Throws SolverFailure.
[[nodiscard]] Eigensystem exact_eigensystem(const TruncatedHamiltonian& h);

[[nodiscard]] Eigen::MatrixXd annihilation_matrix(int fock_cutoff);
/// Zeroth-order JC state |n_s^(0)> in the product basis.
[[nodiscard]] Eigen::VectorXd jc_vector(const StateLabel& label, const ModelParams& p, int fock_cutoff);
/// Perturbed state expansion mapped into the product basis.
[[nodiscard]] Eigen::VectorXd embed(const PerturbedState& state, const ModelParams& p, int fock_cutoff);

struct MatchedEigenstate {
    StateLabel label;
    double energy{0.0};
    Eigen::VectorXd vector;  ///< sign fixed so that <jc|vector> >= 0
    double overlap{0.0};     ///< squared overlap with the zeroth-order JC state
    double runner_up{0.0};   ///< second-largest squared overlap
};

/// Eigenvector with maximal squared overlap against the zeroth-order JC
/// state. Throws AmbiguousMatch when the best two overlaps differ by < min_margin.
[[nodiscard]] MatchedEigenstate match_state(const Eigensystem& eigs, const StateLabel& label,
                                            const ModelParams& p, double min_margin = 0.1);

struct StateReport {
    StateLabel label;
    double exact_energy{0.0};
    double perturbative_energy{0.0};  ///< e0 + e2
    double energy_difference{0.0};    ///< exact - perturbative
    double match_overlap{0.0};
    double overlap_deficit{0.0};      ///< 1 - |<exact|pert>|^2 / |pert|^2
};

struct TransitionReport {
    StateLabel initial;
    StateLabel final;
    double exact_a_sq{0.0};
    double perturbative_a_sq{0.0};

    [[nodiscard]] double relative_difference() const;
};

struct ComparisonReport {
    std::vector<StateReport> states;
    std::vector<TransitionReport> transitions;
};

/// Per-label energy and state comparison plus |<final|a|initial>|^2 for each
/// requested (initial, final) pair.
[[nodiscard]] ComparisonReport match_and_compare(
    const Eigensystem& eigs, const ModelParams& p, const std::vector<StateLabel>& labels,
    const std::vector<std::pair<StateLabel, StateLabel>>& transitions = {});

/// Largest change of the matched exact energies of `labels` when the cutoff
/// is doubled.
[[nodiscard]] double cutoff_doubling_shift(const ModelParams& p, const std::vector<StateLabel>& labels,
                                           int fock_cutoff);

}  // namespace polarcav::oracle
