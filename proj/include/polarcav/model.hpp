// model.hpp: parameters of the polar two-level system in a single-mode
// cavity and the unperturbed Jaynes-Cummings eigenladder.
//
// All energies are angular frequencies (hbar = 1), by default in units of
// the cavity frequency omega_c.

#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

namespace polarcav {

struct ModelParams {
    double omega_c{1.0};    ///< cavity angular frequency
    double omega_a{1.0};    ///< atomic transition angular frequency
    double g_R{0.0};        ///< resonant / counter-rotating coupling
    double g_S{0.0};        ///< excited-state diagonal (permanent dipole) coupling
    double g_S_prime{0.0};  ///< ground-state diagonal coupling

    /// Cavity-atom detuning omega_c - omega_a.
    [[nodiscard]] double detuning() const { return omega_c - omega_a; }

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

/// Copy of `p` with both g_R and g_S replaced.
[[nodiscard]] ModelParams with_couplings(ModelParams p, double g_R, double g_S);

enum class Branch : int { minus = -1, plus = +1 };

[[nodiscard]] constexpr int sign(Branch b) { return static_cast<int>(b); }
[[nodiscard]] constexpr Branch flip(Branch b) { return b == Branch::plus ? Branch::minus : Branch::plus; }

/// Dressed-state label: excitation manifold n and branch s.
///
/// The n = 0 manifold holds the single state |g;0>. Its branch is fixed to
/// sign(omega_c - omega_a) (minus at exact resonance); use `canonical` or
/// `manifold_labels` to obtain it.
struct StateLabel {
    int n{0};
    Branch s{Branch::plus};

    friend auto operator<=>(const StateLabel&, const StateLabel&) = default;
};

/// "10,+" style rendering.
[[nodiscard]] std::string to_string(const StateLabel& label);
/// Parses "10,+", "10+", "10,-", "10,1", "10,-1".
[[nodiscard]] StateLabel parse_label(const std::string& text);

[[nodiscard]] Branch ground_branch(const ModelParams& p);
/// Normalizes the branch of an n = 0 label; other labels pass through.
[[nodiscard]] StateLabel canonical(StateLabel label, const ModelParams& p);
/// The one (n = 0) or two (n >= 1) labels of manifold n; empty for n < 0.
[[nodiscard]] std::vector<StateLabel> manifold_labels(int n, const ModelParams& p);

struct JCEigenpair {
    StateLabel label;
    double energy{0.0};
    double A{1.0};  ///< amplitude of |g;n>
    double B{0.0};  ///< amplitude of |e;n-1>
};

[[nodiscard]] double jc_energy(const StateLabel& label, const ModelParams& p);
[[nodiscard]] JCEigenpair jc_eigenpair(const StateLabel& label, const ModelParams& p);

struct CrossingScanOptions {
    int n_min{0};
    int n_max{10};
    int grid_points{2000};
    double tolerance{1e-4};  ///< bisection tolerance, units of omega_c
};

struct Crossing {
    double g_R{0.0};
    StateLabel lower;  ///< label whose energy is below the other one just before the crossing
    StateLabel upper;
};

/// Smallest g_R in [g_lo, g_hi] at which two JC energies from distinct labels
/// of manifolds n_min..n_max change order. Throws NoCrossingFound.
[[nodiscard]] Crossing jc_crossing_scan(const ModelParams& p_template, double g_lo, double g_hi,
                                        const CrossingScanOptions& options = {});

}  // namespace polarcav
