#include "polarcav/oracle.hpp"

#include "polarcav/emission.hpp"
#include "polarcav/errors.hpp"

#include <algorithm>
#include <cmath>

namespace polarcav::oracle {

TruncatedHamiltonian build_hamiltonian(const ModelParams& p, int fock_cutoff, int max_manifold)
{
    if (fock_cutoff < 1 || fock_cutoff < max_manifold + 4)
        throw CutoffTooSmall("Fock cutoff " + std::to_string(fock_cutoff) + " too small for manifold " +
                             std::to_string(max_manifold) + " (need >= n + 4)");
    p.validate();

    const Eigen::Index dim = 2 * (fock_cutoff + 1);
    TruncatedHamiltonian h{fock_cutoff, Eigen::MatrixXd::Zero(dim, dim)};
    auto& H = h.matrix;
    for (int m = 0; m <= fock_cutoff; ++m) {
        H(ground_index(m), ground_index(m)) = p.omega_c * m - 0.5 * p.omega_a;
        H(excited_index(m), excited_index(m)) = p.omega_c * m + 0.5 * p.omega_a;
    }
    auto add_sym = [&H](Eigen::Index i, Eigen::Index j, double v) {
        H(i, j) += v;
        H(j, i) += v;
    };
    for (int m = 0; m < fock_cutoff; ++m) {
        const double root = std::sqrt(m + 1.0);
        // JC: sigma_+ a |g,m+1> = sqrt(m+1) |e,m>
        add_sym(excited_index(m), ground_index(m + 1), p.g_R * root);
        // CR: sigma_+ a^dag |g,m> = sqrt(m+1) |e,m+1>
        add_sym(excited_index(m + 1), ground_index(m), p.g_R * root);
        // [g_S (sz + 1) + g_S' (sz - 1)] (a + a^dag) = 2 g_S |e><e| X - 2 g_S' |g><g| X
        add_sym(excited_index(m + 1), excited_index(m), 2.0 * p.g_S * root);
        add_sym(ground_index(m + 1), ground_index(m), -2.0 * p.g_S_prime * root);
    }
    return h;
}

Eigensystem exact_eigensystem(const TruncatedHamiltonian& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix);
    if (solver.info() != Eigen::Success)
        throw SolverFailure("symmetric eigensolver did not converge");
    return {h.fock_cutoff, solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXd annihilation_matrix(int fock_cutoff)
{
    const Eigen::Index dim = 2 * (fock_cutoff + 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = 1; m <= fock_cutoff; ++m) {
        a(ground_index(m - 1), ground_index(m)) = std::sqrt(static_cast<double>(m));
        a(excited_index(m - 1), excited_index(m)) = std::sqrt(static_cast<double>(m));
    }
    return a;
}

Eigen::VectorXd jc_vector(const StateLabel& label, const ModelParams& p, int fock_cutoff)
{
    if (label.n > fock_cutoff)
        throw CutoffTooSmall("label " + to_string(label) + " outside Fock cutoff");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * (fock_cutoff + 1));
    const auto pair = jc_eigenpair(canonical(label, p), p);
    v(ground_index(label.n)) = pair.A;
    if (label.n >= 1)
        v(excited_index(label.n - 1)) = pair.B;
    return v;
}

Eigen::VectorXd embed(const PerturbedState& state, const ModelParams& p, int fock_cutoff)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * (fock_cutoff + 1));
    for (const auto& [label, c] : state.amplitudes)
        v += c * jc_vector(label, p, fock_cutoff);
    return v;
}

MatchedEigenstate match_state(const Eigensystem& eigs, const StateLabel& label_in, const ModelParams& p,
                              double min_margin)
{
    const StateLabel label = canonical(label_in, p);
    const Eigen::VectorXd reference = jc_vector(label, p, eigs.fock_cutoff);
    const Eigen::VectorXd projections = eigs.vectors.transpose() * reference;
    const Eigen::VectorXd overlaps = projections.array().square();

    Eigen::Index best = 0;
    overlaps.maxCoeff(&best);
    double runner_up = 0.0;
    for (Eigen::Index i = 0; i < overlaps.size(); ++i)
        if (i != best)
            runner_up = std::max(runner_up, overlaps(i));
    if (overlaps(best) - runner_up < min_margin)
        throw AmbiguousMatch("state " + to_string(label) + " has no unambiguous exact partner (overlaps " +
                             std::to_string(overlaps(best)) + " vs " + std::to_string(runner_up) + ")");

    MatchedEigenstate out;
    out.label = label;
    out.energy = eigs.energies(best);
    out.vector = eigs.vectors.col(best);
    if (projections(best) < 0.0)
        out.vector = -out.vector;
    out.overlap = overlaps(best);
    out.runner_up = runner_up;
    return out;
}

double TransitionReport::relative_difference() const
{
    if (exact_a_sq == 0.0)
        return perturbative_a_sq == 0.0 ? 0.0 : std::abs(perturbative_a_sq);
    return std::abs(perturbative_a_sq - exact_a_sq) / std::abs(exact_a_sq);
}

namespace {

void require_cutoff(int cutoff, const StateLabel& l)
{
    if (cutoff < l.n + 4)
        throw CutoffTooSmall("Fock cutoff " + std::to_string(cutoff) + " too small for label " + to_string(l));
}

}  // namespace

ComparisonReport match_and_compare(const Eigensystem& eigs, const ModelParams& p,
                                   const std::vector<StateLabel>& labels,
                                   const std::vector<std::pair<StateLabel, StateLabel>>& transitions)
{
    ComparisonReport report;
    for (const auto& l : labels) {
        require_cutoff(eigs.fock_cutoff, l);
        const auto matched = match_state(eigs, l, p);
        const auto pert = perturbed_state(l, p);
        const Eigen::VectorXd v = embed(pert, p, eigs.fock_cutoff);

        StateReport row;
        row.label = matched.label;
        row.exact_energy = matched.energy;
        row.perturbative_energy = energy_with_correction(l, p).total();
        row.energy_difference = row.exact_energy - row.perturbative_energy;
        row.match_overlap = matched.overlap;
        const double proj = matched.vector.dot(v);
        row.overlap_deficit = 1.0 - proj * proj / v.squaredNorm();
        report.states.push_back(row);
    }

    if (!transitions.empty()) {
        const Eigen::MatrixXd a = annihilation_matrix(eigs.fock_cutoff);
        for (const auto& [initial, final] : transitions) {
            require_cutoff(eigs.fock_cutoff, initial);
            require_cutoff(eigs.fock_cutoff, final);
            const auto vi = match_state(eigs, initial, p);
            const auto vf = match_state(eigs, final, p);
            const double amp = vf.vector.dot(a * vi.vector);

            TransitionReport row;
            row.initial = vi.label;
            row.final = vf.label;
            row.exact_a_sq = amp * amp;
            row.perturbative_a_sq = a_matrix_element_sq(final, initial, p);
            report.transitions.push_back(row);
        }
    }
    return report;
}

double cutoff_doubling_shift(const ModelParams& p, const std::vector<StateLabel>& labels, int fock_cutoff)
{
    int max_n = 0;
    for (const auto& l : labels)
        max_n = std::max(max_n, l.n);
    const auto small = exact_eigensystem(build_hamiltonian(p, fock_cutoff, max_n));
    const auto large = exact_eigensystem(build_hamiltonian(p, 2 * fock_cutoff, max_n));
    double worst = 0.0;
    for (const auto& l : labels)
        worst = std::max(worst, std::abs(match_state(small, l, p).energy - match_state(large, l, p).energy));
    return worst;
}

}  // namespace polarcav::oracle
