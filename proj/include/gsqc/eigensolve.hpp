#pragma once

// Low-lying spectrum of the assembled Hamiltonian. Dense path: full
// symmetric eigendecomposition (Eigen). Iterative path: Lanczos with full
// reorthogonalization against both the Krylov basis and already-locked
// eigenvectors, explicit residual checks before locking, and deflated
// restarts until the requested count converges. Start vectors come from a
// seeded generator, so runs are reproducible.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsqc/hamiltonian.hpp"

namespace gsqc {

inline constexpr std::size_t kDenseLimit = 4096;
inline constexpr int kMaxLanczosPairs = 32;
inline constexpr std::uint64_t kDefaultSeed = 0x6a09e667f3bcc908ull;

struct Spectrum {
    std::vector<double> eigenvalues;               // ascending
    std::vector<std::vector<double>> eigenvectors; // orthonormal, matching order
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& message, std::vector<double> residuals)
        : std::runtime_error(message), best_residuals(std::move(residuals)) {}
    std::vector<double> best_residuals;
};

class DegeneracyMismatchError : public std::runtime_error {
public:
    DegeneracyMismatchError(int expected, int observed)
        : std::runtime_error("degeneracy mismatch: expected " + std::to_string(expected) +
                             ", observed " + std::to_string(observed)),
          expected(expected), observed(observed) {}
    int expected, observed;
};

/// Full spectrum by dense symmetric eigendecomposition.
inline Spectrum solve_dense(const SparseSymMatrix& h, std::size_t dense_limit = kDenseLimit) {
    const std::size_t n = h.dim();
    if (n > dense_limit)
        throw std::invalid_argument("solve_dense: dimension " + std::to_string(n) +
                                    " above dense limit " + std::to_string(dense_limit));
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(n));
    for (const Triplet& t : h.upper_entries()) {
        dense(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
        dense(static_cast<Eigen::Index>(t.col), static_cast<Eigen::Index>(t.row)) = t.value;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("solve_dense: eigendecomposition failed");
    Spectrum s;
    s.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    s.eigenvectors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto col = solver.eigenvectors().col(static_cast<Eigen::Index>(i));
        s.eigenvectors[i].assign(col.data(), col.data() + n);
    }
    return s;
}

struct LanczosOptions {
    std::size_t max_iter = 0;    // 0: min(10 * dim, 200000)
    std::size_t max_basis = 400; // Krylov cap before a restart
    double residual_tol = 0.0;   // 0: 1e-9 * epsilon * sqrt(dim)
    double epsilon = 1.0;        // energy scale for default tolerances
};

namespace detail {

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

/// Two-pass classical Gram-Schmidt of w against an orthonormal set.
template <typename Vectors>
void reorthogonalize(std::vector<double>& w, const Vectors& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& u : basis) {
            const double c = dot(u, w);
            if (c != 0.0) axpy(-c, u, w);
        }
}

inline std::vector<double> seeded_vector(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) {
        // uniform in [-1, 1), bit-reproducible across platforms
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x = 2.0 * u - 1.0;
    }
    return v;
}

} // namespace detail

/// k lowest eigenpairs of a symmetric PSD matrix, deterministic for a
/// fixed seed. Throws ConvergenceError (carrying the best residual
/// estimates) if max_iter matvecs do not converge the request.
inline Spectrum solve_lanczos(const SparseSymMatrix& h, int k, std::uint64_t seed = kDefaultSeed,
                              LanczosOptions opt = {}) {
    const std::size_t n = h.dim();
    if (n <= 1) throw std::invalid_argument("solve_lanczos: dimension must exceed 1");
    if (k < 1 || k > kMaxLanczosPairs)
        throw std::invalid_argument("solve_lanczos: k must be in 1..32");
    if (static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("solve_lanczos: k exceeds dimension");

    const double residual_tol =
        opt.residual_tol > 0.0 ? opt.residual_tol
                               : 1e-9 * opt.epsilon * std::sqrt(static_cast<double>(n));
    const std::size_t max_iter =
        opt.max_iter > 0 ? opt.max_iter : std::min<std::size_t>(10 * n, 200000);
    const std::size_t max_basis =
        std::min({std::max<std::size_t>(opt.max_basis, static_cast<std::size_t>(k) + 2), n,
                  max_iter});
    const double breakdown_tol = 1e-12 * opt.epsilon;
    constexpr std::size_t check_every = 10;

    std::mt19937_64 rng(seed);
    std::vector<double> locked_values;
    std::vector<std::vector<double>> locked_vectors;
    std::vector<double> best_estimates;
    std::size_t total_iters = 0;
    std::optional<std::vector<double>> warm_start;

    auto fresh_start = [&]() {
        std::vector<double> v;
        for (int attempt = 0; attempt < 64; ++attempt) {
            v = warm_start ? std::move(*warm_start) : detail::seeded_vector(rng, n);
            warm_start.reset();
            detail::reorthogonalize(v, locked_vectors);
            const double nv = detail::norm(v);
            if (nv > 1e-8) {
                for (double& x : v) x /= nv;
                return v;
            }
        }
        throw ConvergenceError("solve_lanczos: cannot build a start vector orthogonal to the "
                               "locked set", best_estimates);
    };

    while (static_cast<int>(locked_values.size()) < k) {
        std::vector<std::vector<double>> basis;
        basis.push_back(fresh_start());
        std::vector<double> alpha, beta; // beta[i] couples basis[i], basis[i+1]
        bool sweep_done = false;

        while (!sweep_done) {
            const std::size_t m = basis.size();
            std::vector<double> w = h.matvec(basis[m - 1]);
            if (m > 1) detail::axpy(-beta[m - 2], basis[m - 2], w);
            const double a = detail::dot(basis[m - 1], w);
            alpha.push_back(a);
            detail::axpy(-a, basis[m - 1], w);
            detail::reorthogonalize(w, locked_vectors);
            detail::reorthogonalize(w, basis);
            const double b = detail::norm(w);
            ++total_iters;
            if (total_iters > max_iter)
                throw ConvergenceError("solve_lanczos: no convergence after " +
                                           std::to_string(max_iter) + " iterations",
                                       best_estimates);

            const bool breakdown = b <= breakdown_tol;
            const bool basis_full = m >= max_basis || total_iters >= max_iter;
            if (!breakdown && !basis_full && m % check_every != 0) {
                beta.push_back(b);
                for (double& x : w) x /= b;
                basis.push_back(std::move(w));
                continue;
            }

            // Ritz analysis of the current tridiagonal projection.
            Eigen::VectorXd diag(static_cast<Eigen::Index>(m));
            Eigen::VectorXd sub(static_cast<Eigen::Index>(m > 0 ? m - 1 : 0));
            for (std::size_t i = 0; i < m; ++i) diag(static_cast<Eigen::Index>(i)) = alpha[i];
            for (std::size_t i = 0; i + 1 < m; ++i) sub(static_cast<Eigen::Index>(i)) = beta[i];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            if (tri.info() != Eigen::Success)
                throw std::runtime_error("solve_lanczos: tridiagonal solve failed");

            const int need = k - static_cast<int>(locked_values.size());
            const int candidates = std::min<int>(need, static_cast<int>(m));
            best_estimates.clear();
            for (int i = 0; i < candidates; ++i)
                best_estimates.push_back(
                    std::abs(b * tri.eigenvectors()(static_cast<Eigen::Index>(m - 1), i)));

            // Lock converged Ritz pairs, lowest first, stopping at the first
            // one that misses the tolerance so locking stays bottom-up.
            int locked_now = 0;
            for (int i = 0; i < candidates; ++i) {
                if (!breakdown && best_estimates[static_cast<std::size_t>(i)] > residual_tol)
                    break;
                std::vector<double> y(n, 0.0);
                for (std::size_t q = 0; q < m; ++q)
                    detail::axpy(tri.eigenvectors()(static_cast<Eigen::Index>(q), i), basis[q],
                                 y);
                detail::reorthogonalize(y, locked_vectors);
                const double ny = detail::norm(y);
                if (ny < 1e-8) continue;
                for (double& x : y) x /= ny;
                std::vector<double> hy = h.matvec(y);
                const double theta = detail::dot(y, hy);
                detail::axpy(-theta, y, hy);
                if (detail::norm(hy) > residual_tol) break;
                locked_values.push_back(theta);
                locked_vectors.push_back(std::move(y));
                ++locked_now;
            }

            if (static_cast<int>(locked_values.size()) >= k) {
                sweep_done = true;
                continue;
            }
            if (breakdown) {
                // Krylov space exhausted; anything still unlocked needs a
                // fresh random direction in the deflated complement.
                sweep_done = true;
                continue;
            }
            if (basis_full || locked_now > 0) {
                // Restart from the lowest unconverged Ritz vector.
                std::vector<double> y(n, 0.0);
                for (std::size_t q = 0; q < m; ++q)
                    detail::axpy(tri.eigenvectors()(static_cast<Eigen::Index>(q),
                                                    std::min<int>(locked_now,
                                                                  static_cast<int>(m) - 1)),
                                 basis[q], y);
                warm_start = std::move(y);
                sweep_done = true;
                continue;
            }
            beta.push_back(b);
            for (double& x : w) x /= b;
            basis.push_back(std::move(w));
        }
    }

    // Ascending final order.
    std::vector<std::size_t> order(locked_values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return locked_values[a] < locked_values[b]; });
    Spectrum s;
    for (int i = 0; i < k; ++i) {
        s.eigenvalues.push_back(locked_values[order[static_cast<std::size_t>(i)]]);
        s.eigenvectors.push_back(std::move(locked_vectors[order[static_cast<std::size_t>(i)]]));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Ground space

enum class SolverChoice { Auto, Dense, Lanczos };

struct GroundSpaceOptions {
    std::optional<int> expected_degeneracy;
    SolverChoice solver = SolverChoice::Auto;
    std::uint64_t seed = kDefaultSeed;
    double epsilon = 1.0;
    std::size_t dense_limit = kDenseLimit;
};

struct GroundSpace {
    std::vector<double> eigenvalues;               // the degenerate set plus the gap state
    std::vector<std::vector<double>> eigenvectors; // orthonormal, matching order
    int degeneracy = 0;
    double gap = std::numeric_limits<double>::infinity();

    double ground_energy() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
};

/// Degeneracy grouping tolerance, deliberately looser than the residual
/// tolerance so a bias splitting of order 0.1 eps is never misread as
/// degeneracy.
inline double degeneracy_tol(double epsilon) { return 1e-8 * epsilon; }

inline GroundSpace ground_space(const SparseSymMatrix& h, GroundSpaceOptions opt = {}) {
    const std::size_t n = h.dim();
    if (n == 0) throw std::invalid_argument("ground_space: empty matrix");
    const double group_tol = degeneracy_tol(opt.epsilon);

    const bool use_dense = opt.solver == SolverChoice::Dense ||
                           (opt.solver == SolverChoice::Auto && n <= opt.dense_limit);

    Spectrum spec;
    if (use_dense) {
        spec = solve_dense(h, opt.solver == SolverChoice::Dense
                                  ? std::max(n, opt.dense_limit)
                                  : opt.dense_limit);
    } else {
        int k = opt.expected_degeneracy ? *opt.expected_degeneracy + 1 : 4;
        k = std::clamp(k, 2, kMaxLanczosPairs);
        while (true) {
            LanczosOptions lopt;
            lopt.epsilon = opt.epsilon;
            spec = solve_lanczos(h, k, opt.seed, lopt);
            const bool bracketed =
                spec.eigenvalues.back() - spec.eigenvalues.front() > group_tol;
            if (bracketed || static_cast<std::size_t>(k) >= std::min<std::size_t>(
                                                                kMaxLanczosPairs, n))
                break;
            k = static_cast<int>(
                std::min<std::size_t>({2 * static_cast<std::size_t>(k), kMaxLanczosPairs, n}));
        }
    }

    GroundSpace gs;
    const double ground = spec.eigenvalues.front();
    std::size_t d = 1;
    while (d < spec.eigenvalues.size() && spec.eigenvalues[d] - ground <= group_tol) ++d;
    gs.degeneracy = static_cast<int>(d);
    if (d < spec.eigenvalues.size())
        gs.gap = spec.eigenvalues[d];
    else if (d < n)
        throw ConvergenceError("ground_space: cannot bracket the degenerate ground set within "
                               "the eigenpair cap", {});
    // keep the ground group plus one state above it (when one exists)
    const std::size_t keep = std::min(spec.eigenvalues.size(), d + 1);
    gs.eigenvalues.assign(spec.eigenvalues.begin(),
                          spec.eigenvalues.begin() + static_cast<std::ptrdiff_t>(keep));
    gs.eigenvectors.assign(
        std::make_move_iterator(spec.eigenvectors.begin()),
        std::make_move_iterator(spec.eigenvectors.begin() + static_cast<std::ptrdiff_t>(keep)));

    if (opt.expected_degeneracy && *opt.expected_degeneracy != gs.degeneracy)
        throw DegeneracyMismatchError(*opt.expected_degeneracy, gs.degeneracy);
    return gs;
}

// ---------------------------------------------------------------------------
// Spectral gap scan

struct GapPoint {
    int num_stages;
    double gap;
};

/// Family member with the given stage count: the base circuit truncated to
/// its first N stages, or padded with all-identity stages beyond its length.
inline Circuit family_member(const Circuit& base, int num_stages) {
    Circuit c = base;
    c.stages.resize(static_cast<std::size_t>(std::min(num_stages, base.num_stages())));
    while (c.num_stages() < num_stages) {
        Stage s;
        for (int q = 0; q < c.num_qubits; ++q)
            s.assignments.push_back(SingleAssignment{q, SingleGate::identity()});
        c.stages.push_back(std::move(s));
    }
    return c;
}

inline std::vector<GapPoint> spectral_gap_scan(const Circuit& base, std::span<const int> rows,
                                               SolverChoice solver = SolverChoice::Auto,
                                               std::uint64_t seed = kDefaultSeed) {
    std::vector<GapPoint> table;
    for (int n : rows) {
        if (n < 1) throw std::invalid_argument("spectral_gap_scan: need N >= 1");
        const Circuit member = family_member(base, n);
        const SparseSymMatrix h = assemble(member);
        GroundSpaceOptions opt;
        opt.solver = solver;
        opt.seed = seed;
        opt.epsilon = member.epsilon;
        table.push_back({n, ground_space(h, opt).gap});
    }
    return table;
}

} // namespace gsqc
