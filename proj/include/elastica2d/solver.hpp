#pragma once

// Minimizes the discrete E_V under Dirichlet pins or fully free boundary:
// limited-memory quasi-Newton (two-loop recursion) with Armijo backtracking,
// load-ramp continuation with warm starts, and rigid-motion diagnostics.

#include <deque>
#include <map>

#include "elastica2d/energy.hpp"

namespace elastica {

struct Constraints {
    std::map<int, Complex> pinned; // vertex index -> target; empty = free boundary
};

struct SolverConfig {
    double grad_tol = 1e-8; // threshold is grad_tol * mesh area (max-norm)
    int max_iters = 20000;
    int history = 8;
    double ls_shrink = 0.5;
    double ls_slope = 1e-4;
    int ramp_steps = 1;
};

struct SolveReport {
    double final_energy = 0.0;
    double grad_norm = 0.0;
    int iters = 0;
    bool converged = false;
    std::vector<double> energy_trace;
    StabilityReport stability;
    std::vector<int> branch_points;
};

struct RigidFit {
    Complex rotation{1.0, 0.0}; // unit modulus
    Complex translation{0.0, 0.0};
    double residual = 0.0; // RMS deviation / reference diameter

    Complex apply(Complex z) const { return rotation * z + translation; }
};

// Best orientation-preserving euclidean motion taking the reference onto the
// state (complex Procrustes restricted to |rotation| = 1).
inline RigidFit best_fit_rigid(const std::vector<Complex>& ref,
                               const std::vector<Complex>& pos) {
    if (ref.size() != pos.size() || ref.empty())
        throw std::invalid_argument("rigid fit needs matching nonempty point sets");
    Complex zc(0.0, 0.0), fc(0.0, 0.0);
    for (size_t i = 0; i < ref.size(); ++i) {
        zc += ref[i];
        fc += pos[i];
    }
    zc /= double(ref.size());
    fc /= double(ref.size());
    Complex w(0.0, 0.0);
    double spread = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) {
        w += std::conj(ref[i] - zc) * (pos[i] - fc);
        spread = std::max(spread, std::abs(ref[i] - zc));
    }
    RigidFit fit;
    fit.rotation = std::abs(w) > 0.0 ? w / std::abs(w) : Complex(1.0, 0.0);
    fit.translation = fc - fit.rotation * zc;
    double sq = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) sq += std::norm(fit.apply(ref[i]) - pos[i]);
    fit.residual = std::sqrt(sq / double(ref.size())) / std::max(2.0 * spread, 1e-300);
    return fit;
}

namespace detail {

inline void validate_constraints(const TriangleMesh& mesh, const Constraints& cons) {
    for (const auto& [i, target] : cons.pinned) {
        if (i < 0 || i >= (int)mesh.vertices.size())
            throw std::invalid_argument("pinned index out of range");
        if (!std::isfinite(target.real()) || !std::isfinite(target.imag()))
            throw std::invalid_argument("pinned target not finite");
    }
}

inline double dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
}

} // namespace detail

// Least-squares affine map f ~ a z + b conj(z) + c fitted to the pinned
// targets, applied to every vertex (pins exact). Used as a mild initial
// guess for Dirichlet problems.
inline DeformedState affine_init(const TriangleMesh& mesh, const Constraints& cons) {
    detail::validate_constraints(mesh, cons);
    DeformedState state = identity_state(mesh);
    if (!cons.pinned.empty()) {
        Complex A[3][3] = {};
        Complex rhs[3] = {};
        for (const auto& [i, f] : cons.pinned) {
            const Complex z = mesh.vertices[(size_t)i];
            const Complex phi[3] = {z, std::conj(z), Complex(1.0, 0.0)};
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) A[r][c] += std::conj(phi[r]) * phi[c];
                rhs[r] += std::conj(phi[r]) * f;
            }
        }
        for (int r = 0; r < 3; ++r) A[r][r] += 1e-12 * (1.0 + std::abs(A[r][r]));
        // Gaussian elimination with partial pivoting on the 3x3 system
        int perm[3] = {0, 1, 2};
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::abs(A[perm[r]][col]) > std::abs(A[perm[piv]][col])) piv = r;
            std::swap(perm[col], perm[piv]);
            for (int r = col + 1; r < 3; ++r) {
                const Complex m = A[perm[r]][col] / A[perm[col]][col];
                for (int c = col; c < 3; ++c) A[perm[r]][c] -= m * A[perm[col]][c];
                rhs[perm[r]] -= m * rhs[perm[col]];
            }
        }
        Complex u[3];
        for (int col = 2; col >= 0; --col) {
            Complex s = rhs[perm[col]];
            for (int c = col + 1; c < 3; ++c) s -= A[perm[col]][c] * u[c];
            u[col] = s / A[perm[col]][col];
        }
        for (size_t i = 0; i < state.positions.size(); ++i) {
            const Complex z = mesh.vertices[i];
            state.positions[i] = u[0] * z + u[1] * std::conj(z) + u[2];
        }
    }
    for (const auto& [i, target] : cons.pinned) state.positions[(size_t)i] = target;
    return state;
}

inline std::pair<DeformedState, SolveReport> minimize(const TriangleMesh& mesh,
                                                      const DeformedState& init,
                                                      const Constraints& cons,
                                                      const PotentialV& V,
                                                      const SolverConfig& cfg = {}) {
    detail::validate_constraints(mesh, cons);
    if (init.positions.size() != mesh.vertices.size())
        throw std::invalid_argument("state size mismatch");

    std::vector<int> free;
    for (int i = 0; i < (int)mesh.vertices.size(); ++i)
        if (!cons.pinned.count(i)) free.push_back(i);

    DeformedState state = init;
    for (const auto& [i, target] : cons.pinned) state.positions[(size_t)i] = target;

    const double tol = cfg.grad_tol * std::abs(mesh_area(mesh));
    SolveReport report;

    auto eval_energy = [&](const DeformedState& s) { return energy(mesh, s, V); };
    auto eval_grad = [&](const DeformedState& s) {
        const auto full = gradient(mesh, s, V);
        std::vector<Complex> g(free.size());
        for (size_t k = 0; k < free.size(); ++k) g[k] = full[(size_t)free[k]];
        return g;
    };
    auto max_norm = [](const std::vector<Complex>& g) {
        double m = 0.0;
        for (const Complex& c : g) m = std::max(m, std::abs(c));
        return m;
    };

    double E = eval_energy(state);
    if (!std::isfinite(E)) throw NonFiniteEnergy("initial state has non-finite energy");
    report.energy_trace.push_back(E);

    std::vector<Complex> g = eval_grad(state);
    report.grad_norm = max_norm(g);

    struct Pair {
        std::vector<Complex> s, y;
        double rho;
    };
    std::deque<Pair> memory;

    while (report.grad_norm > tol && report.iters < cfg.max_iters && !free.empty()) {
        // two-loop recursion
        std::vector<Complex> q = g;
        std::vector<double> a(memory.size());
        for (size_t m = memory.size(); m-- > 0;) {
            a[m] = memory[m].rho * detail::dot(memory[m].s, q);
            for (size_t k = 0; k < q.size(); ++k) q[k] -= a[m] * memory[m].y[k];
        }
        if (!memory.empty()) {
            const auto& last = memory.back();
            const double gamma = detail::dot(last.s, last.y) / detail::dot(last.y, last.y);
            for (auto& c : q) c *= gamma;
        }
        for (size_t m = 0; m < memory.size(); ++m) {
            const double b = memory[m].rho * detail::dot(memory[m].y, q);
            for (size_t k = 0; k < q.size(); ++k) q[k] += (a[m] - b) * memory[m].s[k];
        }
        std::vector<Complex> dir(q.size());
        for (size_t k = 0; k < q.size(); ++k) dir[k] = -q[k];
        double slope = detail::dot(g, dir);
        if (!(slope < 0.0)) {
            memory.clear();
            for (size_t k = 0; k < g.size(); ++k) dir[k] = -g[k];
            slope = -detail::dot(g, g);
            if (!(slope < 0.0)) break; // zero gradient
        }

        double t = 1.0;
        DeformedState trial = state;
        double Etrial = 0.0;
        bool accepted = false;
        while (t >= 1e-16) {
            for (size_t k = 0; k < free.size(); ++k)
                trial.positions[(size_t)free[k]] =
                    state.positions[(size_t)free[k]] + t * dir[k];
            Etrial = eval_energy(trial);
            if (std::isfinite(Etrial) && Etrial <= E + cfg.ls_slope * t * slope) {
                accepted = true;
                break;
            }
            t *= cfg.ls_shrink;
        }
        if (!accepted) throw LineSearchFailure("no descent step above 1e-16");

        std::vector<Complex> gnew = eval_grad(trial);
        Pair pair;
        pair.s.resize(free.size());
        pair.y.resize(free.size());
        for (size_t k = 0; k < free.size(); ++k) {
            pair.s[k] = t * dir[k];
            pair.y[k] = gnew[k] - g[k];
        }
        const double sy = detail::dot(pair.s, pair.y);
        if (sy > 1e-12 * std::sqrt(detail::dot(pair.s, pair.s) * detail::dot(pair.y, pair.y))) {
            pair.rho = 1.0 / sy;
            memory.push_back(std::move(pair));
            if ((int)memory.size() > cfg.history) memory.pop_front();
        }

        state = trial;
        E = Etrial;
        g = std::move(gnew);
        report.grad_norm = max_norm(g);
        report.energy_trace.push_back(E);
        ++report.iters;
    }

    report.converged = report.grad_norm <= tol;
    report.final_energy = E;
    report.stability = stability_report(mesh, state, V);
    report.branch_points = report.stability.branch_triangles;
    return {std::move(state), std::move(report)};
}

// Quasi-static continuation: pinned targets interpolated from the reference
// positions in cfg.ramp_steps increments, each solve warm-started from the
// previous state. Returns every intermediate (state, report).
inline std::vector<std::pair<DeformedState, SolveReport>> ramp_solve(
    const TriangleMesh& mesh, const Constraints& cons_target, const PotentialV& V,
    const SolverConfig& cfg = {}, const DeformedState* init = nullptr) {
    if (cons_target.pinned.empty())
        throw std::invalid_argument("ramp_solve needs nonempty constraints");
    detail::validate_constraints(mesh, cons_target);
    const int steps = std::max(1, cfg.ramp_steps);
    std::vector<std::pair<DeformedState, SolveReport>> out;
    DeformedState current = init ? *init : identity_state(mesh);
    for (int s = 1; s <= steps; ++s) {
        const double t = double(s) / steps;
        Constraints cons;
        // the last step must pin the exact targets, not ref + 1.0*(target - ref)
        for (const auto& [i, target] : cons_target.pinned)
            cons.pinned[i] = (s == steps) ? target
                                          : mesh.vertices[(size_t)i] +
                                                t * (target - mesh.vertices[(size_t)i]);
        try {
            auto [state, report] = minimize(mesh, current, cons, V, cfg);
            current = state;
            out.emplace_back(std::move(state), std::move(report));
        } catch (const Error& e) {
            throw Error("ramp step " + std::to_string(s) + "/" + std::to_string(steps) +
                        ": " + e.what());
        }
    }
    return out;
}

} // namespace elastica
