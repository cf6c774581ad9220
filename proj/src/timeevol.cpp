#include "qforge/timeevol.hpp"

#include <algorithm>
#include <cmath>

#include "qforge/numerics.hpp"
#include "qforge/rng.hpp"

namespace qforge {

std::vector<ComplexVector> ed_evol(const ComplexMatrix& h, const ComplexVector& psi0,
                                   const std::vector<double>& times) {
    require(h.rows() <= (1 << 14), "ed_evol: dimension exceeds guard");
    require(h.rows() == psi0.size(), "ed_evol: size mismatch");
    EighResult eig = eigh(h);
    ComplexVector coeff = eig.eigenvectors.adjoint() * psi0;
    std::vector<ComplexVector> out;
    out.reserve(times.size());
    for (double t : times) {
        ComplexVector phased(coeff.size());
        for (Eigen::Index k = 0; k < coeff.size(); ++k) {
            phased[k] = coeff[k] * std::polar(1.0, -eig.eigenvalues[k] * t);
        }
        out.push_back(eig.eigenvectors * phased);
    }
    return out;
}

namespace {

struct LanczosResult {
    std::vector<ComplexVector> basis;  // orthonormal
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] couples basis[j] and basis[j+1]
};

LanczosResult lanczos(const SparseCOO& h, const ComplexVector& start, int m) {
    LanczosResult res;
    double norm = start.norm();
    require(norm > 0.0, "lanczos: zero start vector");
    ComplexVector v = start / norm;
    ComplexVector w(h.dim);
    for (int j = 0; j < m; ++j) {
        res.basis.push_back(v);
        h.matvec(v, w);
        double a = std::real(v.dot(w));
        res.alpha.push_back(a);
        w -= a * v;
        if (j > 0) w -= res.beta.back() * res.basis[j - 1];
        // full reorthogonalization
        for (const auto& b : res.basis) w -= b.dot(w) * b;
        double beta = w.norm();
        if (beta < 1e-12 || j == m - 1) break;
        res.beta.push_back(beta);
        v = w / beta;
    }
    return res;
}

Eigen::MatrixXd tridiagonal(const LanczosResult& l) {
    const int k = static_cast<int>(l.alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        t(i, i) = l.alpha[i];
        if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = l.beta[i];
    }
    return t;
}

}  // namespace

std::vector<ComplexVector> krylov_evol(const SparseCOO& h, const ComplexVector& psi0,
                                       const std::vector<double>& times, int subspace_dim) {
    require(subspace_dim >= 2, "krylov_evol: subspace dimension must be >= 2");
    const int m = static_cast<int>(std::min<std::int64_t>(subspace_dim, h.dim));
    require(psi0.norm() > 0.0, "krylov_evol: zero start vector");

    // a single projection is exact only on an invariant subspace (Lanczos
    // breakdown); otherwise split the time so each sub-step converges within
    // the m-dimensional basis: per-step phase spread a <= 0.15 m keeps the
    // polynomial tail a^m / m! far below 1e-10
    LanczosResult probe = lanczos(h, psi0, m);
    const bool invariant = static_cast<int>(probe.alpha.size()) < m;
    double half_width = 0.0;
    if (!invariant) {
        SpectralBounds b = estimate_spectral_bounds(h);
        half_width = 0.5 * (b.e_max - b.e_min);
    }

    auto step = [&](const ComplexVector& in, double dt) {
        double norm_in = in.norm();
        LanczosResult l = lanczos(h, in, m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiagonal(l));
        const int k = static_cast<int>(l.alpha.size());
        // exp(-i T dt) e1 via the tridiagonal eigendecomposition
        ComplexVector psi = ComplexVector::Zero(h.dim);
        for (int a = 0; a < k; ++a) {
            cplx acc = 0.0;
            for (int b = 0; b < k; ++b) {
                acc += es.eigenvectors()(a, b) * std::polar(1.0, -es.eigenvalues()[b] * dt) *
                       es.eigenvectors()(0, b);
            }
            psi += norm_in * acc * l.basis[a];
        }
        return psi;
    };

    std::vector<ComplexVector> out;
    out.reserve(times.size());
    for (double tt : times) {
        int steps = 1;
        if (!invariant && tt != 0.0) {
            double a_total = half_width * std::abs(tt);
            steps = std::max(1, static_cast<int>(std::ceil(a_total / std::max(1.0, 0.15 * m))));
        }
        ComplexVector psi = psi0;
        double dt = tt / steps;
        for (int s = 0; s < steps; ++s) psi = step(psi, dt);
        out.push_back(std::move(psi));
    }
    return out;
}

SpectralBounds estimate_spectral_bounds(const SparseCOO& h, std::uint64_t seed) {
    RngStream rng(seed, 0x5bec);
    ComplexVector start(h.dim);
    for (Eigen::Index i = 0; i < start.size(); ++i) {
        start[i] = cplx(rng.normal(), rng.normal());
    }
    LanczosResult l = lanczos(h, start, std::min<std::int64_t>(40, h.dim));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiagonal(l));
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    double margin = 0.005 * (hi - lo);
    if (margin <= 0.0) margin = 1e-8 + 1e-3 * std::abs(hi);
    return {lo - margin, hi + margin};
}

ChebyshevPlan estimate_k(double t_max, const SpectralBounds& bounds) {
    require(t_max > 0.0, "estimate_k: t_max must be > 0");
    require(bounds.e_min <= bounds.e_max, "estimate_k: invalid bounds");
    double a = 0.5 * (bounds.e_max - bounds.e_min) * t_max;
    if (a == 0.0) return {1, 1};
    ChebyshevPlan plan;
    plan.m = (a <= 30.0) ? 1 : static_cast<int>(std::ceil(a / 30.0));
    double a_sub = a / plan.m;
    plan.k = static_cast<int>(std::ceil(1.2 * a_sub + 20.0));
    return plan;
}

ComplexVector chebyshev_evol(const SparseCOO& h, const ComplexVector& psi0, double t,
                             const SpectralBounds& bounds, int k, int m) {
    require(m >= 1 && k >= 1, "chebyshev_evol: bad plan");
    require(h.dim == psi0.size(), "chebyshev_evol: size mismatch");
    if (t == 0.0) return psi0;

    const double width = bounds.e_max - bounds.e_min;
    const double center = 0.5 * (bounds.e_max + bounds.e_min);
    const double dt = t / m;
    if (width <= 0.0) {
        // spectrum is a single point: pure phase
        return std::polar(1.0, -center * t) * psi0;
    }
    const double scale = 0.5 * width * (1.0 + 1e-8);
    // the Bessel argument must use the same scale as the operator rescaling,
    // including the safety factor, or a relative phase error ~1e-8*t remains
    const double a_sub = std::abs(scale * dt);
    const double sgn = dt >= 0.0 ? 1.0 : -1.0;

    // coefficients c_j = (2 - d_{j0}) (-i)^j J_j(a); negative time via
    // J_j(-a) = (-1)^j J_j(a)
    std::vector<cplx> coeff(k + 1);
    const cplx mi(0.0, -1.0);
    cplx ip = 1.0;
    for (int j = 0; j <= k; ++j) {
        double bj = std::cyl_bessel_j(static_cast<double>(j), a_sub);
        if (sgn < 0.0 && (j & 1)) bj = -bj;
        coeff[j] = (j == 0 ? 1.0 : 2.0) * ip * bj;
        ip *= mi;
    }

    auto apply_scaled = [&](const ComplexVector& in, ComplexVector& out) {
        h.matvec(in, out);
        out = (out - center * in) / scale;
    };

    ComplexVector psi = psi0;
    ComplexVector t0(h.dim), t1(h.dim), t2(h.dim);
    for (int step = 0; step < m; ++step) {
        t0 = psi;
        apply_scaled(t0, t1);
        ComplexVector acc = coeff[0] * t0 + coeff[1] * t1;
        for (int j = 2; j <= k; ++j) {
            apply_scaled(t1, t2);
            t2 = 2.0 * t2 - t0;
            acc += coeff[j] * t2;
            t0.swap(t1);
            t1.swap(t2);
        }
        psi = std::polar(1.0, -center * dt) * acc;
        double drift = std::abs(psi.norm() - psi0.norm());
        if (drift > 1e-6) {
            throw std::runtime_error(
                "chebyshev_evol: norm drift exceeds 1e-6, spectral bounds likely violated");
        }
    }
    return psi;
}

GeneratorFn dense_generator(std::function<ComplexMatrix(double)> h_of_t) {
    return [h_of_t = std::move(h_of_t)](double t, const ComplexVector& in, ComplexVector& out) {
        out.noalias() = h_of_t(t) * in;
    };
}

GeneratorFn sparse_generator(const SparseCOO& h) {
    return [h](double, const ComplexVector& in, ComplexVector& out) { h.matvec(in, out); };
}

GeneratorFn pauli_generator(const PauliSum& h) {
    SparseCOO coo = pauli_sum_to_coo(h);
    return sparse_generator(coo);
}

namespace {

// classic Dormand-Prince 5(4) pair
struct Dopri {
    static constexpr double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static constexpr double b5[7] = {35.0 / 384,     0.0,  500.0 / 1113, 125.0 / 192,
                                     -2187.0 / 6784, 11.0 / 84, 0.0};
    static constexpr double b4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                                     -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

}  // namespace

OdeResult ode_evol(const GeneratorFn& h_fn, const ComplexVector& psi0,
                   const std::vector<double>& times, const OdeOptions& opts) {
    OdeResult res;
    ComplexVector psi = psi0;
    ComplexVector hpsi(psi0.size());
    double t = 0.0;
    const double norm0 = psi0.norm();

    auto rhs = [&](double tt, const ComplexVector& in, ComplexVector& out) {
        h_fn(tt, in, hpsi);
        out = cplx(0.0, -1.0) * hpsi;
        ++res.rhs_evaluations;
    };

    auto record = [&]() {
        res.states.push_back(psi);
        res.max_norm_drift = std::max(res.max_norm_drift, std::abs(psi.norm() - norm0));
    };

    if (opts.method == OdeMethod::rk4_fixed) {
        ComplexVector k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size()),
            tmp(psi.size());
        for (double target : times) {
            require(target >= t, "ode_evol: times must be ascending");
            double span = target - t;
            int steps = std::max(1, static_cast<int>(
                                        std::ceil(span * opts.rk4_steps_per_unit_time)));
            if (span == 0.0) steps = 0;
            double dt = steps > 0 ? span / steps : 0.0;
            for (int s = 0; s < steps; ++s) {
                rhs(t, psi, k1);
                tmp = psi + 0.5 * dt * k1;
                rhs(t + 0.5 * dt, tmp, k2);
                tmp = psi + 0.5 * dt * k2;
                rhs(t + 0.5 * dt, tmp, k3);
                tmp = psi + dt * k3;
                rhs(t + dt, tmp, k4);
                psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                t += dt;
            }
            t = target;
            record();
        }
        return res;
    }

    // adaptive Dormand-Prince
    double hstep = opts.initial_step;
    std::vector<ComplexVector> k(7, ComplexVector(psi.size()));
    ComplexVector y5(psi.size()), y4(psi.size()), stage(psi.size());
    for (double target : times) {
        require(target >= t, "ode_evol: times must be ascending");
        while (t < target) {
            double dt = std::min(hstep, target - t);
            rhs(t, psi, k[0]);
            for (int i = 1; i < 7; ++i) {
                stage = psi;
                for (int j = 0; j < i; ++j) {
                    if (Dopri::a[i][j] != 0.0) stage += dt * Dopri::a[i][j] * k[j];
                }
                rhs(t + Dopri::c[i] * dt, stage, k[i]);
            }
            y5 = psi;
            y4 = psi;
            for (int i = 0; i < 7; ++i) {
                if (Dopri::b5[i] != 0.0) y5 += dt * Dopri::b5[i] * k[i];
                if (Dopri::b4[i] != 0.0) y4 += dt * Dopri::b4[i] * k[i];
            }
            double err = (y5 - y4).norm();
            double tol = opts.atol + opts.rtol * std::max(psi.norm(), y5.norm());
            if (err <= tol) {
                psi = y5;
                t += dt;
            }
            double factor = (err > 0.0) ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
            factor = std::clamp(factor, 0.2, 5.0);
            hstep = dt * factor;
            if (hstep < 1e-14) {
                throw std::runtime_error("ode_evol: step size underflow");
            }
        }
        record();
    }
    return res;
}

void AnalogCircuit::add_digital(const GateInstruction& instr) {
    Block b;
    b.digital = true;
    b.instruction = instr;
    blocks.push_back(std::move(b));
}

void AnalogCircuit::add_analog(GeneratorFn generator, double duration, OdeOptions solver) {
    require(duration >= 0.0, "AnalogCircuit: negative duration");
    Block b;
    b.digital = false;
    b.analog = {std::move(generator), duration, solver};
    blocks.push_back(std::move(b));
}

StateVector run_analog_circuit(const AnalogCircuit& c, const StateVector& psi0) {
    StateVector psi = psi0;
    for (const auto& block : c.blocks) {
        if (block.digital) {
            apply_local_unitary(psi, gate_matrix(block.instruction, psi.d),
                                block.instruction.wires);
        } else if (block.analog.duration > 0.0) {
            OdeResult r = ode_evol(block.analog.generator, psi.amps,
                                   {block.analog.duration}, block.analog.solver);
            psi.amps = r.states.back();
        }
    }
    return psi;
}

}  // namespace qforge
