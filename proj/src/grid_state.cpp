#include "qcl/grid_state.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "qcl/error.hpp"

namespace qcl {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(2 pi i m / n) for m = 0..n-1
std::vector<cplx> twiddles(std::size_t n) {
    std::vector<cplx> w(n);
    for (std::size_t m = 0; m < n; ++m) w[m] = std::polar(1.0, kTwoPi * double(m) / double(n));
    return w;
}

bool outside_central(long offset, std::size_t n) {
    // central 80% of n points
    return std::abs(static_cast<double>(offset)) > 0.4 * static_cast<double>(n);
}

void check_finite(std::span<const cplx> v, const char* what) {
    for (const auto& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw SimulationError(what);
}

struct DensityPass {
    Spill spill;
    Cumulants cumulants;
};

// Spill and cumulants from one column transform T of rho. With z = T_kj w^(jk),
// sum_j z is (F rho F^dagger)_kk and sum_k q_k^m z / n is (Q^m rho)_jj.
DensityPass density_pass(const GridSpec& g, const Frame& frame, std::span<const cplx> m) {
    const std::size_t n = g.n, mask = n - 1;
    ComplexVector t(m.begin(), m.end());
    fft_columns_forward(t, n);
    const auto w = twiddles(n);

    std::vector<double> d1(n, 0.0), d2(n, 0.0), d3(n, 0.0);
    double p_in = 0.0, p_out = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double q = g.momentum(k), q2 = q * q, q3 = q2 * q;
        const cplx* row = t.data() + k * n;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double z = (row[j] * w[(j * k) & mask]).real();
            s += z;
            d1[j] += q * z;
            d2[j] += q2 * z;
            d3[j] += q3 * z;
        }
        (outside_central(fft_frequency(k, n), n) ? p_out : p_in) += s;
    }

    DensityPass out;
    // Raw moments in frame coordinates. Re<xi^a Q^b> is the Weyl-ordered value for
    // the combinations needed here.
    double x_in = 0.0, x_out = 0.0;
    double tr = 0.0, mx = 0.0, mxx = 0.0, mxxx = 0.0;
    double mp = 0.0, mpp = 0.0, mppp = 0.0, mxp = 0.0, mxxp = 0.0, mxpp = 0.0;
    const double inv_n = 1.0 / double(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double xi = g.coordinate(j);
        const double r = m[j * n + j].real();
        (outside_central(long(j) - long(n / 2), n) ? x_out : x_in) += r;
        const double a = d1[j] * inv_n, b = d2[j] * inv_n;
        tr += r;
        mx += xi * r;
        mxx += xi * xi * r;
        mxxx += xi * xi * xi * r;
        mp += a;
        mpp += b;
        mppp += d3[j] * inv_n;
        mxp += xi * a;
        mxxp += xi * xi * a;
        mxpp += xi * b;
    }
    out.spill.position = std::max(0.0, x_out / (x_in + x_out));
    out.spill.momentum = std::max(0.0, p_out / (p_in + p_out));
    if (!(tr > 0.0)) throw SimulationError("density matrix has non-positive trace");
    for (double* v : {&mx, &mxx, &mxxx, &mp, &mpp, &mppp, &mxp, &mxxp, &mxpp}) *v /= tr;

    Cumulants& c = out.cumulants;
    c.v_x = mxx - mx * mx;
    c.v_p = mpp - mp * mp;
    c.c_xp = mxp - mx * mp;
    c.k_xxx = mxxx - 3.0 * mx * mxx + 2.0 * mx * mx * mx;
    c.k_ppp = mppp - 3.0 * mp * mpp + 2.0 * mp * mp * mp;
    c.k_xxp = mxxp - 2.0 * mx * mxp - mp * mxx + 2.0 * mx * mx * mp;
    c.k_xpp = mxpp - 2.0 * mp * mxp - mx * mpp + 2.0 * mp * mp * mx;
    c.x = frame.x + mx;
    c.p = frame.p + mp;
    return out;
}

}  // namespace

double GridSpec::dq() const { return kTwoPi * hbar / (static_cast<double>(n) * dx); }

double GridSpec::momentum(std::size_t k) const {
    return static_cast<double>(fft_frequency(k, n)) * dq();
}

void GridSpec::validate() const {
    if (n < 4 || !std::has_single_bit(n)) throw ConfigError("grid size must be a power of two >= 4");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("grid spacing must be positive");
    if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
}

GridState::GridState(GridSpec grid, Frame frame, ComplexVector amplitudes)
    : grid_(grid), frame_(frame), amplitudes_(std::move(amplitudes)) {
    grid_.validate();
    if (amplitudes_.size() != grid_.n) throw ConfigError("amplitude count does not match grid");
}

double GridState::norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s * grid_.dx;
}

double GridState::momentum_norm() const {
    ComplexVector f = amplitudes_;
    fft_forward(f);
    double s = 0.0;
    for (const auto& a : f) s += std::norm(a);
    return s * grid_.dx / static_cast<double>(grid_.n);
}

DensityState::DensityState(GridSpec grid, Frame frame, ComplexVector matrix)
    : grid_(grid), frame_(frame), matrix_(std::move(matrix)) {
    grid_.validate();
    if (matrix_.size() != grid_.n * grid_.n) throw ConfigError("matrix size does not match grid");
}

double DensityState::trace() const {
    double s = 0.0;
    for (std::size_t j = 0; j < grid_.n; ++j) s += matrix_[j * grid_.n + j].real();
    return s * grid_.dx;
}

double DensityState::purity() const {
    // Tr rho^2 = sum_jl |rho_jl|^2 dx^2 for Hermitian rho
    double s = 0.0;
    for (const auto& a : matrix_) s += std::norm(a);
    return s * grid_.dx * grid_.dx;
}

double DensityState::hermiticity_error() const {
    const std::size_t n = grid_.n;
    double worst = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        scale = std::max(scale, std::norm(matrix_[j * n + j]));
        for (std::size_t l = j; l < n; ++l)
            worst = std::max(worst, std::norm(matrix_[j * n + l] - std::conj(matrix_[l * n + j])));
    }
    return std::sqrt(scale > 0.0 ? worst / scale : worst);
}

double DensityState::min_eigenvalue() const {
    const auto n = static_cast<Eigen::Index>(grid_.n);
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l)
            m(j, l) = 0.5 * grid_.dx *
                      (matrix_[j * n + l] + std::conj(matrix_[l * n + j]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

Spill spill(const GridState& state) {
    const std::size_t n = state.size();
    auto amps = state.amplitudes();
    double inside = 0.0, outside = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double w = std::norm(amps[j]);
        (outside_central(long(j) - long(n / 2), n) ? outside : inside) += w;
    }
    Spill result;
    result.position = outside / (inside + outside);

    ComplexVector f(amps.begin(), amps.end());
    fft_forward(f);
    inside = outside = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double w = std::norm(f[k]);
        (outside_central(fft_frequency(k, n), n) ? outside : inside) += w;
    }
    result.momentum = outside / (inside + outside);
    return result;
}

Spill spill(const DensityState& state) {
    return density_pass(state.grid(), state.frame(), state.matrix()).spill;
}

Cumulants compute_moments(const GridState& state, double spill_threshold) {
    const auto& g = state.grid();
    const std::size_t n = g.n;
    auto amps = state.amplitudes();
    check_finite(amps, "non-finite amplitudes");

    double norm = 0.0, mean_xi = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double w = std::norm(amps[j]);
        norm += w;
        mean_xi += w * g.coordinate(j);
    }
    if (!(norm > 0.0)) throw SimulationError("state has zero norm");
    mean_xi /= norm;

    ComplexVector f(amps.begin(), amps.end());
    fft_forward(f);
    double fnorm = 0.0, mean_q = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double w = std::norm(f[k]);
        fnorm += w;
        mean_q += w * g.momentum(k);
    }
    mean_q /= fnorm;

    Spill s = spill(state);
    if (s.worst() > spill_threshold) throw SimulationError("state leaking off grid");

    // Q phi and Q^2 phi with Q the centred momentum operator
    ComplexVector q1(n), q2(n);
    Cumulants c;
    for (std::size_t k = 0; k < n; ++k) {
        double dq = g.momentum(k) - mean_q;
        q1[k] = dq * f[k];
        q2[k] = dq * dq * f[k];
        double w = std::norm(f[k]);
        c.v_p += dq * dq * w;
        c.k_ppp += dq * dq * dq * w;
    }
    c.v_p /= fnorm;
    c.k_ppp /= fnorm;
    fft_inverse(q1);
    fft_inverse(q2);

    cplx xq{}, xxq{}, xqq{};
    for (std::size_t j = 0; j < n; ++j) {
        double a = g.coordinate(j) - mean_xi;
        double w = std::norm(amps[j]);
        c.v_x += a * a * w;
        c.k_xxx += a * a * a * w;
        cplx ca = std::conj(amps[j]);
        xq += ca * a * q1[j];
        xxq += ca * a * a * q1[j];
        xqq += ca * a * q2[j];
    }
    c.v_x /= norm;
    c.k_xxx /= norm;
    c.c_xp = xq.real() / norm;
    c.k_xxp = xxq.real() / norm;
    c.k_xpp = xqq.real() / norm;
    c.x = state.frame().x + mean_xi;
    c.p = state.frame().p + mean_q;
    return c;
}

Cumulants compute_moments(const DensityState& state, double spill_threshold) {
    return analyze(state.grid(), state.frame(), state.matrix(), spill_threshold).cumulants;
}

DensityAnalysis analyze(const GridSpec& grid, const Frame& frame, std::span<const cplx> matrix,
                        double spill_threshold) {
    check_finite(matrix, "non-finite density matrix");
    const DensityPass d = density_pass(grid, frame, matrix);
    if (d.spill.worst() > spill_threshold) throw SimulationError("state leaking off grid");
    return {d.cumulants, d.spill};
}

GridState shift_frame(GridState state, Frame target) {
    const auto g = state.grid();
    const Frame from = state.frame();
    const double a = target.x - from.x;
    const double b = target.p - from.p;
    ComplexVector amps = std::move(state).take_amplitudes();
    if (a != 0.0) {
        fft_forward(amps);
        for (std::size_t k = 0; k < g.n; ++k) amps[k] *= std::polar(1.0, g.momentum(k) * a / g.hbar);
        fft_inverse(amps);
    }
    if (b != 0.0)
        for (std::size_t j = 0; j < g.n; ++j)
            amps[j] *= std::polar(1.0, -b * g.coordinate(j) / g.hbar);
    return GridState(g, target, std::move(amps));
}

DensityState shift_frame(DensityState state, Frame target) {
    const auto g = state.grid();
    const std::size_t n = g.n;
    const Frame from = state.frame();
    const double a = target.x - from.x;
    const double b = target.p - from.p;
    ComplexVector m = std::move(state).take_matrix();
    if (a != 0.0) {
        std::vector<cplx> phase(n);
        for (std::size_t k = 0; k < n; ++k) phase[k] = std::polar(1.0, g.momentum(k) * a / g.hbar);
        fft2_forward(m, n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = 0; l < n; ++l) m[k * n + l] *= phase[k] * phase[l];
        fft2_inverse(m, n);
    }
    if (b != 0.0) {
        std::vector<cplx> phase(n);
        for (std::size_t j = 0; j < n; ++j) phase[j] = std::polar(1.0, -b * g.coordinate(j) / g.hbar);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) m[j * n + l] *= phase[j] * std::conj(phase[l]);
    }
    return DensityState(g, target, std::move(m));
}

GridState recenter(GridState state) {
    Cumulants c = compute_moments(state, 1.0);
    return shift_frame(std::move(state), Frame{c.x, c.p});
}

DensityState recenter(DensityState state) {
    Cumulants c = compute_moments(state, 1.0);
    return shift_frame(std::move(state), Frame{c.x, c.p});
}

GridState normalized(GridState state) {
    const double nrm = state.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw SimulationError("cannot normalize state");
    const auto g = state.grid();
    const auto f = state.frame();
    ComplexVector amps = std::move(state).take_amplitudes();
    const double scale = 1.0 / std::sqrt(nrm);
    for (auto& a : amps) a *= scale;
    return GridState(g, f, std::move(amps));
}

DensityState normalized(DensityState state) {
    const double tr = state.trace();
    if (!(tr > 0.0) || !std::isfinite(tr)) throw SimulationError("cannot normalize density matrix");
    const auto g = state.grid();
    const auto f = state.frame();
    ComplexVector m = std::move(state).take_matrix();
    const double scale = 1.0 / tr;
    for (auto& a : m) a *= scale;
    return DensityState(g, f, std::move(m));
}

DensityState density_from_pure(const GridState& state) {
    const std::size_t n = state.size();
    auto amps = state.amplitudes();
    ComplexVector m(n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) m[j * n + l] = amps[j] * std::conj(amps[l]);
    return DensityState(state.grid(), state.frame(), std::move(m));
}

GridState make_gaussian_state(const GridSpec& grid, double x, double p, double v_x, double c_xp) {
    grid.validate();
    if (!(v_x > 0.0)) throw ConfigError("position variance must be positive");
    const double a = 1.0 / (4.0 * v_x);
    const double b = c_xp / (2.0 * grid.hbar * v_x);
    ComplexVector amps(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
        double xi = grid.coordinate(j);
        amps[j] = std::exp(cplx(-a * xi * xi, b * xi * xi));
    }
    return normalized(GridState(grid, Frame{x, p}, std::move(amps)));
}

DensityState make_gaussian_density(const GridSpec& grid, double x, double p, double v_x,
                                   double v_p, double c_xp) {
    grid.validate();
    const double det = v_x * v_p - c_xp * c_xp;
    const double h2 = grid.hbar * grid.hbar;
    if (!(v_x > 0.0) || det < 0.25 * h2 * (1.0 - 1e-12))
        throw ConfigError("covariance violates the uncertainty relation");
    const double beta = c_xp / (2.0 * grid.hbar * v_x);
    const double gamma = det / (2.0 * h2 * v_x);
    const std::size_t n = grid.n;
    ComplexVector m(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
            double r = 0.5 * (grid.coordinate(j) + grid.coordinate(l));
            double s = grid.coordinate(j) - grid.coordinate(l);
            m[j * n + l] = std::exp(cplx(-r * r / (2.0 * v_x) - gamma * s * s, 2.0 * beta * r * s));
        }
    }
    return normalized(DensityState(grid, Frame{x, p}, std::move(m)));
}

GridSpec size_grid(double sigma_x, double sigma_p, double hbar, double span_sigmas,
                   std::size_t min_points, std::size_t max_points) {
    if (!(sigma_x > 0.0) || !(sigma_p > 0.0)) throw ConfigError("grid sizing needs positive widths");
    const double needed = span_sigmas * span_sigmas * sigma_x * sigma_p / (kTwoPi * hbar);
    std::size_t n = std::bit_ceil(std::max<std::size_t>(min_points, std::size_t(std::ceil(needed))));
    if (n > max_points)
        throw ConfigError("state needs more than " + std::to_string(max_points) + " grid points");
    GridSpec g;
    g.n = n;
    g.hbar = hbar;
    g.dx = std::sqrt(kTwoPi * hbar * sigma_x / (double(n) * sigma_p));
    return g;
}

}  // namespace qcl
