#pragma once

#include <cstddef>
#include <span>

#include "qcl/fft.hpp"

namespace qcl {

/// Phase-space point the grid is attached to. A state stored on the grid as phi(xi)
/// represents psi(x) = exp(i p (x - x_c) / hbar) phi(x - x_c).
struct Frame {
    double x = 0.0;
    double p = 0.0;
};

/// Sampling of a single spatial dimension: n points at spacing dx centred on the frame.
/// Point j sits at xi_j = (j - n/2) dx; momenta follow the FFT ordering.
struct GridSpec {
    std::size_t n = 512;
    double dx = 1e-4;
    double hbar = 1.0;

    double length() const { return static_cast<double>(n) * dx; }
    double dq() const;
    double coordinate(std::size_t j) const {
        return (static_cast<double>(j) - static_cast<double>(n / 2)) * dx;
    }
    double momentum(std::size_t k) const;
    void validate() const;
};

/// First, second and third cumulants of position and momentum. Mixed products are
/// Weyl (symmetrically) ordered.
struct Cumulants {
    double x = 0.0;
    double p = 0.0;
    double v_x = 0.0;
    double v_p = 0.0;
    double c_xp = 0.0;
    double k_xxx = 0.0;
    double k_xxp = 0.0;
    double k_xpp = 0.0;
    double k_ppp = 0.0;

    /// v_x v_p - c_xp^2, bounded below by hbar^2/4 for any quantum state.
    double uncertainty_product() const { return v_x * v_p - c_xp * c_xp; }
};

/// Pure state on a moving grid.
class GridState {
public:
    GridState(GridSpec grid, Frame frame, ComplexVector amplitudes);

    const GridSpec& grid() const { return grid_; }
    const Frame& frame() const { return frame_; }
    std::size_t size() const { return grid_.n; }
    double dx() const { return grid_.dx; }
    double hbar() const { return grid_.hbar; }
    std::span<const cplx> amplitudes() const { return amplitudes_; }

    /// L2 norm squared, sum |phi_j|^2 dx.
    double norm() const;
    /// Same quantity evaluated in the momentum representation.
    double momentum_norm() const;

    ComplexVector take_amplitudes() && { return std::move(amplitudes_); }

private:
    GridSpec grid_;
    Frame frame_;
    ComplexVector amplitudes_;
};

/// Density matrix sampled on an n x n grid, row-major rho(xi_j, xi_l), with the same
/// frame convention as GridState applied to both indices. Tr rho = sum_j rho_jj dx.
class DensityState {
public:
    DensityState(GridSpec grid, Frame frame, ComplexVector matrix);

    const GridSpec& grid() const { return grid_; }
    const Frame& frame() const { return frame_; }
    std::size_t size() const { return grid_.n; }
    double dx() const { return grid_.dx; }
    double hbar() const { return grid_.hbar; }
    std::span<const cplx> matrix() const { return matrix_; }
    cplx operator()(std::size_t j, std::size_t l) const { return matrix_[j * grid_.n + l]; }

    double trace() const;
    /// Tr rho^2 (with dx weights).
    double purity() const;
    /// max |rho_jl - conj(rho_lj)| relative to the largest diagonal element.
    double hermiticity_error() const;
    /// Smallest eigenvalue of the discretized operator (rho_jl dx). O(n^3).
    double min_eigenvalue() const;

    ComplexVector take_matrix() && { return std::move(matrix_); }

private:
    GridSpec grid_;
    Frame frame_;
    ComplexVector matrix_;
};

/// Probability outside the central 80% of the grid, in position and in momentum.
struct Spill {
    double position = 0.0;
    double momentum = 0.0;
    double worst() const { return position > momentum ? position : momentum; }
};

inline constexpr double kDefaultSpillThreshold = 1e-8;

Spill spill(const GridState& state);
Spill spill(const DensityState& state);

/// All cumulants of a pure state; momentum moments are taken spectrally.
/// Throws SimulationError("state leaking off grid") if the spill exceeds the threshold.
Cumulants compute_moments(const GridState& state, double spill_threshold = kDefaultSpillThreshold);
struct DensityAnalysis {
    Cumulants cumulants;
    Spill spill;
};
/// compute_moments and spill from a single transform of a row-major n x n matrix.
DensityAnalysis analyze(const GridSpec& grid, const Frame& frame, std::span<const cplx> matrix,
                        double spill_threshold = kDefaultSpillThreshold);
Cumulants compute_moments(const DensityState& state,
                          double spill_threshold = kDefaultSpillThreshold);

/// Move the frame onto the state's current means without changing the physical state.
GridState recenter(GridState state);
DensityState recenter(DensityState state);

/// Move the frame to an explicit phase-space point.
GridState shift_frame(GridState state, Frame target);
DensityState shift_frame(DensityState state, Frame target);

/// Rescale so that the norm (trace) is exactly one.
GridState normalized(GridState state);
DensityState normalized(DensityState state);

DensityState density_from_pure(const GridState& state);

/// Minimum-uncertainty Gaussian with the given position variance and xp covariance,
/// centred on (x, p). The momentum variance follows from purity.
GridState make_gaussian_state(const GridSpec& grid, double x, double p, double v_x,
                              double c_xp = 0.0);

/// Gaussian (generally mixed) density matrix with the given covariance. Requires
/// v_x v_p - c_xp^2 >= hbar^2/4.
DensityState make_gaussian_density(const GridSpec& grid, double x, double p, double v_x,
                                   double v_p, double c_xp);

/// Smallest power of two n >= min_points such that the grid covers span_sigmas standard
/// deviations in both position and momentum; dx balances the two margins.
GridSpec size_grid(double sigma_x, double sigma_p, double hbar, double span_sigmas,
                   std::size_t min_points = 64, std::size_t max_points = 4096);

}  // namespace qcl
