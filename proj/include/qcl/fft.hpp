#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace qcl {

using cplx = std::complex<double>;

/// Allocator giving 64-byte aligned storage so FFTW can use its SIMD kernels.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() noexcept = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), alignment));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using ComplexVector = std::vector<cplx, AlignedAllocator<cplx>>;

// In-place discrete Fourier transforms. Forward transforms are unnormalized,
// inverse transforms include the 1/n factor so that inverse(forward(v)) == v.
// Plans are created once per size with FFTW_ESTIMATE and cached; estimate
// plans keep results bitwise reproducible between runs.
void fft_forward(std::span<cplx> data);
void fft_inverse(std::span<cplx> data);

// Two-dimensional n x n transforms of a row-major matrix.
void fft2_forward(std::span<cplx> data, std::size_t n);
void fft2_inverse(std::span<cplx> data, std::size_t n);

// Transform every column of a row-major n x n matrix (i.e. along the first index).
void fft_columns_forward(std::span<cplx> data, std::size_t n);

/// FFT frequency index of bin k for an n-point transform: k for k < n/2, k - n otherwise.
inline long fft_frequency(std::size_t k, std::size_t n) {
    return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

}  // namespace qcl
