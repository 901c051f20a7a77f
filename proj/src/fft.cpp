#include "qcl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace qcl {
namespace {

enum class PlanKind { Forward1d, Inverse1d, Forward2d, Inverse2d, ColumnsForward };

struct PlanCache {
    std::mutex mutex;
    std::map<std::tuple<PlanKind, std::size_t, bool>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

fftw_plan make_plan(PlanKind kind, std::size_t n, fftw_complex* buffer, unsigned flags) {
    const int ni = static_cast<int>(n);
    switch (kind) {
        case PlanKind::Forward1d:
            return fftw_plan_dft_1d(ni, buffer, buffer, FFTW_FORWARD, flags);
        case PlanKind::Inverse1d:
            return fftw_plan_dft_1d(ni, buffer, buffer, FFTW_BACKWARD, flags);
        case PlanKind::Forward2d:
            return fftw_plan_dft_2d(ni, ni, buffer, buffer, FFTW_FORWARD, flags);
        case PlanKind::Inverse2d:
            return fftw_plan_dft_2d(ni, ni, buffer, buffer, FFTW_BACKWARD, flags);
        case PlanKind::ColumnsForward: {
            int len[] = {ni};
            return fftw_plan_many_dft(1, len, ni, buffer, nullptr, ni, 1, buffer, nullptr, ni, 1,
                                      FFTW_FORWARD, flags);
        }
    }
    return nullptr;
}

fftw_plan plan_for(PlanKind kind, std::size_t n, std::size_t total, bool aligned) {
    auto& c = cache();
    std::lock_guard lock(c.mutex);
    auto key = std::make_tuple(kind, n, aligned);
    if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;

    // FFTW_ESTIMATE never touches the planning buffer's contents.
    auto* buffer = fftw_alloc_complex(total);
    unsigned flags = FFTW_ESTIMATE | (aligned ? 0u : FFTW_UNALIGNED);
    fftw_plan plan = make_plan(kind, n, buffer, flags);
    fftw_free(buffer);
    if (!plan) throw std::runtime_error("FFTW plan creation failed");
    c.plans.emplace(key, plan);
    return plan;
}

void execute(PlanKind kind, std::span<cplx> data, std::size_t n) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    bool aligned = fftw_alignment_of(reinterpret_cast<double*>(ptr)) == 0;
    fftw_execute_dft(plan_for(kind, n, data.size(), aligned), ptr, ptr);
}

void check_square(std::span<cplx> data, std::size_t n) {
    if (data.size() != n * n) throw std::invalid_argument("matrix transform needs n*n elements");
}

}  // namespace

void fft_forward(std::span<cplx> data) { execute(PlanKind::Forward1d, data, data.size()); }

void fft_inverse(std::span<cplx> data) {
    execute(PlanKind::Inverse1d, data, data.size());
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

void fft2_forward(std::span<cplx> data, std::size_t n) {
    check_square(data, n);
    execute(PlanKind::Forward2d, data, n);
}

void fft2_inverse(std::span<cplx> data, std::size_t n) {
    check_square(data, n);
    execute(PlanKind::Inverse2d, data, n);
    const double scale = 1.0 / static_cast<double>(n * n);
    for (auto& v : data) v *= scale;
}

void fft_columns_forward(std::span<cplx> data, std::size_t n) {
    check_square(data, n);
    execute(PlanKind::ColumnsForward, data, n);
}

}  // namespace qcl
