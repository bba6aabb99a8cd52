#include "entfree/fft.hpp"

#include <utility>
#include <vector>

#include <fftw3.h>

#include "entfree/errors.hpp"

namespace entfree {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FourierPlan::FourierPlan(Index rows, Index cols) : rows_(rows), cols_(cols) {
    require(rows > 0 && cols > 0, "FourierPlan: dimensions must be positive");
    std::vector<Complex> scratch(static_cast<std::size_t>(rows * cols));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (cols == 1) {
        forward_ = fftw_plan_dft_1d(static_cast<int>(rows), as_fftw(scratch.data()),
                                    as_fftw(scratch.data()), FFTW_FORWARD, flags);
        inverse_ = fftw_plan_dft_1d(static_cast<int>(rows), as_fftw(scratch.data()),
                                    as_fftw(scratch.data()), FFTW_BACKWARD, flags);
    } else {
        forward_ = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                    as_fftw(scratch.data()), as_fftw(scratch.data()),
                                    FFTW_FORWARD, flags);
        inverse_ = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                    as_fftw(scratch.data()), as_fftw(scratch.data()),
                                    FFTW_BACKWARD, flags);
    }
    require(forward_ != nullptr && inverse_ != nullptr, "FourierPlan: FFTW planning failed");
}

FourierPlan::~FourierPlan() {
    if (forward_ == nullptr && inverse_ == nullptr) return;
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (inverse_) fftw_destroy_plan(inverse_);
}

FourierPlan::FourierPlan(FourierPlan&& other) noexcept
    : rows_(other.rows_),
      cols_(other.cols_),
      forward_(std::exchange(other.forward_, nullptr)),
      inverse_(std::exchange(other.inverse_, nullptr)) {}

FourierPlan& FourierPlan::operator=(FourierPlan&& other) noexcept {
    if (this != &other) {
        FourierPlan tmp(std::move(other));
        std::swap(rows_, tmp.rows_);
        std::swap(cols_, tmp.cols_);
        std::swap(forward_, tmp.forward_);
        std::swap(inverse_, tmp.inverse_);
    }
    return *this;
}

void FourierPlan::forward(Complex* data) const {
    fftw_execute_dft(forward_, as_fftw(data), as_fftw(data));
}

void FourierPlan::inverse(Complex* data) const {
    fftw_execute_dft(inverse_, as_fftw(data), as_fftw(data));
}

}  // namespace entfree
