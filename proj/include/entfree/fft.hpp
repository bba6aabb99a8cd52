#pragma once

// Thin RAII wrapper over FFTW plans. Plans are created with FFTW_ESTIMATE so
// the algorithm choice, and therefore the floating-point result, does not
// depend on timing measurements.

#include <mutex>

#include "entfree/numerics.hpp"

struct fftw_plan_s;

namespace entfree {

class FourierPlan {
public:
    // 1D transform of length n (cols == 1) or 2D transform of a row-major
    // rows x cols array.
    FourierPlan(Index rows, Index cols);
    ~FourierPlan();
    FourierPlan(const FourierPlan&) = delete;
    FourierPlan& operator=(const FourierPlan&) = delete;
    FourierPlan(FourierPlan&& other) noexcept;
    FourierPlan& operator=(FourierPlan&& other) noexcept;

    // Unnormalised, in place. `data` must hold rows * cols elements.
    void forward(Complex* data) const;
    void inverse(Complex* data) const;

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

private:
    Index rows_ = 0;
    Index cols_ = 0;
    fftw_plan_s* forward_ = nullptr;
    fftw_plan_s* inverse_ = nullptr;
};

}  // namespace entfree
