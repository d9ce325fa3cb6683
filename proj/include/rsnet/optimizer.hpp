#pragma once

#include <cstdint>
#include <vector>

#include "rsnet/autodiff.hpp"
#include "rsnet/mat.hpp"

namespace rsnet {

struct AmsGradConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// ADAM variant that normalizes by the running MAXIMUM of the second-moment
// estimate, which keeps the effective step size monotonically bounded.
// Bias correction is applied to the first moment; the max recurrence
// replaces the second moment's correction.
class AmsGrad {
  public:
    AmsGrad(std::vector<ad::Param*> params, AmsGradConfig cfg = {});

    // One update from the gradients currently stored in the parameters.
    // The learning-rate override (scheduling hook) falls back to cfg.lr.
    void step(double lr = -1.0);

    std::int64_t steps_taken() const { return t_; }
    const Mat& first_moment(std::size_t i) const { return m_[i]; }
    const Mat& second_moment(std::size_t i) const { return v_[i]; }
    const Mat& second_moment_max(std::size_t i) const { return v_max_[i]; }
    std::size_t size() const { return params_.size(); }

  private:
    std::vector<ad::Param*> params_;
    AmsGradConfig cfg_;
    std::int64_t t_ = 0;
    std::vector<Mat> m_, v_, v_max_;
};

} // namespace rsnet
