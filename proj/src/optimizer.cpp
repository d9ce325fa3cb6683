#include "rsnet/optimizer.hpp"

#include <cmath>

#include "rsnet/common.hpp"

namespace rsnet {

AmsGrad::AmsGrad(std::vector<ad::Param*> params, AmsGradConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    if (params_.empty()) throw ValidationError("optimizer needs at least one parameter");
    if (cfg_.lr <= 0.0) throw ValidationError("optimizer learning rate must be positive");
    if (cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0)
        throw ValidationError("optimizer momentum factors must lie in [0, 1)");
    if (cfg_.eps <= 0.0) throw ValidationError("optimizer epsilon must be positive");
    for (const ad::Param* p : params_) {
        if (p == nullptr) throw ValidationError("optimizer given a null parameter");
        m_.emplace_back(p->value.rows(), p->value.cols());
        v_.emplace_back(p->value.rows(), p->value.cols());
        v_max_.emplace_back(p->value.rows(), p->value.cols());
    }
}

void AmsGrad::step(double lr) {
    if (lr < 0.0) lr = cfg_.lr;
    ++t_;
    const double m_corr = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    for (std::size_t p = 0; p < params_.size(); ++p) {
        ad::Param& param = *params_[p];
        if (param.grad.rows() != param.value.rows() || param.grad.cols() != param.value.cols())
            throw ValidationError("parameter '" + param.name +
                                  "' has no gradient of matching shape");
        for (std::size_t i = 0; i < param.value.rows(); ++i)
            for (std::size_t j = 0; j < param.value.cols(); ++j) {
                const double g = param.grad(i, j);
                if (!std::isfinite(g))
                    throw NumericalError("non-finite gradient in parameter '" + param.name +
                                         "'");
                m_[p](i, j) = cfg_.beta1 * m_[p](i, j) + (1.0 - cfg_.beta1) * g;
                v_[p](i, j) = cfg_.beta2 * v_[p](i, j) + (1.0 - cfg_.beta2) * g * g;
                if (v_[p](i, j) > v_max_[p](i, j)) v_max_[p](i, j) = v_[p](i, j);
                const double m_hat = m_[p](i, j) / m_corr;
                param.value(i, j) -= lr * m_hat / (std::sqrt(v_max_[p](i, j)) + cfg_.eps);
            }
    }
}

} // namespace rsnet
