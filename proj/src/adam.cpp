#include "dreco/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dreco/kernels.hpp"

namespace dreco {

AdamState AdamState::init_like(std::span<const Matrix* const> params, AdamConfig cfg) {
    AdamState st;
    st.cfg = cfg;
    for (const Matrix* p : params) {
        st.mom1.emplace_back(p->rows, p->cols);
        st.mom2.emplace_back(p->rows, p->cols);
    }
    return st;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.mom1.size()) {
        throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(*grads[i]) || !params[i]->same_shape(state.mom1[i])) {
            throw std::invalid_argument("adam_step: shape mismatch at parameter " + std::to_string(i));
        }
    }
    state.step += 1;
    const double c1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        kernels::active().adam_update(params[i]->data.data(), grads[i]->data.data(),
                                      state.mom1[i].data.data(), state.mom2[i].data.data(),
                                      params[i]->size(), state.cfg.lr, state.cfg.beta1,
                                      state.cfg.beta2, state.cfg.eps, c1, c2);
    }
}

}  // namespace dreco
