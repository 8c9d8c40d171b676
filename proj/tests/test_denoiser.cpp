#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dreco/denoiser.hpp"
#include "dreco/errors.hpp"
#include "dreco/rng.hpp"

using namespace dreco;

namespace {

// Naive per-element re-implementation of the forward map. No shared code
// with the library path: explicit loops, no kernels.
std::vector<std::vector<double>> naive_forward(const DenoiserParams& p,
                                               const Matrix& x_t,
                                               const Matrix& guidance,
                                               const std::vector<int>& t_rows) {
    const int n = p.n_items;
    const int h = p.hidden;
    const int dt = p.d_time;
    const std::size_t batch = x_t.rows;
    std::vector<std::vector<double>> out(batch, std::vector<double>(n, 0.0));
    for (std::size_t r = 0; r < batch; ++r) {
        std::vector<double> input(2 * n + dt);
        double norm_sq = 0.0;
        for (int c = 0; c < n; ++c) {
            norm_sq += guidance.at(r, c) * guidance.at(r, c);
        }
        const double norm = std::sqrt(norm_sq);
        for (int c = 0; c < n; ++c) {
            input[c] = norm > 0.0 ? guidance.at(r, c) / norm : guidance.at(r, c);
        }
        for (int c = 0; c < n; ++c) {
            input[n + c] = x_t.at(r, c);
        }
        for (int i = 0; i < dt / 2; ++i) {
            const double freq = std::pow(10000.0, -static_cast<double>(i) / (dt / 2.0));
            input[2 * n + 2 * i] = std::sin(t_rows[r] * freq);
            input[2 * n + 2 * i + 1] = std::cos(t_rows[r] * freq);
        }
        std::vector<double> hidden(h);
        for (int j = 0; j < h; ++j) {
            double acc = p.b1.at(0, j);
            for (std::size_t c = 0; c < input.size(); ++c) {
                acc += input[c] * p.w1.at(c, j);
            }
            hidden[j] = std::tanh(acc);
        }
        for (int c = 0; c < n; ++c) {
            double acc = p.b2.at(0, c);
            for (int j = 0; j < h; ++j) {
                acc += hidden[j] * p.w2.at(j, c);
            }
            out[r][c] = acc;
        }
    }
    return out;
}

DenoiserParams random_params(RngState& rng, int n, int h, int dt) {
    DenoiserParams p = denoiser_init(rng, n, h, dt);
    // biases get random values too so gradient checks exercise them
    for (double& v : p.b1.data) v = 0.1 * (2.0 * rng.next_unit() - 1.0);
    for (double& v : p.b2.data) v = 0.1 * (2.0 * rng.next_unit() - 1.0);
    return p;
}

double loss_of(const DenoiserParams& p, const Matrix& x_t, const Matrix& guidance,
               const std::vector<int>& t_rows, const Matrix& target) {
    const Matrix eps_hat = denoiser_forward(p, x_t, guidance, t_rows);
    return mse_loss(eps_hat, target).loss;
}

}  // namespace

TEST_CASE("forward: all-zero params give a zero heatmap") {
    DenoiserParams p;
    p.n_items = 5;
    p.hidden = 3;
    p.d_time = 4;
    p.w1 = Matrix(p.input_width(), 3);
    p.b1 = Matrix(1, 3);
    p.w2 = Matrix(3, 5);
    p.b2 = Matrix(1, 5);
    RngState rng(1);
    const Matrix x = gaussian(rng, 2, 5);
    const Matrix g = gaussian(rng, 2, 5);
    const Matrix out = denoiser_forward(p, x, g, 2);
    CHECK(out == Matrix(2, 5));
}

TEST_CASE("forward: zero guidance row equals the explicit null token") {
    RngState rng(3);
    DenoiserParams p = random_params(rng, 6, 8, 4);
    const Matrix x = gaussian(rng, 1, 6);
    const Matrix zero_g(1, 6);
    const Matrix a = denoiser_forward(p, x, zero_g, 3);
    const Matrix b = denoiser_forward(p, x, Matrix(1, 6), 3);
    CHECK(a == b);
}

TEST_CASE("forward matches the naive per-element oracle") {
    RngState rng(5);
    DenoiserParams p = random_params(rng, 7, 11, 4);
    Matrix x = gaussian(rng, 3, 7);
    Matrix g(3, 7);
    for (double& v : g.data) v = rng.next_unit() < 0.5 ? 1.0 : 0.0;
    const std::vector<int> t_rows = {1, 2, 3};
    const Matrix got = denoiser_forward(p, x, g, t_rows);
    const auto want = naive_forward(p, x, g, t_rows);
    for (std::size_t r = 0; r < 3; ++r) {
        for (int c = 0; c < 7; ++c) {
            CHECK(got.at(r, c) == doctest::Approx(want[r][c]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward: guidance scaling invariance") {
    RngState rng(7);
    DenoiserParams p = random_params(rng, 5, 6, 4);
    const Matrix x = gaussian(rng, 2, 5);
    Matrix g(2, 5);
    g.data = {1, 0, 1, 1, 0, 0, 1, 0, 0, 1};
    const Matrix base = denoiser_forward(p, x, g, 2);
    for (double c : {2.0, 0.5, 4.0}) {  // power-of-two scales are exact in fp
        Matrix scaled = g;
        scale_inplace(scaled, c);
        CHECK(denoiser_forward(p, x, scaled, 2) == base);
    }
    Matrix scaled = g;
    scale_inplace(scaled, 3.0);
    const Matrix close = denoiser_forward(p, x, scaled, 2);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(close.data[i] == doctest::Approx(base.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("forward: NaN input is a hard error") {
    RngState rng(9);
    DenoiserParams p = random_params(rng, 4, 4, 4);
    Matrix x(1, 4);
    x.data[2] = std::nan("");
    CHECK_THROWS_AS(denoiser_forward(p, x, Matrix(1, 4), 1), NumericError);
}

TEST_CASE("backward: zero output gradient gives zero parameter gradients") {
    RngState rng(11);
    DenoiserParams p = random_params(rng, 5, 7, 4);
    const Matrix x = gaussian(rng, 2, 5);
    const Matrix g = gaussian(rng, 2, 5);
    ForwardCache cache;
    denoiser_forward(p, x, g, 2, &cache);
    const DenoiserGrads grads = denoiser_backward(p, cache, Matrix(2, 5));
    CHECK(grads.w1 == Matrix(p.input_width(), 7));
    CHECK(grads.b1 == Matrix(1, 7));
    CHECK(grads.w2 == Matrix(7, 5));
    CHECK(grads.b2 == Matrix(1, 5));
}

TEST_CASE("backward: linear in the output gradient") {
    RngState rng(13);
    DenoiserParams p = random_params(rng, 5, 7, 4);
    const Matrix x = gaussian(rng, 3, 5);
    const Matrix g = gaussian(rng, 3, 5);
    ForwardCache cache;
    denoiser_forward(p, x, g, 1, &cache);
    const Matrix d = gaussian(rng, 3, 5);
    Matrix d2 = d;
    scale_inplace(d2, 2.0);
    const DenoiserGrads g1 = denoiser_backward(p, cache, d);
    const DenoiserGrads g2 = denoiser_backward(p, cache, d2);
    // doubling is an exponent shift; equality is exact
    Matrix w1_doubled = g1.w1;
    scale_inplace(w1_doubled, 2.0);
    CHECK(g2.w1 == w1_doubled);
    Matrix b2_doubled = g1.b2;
    scale_inplace(b2_doubled, 2.0);
    CHECK(g2.b2 == b2_doubled);
}

TEST_CASE("backward: stale cache is a hard error") {
    RngState rng(15);
    DenoiserParams p = random_params(rng, 5, 7, 4);
    ForwardCache cache;
    CHECK_THROWS_AS(denoiser_backward(p, cache, Matrix(2, 5)), std::invalid_argument);

    const Matrix x = gaussian(rng, 2, 5);
    denoiser_forward(p, x, Matrix(2, 5), 1, &cache);
    DenoiserParams other = random_params(rng, 5, 9, 4);  // different hidden width
    CHECK_THROWS_AS(denoiser_backward(other, cache, Matrix(2, 5)), std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
    RngState rng(17);
    const int instances = 6;  // the acceptance suite runs the full 20
    double worst = 0.0;
    for (int inst = 0; inst < instances; ++inst) {
        const int n = 2 + static_cast<int>(rng.next_unit() * 8);
        const int h = 2 + static_cast<int>(rng.next_unit() * 14);
        const int b = 1 + static_cast<int>(rng.next_unit() * 3);
        DenoiserParams p = random_params(rng, n, h, 4);
        const Matrix x = gaussian(rng, b, n);
        Matrix g(b, n);
        for (double& v : g.data) v = rng.next_unit() < 0.5 ? 1.0 : 0.0;
        std::vector<int> t_rows(b);
        for (int& t : t_rows) t = 1 + static_cast<int>(rng.next_unit() * 10);
        const Matrix target = gaussian(rng, b, n);

        ForwardCache cache;
        const Matrix eps_hat = denoiser_forward(p, x, g, t_rows, &cache);
        const LossResult loss = mse_loss(eps_hat, target);
        const DenoiserGrads grads = denoiser_backward(p, cache, loss.d_eps_hat);

        Matrix* param_mats[] = {&p.w1, &p.b1, &p.w2, &p.b2};
        const Matrix* grad_mats[] = {&grads.w1, &grads.b1, &grads.w2, &grads.b2};
        const double h_step = 1e-5;
        for (int pi = 0; pi < 4; ++pi) {
            Matrix& mat = *param_mats[pi];
            for (std::size_t i = 0; i < mat.size(); i += std::max<std::size_t>(1, mat.size() / 17)) {
                const double saved = mat.data[i];
                mat.data[i] = saved + h_step;
                const double up = loss_of(p, x, g, t_rows, target);
                mat.data[i] = saved - h_step;
                const double down = loss_of(p, x, g, t_rows, target);
                mat.data[i] = saved;
                const double fd = (up - down) / (2.0 * h_step);
                const double an = grad_mats[pi]->data[i];
                const double err = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
                worst = std::max(worst, err);
            }
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("init: deterministic, bounded, and with the right spread") {
    RngState a(21), b(21);
    const DenoiserParams p1 = denoiser_init(a, 40, 120, 8);
    const DenoiserParams p2 = denoiser_init(b, 40, 120, 8);
    CHECK(p1.w1 == p2.w1);
    CHECK(p1.w2 == p2.w2);
    CHECK(p1.b1 == Matrix(1, 120));
    CHECK(p1.b2 == Matrix(1, 40));

    const double limit1 = std::sqrt(6.0 / static_cast<double>(p1.input_width() + 120));
    double sumsq = 0.0;
    for (double v : p1.w1.data) {
        CHECK(std::abs(v) <= limit1);
        sumsq += v * v;
    }
    // uniform(-a, a) has variance a^2/3; w1 has ~10^4 draws
    const double var = sumsq / static_cast<double>(p1.w1.size());
    const double want = limit1 * limit1 / 3.0;
    CHECK(std::abs(var - want) <= 0.1 * want);
}

TEST_CASE("parameter count stays at the two-layer budget") {
    RngState rng(23);
    const int n = 9, h = 5, dt = 6;
    const DenoiserParams p = denoiser_init(rng, n, h, dt);
    const std::size_t expected = (2 * n + dt) * h + h + h * n + n;
    CHECK(p.param_count() == expected);
}

TEST_CASE("mse_loss: worked values and symmetry") {
    Matrix a(1, 2), b(1, 2);
    CHECK(mse_loss(a, b).loss == 0.0);
    CHECK(mse_loss(a, b).d_eps_hat == Matrix(1, 2));

    a.data = {1.0, 1.0};
    const LossResult r = mse_loss(a, b);
    CHECK(r.loss == 1.0);
    CHECK(r.d_eps_hat.data[0] == 1.0);
    CHECK(r.d_eps_hat.data[1] == 1.0);

    // invariance under a joint permutation of both inputs
    Matrix x(1, 3), y(1, 3);
    x.data = {0.5, -2.0, 1.25};
    y.data = {1.0, 0.25, -0.5};
    Matrix xp(1, 3), yp(1, 3);
    xp.data = {1.25, 0.5, -2.0};
    yp.data = {-0.5, 1.0, 0.25};
    CHECK(mse_loss(x, y).loss == mse_loss(xp, yp).loss);

    CHECK_THROWS_AS(mse_loss(Matrix(1, 2), Matrix(2, 1)), std::invalid_argument);
}

TEST_CASE("time embedding: bounded and distinct over a long horizon") {
    const int dt = 16;
    std::vector<std::vector<double>> embs;
    embs.reserve(10000);
    for (int t = 1; t <= 10000; ++t) {
        std::vector<double> e = time_embedding(t, dt);
        for (double v : e) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
        embs.push_back(std::move(e));
    }
    std::sort(embs.begin(), embs.end());
    CHECK(std::adjacent_find(embs.begin(), embs.end()) == embs.end());
}

TEST_CASE("checkpoint: save/load round-trips freshly initialized params bitwise") {
    RngState rng(29);
    const DenoiserParams p = denoiser_init(rng, 12, 9, 4);
    const std::string path = "/tmp/dreco_test_ckpt.bin";
    save_checkpoint(path, p, 37);
    const Checkpoint ck = load_checkpoint(path);
    CHECK(ck.schedule_steps == 37);
    CHECK(ck.params.n_items == 12);
    CHECK(ck.params.hidden == 9);
    CHECK(ck.params.d_time == 4);
    CHECK(ck.params.w1 == p.w1);
    CHECK(ck.params.b1 == p.b1);
    CHECK(ck.params.w2 == p.w2);
    CHECK(ck.params.b2 == p.b2);
}
