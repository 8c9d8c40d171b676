#include "dreco/denoiser.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dreco/errors.hpp"
#include "dreco/kernels.hpp"

namespace dreco {

namespace {

void validate_dims(int n_items, int hidden, int d_time) {
    if (n_items < 1 || hidden < 1) {
        throw std::invalid_argument("denoiser: N and H must be >= 1");
    }
    if (d_time < 2 || d_time % 2 != 0) {
        throw std::invalid_argument("denoiser: d_time must be even and >= 2");
    }
}

double quantize_f32(double v) {
    return static_cast<double>(static_cast<float>(v));
}

}  // namespace

std::vector<double> time_embedding(int t, int d_time) {
    if (d_time < 2 || d_time % 2 != 0) {
        throw std::invalid_argument("time_embedding: d_time must be even and >= 2");
    }
    std::vector<double> emb(d_time);
    const double half = d_time / 2;
    for (int i = 0; i < d_time / 2; ++i) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / half);
        emb[2 * i] = std::sin(t * freq);
        emb[2 * i + 1] = std::cos(t * freq);
    }
    return emb;
}

Matrix denoiser_forward(const DenoiserParams& params, const Matrix& x_t, const Matrix& guidance,
                        std::span<const int> t_rows, ForwardCache* cache) {
    const auto n = static_cast<std::size_t>(params.n_items);
    if (x_t.cols != n || guidance.cols != n || !x_t.same_shape(guidance)) {
        throw std::invalid_argument("denoiser_forward: x_t/guidance must be B x N");
    }
    if (t_rows.size() != x_t.rows) {
        throw std::invalid_argument("denoiser_forward: one timestep per row required");
    }
    require_finite(x_t, "denoiser_forward x_t");
    require_finite(guidance, "denoiser_forward guidance");

    const std::size_t batch = x_t.rows;
    const std::size_t in_width = params.input_width();

    Matrix input(batch, in_width);
    for (std::size_t r = 0; r < batch; ++r) {
        double* dst = input.row(r);
        const double* grow = guidance.row(r);
        const double sq = kernels::active().dot(grow, grow, n);
        if (sq > 0.0) {
            kernels::active().scale(1.0 / std::sqrt(sq), grow, dst, n);
        } else {
            std::memcpy(dst, grow, n * sizeof(double));
        }
        std::memcpy(dst + n, x_t.row(r), n * sizeof(double));
        const std::vector<double> emb = time_embedding(t_rows[r], params.d_time);
        std::memcpy(dst + 2 * n, emb.data(), emb.size() * sizeof(double));
    }

    Matrix hidden = matmul(input, params.w1);
    add_row_vector(hidden, params.b1);
    tanh_inplace(hidden);

    Matrix eps_hat = matmul(hidden, params.w2);
    add_row_vector(eps_hat, params.b2);

    if (cache != nullptr) {
        cache->input = std::move(input);
        cache->hidden = hidden;
        cache->valid = true;
    }
    return eps_hat;
}

Matrix denoiser_forward(const DenoiserParams& params, const Matrix& x_t, const Matrix& guidance,
                        int t, ForwardCache* cache) {
    std::vector<int> t_rows(x_t.rows, t);
    return denoiser_forward(params, x_t, guidance, t_rows, cache);
}

DenoiserGrads denoiser_backward(const DenoiserParams& params, const ForwardCache& cache,
                                const Matrix& d_eps_hat) {
    if (!cache.valid) {
        throw std::invalid_argument("denoiser_backward: cache not produced by a forward pass");
    }
    const bool consistent = cache.input.cols == params.input_width() &&
                            cache.hidden.cols == static_cast<std::size_t>(params.hidden) &&
                            cache.input.rows == cache.hidden.rows &&
                            d_eps_hat.rows == cache.input.rows &&
                            d_eps_hat.cols == static_cast<std::size_t>(params.n_items);
    if (!consistent) {
        throw std::invalid_argument("denoiser_backward: cache does not match params/output gradient");
    }

    DenoiserGrads g;
    g.w2 = matmul_tn(cache.hidden, d_eps_hat);
    g.b2 = column_sums(d_eps_hat);

    Matrix d_hidden = matmul_nt(d_eps_hat, params.w2);
    // tanh'(a) = 1 - tanh(a)^2, and cache.hidden already holds tanh(a).
    for (std::size_t i = 0; i < d_hidden.size(); ++i) {
        const double h = cache.hidden.data[i];
        d_hidden.data[i] *= 1.0 - h * h;
    }

    g.w1 = matmul_tn(cache.input, d_hidden);
    g.b1 = column_sums(d_hidden);
    return g;
}

DenoiserParams denoiser_init(RngState& rng, int n_items, int hidden, int d_time) {
    validate_dims(n_items, hidden, d_time);
    DenoiserParams p;
    p.n_items = n_items;
    p.hidden = hidden;
    p.d_time = d_time;
    p.w1 = Matrix(p.input_width(), hidden);
    p.b1 = Matrix(1, hidden);
    p.w2 = Matrix(hidden, n_items);
    p.b2 = Matrix(1, n_items);

    auto fill_glorot = [&rng](Matrix& w, std::size_t fan_in, std::size_t fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : w.data) {
            v = quantize_f32((2.0 * rng.next_unit() - 1.0) * limit);
        }
    };
    fill_glorot(p.w1, p.input_width(), hidden);
    fill_glorot(p.w2, hidden, n_items);
    return p;
}

LossResult mse_loss(const Matrix& eps_hat, const Matrix& eps_true) {
    if (!eps_hat.same_shape(eps_true)) {
        throw std::invalid_argument("mse_loss: shape mismatch");
    }
    const double count = static_cast<double>(eps_hat.size());
    LossResult res;
    res.loss = kernels::active().sumsq_diff(eps_hat.data.data(), eps_true.data.data(), eps_hat.size()) / count;
    res.d_eps_hat = axpby(2.0 / count, eps_hat, -2.0 / count, eps_true);
    return res;
}

namespace {

constexpr char kMagic[7] = {'D', 'R', 'C', 'F', 'G', '1', '\0'};

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v & 0xFF),
                            static_cast<unsigned char>((v >> 8) & 0xFF),
                            static_cast<unsigned char>((v >> 16) & 0xFF),
                            static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char buf[4];
    is.read(reinterpret_cast<char*>(buf), 4);
    return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
           (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

void write_f32_array(std::ostream& os, const Matrix& m) {
    for (double v : m.data) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_u32(os, bits);
    }
}

void read_f32_array(std::istream& is, Matrix& m) {
    for (double& v : m.data) {
        const std::uint32_t bits = read_u32(is);
        float f;
        std::memcpy(&f, &bits, 4);
        v = static_cast<double>(f);
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const DenoiserParams& params, int schedule_steps) {
    // Write-then-rename keeps the previous checkpoint intact on interruption.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw DataError("cannot write checkpoint: " + tmp);
        }
        os.write(kMagic, sizeof(kMagic));
        write_u32(os, static_cast<std::uint32_t>(params.n_items));
        write_u32(os, static_cast<std::uint32_t>(params.hidden));
        write_u32(os, static_cast<std::uint32_t>(params.d_time));
        write_u32(os, static_cast<std::uint32_t>(schedule_steps));
        write_f32_array(os, params.w1);
        write_f32_array(os, params.b1);
        write_f32_array(os, params.w2);
        write_f32_array(os, params.b2);
        if (!os) {
            throw DataError("short write for checkpoint: " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw DataError("cannot open checkpoint: " + path);
    }
    char magic[7];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a dreco checkpoint: " + path);
    }
    Checkpoint ck;
    const auto n = static_cast<int>(read_u32(is));
    const auto h = static_cast<int>(read_u32(is));
    const auto dt = static_cast<int>(read_u32(is));
    ck.schedule_steps = static_cast<int>(read_u32(is));
    validate_dims(n, h, dt);
    ck.params.n_items = n;
    ck.params.hidden = h;
    ck.params.d_time = dt;
    ck.params.w1 = Matrix(ck.params.input_width(), h);
    ck.params.b1 = Matrix(1, h);
    ck.params.w2 = Matrix(h, n);
    ck.params.b2 = Matrix(1, n);
    read_f32_array(is, ck.params.w1);
    read_f32_array(is, ck.params.b1);
    read_f32_array(is, ck.params.w2);
    read_f32_array(is, ck.params.b2);
    if (!is) {
        throw DataError("truncated checkpoint: " + path);
    }
    return ck;
}

}  // namespace dreco
