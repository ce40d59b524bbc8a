// SPDX-License-Identifier: Apache-2.0
#include "condfoley/codec/types.hpp"

#include "condfoley/common.hpp"

namespace condfoley::codec {

std::vector<int> raster_flatten(const CodeGrid& g) {
    require(static_cast<int>(g.indices.size()) == g.grid_t * g.grid_f,
            "raster_flatten: inconsistent grid");
    return g.indices;  // storage is already raster order (t-major, f fastest)
}

CodeGrid raster_unflatten(const std::vector<int>& seq, int grid_t, int grid_f) {
    require(static_cast<int>(seq.size()) == grid_t * grid_f,
            "raster_unflatten: sequence length does not match grid");
    CodeGrid g;
    g.grid_t = grid_t;
    g.grid_f = grid_f;
    g.indices = seq;
    return g;
}

std::vector<int> nearest_codes(const nn::NdArray& rows, const nn::NdArray& entries) {
    const int n = rows.dim(0);
    const int d = rows.dim(1);
    const int K = entries.dim(0);
    require(entries.dim(1) == d, "nearest_codes: dimension mismatch");
    std::vector<int> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const float* z = &rows[static_cast<int64_t>(i) * d];
        double best = 0.0;
        int best_k = 0;
        for (int k = 0; k < K; ++k) {
            const float* c = &entries[static_cast<int64_t>(k) * d];
            double dist = 0.0;
            for (int j = 0; j < d; ++j) {
                const double diff = static_cast<double>(z[j]) - c[j];
                dist += diff * diff;
            }
            if (k == 0 || dist < best) {
                best = dist;
                best_k = k;
            }
        }
        out[static_cast<size_t>(i)] = best_k;
    }
    return out;
}

QuantizeResult quantize(const nn::NdArray& z_hat, const Codebook& cb) {
    require(z_hat.ndim() == 3, "quantize: latent must be [T', F', d]");
    const int T = z_hat.dim(0), F = z_hat.dim(1), d = z_hat.dim(2);
    require(d == cb.dim(), "quantize: embedding dim does not match codebook");

    nn::NdArray rows = z_hat;
    rows.shape = {T * F, d};
    const auto ids = nearest_codes(rows, cb.entries);

    QuantizeResult r;
    r.codes.grid_t = T;
    r.codes.grid_f = F;
    r.codes.indices = ids;
    r.quantized = nn::NdArray({T, F, d});
    for (int i = 0; i < T * F; ++i)
        std::copy_n(&cb.entries[static_cast<int64_t>(ids[static_cast<size_t>(i)]) * d], d,
                    &r.quantized[static_cast<int64_t>(i) * d]);
    return r;
}

}  // namespace condfoley::codec
