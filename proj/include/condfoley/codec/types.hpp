// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "condfoley/nn/array.hpp"

namespace condfoley::codec {

// T' x F' integer code image; raster order is time-major with frequency
// fastest, matching the row-major reading of the grid.
struct CodeGrid {
    std::vector<int> indices;
    int grid_t = 12;
    int grid_f = 5;

    int at(int t, int f) const { return indices[static_cast<size_t>(t) * grid_f + f]; }
    int& at(int t, int f) { return indices[static_cast<size_t>(t) * grid_f + f]; }
    int size() const { return grid_t * grid_f; }
    bool operator==(const CodeGrid& o) const = default;
};

std::vector<int> raster_flatten(const CodeGrid& g);
CodeGrid raster_unflatten(const std::vector<int>& seq, int grid_t, int grid_f);

struct Codebook {
    nn::NdArray entries;  // [K, d]
    int size() const { return entries.dim(0); }
    int dim() const { return entries.dim(1); }
};

// Exhaustive nearest-entry quantization; squared L2 accumulated in double,
// ties broken toward the lowest index.
struct QuantizeResult {
    nn::NdArray quantized;  // same shape as input, every cell an exact entry
    CodeGrid codes;
};
QuantizeResult quantize(const nn::NdArray& z_hat /* [T',F',d] */, const Codebook& cb);

// Row-wise nearest-entry indices for a [n, d] matrix (training hot path).
std::vector<int> nearest_codes(const nn::NdArray& rows, const nn::NdArray& entries);

}  // namespace condfoley::codec
