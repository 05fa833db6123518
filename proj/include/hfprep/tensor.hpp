#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "hfprep/error.hpp"

namespace hfprep {

// Dense row-major tensor. Activations use (N,C,H,W); conv weights use
// (O,I,Kh,Kw). grad, when allocated, always matches shape.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;
    std::vector<T> grad;

    TensorT() = default;
    explicit TensorT(std::vector<int> s, T fill = T(0)) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(numel_of(shape)), fill);
    }

    static int64_t numel_of(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) n *= d;
        return n;
    }
    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int dim(int i) const { return shape.at(static_cast<size_t>(i)); }
    int ndim() const { return static_cast<int>(shape.size()); }

    void alloc_grad() { grad.assign(data.size(), T(0)); }
    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
    }
    bool has_grad() const { return !grad.empty(); }
};

using Tensor = TensorT<float>;

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "(";
    for (size_t i = 0; i < s.size(); ++i)
        out += (i ? "," : "") + std::to_string(s[i]);
    return out + ")";
}

template <typename T>
void require_shape(const TensorT<T>& t, const std::vector<int>& expected,
                   const std::string& what) {
    if (t.shape != expected)
        throw InvalidArgument(what + ": shape " + shape_str(t.shape) + " expected " +
                              shape_str(expected));
}

} // namespace hfprep
