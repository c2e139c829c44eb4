#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "hsg/core/rng.hpp"

namespace hsg {

/// Project-wide scalar. Double keeps the verification surface (loss oracles,
/// finite-difference gradient checks) in one precision with training.
using real_t = double;

/// Dense shape, up to 4 dimensions (vectors, matrices, NCHW images).
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<std::int64_t> dims);

    int ndim() const { return n_; }
    std::int64_t operator[](int i) const { return d_[static_cast<std::size_t>(i)]; }
    std::int64_t numel() const;
    bool operator==(const Shape& o) const;
    bool operator!=(const Shape& o) const { return !(*this == o); }
    std::string str() const;

private:
    std::array<std::int64_t, 4> d_{};
    int n_ = 0;
};

/// Dense, contiguous, row-major tensor with shared storage. Copies are
/// shallow; use clone() for a deep copy.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape s);

    static Tensor zeros(Shape s) { return Tensor(s); }
    /// Allocation without the zero fill; every element must be written.
    static Tensor uninitialized(Shape s);
    static Tensor full(Shape s, real_t v);
    static Tensor from(Shape s, std::vector<real_t> values);
    static Tensor scalar(real_t v) { return full({1}, v); }
    static Tensor randn(Rng& rng, Shape s);
    static Tensor uniform(Rng& rng, Shape s, real_t lo, real_t hi);

    bool defined() const { return buf_ != nullptr; }
    const Shape& shape() const { return shape_; }
    std::int64_t numel() const { return shape_.numel(); }

    real_t* data() { return buf_.get(); }
    const real_t* data() const { return buf_.get(); }

    real_t& operator[](std::int64_t i) { return buf_[static_cast<std::size_t>(i)]; }
    real_t operator[](std::int64_t i) const { return buf_[static_cast<std::size_t>(i)]; }

    /// View with a new shape over the same storage. numel must match.
    Tensor reshaped(Shape s) const;
    Tensor clone() const;

    void fill(real_t v);
    void copy_from(const Tensor& src);  // shape-checked deep copy into this buffer

    bool all_finite() const;
    real_t max_abs() const;

private:
    std::shared_ptr<real_t[]> buf_;
    Shape shape_;
};

}  // namespace hsg
