#include "hsg/tensor/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace hsg {

namespace {
// Training churns through multi-megabyte temporaries; served via mmap each
// one costs a syscall plus kernel page-zeroing. Keeping large blocks on the
// heap lets glibc recycle them.
[[maybe_unused]] const bool g_heap_tuned = [] {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    return true;
}();
}  // namespace

Shape::Shape(std::initializer_list<std::int64_t> dims) {
    if (dims.size() > 4) throw std::invalid_argument("Shape: at most 4 dimensions");
    for (std::int64_t d : dims) {
        if (d < 0) throw std::invalid_argument("Shape: negative dimension");
        d_[static_cast<std::size_t>(n_++)] = d;
    }
}

std::int64_t Shape::numel() const {
    std::int64_t n = 1;
    for (int i = 0; i < n_; ++i) n *= d_[static_cast<std::size_t>(i)];
    return n_ == 0 ? 0 : n;
}

bool Shape::operator==(const Shape& o) const {
    if (n_ != o.n_) return false;
    for (int i = 0; i < n_; ++i)
        if (d_[static_cast<std::size_t>(i)] != o.d_[static_cast<std::size_t>(i)]) return false;
    return true;
}

std::string Shape::str() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < n_; ++i) os << (i ? "," : "") << (*this)[i];
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape s)
    : buf_(new real_t[static_cast<std::size_t>(s.numel())]()),  // zero-filled
      shape_(s) {}

Tensor Tensor::uninitialized(Shape s) {
    Tensor t;
    t.buf_ = std::shared_ptr<real_t[]>(new real_t[static_cast<std::size_t>(s.numel())]);
    t.shape_ = s;
    return t;
}

Tensor Tensor::full(Shape s, real_t v) {
    Tensor t = uninitialized(s);
    t.fill(v);
    return t;
}

Tensor Tensor::from(Shape s, std::vector<real_t> values) {
    if (static_cast<std::int64_t>(values.size()) != s.numel())
        throw std::invalid_argument("Tensor::from: value count does not match shape " + s.str());
    Tensor t = uninitialized(s);
    std::copy(values.begin(), values.end(), t.data());
    return t;
}

Tensor Tensor::randn(Rng& rng, Shape s) {
    Tensor t(s);
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.normal();
    return t;
}

Tensor Tensor::uniform(Rng& rng, Shape s, real_t lo, real_t hi) {
    Tensor t(s);
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

Tensor Tensor::reshaped(Shape s) const {
    if (s.numel() != numel())
        throw std::invalid_argument("Tensor::reshaped: numel mismatch " + shape_.str() + " -> " + s.str());
    Tensor t;
    t.buf_ = buf_;
    t.shape_ = s;
    return t;
}

Tensor Tensor::clone() const {
    if (!defined()) return {};
    Tensor t = uninitialized(shape_);
    std::copy(data(), data() + numel(), t.data());
    return t;
}

void Tensor::fill(real_t v) {
    for (std::int64_t i = 0; i < numel(); ++i) buf_[static_cast<std::size_t>(i)] = v;
}

void Tensor::copy_from(const Tensor& src) {
    if (!(src.shape() == shape_))
        throw std::invalid_argument("Tensor::copy_from: shape mismatch " + src.shape().str() + " vs " +
                                    shape_.str());
    std::copy(src.data(), src.data() + numel(), data());
}

bool Tensor::all_finite() const {
    for (std::int64_t i = 0; i < numel(); ++i)
        if (!std::isfinite(buf_[static_cast<std::size_t>(i)])) return false;
    return true;
}

real_t Tensor::max_abs() const {
    real_t m = 0;
    for (std::int64_t i = 0; i < numel(); ++i)
        m = std::max(m, std::abs(buf_[static_cast<std::size_t>(i)]));
    return m;
}

}  // namespace hsg
