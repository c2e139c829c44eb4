#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsg/tensor/tensor.hpp"

namespace hsg {

class Var;

namespace detail {
struct Node {
    Tensor value;
    std::vector<Var> parents;
    // One gradient per parent, given the upstream gradient and a mask saying
    // which parents actually need theirs (heavy ops skip unrequested
    // gradients; entries may be undefined Vars). Gradients are returned as
    // graph variables so that a gradient expression can itself be
    // differentiated (needed by the R1 penalty). Ops that can never sit under
    // a second differentiation may return eagerly computed constants.
    std::function<std::vector<Var>(const Var& upstream, const std::vector<char>& needed)> vjp;
    bool requires_grad = false;
    const char* op = "leaf";
    std::uint64_t uid = 0;
};
}  // namespace detail

/// Eager (define-by-run) autodiff variable: a shared handle to a value plus
/// the recipe that produced it.
class Var {
public:
    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    static Var make(Tensor value, std::vector<Var> parents, const char* op,
                    std::function<std::vector<Var>(const Var&)> vjp);
    static Var make_masked(
        Tensor value, std::vector<Var> parents, const char* op,
        std::function<std::vector<Var>(const Var&, const std::vector<char>&)> vjp);

    bool defined() const { return n_ != nullptr; }
    const Tensor& value() const { return n_->value; }
    const Shape& shape() const { return n_->value.shape(); }
    std::int64_t numel() const { return n_->value.numel(); }
    real_t scalar() const { return n_->value[0]; }
    bool requires_grad() const { return n_ && n_->requires_grad; }
    const char* op() const { return n_ ? n_->op : "undefined"; }
    detail::Node* node() const { return n_.get(); }

private:
    std::shared_ptr<detail::Node> n_;
};

/// Gradients keyed by node. Graph-valued so a second backward can run
/// through them.
class Gradients {
public:
    bool contains(const Var& v) const { return g_.count(v.node()) != 0; }
    const Var& at(const Var& v) const;
    /// Gradient value, or zeros of v's shape when v was unreachable.
    Tensor tensor(const Var& v) const;

    std::unordered_map<const detail::Node*, Var>& map() { return g_; }

private:
    std::unordered_map<const detail::Node*, Var> g_;
};

/// Reverse-mode sweep seeded with ones. When `wrt` is non-empty the sweep is
/// pruned to the subgraph that can reach one of those variables.
Gradients backward(const Var& root);
Gradients backward(const Var& root, std::span<const Var> wrt);

}  // namespace hsg
