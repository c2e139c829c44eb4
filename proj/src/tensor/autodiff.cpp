#include "hsg/tensor/autodiff.hpp"

#include <atomic>
#include <stdexcept>
#include <unordered_set>

#include "hsg/tensor/ops.hpp"

namespace hsg {

namespace {
std::atomic<std::uint64_t> g_uid{1};
}

Var::Var(Tensor value, bool requires_grad) {
    n_ = std::make_shared<detail::Node>();
    n_->value = std::move(value);
    n_->requires_grad = requires_grad;
    n_->uid = g_uid.fetch_add(1, std::memory_order_relaxed);
}

Var Var::make(Tensor value, std::vector<Var> parents, const char* op,
              std::function<std::vector<Var>(const Var&)> vjp) {
    return make_masked(std::move(value), std::move(parents), op,
                       [f = std::move(vjp)](const Var& up, const std::vector<char>&) {
                           return f(up);
                       });
}

Var Var::make_masked(Tensor value, std::vector<Var> parents, const char* op,
                     std::function<std::vector<Var>(const Var&, const std::vector<char>&)> vjp) {
    Var v;
    v.n_ = std::make_shared<detail::Node>();
    v.n_->value = std::move(value);
    v.n_->op = op;
    v.n_->uid = g_uid.fetch_add(1, std::memory_order_relaxed);
    bool rg = false;
    for (const auto& p : parents) rg = rg || p.requires_grad();
    v.n_->requires_grad = rg;
    if (rg) {
        v.n_->parents = std::move(parents);
        v.n_->vjp = std::move(vjp);
    }
    return v;
}

const Var& Gradients::at(const Var& v) const {
    auto it = g_.find(v.node());
    if (it == g_.end())
        throw std::runtime_error(std::string("Gradients::at: no gradient for node op=") + v.op());
    return it->second;
}

Tensor Gradients::tensor(const Var& v) const {
    auto it = g_.find(v.node());
    if (it == g_.end()) return Tensor::zeros(v.shape());
    return it->second.value();
}

namespace {

// Post-order over the requires_grad subgraph: parents before children.
void topo_order(const Var& root, std::vector<Var>& order) {
    std::unordered_set<const detail::Node*> seen;
    std::vector<std::pair<Var, std::size_t>> stack;
    stack.emplace_back(root, 0);
    seen.insert(root.node());
    while (!stack.empty()) {
        auto& [v, idx] = stack.back();
        auto& parents = v.node()->parents;
        if (idx < parents.size()) {
            const Var& p = parents[idx++];
            if (p.requires_grad() && !seen.count(p.node())) {
                seen.insert(p.node());
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(v);
            stack.pop_back();
        }
    }
}

}  // namespace

Gradients backward(const Var& root, std::span<const Var> wrt) {
    if (!root.requires_grad())
        throw std::invalid_argument("backward: root does not require gradients");

    std::vector<Var> order;
    topo_order(root, order);

    // needed[n]: n is a target or can reach a target through its parents.
    std::unordered_set<const detail::Node*> needed;
    if (wrt.empty()) {
        for (const auto& v : order) needed.insert(v.node());
    } else {
        std::unordered_set<const detail::Node*> targets;
        for (const auto& v : wrt) targets.insert(v.node());
        for (const auto& v : order) {  // parents come first
            bool need = targets.count(v.node()) != 0;
            if (!need)
                for (const auto& p : v.node()->parents)
                    if (needed.count(p.node())) {
                        need = true;
                        break;
                    }
            if (need) needed.insert(v.node());
        }
    }

    Gradients grads;
    auto& gmap = grads.map();
    gmap.emplace(root.node(), ops::constant(Tensor::full(root.shape(), 1)));

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Var& v = *it;
        auto git = gmap.find(v.node());
        if (git == gmap.end()) continue;  // unreachable from root seed
        if (!v.node()->vjp) continue;     // leaf
        std::vector<char> parent_needed(v.node()->parents.size(), 0);
        bool any_needed = false;
        for (std::size_t i = 0; i < v.node()->parents.size(); ++i) {
            const Var& p = v.node()->parents[i];
            if (p.requires_grad() && needed.count(p.node())) {
                parent_needed[i] = 1;
                any_needed = true;
            }
        }
        if (!any_needed) continue;
        std::vector<Var> pgrads = v.node()->vjp(git->second, parent_needed);
        if (pgrads.size() != v.node()->parents.size())
            throw std::logic_error(std::string("vjp arity mismatch in op ") + v.node()->op);
        for (std::size_t i = 0; i < pgrads.size(); ++i) {
            const Var& p = v.node()->parents[i];
            if (!p.requires_grad() || !needed.count(p.node())) continue;
            if (!pgrads[i].defined()) continue;
            auto pit = gmap.find(p.node());
            if (pit == gmap.end())
                gmap.emplace(p.node(), pgrads[i]);
            else
                pit->second = ops::add(pit->second, pgrads[i]);
        }
    }
    return grads;
}

Gradients backward(const Var& root) { return backward(root, {}); }

}  // namespace hsg
