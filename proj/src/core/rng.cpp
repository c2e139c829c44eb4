#include "hsg/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hsg {

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::uniform_int: n must be > 0");
    // Rejection sampling over the largest multiple of n.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = eng_();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::state() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
}

void Rng::set_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    if (is.fail()) throw std::runtime_error("Rng::set_state: malformed state string");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    return splitmix64(seed ^ fnv1a(label));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64(splitmix64(seed) ^ counter);
}

Rng& RngStream::sub(const std::string& name) {
    auto it = subs_.find(name);
    if (it == subs_.end()) {
        it = subs_.emplace(name, Rng(derive_seed(seed_, name))).first;
    }
    return it->second;
}

Rng RngStream::keyed(std::string_view name, std::uint64_t counter) const {
    return Rng(derive_seed(derive_seed(seed_, name), counter));
}

std::map<std::string, std::string> RngStream::state() const {
    std::map<std::string, std::string> st;
    for (const auto& [name, rng] : subs_) st[name] = rng.state();
    return st;
}

void RngStream::set_state(const std::map<std::string, std::string>& st) {
    for (const auto& [name, s] : st) sub(name).set_state(s);
}

}  // namespace hsg
