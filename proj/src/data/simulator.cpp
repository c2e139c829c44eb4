#include "hsg/data/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hsg/tensor/kernels.hpp"

namespace hsg {

namespace {

struct Rgb {
    real_t r, g, b;
};

constexpr Rgb kBackground{0.93, 0.84, 0.90};   // source-stain tissue tone
constexpr Rgb kNucleus{0.40, 0.24, 0.52};
constexpr Rgb kCapsule{0.97, 0.96, 0.97};      // bright ring (white space)
constexpr Rgb kTuft{0.80, 0.57, 0.70};
constexpr real_t kRingInner = 0.80;            // normalized radius where the ring starts

struct Ellipse {
    real_t cx, cy, a, b, cos_t, sin_t;

    real_t rho2(real_t x, real_t y) const {
        const real_t dx = x - cx, dy = y - cy;
        const real_t u = (dx * cos_t + dy * sin_t) / a;
        const real_t v = (-dx * sin_t + dy * cos_t) / b;
        return u * u + v * v;
    }
};

void draw_disk(std::vector<real_t>& r, std::vector<real_t>& g, std::vector<real_t>& b,
               std::int64_t s, real_t cx, real_t cy, real_t rad, const Rgb& color) {
    const std::int64_t x0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(cx - rad - 1));
    const std::int64_t x1 = std::min(s - 1, static_cast<std::int64_t>(cx + rad + 1));
    const std::int64_t y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(cy - rad - 1));
    const std::int64_t y1 = std::min(s - 1, static_cast<std::int64_t>(cy + rad + 1));
    for (std::int64_t y = y0; y <= y1; ++y)
        for (std::int64_t x = x0; x <= x1; ++x) {
            const real_t dx = real_t(x) - cx, dy = real_t(y) - cy;
            if (dx * dx + dy * dy > rad * rad) continue;
            const std::size_t i = static_cast<std::size_t>(y * s + x);
            r[i] = color.r;
            g[i] = color.g;
            b[i] = color.b;
        }
}

// expected-count draw: floor(mu) dots plus one with the fractional probability
std::int64_t sample_count(real_t mu, Rng& rng) {
    const real_t fl = std::floor(mu);
    return static_cast<std::int64_t>(fl) + (rng.bernoulli(mu - fl) ? 1 : 0);
}

}  // namespace

RenderedPatch render_base_patch(std::int64_t size, bool positive, const StainSimulatorParams& params,
                                Rng& rng) {
    const std::int64_t s = size;
    const std::size_t npix = static_cast<std::size_t>(s * s);
    std::vector<real_t> r(npix), g(npix), b(npix);

    // Smooth tissue texture from blurred noise, normalized to [-1, 1].
    std::vector<real_t> noise(npix), tex(npix);
    for (auto& v : noise) v = rng.uniform(-1, 1);
    kernels::gaussian_blur(s, s, real_t(s) / 16, noise.data(), tex.data());
    real_t tmax = 1e-12;
    for (real_t v : tex) tmax = std::max(tmax, std::abs(v));
    const real_t amp = params.texture_amplitude;
    for (std::size_t i = 0; i < npix; ++i) {
        const real_t t = tex[i] / tmax * amp;
        r[i] = kBackground.r + t * real_t(0.9);
        g[i] = kBackground.g + t * real_t(1.1);
        b[i] = kBackground.b + t * real_t(0.9);
    }

    Ellipse ell{};
    SegMask mask(s, s);
    if (positive) {
        const real_t jitter = real_t(s) / 8;
        ell.cx = real_t(s) / 2 + rng.uniform(-jitter, jitter);
        ell.cy = real_t(s) / 2 + rng.uniform(-jitter, jitter);
        ell.a = rng.uniform(0.22, 0.38) * real_t(s);
        ell.b = rng.uniform(0.22, 0.38) * real_t(s);
        const real_t theta = rng.uniform(0, std::numbers::pi);
        ell.cos_t = std::cos(theta);
        ell.sin_t = std::sin(theta);
        for (std::int64_t y = 0; y < s; ++y)
            for (std::int64_t x = 0; x < s; ++x) {
                const real_t rho2 = ell.rho2(real_t(x), real_t(y));
                if (rho2 > 1) continue;
                mask.at(y, x) = 1;
                const std::size_t i = static_cast<std::size_t>(y * s + x);
                if (rho2 >= kRingInner * kRingInner) {
                    r[i] = kCapsule.r;
                    g[i] = kCapsule.g;
                    b[i] = kCapsule.b;
                } else {
                    const real_t t = tex[i] / tmax * amp * real_t(1.3);
                    r[i] = kTuft.r + t;
                    g[i] = kTuft.g + t * real_t(1.2);
                    b[i] = kTuft.b + t;
                }
            }
    } else if (rng.bernoulli(0.5)) {
        // faint bright region so negatives are not uniformly textured
        const real_t cx = rng.uniform(0, real_t(s)), cy = rng.uniform(0, real_t(s));
        const real_t rad = rng.uniform(0.15, 0.4) * real_t(s);
        for (std::int64_t y = 0; y < s; ++y)
            for (std::int64_t x = 0; x < s; ++x) {
                const real_t dx = real_t(x) - cx, dy = real_t(y) - cy;
                if (dx * dx + dy * dy > rad * rad) continue;
                const std::size_t i = static_cast<std::size_t>(y * s + x);
                r[i] = std::min(real_t(1), r[i] + real_t(0.04));
                g[i] = std::min(real_t(1), g[i] + real_t(0.04));
                b[i] = std::min(real_t(1), b[i] + real_t(0.04));
            }
    }

    // Scattered nuclei over the background (kept off the structure so the
    // capsule ring stays crisp), denser dots inside the tuft for positives.
    const real_t area_scale = real_t(s * s) / real_t(48 * 48);
    const std::int64_t n_bg = sample_count(params.nuclei_density * area_scale, rng);
    for (std::int64_t k = 0; k < n_bg; ++k) {
        const real_t x = rng.uniform(0, real_t(s)), y = rng.uniform(0, real_t(s));
        const real_t rad = rng.uniform(1.0, 2.2);
        if (positive && ell.rho2(x, y) <= real_t(1.15)) continue;
        draw_disk(r, g, b, s, x, y, rad, kNucleus);
    }
    if (positive) {
        const std::int64_t n_in = sample_count(params.nuclei_density * area_scale * real_t(0.9), rng);
        std::int64_t placed = 0, attempts = 0;
        while (placed < n_in && attempts < n_in * 20) {
            ++attempts;
            const real_t x = rng.uniform(0, real_t(s)), y = rng.uniform(0, real_t(s));
            if (ell.rho2(x, y) > kRingInner * kRingInner * real_t(0.9)) continue;
            draw_disk(r, g, b, s, x, y, rng.uniform(0.8, 1.8), kNucleus);
            ++placed;
        }
    }

    Tensor t({3, s, s});
    for (std::size_t i = 0; i < npix; ++i) {
        t[static_cast<std::int64_t>(i)] = std::clamp(r[i], real_t(0), real_t(1)) * 2 - 1;
        t[static_cast<std::int64_t>(i + npix)] = std::clamp(g[i], real_t(0), real_t(1)) * 2 - 1;
        t[static_cast<std::int64_t>(i + 2 * npix)] = std::clamp(b[i], real_t(0), real_t(1)) * 2 - 1;
    }
    RenderedPatch out;
    out.image = ImagePatch(t);
    out.mask = std::move(mask);
    out.positive = positive;
    return out;
}

ImagePatch apply_stain(const ImagePatch& base, const StainDomainParams& domain, real_t stain_jitter,
                       Rng* rng) {
    const std::int64_t h = base.height(), w = base.width();
    const std::int64_t hw = h * w;
    real_t gain[3] = {1, 1, 1}, shift[3] = {0, 0, 0};
    if (rng && stain_jitter > 0) {
        for (auto& v : gain) v = rng->uniform(1 - stain_jitter, 1 + stain_jitter);
        for (auto& v : shift) v = rng->uniform(-stain_jitter, stain_jitter) * real_t(0.5);
    }
    Tensor out({3, h, w});
    const real_t* src = base.pixels.data();
    const std::array<real_t, 9>& m = domain.matrix;
    const std::array<real_t, 3>& o = domain.offset;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < hw; ++i) {
        const real_t u0 = (src[i] + 1) / 2;
        const real_t u1 = (src[i + hw] + 1) / 2;
        const real_t u2 = (src[i + 2 * hw] + 1) / 2;
        real_t v[3] = {m[0] * u0 + m[1] * u1 + m[2] * u2 + o[0],
                       m[3] * u0 + m[4] * u1 + m[5] * u2 + o[1],
                       m[6] * u0 + m[7] * u1 + m[8] * u2 + o[2]};
        for (int c = 0; c < 3; ++c) {
            const real_t j = std::clamp(v[c] * gain[c] + shift[c], real_t(0), real_t(1));
            out[c * hw + i] = j * 2 - 1;
        }
    }
    return ImagePatch(out);
}

}  // namespace hsg
