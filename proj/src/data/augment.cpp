#include "hsg/data/augment.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hsg/tensor/kernels.hpp"

namespace hsg {

namespace {

// 2x3 affine on (x, y) coordinates.
struct Affine {
    real_t a = 1, b = 0, c = 0;  // x' = a x + b y + c
    real_t d = 0, e = 1, f = 0;  // y' = d x + e y + f

    static Affine identity() { return {}; }

    Affine then(const Affine& o) const {  // o applied after this
        Affine r;
        r.a = o.a * a + o.b * d;
        r.b = o.a * b + o.b * e;
        r.c = o.a * c + o.b * f + o.c;
        r.d = o.d * a + o.e * d;
        r.e = o.d * b + o.e * e;
        r.f = o.d * c + o.e * f + o.f;
        return r;
    }
};

Affine about_center(real_t cx, real_t cy, real_t a, real_t b, real_t d, real_t e) {
    // T(c) . M . T(-c)
    Affine r;
    r.a = a;
    r.b = b;
    r.d = d;
    r.e = e;
    r.c = cx - (a * cx + b * cy);
    r.f = cy - (d * cx + e * cy);
    return r;
}

}  // namespace

std::pair<ImagePatch, SegMask> augment(const ImagePatch& x, const SegMask& m,
                                       const AugmentationConfig& cfg, Rng& rng) {
    if (x.height() != m.h || x.width() != m.w)
        throw std::invalid_argument("augment: image and mask dims differ");
    if (!rng.bernoulli(cfg.pipeline_prob)) return {x, m};

    const std::int64_t h = x.height(), w = x.width();
    const real_t cx = real_t(w - 1) / 2, cy = real_t(h - 1) / 2;

    // Compose the inverse geometric map (destination -> source).
    Affine inv = Affine::identity();
    bool any_geom = false;

    if (rng.bernoulli(cfg.op_prob)) {  // rotation
        const real_t deg = rng.uniform(cfg.rotation_deg[0], cfg.rotation_deg[1]);
        const real_t t = -deg * std::numbers::pi / 180;  // inverse rotation
        inv = inv.then(about_center(cx, cy, std::cos(t), -std::sin(t), std::sin(t), std::cos(t)));
        any_geom = true;
    }
    if (rng.bernoulli(cfg.op_prob)) {  // shift
        const real_t dx = rng.uniform(cfg.shift_px[0], cfg.shift_px[1]);
        const real_t dy = rng.uniform(cfg.shift_px[0], cfg.shift_px[1]);
        Affine t;
        t.c = -dx;
        t.f = -dy;
        inv = inv.then(t);
        any_geom = true;
    }
    if (rng.bernoulli(cfg.op_prob)) {  // magnification
        const real_t mg = rng.uniform(cfg.magnification[0], cfg.magnification[1]);
        inv = inv.then(about_center(cx, cy, 1 / mg, 0, 0, 1 / mg));
        any_geom = true;
    }
    if (cfg.hflip && rng.bernoulli(cfg.op_prob)) {
        inv = inv.then(about_center(cx, cy, -1, 0, 0, 1));
        any_geom = true;
    }
    if (cfg.vflip && rng.bernoulli(cfg.op_prob)) {
        inv = inv.then(about_center(cx, cy, 1, 0, 0, -1));
        any_geom = true;
    }

    std::vector<real_t> disp_x, disp_y;
    if (rng.bernoulli(cfg.op_prob) && cfg.elastic_sigma > 0) {  // elastic
        const real_t alpha = cfg.resolved_alpha(std::max(h, w));
        const std::size_t npix = static_cast<std::size_t>(h * w);
        std::vector<real_t> nx(npix), ny(npix);
        for (auto& v : nx) v = rng.uniform(-1, 1);
        for (auto& v : ny) v = rng.uniform(-1, 1);
        disp_x.resize(npix);
        disp_y.resize(npix);
        kernels::gaussian_blur(h, w, cfg.elastic_sigma, nx.data(), disp_x.data());
        kernels::gaussian_blur(h, w, cfg.elastic_sigma, ny.data(), disp_y.data());
        real_t mx = 1e-12;
        for (std::size_t i = 0; i < npix; ++i)
            mx = std::max({mx, std::abs(disp_x[i]), std::abs(disp_y[i])});
        for (std::size_t i = 0; i < npix; ++i) {
            disp_x[i] *= alpha / mx;
            disp_y[i] *= alpha / mx;
        }
        any_geom = true;
    }

    ImagePatch out_img = x;
    SegMask out_mask = m;

    if (any_geom) {
        std::vector<real_t> map_x(static_cast<std::size_t>(h * w));
        std::vector<real_t> map_y(static_cast<std::size_t>(h * w));
        for (std::int64_t y = 0; y < h; ++y)
            for (std::int64_t xx = 0; xx < w; ++xx) {
                const std::size_t i = static_cast<std::size_t>(y * w + xx);
                real_t sx = inv.a * real_t(xx) + inv.b * real_t(y) + inv.c;
                real_t sy = inv.d * real_t(xx) + inv.e * real_t(y) + inv.f;
                if (!disp_x.empty()) {
                    sx += disp_x[i];
                    sy += disp_y[i];
                }
                map_x[i] = sx;
                map_y[i] = sy;
            }
        Tensor warped({3, h, w});
        kernels::warp_bilinear(3, h, w, x.pixels.data(), map_x.data(), map_y.data(), warped.data());
        out_img = ImagePatch(warped);

        Tensor field = m.to_tensor();
        Tensor wfield({h, w});
        kernels::warp_bilinear(1, h, w, field.data(), map_x.data(), map_y.data(), wfield.data());
        for (std::int64_t i = 0; i < h * w; ++i)
            out_mask.labels[static_cast<std::size_t>(i)] = wfield[i] > real_t(0.5) ? 1 : 0;
    }

    // Photometric ops in [0,1] space, image only.
    bool bright = rng.bernoulli(cfg.op_prob);
    const real_t bval = bright ? rng.uniform(cfg.brightness[0], cfg.brightness[1]) : 0;
    bool contr = rng.bernoulli(cfg.op_prob);
    const real_t cval = contr ? rng.uniform(cfg.contrast[0], cfg.contrast[1]) : 1;
    bool noise = rng.bernoulli(cfg.op_prob);
    const real_t nsig = noise ? rng.uniform(cfg.noise_sigma[0], cfg.noise_sigma[1]) : 0;
    if (bright || contr || noise) {
        Tensor t = out_img.pixels.clone();
        for (std::int64_t i = 0; i < t.numel(); ++i) {
            real_t u = (t[i] + 1) / 2;
            u = real_t(0.5) + cval * (u - real_t(0.5));
            u += bval;
            if (noise) u += rng.normal() * nsig;
            t[i] = std::clamp(u, real_t(0), real_t(1)) * 2 - 1;
        }
        out_img = ImagePatch(t);
    }
    return {out_img, out_mask};
}

}  // namespace hsg
