#include "hsg/data/image_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hsg/tensor/kernels.hpp"

namespace hsg {

namespace {

std::uint8_t to_byte(real_t v) {
    const real_t u = (v + 1) * real_t(127.5);
    const real_t r = std::round(u);
    return static_cast<std::uint8_t>(std::min(real_t(255), std::max(real_t(0), r)));
}

real_t from_byte(std::uint8_t b) { return real_t(b) / real_t(127.5) - 1; }

void skip_ws_and_comments(std::istream& in) {
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
}

void read_header(std::istream& in, const std::string& path, const char* magic, std::int64_t& w,
                 std::int64_t& h) {
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != magic[0] || m1 != magic[1])
        throw std::runtime_error("image: '" + path + "' is not a " + magic + " file");
    std::int64_t maxval = 0;
    skip_ws_and_comments(in);
    in >> w;
    skip_ws_and_comments(in);
    in >> h;
    skip_ws_and_comments(in);
    in >> maxval;
    if (!in || w <= 0 || h <= 0 || maxval != 255)
        throw std::runtime_error("image: bad header in '" + path + "'");
    in.get();  // single whitespace before raster
}

}  // namespace

void write_ppm(const std::string& path, const ImagePatch& img) {
    if (img.pixels.shape().ndim() != 3 || img.pixels.shape()[0] != 3)
        throw std::invalid_argument("write_ppm: expected [3,H,W]");
    const std::int64_t h = img.height(), w = img.width();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open '" + path + "'");
    out << "P6\n" << w << " " << h << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w * 3));
    const real_t* r = img.pixels.data();
    const real_t* g = r + h * w;
    const real_t* b = g + h * w;
    for (std::int64_t y = 0; y < h; ++y) {
        for (std::int64_t x = 0; x < w; ++x) {
            row[static_cast<std::size_t>(3 * x + 0)] = to_byte(r[y * w + x]);
            row[static_cast<std::size_t>(3 * x + 1)] = to_byte(g[y * w + x]);
            row[static_cast<std::size_t>(3 * x + 2)] = to_byte(b[y * w + x]);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw std::runtime_error("write_ppm: write failed for '" + path + "'");
}

ImagePatch read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ppm: cannot open '" + path + "'");
    std::int64_t w = 0, h = 0;
    read_header(in, path, "P6", w, h);
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w * h * 3));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw std::runtime_error("read_ppm: truncated raster in '" + path + "'");
    Tensor t({3, h, w});
    real_t* r = t.data();
    real_t* g = r + h * w;
    real_t* b = g + h * w;
    for (std::int64_t i = 0; i < h * w; ++i) {
        r[i] = from_byte(raw[static_cast<std::size_t>(3 * i + 0)]);
        g[i] = from_byte(raw[static_cast<std::size_t>(3 * i + 1)]);
        b[i] = from_byte(raw[static_cast<std::size_t>(3 * i + 2)]);
    }
    return ImagePatch(t);
}

void write_pgm(const std::string& path, const SegMask& mask) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open '" + path + "'");
    out << "P5\n" << mask.w << " " << mask.h << "\n255\n";
    std::vector<std::uint8_t> raw(mask.labels.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = mask.labels[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("write_pgm: write failed for '" + path + "'");
}

SegMask read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm: cannot open '" + path + "'");
    std::int64_t w = 0, h = 0;
    read_header(in, path, "P5", w, h);
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w * h));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw std::runtime_error("read_pgm: truncated raster in '" + path + "'");
    SegMask m(h, w);
    for (std::size_t i = 0; i < raw.size(); ++i) m.labels[i] = raw[i] >= 128 ? 1 : 0;
    return m;
}

ImagePatch read_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_image: cannot open '" + path + "'");
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    in.close();
    if (m0 == 'P' && m1 == '6') return read_ppm(path);
    if (m0 == 'P' && m1 == '5') {
        // Promote a grayscale image to three channels.
        SegMask m = read_pgm(path);
        Tensor t({3, m.h, m.w});
        for (std::int64_t c = 0; c < 3; ++c)
            for (std::int64_t i = 0; i < m.h * m.w; ++i)
                t[c * m.h * m.w + i] = m.labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
        return ImagePatch(t);
    }
    throw std::runtime_error("read_image: unsupported format in '" + path + "' (expected PPM/PGM)");
}

ImagePatch resize(const ImagePatch& img, std::int64_t h, std::int64_t w) {
    Tensor out({3, h, w});
    kernels::resize_bilinear(3, img.height(), img.width(), img.pixels.data(), h, w, out.data());
    return ImagePatch(out);
}

SegMask resize_mask(const SegMask& mask, std::int64_t h, std::int64_t w) {
    Tensor field({1, mask.h, mask.w});
    for (std::int64_t i = 0; i < mask.h * mask.w; ++i) field[i] = mask.labels[static_cast<std::size_t>(i)];
    Tensor out({1, h, w});
    kernels::resize_bilinear(1, mask.h, mask.w, field.data(), h, w, out.data());
    SegMask m(h, w);
    for (std::int64_t i = 0; i < h * w; ++i) m.labels[static_cast<std::size_t>(i)] = out[i] > 0.5 ? 1 : 0;
    return m;
}

ImagePatch montage(const std::vector<ImagePatch>& tiles, int rows, int cols, int sep) {
    if (tiles.empty() || rows * cols < static_cast<int>(tiles.size()))
        throw std::invalid_argument("montage: grid smaller than tile count");
    const std::int64_t th = tiles[0].height(), tw = tiles[0].width();
    const std::int64_t h = rows * th + (rows - 1) * sep;
    const std::int64_t w = cols * tw + (cols - 1) * sep;
    Tensor out = Tensor::full({3, h, w}, 1);  // white separators
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const std::int64_t r = static_cast<std::int64_t>(t) / cols;
        const std::int64_t c = static_cast<std::int64_t>(t) % cols;
        const std::int64_t oy = r * (th + sep), ox = c * (tw + sep);
        for (std::int64_t ch = 0; ch < 3; ++ch)
            for (std::int64_t y = 0; y < th; ++y)
                for (std::int64_t x = 0; x < tw; ++x)
                    out[(ch * h + oy + y) * w + ox + x] = tiles[t].pixels[(ch * th + y) * tw + x];
    }
    return ImagePatch(out);
}

}  // namespace hsg
