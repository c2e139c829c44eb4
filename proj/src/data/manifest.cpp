#include "hsg/data/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hsg/data/image_io.hpp"
#include "hsg/data/simulator.hpp"

namespace fs = std::filesystem;

namespace hsg {

using json = nlohmann::ordered_json;

std::int64_t DatasetManifest::count(int domain, bool positive) const {
    std::int64_t n = 0;
    for (const auto& r : records)
        if (r.domain == domain && r.is_positive == positive) ++n;
    return n;
}

int DatasetManifest::domain_index(const std::string& name) const {
    for (std::size_t i = 0; i < domain_names.size(); ++i)
        if (domain_names[i] == name) return static_cast<int>(i);
    return -1;
}

void DatasetManifest::validate_files() const {
    std::vector<std::string> problems;
    for (const auto& r : records) {
        if (!fs::exists(image_file(r))) problems.push_back("missing image: " + r.image_path);
        if (r.mask_path.empty())
            problems.push_back("record " + r.id + ": no mask");
        else if (!fs::exists(mask_file(r)))
            problems.push_back("missing mask: " + r.mask_path);
    }
    if (!problems.empty()) {
        std::ostringstream os;
        os << "manifest validation failed (" << problems.size() << " problems):";
        for (const auto& p : problems) os << "\n  " << p;
        throw std::runtime_error(os.str());
    }
}

DatasetManifest DatasetManifest::filter_domains(const std::vector<int>& keep) const {
    DatasetManifest out;
    out.root = root;
    std::vector<int> remap(domain_names.size(), -1);
    for (int d : keep) {
        if (d < 0 || d >= num_domains())
            throw std::domain_error("filter_domains: domain " + std::to_string(d) + " out of range");
        remap[static_cast<std::size_t>(d)] = static_cast<int>(out.domain_names.size());
        out.domain_names.push_back(domain_names[static_cast<std::size_t>(d)]);
    }
    for (const auto& r : records) {
        const int nd = remap[static_cast<std::size_t>(r.domain)];
        if (nd < 0) continue;
        PatchRecord nr = r;
        nr.domain = nd;
        out.records.push_back(nr);
    }
    return out;
}

DatasetManifest DatasetManifest::single_domain(int domain) const { return filter_domains({domain}); }

void DatasetManifest::save() const {
    json j;
    j["domain_names"] = domain_names;
    json recs = json::array();
    for (const auto& r : records) {
        json jr;
        jr["id"] = r.id;
        jr["image"] = r.image_path;
        jr["mask"] = r.mask_path;
        jr["domain"] = r.domain;
        jr["positive"] = r.is_positive;
        recs.push_back(jr);
    }
    j["records"] = recs;
    std::ofstream out(root + "/manifest.json");
    if (!out) throw std::runtime_error("manifest: cannot write '" + root + "/manifest.json'");
    out << j.dump(1) << "\n";
}

DatasetManifest DatasetManifest::load(const std::string& root_or_file) {
    fs::path p(root_or_file);
    fs::path file = fs::is_directory(p) ? p / "manifest.json" : p;
    std::ifstream in(file);
    if (!in) throw std::runtime_error("manifest: cannot open '" + file.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("manifest: parse error in '" + file.string() + "': " + e.what());
    }
    DatasetManifest m;
    m.root = fs::is_directory(p) ? p.string() : file.parent_path().string();
    m.domain_names = j.at("domain_names").get<std::vector<std::string>>();
    for (const auto& jr : j.at("records")) {
        PatchRecord r;
        r.id = jr.at("id").get<std::string>();
        r.image_path = jr.at("image").get<std::string>();
        r.mask_path = jr.at("mask").get<std::string>();
        r.domain = jr.at("domain").get<int>();
        r.is_positive = jr.at("positive").get<bool>();
        if (r.domain < 0 || r.domain >= m.num_domains())
            throw std::runtime_error("manifest: record " + r.id + " has out-of-range domain");
        m.records.push_back(r);
    }
    return m;
}

DatasetManifest generate_toy_dataset(const std::string& root, const StainSimulatorParams& params,
                                     int n_pos, int n_neg, int k, std::int64_t patch_size,
                                     Rng& rng) {
    if (n_pos < 1 || n_neg < 1)
        throw std::invalid_argument("generate_toy_dataset: counts must be >= 1");
    if (k < 1) throw std::invalid_argument("generate_toy_dataset: need at least one domain");
    const auto domains = params.for_domains(k);

    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec || !fs::exists(root))
        throw std::runtime_error("generate_toy_dataset: cannot create root '" + root + "'");

    DatasetManifest m;
    m.root = root;
    for (int d = 0; d < k; ++d) m.domain_names.push_back("stain" + std::to_string(d));
    for (const auto& name : m.domain_names) {
        fs::create_directories(fs::path(root) / name / "images", ec);
        fs::create_directories(fs::path(root) / name / "masks", ec);
        if (ec)
            throw std::runtime_error("generate_toy_dataset: cannot create layout under '" + root +
                                     "'");
    }

    const std::uint64_t base_seed = rng.next_u64();
    const int total = n_pos + n_neg;
    for (int i = 0; i < total; ++i) {
        const bool positive = i < n_pos;
        Rng patch_rng(derive_seed(base_seed, static_cast<std::uint64_t>(i)));
        RenderedPatch base = render_base_patch(patch_size, positive, params, patch_rng);
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "%c%05d", positive ? 'p' : 'n', i);
        const std::string id(idbuf);
        for (int d = 0; d < k; ++d) {
            Rng jitter_rng(derive_seed(base_seed, (static_cast<std::uint64_t>(i) << 16) ^
                                                      static_cast<std::uint64_t>(d) ^ 0xA5A5ULL));
            ImagePatch stained =
                apply_stain(base.image, domains[static_cast<std::size_t>(d)], params.stain_jitter,
                            params.stain_jitter > 0 ? &jitter_rng : nullptr);
            PatchRecord r;
            r.id = id;
            r.domain = d;
            r.is_positive = positive;
            r.image_path = m.domain_names[static_cast<std::size_t>(d)] + "/images/" + id + ".ppm";
            r.mask_path = m.domain_names[static_cast<std::size_t>(d)] + "/masks/" + id + ".pgm";
            write_ppm(m.image_file(r), stained);
            write_pgm(m.mask_file(r), base.mask);
            m.records.push_back(r);
        }
    }
    m.save();
    return m;
}

DatasetManifest build_imbalanced_manifest(const DatasetManifest& source, int neg_ratio, Rng& rng) {
    if (neg_ratio < 1) throw std::invalid_argument("build_imbalanced_manifest: ratio must be >= 1");
    DatasetManifest out;
    out.root = source.root;
    out.domain_names = source.domain_names;
    for (int d = 0; d < source.num_domains(); ++d) {
        std::vector<const PatchRecord*> pos, neg;
        for (const auto& r : source.records) {
            if (r.domain != d) continue;
            (r.is_positive ? pos : neg).push_back(&r);
        }
        if (pos.empty() && neg.empty()) continue;
        const std::int64_t want = static_cast<std::int64_t>(pos.size()) * neg_ratio;
        if (static_cast<std::int64_t>(neg.size()) < want)
            throw std::runtime_error(
                "build_imbalanced_manifest: domain " + source.domain_names[static_cast<std::size_t>(d)] +
                " has " + std::to_string(neg.size()) + " negatives, needs " + std::to_string(want) +
                " (" + std::to_string(pos.size()) + " positives x ratio " +
                std::to_string(neg_ratio) + ")");
        for (const auto* r : pos) out.records.push_back(*r);
        // Partial Fisher-Yates: the first `want` entries are a uniform sample
        // without replacement.
        std::vector<const PatchRecord*> pool = neg;
        for (std::int64_t i = 0; i < want; ++i) {
            const std::int64_t j =
                i + static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(
                        static_cast<std::int64_t>(pool.size()) - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            out.records.push_back(*pool[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

DatasetManifest import_pretranslated(const std::string& root) {
    if (!fs::is_directory(root))
        throw std::runtime_error("import_pretranslated: '" + root + "' is not a directory");
    DatasetManifest m;
    m.root = root;
    std::vector<std::string> domains;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "images")) {
            domains.push_back(entry.path().filename().string());
        }
    std::sort(domains.begin(), domains.end());
    if (domains.empty())
        throw std::runtime_error("import_pretranslated: no <domain>/images directories under '" +
                                 root + "'");
    m.domain_names = domains;
    std::vector<std::string> problems;
    for (std::size_t d = 0; d < domains.size(); ++d) {
        std::vector<fs::path> files;
        for (const auto& f : fs::directory_iterator(fs::path(root) / domains[d] / "images"))
            if (f.is_regular_file()) files.push_back(f.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            PatchRecord r;
            r.id = f.stem().string();
            r.domain = static_cast<int>(d);
            r.image_path = domains[d] + "/images/" + f.filename().string();
            const fs::path mask = fs::path(root) / domains[d] / "masks" / (f.stem().string() + ".pgm");
            if (!fs::exists(mask)) {
                problems.push_back(domains[d] + "/" + f.filename().string() + ": missing mask " +
                                   mask.filename().string());
                continue;
            }
            r.mask_path = domains[d] + "/masks/" + f.stem().string() + ".pgm";
            // Positivity is recovered from the mask content.
            SegMask sm = read_pgm(mask.string());
            r.is_positive = std::any_of(sm.labels.begin(), sm.labels.end(),
                                        [](std::uint8_t v) { return v != 0; });
            m.records.push_back(r);
        }
    }
    if (!problems.empty()) {
        std::ostringstream os;
        os << "import_pretranslated: " << problems.size() << " records failed validation:";
        for (const auto& p : problems) os << "\n  " << p;
        throw std::runtime_error(os.str());
    }
    return m;
}

}  // namespace hsg
