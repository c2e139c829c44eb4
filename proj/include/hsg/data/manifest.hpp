#pragma once

#include <string>
#include <vector>

#include "hsg/core/config.hpp"
#include "hsg/core/rng.hpp"
#include "hsg/core/types.hpp"

namespace hsg {

struct PatchRecord {
    std::string id;
    std::string image_path;  // relative to the manifest root
    std::string mask_path;   // empty only for unannotated imports
    int domain = 0;
    bool is_positive = false;
};

/// Dataset layout: root/<domain>/{images,masks}/<id>.{ppm,pgm} plus
/// manifest.json beside the domain directories.
struct DatasetManifest {
    std::string root;
    std::vector<std::string> domain_names;
    std::vector<PatchRecord> records;

    int num_domains() const { return static_cast<int>(domain_names.size()); }
    std::int64_t count(int domain, bool positive) const;
    std::string image_file(const PatchRecord& r) const { return root + "/" + r.image_path; }
    std::string mask_file(const PatchRecord& r) const { return root + "/" + r.mask_path; }
    int domain_index(const std::string& name) const;  // -1 when unknown

    /// Every referenced file exists, every record has a mask, balanced checks
    /// are callers' business. Throws listing all offending records.
    void validate_files() const;

    DatasetManifest filter_domains(const std::vector<int>& keep) const;
    DatasetManifest single_domain(int domain) const;

    void save() const;  // writes <root>/manifest.json
    static DatasetManifest load(const std::string& root_or_file);
};

/// Renders n_pos positives and n_neg negatives once, recolours the same
/// geometry into each of the k domains (exact masks shared), writes the
/// standard layout under root and returns the manifest. Deterministic in rng.
DatasetManifest generate_toy_dataset(const std::string& root, const StainSimulatorParams& params,
                                     int n_pos, int n_neg, int k, std::int64_t patch_size, Rng& rng);

/// Keeps every positive and samples ratio x positives negatives without
/// replacement, per domain. Errors when a domain has too few negatives.
DatasetManifest build_imbalanced_manifest(const DatasetManifest& source, int neg_ratio, Rng& rng);

/// Imports externally produced translations laid out like the standard
/// dataset. Missing masks are collected and reported per record.
DatasetManifest import_pretranslated(const std::string& root);

}  // namespace hsg
