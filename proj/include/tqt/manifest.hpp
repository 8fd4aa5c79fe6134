// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace tqt {

/// One line per layer, whitespace-separated fields, '#' comments:
///   name tensor_path stride pad bits r3 r4 step3 step4 height width
struct ManifestLayer {
    std::string name;
    std::string tensor_path;
    std::size_t stride = 1;
    std::size_t pad = 0;
    int bits = 8;
    std::size_t r3 = 0;
    std::size_t r4 = 0;
    std::size_t step3 = 1;
    std::size_t step4 = 1;
    std::size_t height = 0;
    std::size_t width = 0;
};

struct ModelManifest {
    std::vector<ManifestLayer> layers;

    const ManifestLayer& layer(const std::string& name) const;
};

ModelManifest parse_manifest(const std::string& text, const std::string& base_dir = "");
ModelManifest read_manifest_file(const std::string& path);

}  // namespace tqt
