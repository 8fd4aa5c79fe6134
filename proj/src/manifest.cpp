// SPDX-License-Identifier: Apache-2.0
#include "tqt/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tqt/error.hpp"

namespace tqt {

namespace {

std::size_t parse_size(const std::string& tok, const std::string& field, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument,
                    "manifest line " + std::to_string(line_no) + ": bad " + field +
                        " value '" + tok + "'");
    }
}

}  // namespace

const ManifestLayer& ModelManifest::layer(const std::string& name) const {
    for (const ManifestLayer& l : layers)
        if (l.name == name) return l;
    throw Error(ErrorCode::InvalidArgument, "no manifest layer named '" + name + "'");
}

ModelManifest parse_manifest(const std::string& text, const std::string& base_dir) {
    ModelManifest m;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);

        std::istringstream fields(line);
        std::vector<std::string> tok;
        std::string t;
        while (fields >> t) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() != 11)
            throw Error(ErrorCode::InvalidArgument,
                        "manifest line " + std::to_string(line_no) + ": expected 11 fields, got " +
                            std::to_string(tok.size()));

        ManifestLayer l;
        l.name = tok[0];
        l.tensor_path = tok[1];
        if (!base_dir.empty() && !std::filesystem::path(l.tensor_path).is_absolute())
            l.tensor_path = (std::filesystem::path(base_dir) / l.tensor_path).string();
        l.stride = parse_size(tok[2], "stride", line_no);
        l.pad = parse_size(tok[3], "pad", line_no);
        l.bits = static_cast<int>(parse_size(tok[4], "bits", line_no));
        l.r3 = parse_size(tok[5], "r3", line_no);
        l.r4 = parse_size(tok[6], "r4", line_no);
        l.step3 = parse_size(tok[7], "step3", line_no);
        l.step4 = parse_size(tok[8], "step4", line_no);
        l.height = parse_size(tok[9], "height", line_no);
        l.width = parse_size(tok[10], "width", line_no);

        if (l.stride == 0)
            throw Error(ErrorCode::InvalidArgument,
                        "manifest line " + std::to_string(line_no) + ": stride must be positive");
        if (l.bits < 0 || l.bits > 8)
            throw Error(ErrorCode::InvalidArgument,
                        "manifest line " + std::to_string(line_no) + ": bits must be in [0, 8]");
        if (l.r3 == 0 || l.r4 == 0)
            throw Error(ErrorCode::InvalidArgument,
                        "manifest line " + std::to_string(line_no) + ": ranks must be positive");
        if (l.step3 == 0 || l.step4 == 0)
            throw Error(ErrorCode::InvalidArgument,
                        "manifest line " + std::to_string(line_no) + ": rank steps must be positive");
        if (l.height == 0 || l.width == 0)
            throw Error(ErrorCode::InvalidArgument,
                        "manifest line " + std::to_string(line_no) +
                            ": input height and width must be positive");
        for (const ManifestLayer& prev : m.layers)
            if (prev.name == l.name)
                throw Error(ErrorCode::InvalidArgument,
                            "manifest line " + std::to_string(line_no) + ": duplicate layer '" +
                                l.name + "'");
        m.layers.push_back(std::move(l));
    }
    if (m.layers.empty())
        throw Error(ErrorCode::InvalidArgument, "manifest has no layers");
    return m;
}

ModelManifest read_manifest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string dir = std::filesystem::path(path).parent_path().string();
    ModelManifest m = parse_manifest(buf.str(), dir);
    for (const ManifestLayer& l : m.layers)
        if (!std::filesystem::exists(l.tensor_path))
            throw Error(ErrorCode::Io, "layer '" + l.name + "': missing tensor file " +
                                           l.tensor_path);
    return m;
}

}  // namespace tqt
