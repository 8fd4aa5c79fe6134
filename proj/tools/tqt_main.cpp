// SPDX-License-Identifier: Apache-2.0
// Command-line front end; talks to the library through the C API only.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tqt/tqt.h"

namespace {

int finish(tqt_status st) {
    if (st == TQT_OK) {
        std::fputs(tqt_last_output(), stdout);
        return 0;
    }
    std::fprintf(stderr, "error: %s: %s\n", tqt_status_name(st), tqt_last_error());
    return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tucker + quantization toolkit for convolution kernels"};
    app.require_subcommand(1);

    std::string manifest, layer, out, scheme = "tensor", algorithm = "single";
    std::vector<std::uint64_t> rank;
    int bits = 8, passes = 1;
    bool packed = false;
    double threshold = 0.0;
    std::uint64_t seed = 0;

    auto* dec = app.add_subcommand("decompose", "factorize one layer and write the factors");
    dec->add_option("--manifest", manifest)->required();
    dec->add_option("--layer", layer)->required();
    dec->add_option("--rank", rank, "R3,R4 (omit to use the manifest ranks)")
        ->delimiter(',')
        ->expected(2);
    dec->add_option("--out", out, "output file prefix")->required();

    auto* qnt = app.add_subcommand("quantize", "quantize a tensor file");
    std::string in_path;
    qnt->add_option("--in", in_path)->required();
    qnt->add_option("--bits", bits)->check(CLI::Range(1, 8));
    qnt->add_option("--scheme", scheme, "tensor | filter | quantile:<q>");
    qnt->add_flag("--packed", packed, "write the bit-packed format");
    qnt->add_option("--out", out)->required();

    auto* rat = app.add_subcommand("ratio", "per-layer compression report CSV");
    rat->add_option("--manifest", manifest)->required();
    rat->add_option("--out", out, "also write the CSV here");

    auto* sea = app.add_subcommand("search", "greedy rank selection over the manifest");
    sea->add_option("--manifest", manifest)->required();
    sea->add_option("--algorithm", algorithm, "single | multi");
    sea->add_option("--threshold", threshold)->required();
    sea->add_option("--passes", passes, "pass count (and per-layer step cap)");
    sea->add_option("--seed", seed);
    std::string plan_out, audit_out;
    sea->add_option("--out", plan_out, "plan JSON path");
    sea->add_option("--audit", audit_out, "audit CSV path");

    auto* bas = app.add_subcommand("baseline", "factorize one layer with a baseline method");
    std::string method;
    bas->add_option("--manifest", manifest)->required();
    bas->add_option("--layer", layer)->required();
    bas->add_option("--method", method, "reshape-svd | spatial-svd | tt | prune")->required();
    bas->add_option("--rank", rank, "method-specific ranks or channel budget")
        ->delimiter(',')
        ->required();
    bas->add_option("--seed", seed);
    bas->add_option("--out", out, "output file prefix")->required();

    auto* chk = app.add_subcommand("check", "verify factorized vs direct convolution");
    chk->add_option("--manifest", manifest)->required();
    chk->add_option("--layer", layer)->required();
    chk->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    if (dec->parsed()) {
        const std::uint64_t r3 = rank.size() == 2 ? rank[0] : 0;
        const std::uint64_t r4 = rank.size() == 2 ? rank[1] : 0;
        return finish(tqt_cmd_decompose(manifest.c_str(), layer.c_str(), r3, r4,
                                        out.c_str()));
    }
    if (qnt->parsed())
        return finish(tqt_cmd_quantize(in_path.c_str(), bits, scheme.c_str(),
                                       packed ? 1 : 0, out.c_str()));
    if (rat->parsed())
        return finish(tqt_cmd_ratio(manifest.c_str(), out.empty() ? nullptr : out.c_str()));
    if (sea->parsed())
        return finish(tqt_cmd_search(manifest.c_str(), algorithm.c_str(), threshold,
                                     passes, seed,
                                     plan_out.empty() ? nullptr : plan_out.c_str(),
                                     audit_out.empty() ? nullptr : audit_out.c_str()));
    if (bas->parsed())
        return finish(tqt_cmd_baseline(manifest.c_str(), layer.c_str(), method.c_str(),
                                       rank.data(), rank.size(), seed, out.c_str()));
    if (chk->parsed()) {
        double dev = 0.0;
        const tqt_status st = tqt_cmd_check(manifest.c_str(), layer.c_str(), seed, &dev);
        const int rc = finish(st);
        if (rc == 0 && dev >= 1e-10) return 1;
        return rc;
    }
    return 1;
}
