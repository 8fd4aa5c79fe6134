// SPDX-License-Identifier: Apache-2.0
// Exercises the shared-library surface exactly as an external consumer
// would: through the C header only.
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tqt/tqt.h"

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir()
        : path(fs::temp_directory_path() / ("tqt_capi_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<double> randn_vec(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_CASE("tensor handles round trip data and metadata") {
    const uint64_t extents[3] = {2, 3, 4};
    const std::vector<double> data = randn_vec(24, 601);

    tqt_tensor* t = nullptr;
    REQUIRE(tqt_tensor_create(extents, 3, data.data(), &t) == TQT_OK);
    CHECK(tqt_tensor_order(t) == 3);
    CHECK(tqt_tensor_extent(t, 1) == 3);
    CHECK(tqt_tensor_size(t) == 24);
    CHECK(std::memcmp(tqt_tensor_data(t), data.data(), 24 * sizeof(double)) == 0);
    tqt_tensor_destroy(t);
}

TEST_CASE("null arguments yield invalid-argument, not crashes") {
    CHECK(tqt_tensor_create(nullptr, 3, nullptr, nullptr) == TQT_ERR_INVALID_ARGUMENT);
    CHECK(tqt_tensor_read(nullptr, nullptr) == TQT_ERR_INVALID_ARGUMENT);
    CHECK(std::string(tqt_last_error()) == "null argument");
    tqt_tensor_destroy(nullptr);  // must be a no-op
}

TEST_CASE("error categories map through the status enum") {
    TempDir dir;
    tqt_tensor* t = nullptr;
    CHECK(tqt_tensor_read(dir.file("missing.tqt").c_str(), &t) == TQT_ERR_IO);

    const std::string bad = dir.file("bad.tqt");
    std::ofstream(bad, std::ios::binary) << "XXXXXXXXXX";
    CHECK(tqt_tensor_read(bad.c_str(), &t) == TQT_ERR_BAD_MAGIC);
    CHECK(std::string(tqt_status_name(TQT_ERR_BAD_MAGIC)) == "bad-magic");

    const uint64_t extents[2] = {2, 2};
    const std::vector<double> data = randn_vec(4, 602);
    tqt_tensor* m = nullptr;
    REQUIRE(tqt_tensor_create(extents, 2, data.data(), &m) == TQT_OK);
    tqt_partial_tucker* f = nullptr;
    CHECK(tqt_partial_tucker_decompose(m, 1, 1, 0, 0.0, &f) ==
          TQT_ERR_DIMENSION_MISMATCH);  // order-2 input
    tqt_tensor_destroy(m);
}

TEST_CASE("decompose, reconstruct, and staged convolution through the C API") {
    const uint64_t kext[4] = {3, 3, 4, 5};
    const std::vector<double> kdata = randn_vec(3 * 3 * 4 * 5, 603);
    tqt_tensor* w = nullptr;
    REQUIRE(tqt_tensor_create(kext, 4, kdata.data(), &w) == TQT_OK);

    tqt_partial_tucker* f = nullptr;
    REQUIRE(tqt_partial_tucker_decompose(w, 4, 5, 0, 0.0, &f) == TQT_OK);

    tqt_tensor* core = nullptr;
    REQUIRE(tqt_partial_tucker_core(f, &core) == TQT_OK);
    CHECK(tqt_tensor_extent(core, 2) == 4);
    CHECK(tqt_tensor_extent(core, 3) == 5);
    tqt_tensor_destroy(core);

    // full rank reconstructs the kernel
    tqt_tensor* rec = nullptr;
    REQUIRE(tqt_partial_tucker_reconstruct(f, &rec) == TQT_OK);
    double max_dev = 0.0;
    for (std::size_t i = 0; i < kdata.size(); ++i)
        max_dev = std::max(max_dev, std::abs(tqt_tensor_data(rec)[i] - kdata[i]));
    CHECK(max_dev < 1e-10);
    tqt_tensor_destroy(rec);

    // staged convolution equals the direct one
    const uint64_t xext[3] = {7, 7, 4};
    const std::vector<double> xdata = randn_vec(7 * 7 * 4, 604);
    tqt_tensor* x = nullptr;
    REQUIRE(tqt_tensor_create(xext, 3, xdata.data(), &x) == TQT_OK);

    tqt_tensor* y1 = nullptr;
    tqt_tensor* y2 = nullptr;
    REQUIRE(tqt_conv2d(x, w, 1, 1, &y1) == TQT_OK);
    REQUIRE(tqt_conv2d_tucker(x, f, 1, 1, &y2) == TQT_OK);
    REQUIRE(tqt_tensor_size(y1) == tqt_tensor_size(y2));
    double dev = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < tqt_tensor_size(y1); ++i) {
        dev = std::max(dev, std::abs(tqt_tensor_data(y1)[i] - tqt_tensor_data(y2)[i]));
        scale = std::max(scale, std::abs(tqt_tensor_data(y1)[i]));
    }
    CHECK(dev < 1e-10 * scale);

    tqt_tensor_destroy(y1);
    tqt_tensor_destroy(y2);
    tqt_tensor_destroy(x);
    tqt_partial_tucker_destroy(f);
    tqt_tensor_destroy(w);
}

TEST_CASE("quantization schemes parse and apply") {
    const uint64_t ext[4] = {1, 1, 2, 2};
    const double data[4] = {0.5, -1.0, 0.25, 1.0};
    tqt_tensor* w = nullptr;
    REQUIRE(tqt_tensor_create(ext, 4, data, &w) == TQT_OK);

    tqt_tensor* q = nullptr;
    REQUIRE(tqt_quantize_weights(w, 8, "tensor", &q) == TQT_OK);
    CHECK(tqt_tensor_data(q)[0] == doctest::Approx(64.0 / 127.0));
    tqt_tensor_destroy(q);

    REQUIRE(tqt_quantize_weights(w, 8, "quantile:0.75", &q) == TQT_OK);
    tqt_tensor_destroy(q);

    CHECK(tqt_quantize_weights(w, 8, "bogus", &q) == TQT_ERR_INVALID_ARGUMENT);
    CHECK(tqt_quantize_weights(w, 0, "tensor", &q) == TQT_ERR_INVALID_ARGUMENT);
    tqt_tensor_destroy(w);
}

TEST_CASE("ratio helpers") {
    double v = 0.0;
    REQUIRE(tqt_param_ratio(3, 4, 8, 2, 2, &v) == TQT_OK);
    CHECK(v == doctest::Approx(4.8));

    const uint64_t ext[3] = {4, 5, 6};
    const uint64_t rank[3] = {2, 2, 3};
    REQUIRE(tqt_tucker_ratio(ext, rank, 3, &v) == TQT_OK);
    CHECK(v == doctest::Approx(2.5));

    REQUIRE(tqt_macs_ratio(3, 4, 8, 8, 8, 6, 6, 2, 2, &v) == TQT_OK);
    CHECK(v == doctest::Approx(288.0 / (36.0 + 8.0 * 64.0 / 36.0 + 16.0)));
}

TEST_CASE("command drivers run end to end over a manifest") {
    TempDir dir;
    const uint64_t kext[4] = {3, 3, 4, 4};
    const std::vector<double> kdata = randn_vec(3 * 3 * 4 * 4, 605);
    tqt_tensor* w = nullptr;
    REQUIRE(tqt_tensor_create(kext, 4, kdata.data(), &w) == TQT_OK);
    REQUIRE(tqt_tensor_write(w, dir.file("k.tqt").c_str()) == TQT_OK);
    tqt_tensor_destroy(w);

    std::ofstream(dir.file("model.txt"))
        << "conv1 k.tqt 1 1 8 2 2 1 1 8 8\n";

    CHECK(tqt_cmd_ratio(dir.file("model.txt").c_str(), dir.file("r.csv").c_str()) ==
          TQT_OK);
    CHECK(std::string(tqt_last_output()).find("conv1") != std::string::npos);
    CHECK(fs::exists(dir.file("r.csv")));

    CHECK(tqt_cmd_decompose(dir.file("model.txt").c_str(), "conv1", 2, 2,
                            dir.file("f").c_str()) == TQT_OK);
    CHECK(fs::exists(dir.file("f_core.tqt")));
    CHECK(fs::exists(dir.file("f_u3.tqt")));
    CHECK(fs::exists(dir.file("f_u4.tqt")));

    double dev = 1.0;
    CHECK(tqt_cmd_check(dir.file("model.txt").c_str(), "conv1", 7, &dev) == TQT_OK);
    CHECK(dev < 1e-10);

    CHECK(tqt_cmd_search(dir.file("model.txt").c_str(), "multi", -0.5, 3, 1,
                         dir.file("plan.json").c_str(),
                         dir.file("audit.csv").c_str()) == TQT_OK);
    CHECK(fs::exists(dir.file("plan.json")));
    CHECK(fs::exists(dir.file("audit.csv")));

    const uint64_t ranks[1] = {2};
    CHECK(tqt_cmd_baseline(dir.file("model.txt").c_str(), "conv1", "reshape-svd", ranks,
                           1, 0, dir.file("b").c_str()) == TQT_OK);
    CHECK(fs::exists(dir.file("b_w1.tqt")));

    CHECK(tqt_cmd_quantize(dir.file("k.tqt").c_str(), 8, "tensor", 1,
                           dir.file("k8.tqp").c_str()) == TQT_OK);
    CHECK(fs::exists(dir.file("k8.tqp")));

    // unknown layer surfaces as invalid-argument with a readable message
    CHECK(tqt_cmd_decompose(dir.file("model.txt").c_str(), "nope", 2, 2,
                            dir.file("x").c_str()) == TQT_ERR_INVALID_ARGUMENT);
    CHECK(std::string(tqt_last_error()).find("nope") != std::string::npos);
}
