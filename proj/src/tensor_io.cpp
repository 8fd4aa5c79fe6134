// SPDX-License-Identifier: Apache-2.0
#include "tqt/tensor_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "tqt/quantize.hpp"

namespace tqt {

namespace {

constexpr char kMagic[4] = {'T', 'Q', 'T', '1'};
constexpr char kPackedMagic[4] = {'T', 'Q', 'P', '1'};
constexpr std::uint8_t kVersion = 1;

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void put_f64_le(std::vector<std::uint8_t>& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    put_u64_le(out, bits);
}

double get_f64_le(const std::uint8_t* p) {
    const std::uint64_t bits = get_u64_le(p);
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
}

// Header = magic, version, order, extents. Returns the payload offset.
std::size_t parse_header(const std::vector<std::uint8_t>& bytes, const char* magic,
                         std::size_t fixed_len, std::vector<std::size_t>& shape,
                         std::size_t order_offset) {
    if (bytes.size() < 4) throw Error(ErrorCode::TruncatedPayload, "missing magic");
    if (std::memcmp(bytes.data(), magic, 4) != 0)
        throw Error(ErrorCode::BadMagic, "unrecognized magic bytes");
    if (bytes.size() < fixed_len)
        throw Error(ErrorCode::TruncatedPayload, "truncated header");
    if (bytes[4] != kVersion)
        throw Error(ErrorCode::BadVersion, "unsupported format version");

    const std::size_t order = bytes[order_offset];
    if (order == 0) throw Error(ErrorCode::ExtentOverflow, "tensor order is zero");
    if (bytes.size() < fixed_len + 8 * order)
        throw Error(ErrorCode::TruncatedPayload, "truncated extent list");

    shape.resize(order);
    std::uint64_t numel = 1;
    for (std::size_t k = 0; k < order; ++k) {
        const std::uint64_t e = get_u64_le(bytes.data() + fixed_len + 8 * k);
        if (e == 0) throw Error(ErrorCode::ExtentOverflow, "zero extent");
        if (e > std::numeric_limits<std::uint64_t>::max() / numel)
            throw Error(ErrorCode::ExtentOverflow, "extent product overflows");
        numel *= e;
        if (numel > (1ull << 40))
            throw Error(ErrorCode::ExtentOverflow, "tensor too large");
        shape[k] = static_cast<std::size_t>(e);
    }
    return fixed_len + 8 * order;
}

}  // namespace

std::vector<std::uint8_t> serialize_tensor(const DenseTensor& t) {
    std::vector<std::uint8_t> out;
    out.reserve(6 + 8 * t.order() + 8 * t.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    if (t.order() > 255)
        throw Error(ErrorCode::ExtentOverflow, "order exceeds format limit");
    out.push_back(static_cast<std::uint8_t>(t.order()));
    for (std::size_t e : t.shape()) put_u64_le(out, e);
    for (std::size_t i = 0; i < t.size(); ++i) put_f64_le(out, t[i]);
    return out;
}

DenseTensor parse_tensor(const std::vector<std::uint8_t>& bytes) {
    std::vector<std::size_t> shape;
    const std::size_t payload = parse_header(bytes, kMagic, 6, shape, 5);

    std::uint64_t numel = 1;
    for (std::size_t e : shape) numel *= e;
    if (bytes.size() < payload + 8 * numel)
        throw Error(ErrorCode::TruncatedPayload, "payload shorter than extents imply");
    if (bytes.size() > payload + 8 * numel)
        throw Error(ErrorCode::InvalidArgument, "trailing bytes after payload");

    std::vector<double> data(numel);
    for (std::uint64_t i = 0; i < numel; ++i)
        data[i] = get_f64_le(bytes.data() + payload + 8 * i);
    return DenseTensor(shape, std::move(data));
}

DenseTensor read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_tensor(bytes);
}

void write_tensor_file(const DenseTensor& t, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_tensor(t);
    atomic_write_file(path, bytes.data(), bytes.size());
}

std::size_t packed_payload_bytes(std::size_t numel, int bits) {
    if (bits < 1 || bits > 8)
        throw Error(ErrorCode::InvalidArgument, "bit-width must be in [1, 8]");
    return (numel * static_cast<std::size_t>(bits) + 7) / 8;
}

std::vector<std::uint8_t> serialize_packed(const DenseTensor& t, int bits) {
    const QuantParams p =
        make_weight_params(t, bits, QuantScheme::PerTensorSymmetric);
    const double step = p.steps[0];
    const long lo = -(1L << (bits - 1));
    const long hi = (1L << (bits - 1)) - 1;

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kPackedMagic, kPackedMagic + 4);
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(bits));
    if (t.order() > 255)
        throw Error(ErrorCode::ExtentOverflow, "order exceeds format limit");
    out.push_back(static_cast<std::uint8_t>(t.order()));
    for (std::size_t e : t.shape()) put_u64_le(out, e);
    put_f64_le(out, step);

    // Levels stored as bias-offset unsigned values, LSB-first bit packing.
    std::vector<std::uint8_t> payload(packed_payload_bytes(t.size(), bits), 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        long level = 0;
        if (step > 0.0) {
            level = static_cast<long>(std::nearbyint(t[i] / step));
            level = std::max(lo, std::min(hi, level));
        }
        const std::uint32_t biased = static_cast<std::uint32_t>(level - lo);
        const std::size_t bit0 = i * static_cast<std::size_t>(bits);
        for (int b = 0; b < bits; ++b) {
            if (biased & (1u << b))
                payload[(bit0 + b) / 8] |= static_cast<std::uint8_t>(1u << ((bit0 + b) % 8));
        }
    }
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

DenseTensor parse_packed(const std::vector<std::uint8_t>& bytes) {
    std::vector<std::size_t> shape;
    const std::size_t extent_end = parse_header(bytes, kPackedMagic, 7, shape, 6);
    const int bits = bytes[5];
    if (bits < 1 || bits > 8)
        throw Error(ErrorCode::InvalidArgument, "bit-width out of range");

    if (bytes.size() < extent_end + 8)
        throw Error(ErrorCode::TruncatedPayload, "missing step");
    const double step = get_f64_le(bytes.data() + extent_end);
    const std::size_t payload = extent_end + 8;

    std::uint64_t numel = 1;
    for (std::size_t e : shape) numel *= e;
    const std::size_t expected = packed_payload_bytes(numel, bits);
    if (bytes.size() < payload + expected)
        throw Error(ErrorCode::TruncatedPayload, "payload shorter than extents imply");

    const long lo = -(1L << (bits - 1));
    std::vector<double> data(numel);
    for (std::uint64_t i = 0; i < numel; ++i) {
        std::uint32_t biased = 0;
        const std::size_t bit0 = i * static_cast<std::size_t>(bits);
        for (int b = 0; b < bits; ++b) {
            if (bytes[payload + (bit0 + b) / 8] & (1u << ((bit0 + b) % 8)))
                biased |= 1u << b;
        }
        data[i] = static_cast<double>(static_cast<long>(biased) + lo) * step;
    }
    return DenseTensor(shape, std::move(data));
}

void write_packed_file(const DenseTensor& t, int bits, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_packed(t, bits);
    atomic_write_file(path, bytes.data(), bytes.size());
}

void atomic_write_file(const std::string& path, const void* data, std::size_t size) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCode::Io, "rename failed: " + ec.message());
    }
}

void atomic_write_file(const std::string& path, const std::string& text) {
    atomic_write_file(path, text.data(), text.size());
}

}  // namespace tqt
