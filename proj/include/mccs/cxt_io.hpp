#pragma once

// .cxt container: one UTF-8 JSON header line, '\n', then little-endian
// float32 (re, im) pairs, row-major within a plane, planes in coil order.
//
// Header keys:
//   format   "cxt"            version  1
//   kind     "grid" | "multicoil" | "stack" | "mask"
//   rows, cols, coils         domain   "image" | "kspace" | "wavelet"
//   dc_scale                  number (1 unless the data were DC-normalized)
//   mask     null, or {"rle": [runs...], "fraction": f}
//
// The mask run-length encoding lists alternating run lengths over the
// row-major bins, starting with a run of unsampled bins (possibly 0).
// A "mask" file carries the mask in the header and its 0/1 indicator as
// the payload.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "mccs/error.hpp"
#include "mccs/tensor.hpp"

namespace mccs {

using Tensor = std::variant<ComplexGrid, MultiCoilKSpace, CoilStack, SamplingMask>;

namespace cxt {

inline std::vector<std::int64_t> encode_rle(const SamplingMask &m) {
    std::vector<std::int64_t> runs;
    bool current = false;
    std::int64_t len = 0;
    for (bool b : m.kept()) {
        if (b == current) {
            ++len;
        } else {
            runs.push_back(len);
            current = b;
            len = 1;
        }
    }
    runs.push_back(len);
    return runs;
}

inline std::vector<bool> decode_rle(const std::vector<std::int64_t> &runs, Index total,
                                    const std::string &path) {
    std::vector<bool> kept;
    kept.reserve(static_cast<std::size_t>(total));
    bool current = false;
    for (auto r : runs) {
        if (r < 0) throw InvariantError(path, "negative run length in mask");
        if (static_cast<Index>(kept.size()) + r > total)
            throw InvariantError(path, "mask runs exceed rows*cols");
        kept.insert(kept.end(), static_cast<std::size_t>(r), current);
        current = !current;
    }
    if (static_cast<Index>(kept.size()) != total)
        throw InvariantError(path, "mask runs cover " + std::to_string(kept.size()) +
                                       " bins, expected " + std::to_string(total));
    return kept;
}

inline void put_f32(std::string &buf, float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    if constexpr (std::endian::native == std::endian::big)
        u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
    char b[4];
    std::memcpy(b, &u, 4);
    buf.append(b, 4);
}

inline float get_f32(const char *p) {
    std::uint32_t u;
    std::memcpy(&u, p, 4);
    if constexpr (std::endian::native == std::endian::big)
        u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

struct Header {
    std::string kind;
    Index rows = 0, cols = 0, coils = 1;
    Domain domain = Domain::image;
    double dc_scale = 1.0;
    std::optional<SamplingMask> mask;
};

inline nlohmann::json header_json(const Header &h) {
    nlohmann::json j;
    j["format"] = "cxt";
    j["version"] = 1;
    j["kind"] = h.kind;
    j["rows"] = h.rows;
    j["cols"] = h.cols;
    j["coils"] = h.coils;
    j["domain"] = to_string(h.domain);
    j["dc_scale"] = h.dc_scale;
    if (h.mask) {
        j["mask"] = {{"rle", encode_rle(*h.mask)}, {"fraction", h.mask->fraction()}};
    } else {
        j["mask"] = nullptr;
    }
    return j;
}

inline void write_file(const std::string &path, const Header &h, const CMat &planes) {
    std::string buf = header_json(h).dump();
    buf.push_back('\n');
    buf.reserve(buf.size() + static_cast<std::size_t>(planes.size()) * 8);
    for (Index c = 0; c < planes.cols(); ++c)
        for (Index i = 0; i < planes.rows(); ++i) {
            put_f32(buf, static_cast<float>(planes(i, c).real()));
            put_f32(buf, static_cast<float>(planes(i, c).imag()));
        }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError(path, "write failed");
}

template <class T>
T require(const nlohmann::json &j, const char *key, const std::string &path) {
    if (!j.contains(key)) throw HeaderError(path, std::string("header missing '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception &) {
        throw HeaderError(path, std::string("header field '") + key + "' has the wrong type");
    }
}

} // namespace cxt

inline void save_tensor(const ComplexGrid &g, const std::string &path) {
    cxt::Header h{"grid", g.rows(), g.cols(), 1, g.domain(), 1.0, std::nullopt};
    cxt::write_file(path, h, CMat(g.values()));
}

inline void save_tensor(const CoilStack &s, const std::string &path) {
    cxt::Header h{"stack", s.rows(), s.cols(), s.coils(), s.domain(), 1.0, std::nullopt};
    cxt::write_file(path, h, s.matrix());
}

inline void save_tensor(const MultiCoilKSpace &b, const std::string &path) {
    cxt::Header h{"multicoil", b.rows(), b.cols(), b.coils(), Domain::kspace, b.dc_scale(),
                  b.mask()};
    cxt::write_file(path, h, b.matrix());
}

inline void save_tensor(const SamplingMask &m, const std::string &path) {
    cxt::Header h{"mask", m.rows(), m.cols(), 1, Domain::kspace, 1.0, m};
    CMat ind(m.size(), 1);
    for (Index i = 0; i < m.size(); ++i) ind(i, 0) = m[i] ? 1.0 : 0.0;
    cxt::write_file(path, h, ind);
}

inline void save_tensor(const Tensor &t, const std::string &path) {
    std::visit([&](const auto &v) { save_tensor(v, path); }, t);
}

inline Tensor load_tensor(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::string line;
    if (!std::getline(in, line)) throw HeaderError(path, "missing header line");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
        throw HeaderError(path, std::string("malformed header: ") + e.what());
    }
    if (!j.is_object()) throw HeaderError(path, "header is not a JSON object");
    if (cxt::require<std::string>(j, "format", path) != "cxt")
        throw HeaderError(path, "not a cxt container");
    if (cxt::require<int>(j, "version", path) != 1)
        throw HeaderError(path, "unsupported cxt version");

    cxt::Header h;
    h.kind = cxt::require<std::string>(j, "kind", path);
    h.rows = cxt::require<Index>(j, "rows", path);
    h.cols = cxt::require<Index>(j, "cols", path);
    h.coils = cxt::require<Index>(j, "coils", path);
    h.dc_scale = cxt::require<double>(j, "dc_scale", path);
    try {
        h.domain = domain_from_string(cxt::require<std::string>(j, "domain", path));
    } catch (const ConfigError &e) {
        throw HeaderError(path, e.what());
    }
    if (h.kind != "grid" && h.kind != "multicoil" && h.kind != "stack" && h.kind != "mask")
        throw HeaderError(path, "unknown kind '" + h.kind + "'");
    if (h.rows < 2 || h.cols < 2)
        throw InvariantError(path, "rows and cols must be >= 2, got " + std::to_string(h.rows) +
                                       "x" + std::to_string(h.cols));
    if (h.coils < 1) throw InvariantError(path, "coils must be >= 1");
    if ((h.kind == "grid" || h.kind == "mask") && h.coils != 1)
        throw InvariantError(path, h.kind + " containers hold exactly one plane");
    if (!(h.dc_scale > 0.0)) throw InvariantError(path, "dc_scale must be positive");

    const bool needs_mask = h.kind == "multicoil" || h.kind == "mask";
    if (!j.contains("mask")) throw HeaderError(path, "header missing 'mask'");
    if (needs_mask) {
        const auto &mj = j["mask"];
        if (!mj.is_object() || !mj.contains("rle"))
            throw HeaderError(path, "mask with run-length encoding required for kind " + h.kind);
        std::vector<std::int64_t> runs;
        try {
            runs = mj["rle"].get<std::vector<std::int64_t>>();
        } catch (const nlohmann::json::exception &) {
            throw HeaderError(path, "mask rle must be an integer array");
        }
        auto kept = cxt::decode_rle(runs, h.rows * h.cols, path);
        const Index dc = (h.rows / 2) * h.cols + h.cols / 2;
        if (!kept[static_cast<std::size_t>(dc)])
            throw InvariantError(path, "mask does not keep the DC bin");
        h.mask = SamplingMask(h.rows, h.cols, std::move(kept));
        if (mj.contains("fraction")) {
            const double f = mj["fraction"].get<double>();
            if (std::abs(f - h.mask->fraction()) > 1.0 / static_cast<double>(h.rows * h.cols))
                throw InvariantError(path, "mask fraction disagrees with run-length data");
        }
    }

    const Index pixels = h.rows * h.cols;
    const std::size_t expected = static_cast<std::size_t>(pixels * h.coils) * 8;
    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (payload.size() != expected)
        throw PayloadLengthError(path, "payload has " + std::to_string(payload.size()) +
                                           " bytes, expected " + std::to_string(expected));
    CMat planes(pixels, h.coils);
    const char *p = payload.data();
    for (Index c = 0; c < h.coils; ++c)
        for (Index i = 0; i < pixels; ++i, p += 8)
            planes(i, c) = cplx(cxt::get_f32(p), cxt::get_f32(p + 4));

    if (h.kind == "grid") return ComplexGrid(h.rows, h.cols, CVec(planes.col(0)), h.domain);
    if (h.kind == "stack") return CoilStack(h.rows, h.cols, std::move(planes), h.domain);
    if (h.kind == "mask") {
        for (Index i = 0; i < pixels; ++i) {
            const cplx expect = (*h.mask)[i] ? 1.0 : 0.0;
            if (planes(i, 0) != expect)
                throw InvariantError(path, "mask payload disagrees with header");
        }
        return *h.mask;
    }
    for (Index i = 0; i < pixels; ++i)
        if (!(*h.mask)[i] && (planes.row(i).array() != cplx(0.0)).any())
            throw InvariantError(path, "nonzero k-space value outside the sampling mask");
    return MultiCoilKSpace(CoilStack(h.rows, h.cols, std::move(planes), Domain::kspace),
                           std::move(*h.mask), h.dc_scale);
}

template <class T>
T load_as(const std::string &path) {
    Tensor t = load_tensor(path);
    if (auto *v = std::get_if<T>(&t)) return std::move(*v);
    throw HeaderError(path, "container holds a different kind of tensor");
}

} // namespace mccs
