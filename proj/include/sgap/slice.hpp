#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgap/error.hpp"
#include "sgap/survey.hpp"

namespace sgap {

using Complex = std::complex<double>;

/// Monochromatic data over (source, receiver), row-major n_s x n_r.
struct FrequencySlice {
    int n_s = 0;
    int n_r = 0;
    double omega = 0.0;
    std::vector<Complex> values;

    FrequencySlice() = default;
    FrequencySlice(int n_s, int n_r, double omega = 0.0)
        : n_s(n_s), n_r(n_r), omega(omega), values(static_cast<std::size_t>(n_s) * static_cast<std::size_t>(n_r)) {}

    Complex& operator()(int s, int r) { return values[static_cast<std::size_t>(s) * n_r + r]; }
    const Complex& operator()(int s, int r) const { return values[static_cast<std::size_t>(s) * n_r + r]; }

    [[nodiscard]] bool matches(const SurveyGrid& g) const noexcept { return n_s == g.n_s && n_r == g.n_r; }

    [[nodiscard]] double frobenius() const {
        double acc = 0.0;
        for (const auto& v : values) acc += std::norm(v);
        return std::sqrt(acc);
    }

    friend bool operator==(const FrequencySlice&, const FrequencySlice&) = default;
};

inline std::string sidecar_path(const std::string& path) { return path + ".json"; }

namespace detail {

inline std::uint32_t to_little_endian(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
    }
    return v;
}

} // namespace detail

/// Flat little-endian complex64 payload, row-major, plus a JSON sidecar
/// `{ "n_s", "n_r", "omega" }` at `<path>.json`.
inline void save_slice(const std::string& path, const FrequencySlice& slice) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (const Complex& v : slice.values) {
        for (float part : {static_cast<float>(v.real()), static_cast<float>(v.imag())}) {
            const std::uint32_t bits = detail::to_little_endian(std::bit_cast<std::uint32_t>(part));
            out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    }
    if (!out) throw IoError("failed writing " + path);

    std::ofstream side(sidecar_path(path));
    if (!side) throw IoError("cannot open " + sidecar_path(path) + " for writing");
    side << nlohmann::json{{"n_s", slice.n_s}, {"n_r", slice.n_r}, {"omega", slice.omega}}.dump(2) << '\n';
}

inline FrequencySlice load_slice(const std::string& path) {
    std::ifstream side(sidecar_path(path));
    if (!side) throw IoError("cannot open slice sidecar " + sidecar_path(path));
    FrequencySlice slice;
    try {
        nlohmann::json j;
        side >> j;
        slice = FrequencySlice(j.at("n_s").get<int>(), j.at("n_r").get<int>(), j.at("omega").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("malformed slice sidecar " + sidecar_path(path) + ": " + e.what());
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    for (Complex& v : slice.values) {
        std::uint32_t bits[2];
        if (!in.read(reinterpret_cast<char*>(bits), sizeof bits)) throw IoError(path + " is shorter than its sidecar declares");
        v = Complex(std::bit_cast<float>(detail::to_little_endian(bits[0])),
                    std::bit_cast<float>(detail::to_little_endian(bits[1])));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw IoError(path + " is longer than its sidecar declares");
    return slice;
}

} // namespace sgap
