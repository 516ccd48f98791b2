#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "metaiot/circuit.hpp"
#include "metaiot/scene.hpp"

namespace metaiot {

// 64-bit FNV-1a, stable across runs and platforms with the same double layout.
class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) noexcept
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t k = 0; k < n; ++k) {
            h_ ^= p[k];
            h_ *= 0x100000001b3ULL;
        }
    }
    void add(double v) noexcept { bytes(&v, sizeof v); }
    void add(std::uint64_t v) noexcept { bytes(&v, sizeof v); }
    void add(int v) noexcept { add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    void add(std::string_view s) noexcept
    {
        add(static_cast<std::uint64_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void add(const Eigen::MatrixXd& m) noexcept
    {
        add(static_cast<std::uint64_t>(m.rows()));
        add(static_cast<std::uint64_t>(m.cols()));
        bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    }
    void add(const Vec3& v) noexcept
    {
        add(v.x());
        add(v.y());
        add(v.z());
    }
    std::uint64_t value() const noexcept { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::uint64_t hash_scene(const Scene& scene);
std::uint64_t hash_designs(std::span<const DeviceDesign> designs);
std::uint64_t hash_string(std::string_view s);

} // namespace metaiot
