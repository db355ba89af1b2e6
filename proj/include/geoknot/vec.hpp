#pragma once

#include <Eigen/Core>

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace geoknot {

using Vec3 = Eigen::Vector3d;

/// Integer lattice point / lattice step in Z^3.
struct Vec3i {
    int x = 0;
    int y = 0;
    int z = 0;

    constexpr int operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr int& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Vec3i operator+(Vec3i a, Vec3i b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3i operator-(Vec3i a, Vec3i b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3i operator-(Vec3i a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr auto operator<=>(const Vec3i&, const Vec3i&) = default;

    Vec3 cast() const { return {double(x), double(y), double(z)}; }
};

constexpr long long dot(Vec3i a, Vec3i b) {
    return static_cast<long long>(a.x) * b.x + static_cast<long long>(a.y) * b.y +
           static_cast<long long>(a.z) * b.z;
}

constexpr Vec3i cross(Vec3i a, Vec3i b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr int manhattan(Vec3i a) {
    return (a.x < 0 ? -a.x : a.x) + (a.y < 0 ? -a.y : a.y) + (a.z < 0 ? -a.z : a.z);
}

/// True when `d` is one of the six unit lattice steps.
constexpr bool is_unit_step(Vec3i d) { return manhattan(d) == 1; }

inline constexpr std::array<Vec3i, 6> kUnitSteps{{
    {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

struct Vec3iHash {
    std::size_t operator()(const Vec3i& v) const noexcept {
        std::uint64_t h = static_cast<std::uint32_t>(v.x);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(v.y);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(v.z);
        h ^= h >> 29;
        h *= 0xBF58476D1CE4E5B9ULL;
        h ^= h >> 32;
        return static_cast<std::size_t>(h);
    }
};

}  // namespace geoknot
