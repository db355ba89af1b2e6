#pragma once

#include "geoknot/lattice.hpp"
#include "geoknot/rng.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

namespace geoknot::testing {

inline LatticePolygon unit_square() {
    return LatticePolygon::from_vertices({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
}

inline PolygonalCurve trefoil_curve(std::size_t n, double scale = 1.0) {
    std::vector<Vec3> v;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        v.emplace_back(scale * (std::sin(t) + 2 * std::sin(2 * t)), scale * (std::cos(t) - 2 * std::cos(2 * t)),
                       -scale * std::sin(3 * t));
    }
    return PolygonalCurve(std::move(v));
}

inline PolygonalCurve figure_eight_curve(std::size_t n) {
    std::vector<Vec3> v;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        v.emplace_back((2 + std::cos(2 * t)) * std::cos(3 * t), (2 + std::cos(2 * t)) * std::sin(3 * t),
                       std::sin(4 * t));
    }
    return PolygonalCurve(std::move(v));
}

inline PolygonalCurve regular_polygon(std::size_t n, double radius = 1.0) {
    std::vector<Vec3> v;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        v.emplace_back(radius * std::cos(t), radius * std::sin(t), 0.0);
    }
    return PolygonalCurve(std::move(v));
}

inline PolygonalCurve random_curve(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed, 0x63757276);
    std::vector<Vec3> v;
    for (std::size_t i = 0; i < n; ++i) v.emplace_back(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    return PolygonalCurve(std::move(v));
}

/// Grows the unit square to `n` edges, then scrambles it with pivots and flips.
/// The knot type is whatever the pivots produce.
inline LatticePolygon random_lattice_polygon(std::size_t n, std::uint64_t seed, std::size_t sweeps = 20) {
    LatticePolygon poly = unit_square();
    CounterRng rng(seed, 0x6C617474);
    while (poly.size() < n) bfacf_move(poly, rng, n, {0.7, 0.0});
    for (std::size_t s = 0; s < sweeps * n; ++s) {
        if (s % 4 == 0)
            pivot_move(poly, rng);
        else
            bfacf_move(poly, rng, n, {0.0, 0.0});
    }
    return poly;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("geoknot_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace geoknot::testing
