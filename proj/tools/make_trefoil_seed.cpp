// Builds the shipped 24-edge lattice trefoil seed.
//
// Lattice-izes a scaled parametric trefoil, checks its determinant, then runs
// shrink-heavy BFACF (which cannot change the knot type) until the polygon
// reaches 24 edges. Writes the seed to stdout.

#include "geoknot/lattice.hpp"
#include "geoknot/topology.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <unordered_map>

using namespace geoknot;

namespace {

std::vector<Vec3i> lattice_trefoil(double scale, int samples) {
    std::vector<Vec3i> path;
    auto push = [&](Vec3i p) {
        if (!path.empty() && path.back() == p) return;
        path.push_back(p);
    };
    for (int k = 0; k <= samples; ++k) {
        const double t = 2 * std::numbers::pi * k / samples;
        const Vec3 x{std::sin(t) + 2 * std::sin(2 * t), std::cos(t) - 2 * std::cos(2 * t), -std::sin(3 * t)};
        const Vec3i target{static_cast<int>(std::lround(scale * x.x())), static_cast<int>(std::lround(scale * x.y())),
                           static_cast<int>(std::lround(scale * x.z()))};
        if (path.empty()) {
            push(target);
            continue;
        }
        Vec3i cur = path.back();
        for (int axis = 0; axis < 3; ++axis) {
            while (cur[axis] != target[axis]) {
                Vec3i step{};
                if (axis == 0) step.x = target.x > cur.x ? 1 : -1;
                if (axis == 1) step.y = target.y > cur.y ? 1 : -1;
                if (axis == 2) step.z = target.z > cur.z ? 1 : -1;
                cur = cur + step;
                push(cur);
            }
        }
    }
    if (path.front() == path.back()) path.pop_back();
    // Loop erasure: revisiting a site cuts out the excursion in between.
    std::vector<Vec3i> out;
    std::unordered_map<Vec3i, std::size_t, Vec3iHash> where;
    for (const auto& p : path) {
        if (auto it = where.find(p); it != where.end()) {
            for (std::size_t k = it->second + 1; k < out.size(); ++k) where.erase(out[k]);
            out.resize(it->second + 1);
        } else {
            where[p] = out.size();
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const double scale = argc > 1 ? std::atof(argv[1]) : 2.5;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    auto poly = LatticePolygon::from_vertices(lattice_trefoil(scale, 4000));
    const auto start = verify_knot_class(poly, KnotClass::Trefoil);
    std::fprintf(stderr, "lattice-ized N=%zu det=%lld v2=%d\n", poly.size(), static_cast<long long>(start.determinant),
                 start.v2_exact);
    if (start.verdict != KnotClass::Trefoil) return 1;

    CounterRng rng(seed, 0);
    const BfacfMix mix{0.004, 0.5};
    for (long step = 0; step < 50'000'000 && poly.size() > 24; ++step) {
        bfacf_move(poly, rng, 400, mix);
    }
    if (poly.size() != 24) return 1;
    const auto end = verify_knot_class(poly, KnotClass::Trefoil);
    std::fprintf(stderr, "final N=%zu det=%lld v2=%d\n", poly.size(), static_cast<long long>(end.determinant),
                 end.v2_exact);
    if (end.verdict != KnotClass::Trefoil) return 1;
    std::printf("%zu\n", poly.size());
    for (const auto& v : poly.vertices()) std::printf("%d %d %d\n", v.x, v.y, v.z);
    return 0;
}
