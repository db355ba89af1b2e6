#include "geoknot/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace geoknot {

struct LatticeEditor {
    static std::vector<Vec3i>& verts(LatticePolygon& p) { return p.verts_; }
    static std::unordered_set<Vec3i, Vec3iHash>& occ(LatticePolygon& p) { return p.occupancy_; }
};

namespace {

std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

}  // namespace

// ---------------------------------------------------------------------------
// LatticePolygon

LatticePolygon LatticePolygon::from_vertices(std::vector<Vec3i> vertices) {
    const std::size_t n = vertices.size();
    if (n < 4) throw InvalidGeometry("lattice polygon needs at least 4 vertices");
    if (n % 2 != 0) throw InvalidGeometry("lattice polygon must have an even vertex count");
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_unit_step(vertices[(i + 1) % n] - vertices[i]))
            throw InvalidGeometry("lattice polygon is not closed by unit steps at vertex " + std::to_string(i));
    }
    LatticePolygon poly;
    poly.occupancy_.reserve(n * 2);
    for (const auto& v : vertices) {
        if (!poly.occupancy_.insert(v).second) throw InvalidGeometry("lattice polygon is not self-avoiding");
    }
    poly.verts_ = std::move(vertices);
    return poly;
}

const Vec3i& LatticePolygon::at_cyclic(std::ptrdiff_t i) const { return verts_[wrap(i, verts_.size())]; }

LatticePolygon LatticePolygon::mirrored() const {
    std::vector<Vec3i> v(verts_);
    for (auto& p : v) p.z = -p.z;
    return from_vertices(std::move(v));
}

// ---------------------------------------------------------------------------
// PolygonalCurve

PolygonalCurve::PolygonalCurve(std::vector<Vec3> vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw InvalidGeometry("curve needs at least 3 vertices");
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw InvalidGeometry("curve has non-finite coordinates");
    }
    // Sort-and-sweep along x keeps the coincidence check near-linear for spread-out curves.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vertices[a].x() < vertices[b].x(); });
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const Vec3& p = vertices[order[a]];
            const Vec3& q = vertices[order[b]];
            if (q.x() - p.x() > kCoincidenceTolerance) break;
            if ((p - q).norm() <= kCoincidenceTolerance) throw InvalidGeometry("curve has coincident vertices");
        }
    }
    verts_ = std::move(vertices);
}

PolygonalCurve PolygonalCurve::unchecked(std::vector<Vec3> vertices) {
    PolygonalCurve c;
    c.verts_ = std::move(vertices);
    return c;
}

PolygonalCurve PolygonalCurve::from_lattice(const LatticePolygon& poly) {
    std::vector<Vec3> v;
    v.reserve(poly.size());
    for (const auto& p : poly.vertices()) v.push_back(p.cast());
    return unchecked(std::move(v));
}

const Vec3& PolygonalCurve::at_cyclic(std::ptrdiff_t i) const { return verts_[wrap(i, verts_.size())]; }

PolygonalCurve PolygonalCurve::mirrored() const {
    std::vector<Vec3> v(verts_);
    for (auto& p : v) p.z() = -p.z();
    return unchecked(std::move(v));
}

PolygonalCurve PolygonalCurve::scaled(double factor) const {
    std::vector<Vec3> v(verts_);
    for (auto& p : v) p *= factor;
    return unchecked(std::move(v));
}

std::string_view to_string(MoveKind kind) {
    switch (kind) {
        case MoveKind::BfacfGrow: return "bfacf-grow";
        case MoveKind::BfacfShrink: return "bfacf-shrink";
        case MoveKind::BfacfFlip: return "bfacf-flip";
        case MoveKind::Pivot: return "pivot";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// BFACF

int BfacfProposal::delta_length() const {
    switch (kind) {
        case MoveKind::BfacfGrow: return 2;
        case MoveKind::BfacfShrink: return -2;
        default: return 0;
    }
}

std::optional<BfacfProposal> propose_bfacf_at(const LatticePolygon& poly, MoveKind kind, std::size_t edge,
                                              Vec3i normal, std::size_t max_length) {
    const std::size_t n = poly.size();
    const auto i = static_cast<std::ptrdiff_t>(edge % n);
    const Vec3i a = poly.at_cyclic(i);
    const Vec3i b = poly.at_cyclic(i + 1);
    if (!is_unit_step(normal) || dot(normal, b - a) != 0) return std::nullopt;

    const Vec3i prev = poly.at_cyclic(i - 1);
    const Vec3i next = poly.at_cyclic(i + 2);
    const Vec3i an = a + normal;
    const Vec3i bn = b + normal;
    const bool prev_is_an = prev == an;
    const bool next_is_bn = next == bn;

    BfacfProposal p;
    p.kind = kind;
    p.edge = static_cast<std::size_t>(i);
    p.normal = normal;
    switch (kind) {
        case MoveKind::BfacfGrow:
            if (prev_is_an || next_is_bn) return std::nullopt;
            if (n + 2 > max_length) return std::nullopt;
            if (poly.occupied(an) || poly.occupied(bn)) return std::nullopt;
            p.removed = {{a, b}};
            p.added = {{a, an}, {an, bn}, {bn, b}};
            return p;
        case MoveKind::BfacfShrink:
            if (!(prev_is_an && next_is_bn)) return std::nullopt;
            if (n < 6) return std::nullopt;
            p.removed = {{an, a}, {a, b}, {b, bn}};
            p.added = {{an, bn}};
            return p;
        case MoveKind::BfacfFlip:
            if (prev_is_an == next_is_bn) return std::nullopt;
            if (prev_is_an) {
                if (poly.occupied(bn)) return std::nullopt;
                p.removed = {{an, a}, {a, b}};
                p.added = {{an, bn}, {bn, b}};
            } else {
                if (poly.occupied(an)) return std::nullopt;
                p.removed = {{a, b}, {b, bn}};
                p.added = {{a, an}, {an, bn}};
            }
            return p;
        case MoveKind::Pivot:
            break;
    }
    return std::nullopt;
}

std::pair<MoveKind, std::optional<BfacfProposal>> propose_bfacf(const LatticePolygon& poly, CounterRng& rng,
                                                                std::size_t max_length, BfacfMix mix) {
    const double u = rng.uniform();
    const MoveKind kind = u < mix.grow                ? MoveKind::BfacfGrow
                          : u < mix.grow + mix.shrink ? MoveKind::BfacfShrink
                                                      : MoveKind::BfacfFlip;
    const std::size_t edge = rng.below(poly.size());
    const Vec3i dir = poly.at_cyclic(static_cast<std::ptrdiff_t>(edge) + 1) - poly[edge];
    // The four unit steps perpendicular to the edge.
    std::array<Vec3i, 4> perp{};
    std::size_t k = 0;
    for (const auto& s : kUnitSteps) {
        if (dot(s, dir) == 0) perp[k++] = s;
    }
    const Vec3i normal = perp[rng.below(4)];
    return {kind, propose_bfacf_at(poly, kind, edge, normal, max_length)};
}

std::vector<Vec3i> preview_bfacf(const LatticePolygon& poly, const BfacfProposal& p) {
    std::vector<Vec3i> v(poly.vertices().begin(), poly.vertices().end());
    const std::size_t n = v.size();
    const std::size_t i = p.edge;
    const std::size_t j = (i + 1) % n;
    const Vec3i a = v[i];
    const Vec3i b = v[j];
    switch (p.kind) {
        case MoveKind::BfacfGrow:
            v.insert(v.begin() + static_cast<std::ptrdiff_t>(i + 1), {a + p.normal, b + p.normal});
            break;
        case MoveKind::BfacfShrink:
            v.erase(v.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
            v.erase(v.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
            break;
        case MoveKind::BfacfFlip:
            if (poly.at_cyclic(static_cast<std::ptrdiff_t>(i) - 1) == a + p.normal)
                v[i] = b + p.normal;
            else
                v[j] = a + p.normal;
            break;
        case MoveKind::Pivot:
            break;
    }
    return v;
}

void apply_bfacf(LatticePolygon& poly, const BfacfProposal& p) {
    auto& occ = LatticeEditor::occ(poly);
    const std::size_t n = poly.size();
    const Vec3i a = poly[p.edge];
    const Vec3i b = poly[(p.edge + 1) % n];
    switch (p.kind) {
        case MoveKind::BfacfGrow:
            occ.insert(a + p.normal);
            occ.insert(b + p.normal);
            break;
        case MoveKind::BfacfShrink:
            occ.erase(a);
            occ.erase(b);
            break;
        case MoveKind::BfacfFlip:
            if (poly.at_cyclic(static_cast<std::ptrdiff_t>(p.edge) - 1) == a + p.normal) {
                occ.erase(a);
                occ.insert(b + p.normal);
            } else {
                occ.erase(b);
                occ.insert(a + p.normal);
            }
            break;
        case MoveKind::Pivot:
            return;
    }
    LatticeEditor::verts(poly) = preview_bfacf(poly, p);
}

MoveOutcome bfacf_move(LatticePolygon& poly, CounterRng& rng, std::size_t max_length, BfacfMix mix) {
    auto [kind, proposal] = propose_bfacf(poly, rng, max_length, mix);
    if (!proposal) return {false, kind, 0};
    apply_bfacf(poly, *proposal);
    return {true, kind, proposal->delta_length()};
}

// ---------------------------------------------------------------------------
// Pivot

std::span<const LatticeSymmetry> cubic_symmetries() {
    static const std::vector<LatticeSymmetry> group = [] {
        std::vector<LatticeSymmetry> g;
        std::array<int, 3> perm{0, 1, 2};
        do {
            for (int s = 0; s < 8; ++s) {
                g.push_back({perm, {(s & 1) ? -1 : 1, (s & 2) ? -1 : 1, (s & 4) ? -1 : 1}});
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return g;
    }();
    return group;
}

std::vector<std::size_t> stabilizer(Vec3i axis) {
    std::vector<std::size_t> out;
    const auto group = cubic_symmetries();
    for (std::size_t k = 1; k < group.size(); ++k) {
        if (group[k].apply(axis) == axis) out.push_back(k);
    }
    return out;
}

MoveOutcome apply_pivot(LatticePolygon& poly, std::size_t arc_start, std::size_t arc_end,
                        std::size_t symmetry_index) {
    const MoveOutcome rejected{false, MoveKind::Pivot, 0};
    const std::size_t n = poly.size();
    const auto group = cubic_symmetries();
    if (symmetry_index >= group.size() || arc_start >= n || arc_end >= n || arc_start == arc_end) return rejected;
    const LatticeSymmetry& g = group[symmetry_index];
    const Vec3i origin = poly[arc_start];
    if (g.apply(poly[arc_end] - origin) != poly[arc_end] - origin) return rejected;
    if (g.is_identity()) return {true, MoveKind::Pivot, 0};

    auto& verts = LatticeEditor::verts(poly);
    auto& occ = LatticeEditor::occ(poly);
    std::vector<std::size_t> moved;
    for (std::size_t k = (arc_start + 1) % n; k != arc_end; k = (k + 1) % n) moved.push_back(k);

    std::vector<Vec3i> fresh;
    fresh.reserve(moved.size());
    for (auto k : moved) fresh.push_back(origin + g.apply(verts[k] - origin));
    for (auto k : moved) occ.erase(verts[k]);
    bool ok = true;
    for (const auto& p : fresh) {
        if (occ.contains(p)) {
            ok = false;
            break;
        }
    }
    if (!ok) {
        for (auto k : moved) occ.insert(verts[k]);
        return rejected;
    }
    for (std::size_t m = 0; m < moved.size(); ++m) {
        verts[moved[m]] = fresh[m];
        occ.insert(fresh[m]);
    }
    return {true, MoveKind::Pivot, 0};
}

MoveOutcome pivot_move(LatticePolygon& poly, CounterRng& rng) {
    const std::size_t n = poly.size();
    if (n < 6) return {false, MoveKind::Pivot, 0};
    std::size_t e1 = rng.below(n);
    std::size_t e2 = rng.below(n - 1);
    if (e2 >= e1) ++e2;
    if (e1 > e2) std::swap(e1, e2);
    // Arc A: vertices e1+1 .. e2 ; arc B: vertices e2+1 .. e1 (cyclic).
    const std::size_t len_a = e2 - e1;
    const std::size_t len_b = n - len_a;
    std::size_t start = (e1 + 1) % n, end = e2;
    if (len_b > len_a) {
        start = (e2 + 1) % n;
        end = e1;
    }
    if (start == end) return {false, MoveKind::Pivot, 0};
    const auto candidates = stabilizer(poly[end] - poly[start]);
    if (candidates.empty()) return {false, MoveKind::Pivot, 0};
    return apply_pivot(poly, start, end, candidates[rng.below(candidates.size())]);
}

bool check_self_avoiding(std::span<const Vec3i> vertices) {
    std::unordered_set<Vec3i, Vec3iHash> seen;
    seen.reserve(vertices.size() * 2);
    for (const auto& v : vertices) {
        if (!seen.insert(v).second) return false;
    }
    return true;
}

PolygonalCurve to_offlattice(const LatticePolygon& poly, double amplitude, std::uint64_t seed) {
    if (!(amplitude >= 0.0 && amplitude < 0.5)) throw std::out_of_range("jitter amplitude must lie in [0, 0.5)");
    CounterRng rng(seed, 0x6A6974746572ULL);  // stream tag "jitter"
    std::vector<Vec3> out;
    out.reserve(poly.size());
    for (const auto& p : poly.vertices()) {
        Vec3 v = p.cast();
        if (amplitude > 0.0) {
            for (int k = 0; k < 3; ++k) v[k] += rng.uniform(-amplitude, amplitude);
        }
        out.push_back(v);
    }
    return PolygonalCurve(std::move(out));
}

}  // namespace geoknot
