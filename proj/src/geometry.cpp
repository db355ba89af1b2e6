#include "geoknot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace geoknot {

std::array<double, 10> FunctionalVector::values() const {
    return {sigma_plus, omega_plus, kappa_plus, max_distance, pi_5, pi_10, pi_20, acn, entanglement,
            radius_of_gyration};
}

std::optional<double> FunctionalVector::get(std::string_view name) const {
    const auto v = values();
    for (std::size_t k = 0; k < kNames.size(); ++k) {
        if (kNames[k] == name) return v[k];
    }
    return std::nullopt;
}

DistanceMatrix pairwise_distance_matrix(const PolygonalCurve& curve) {
    const auto n = static_cast<Eigen::Index>(curve.size());
    DistanceMatrix m{Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (curve[static_cast<std::size_t>(i)] - curve[static_cast<std::size_t>(j)]).norm();
            m.entries(i, j) = d;
            m.entries(j, i) = d;
        }
    }
    return m;
}

double sigma_plus(const DistanceMatrix& m) { return m.entries.sum(); }

double max_pairwise(const DistanceMatrix& m) { return m.size() == 0 ? 0.0 : m.entries.maxCoeff(); }

std::size_t peak_count(const DistanceMatrix& m, double tolerance) {
    if (tolerance < 0) throw std::invalid_argument("peak tolerance must be non-negative");
    const auto n = static_cast<long>(m.size());
    std::vector<char> seen(static_cast<std::size_t>(n * n), 0);
    auto above = [&](long i, long j) { return i < j && m.entries(i, j) > tolerance; };
    std::size_t components = 0;
    std::vector<std::pair<long, long>> stack;
    for (long i = 0; i < n; ++i) {
        for (long j = i + 1; j < n; ++j) {
            if (!above(i, j) || seen[static_cast<std::size_t>(i * n + j)]) continue;
            ++components;
            stack.push_back({i, j});
            seen[static_cast<std::size_t>(i * n + j)] = 1;
            while (!stack.empty()) {
                auto [a, b] = stack.back();
                stack.pop_back();
                const std::array<std::pair<long, long>, 4> nbrs{{{a - 1, b}, {a + 1, b}, {a, b - 1}, {a, b + 1}}};
                for (auto [p, q] : nbrs) {
                    if (p < 0 || q < 0 || p >= n || q >= n) continue;
                    if (!above(p, q) || seen[static_cast<std::size_t>(p * n + q)]) continue;
                    seen[static_cast<std::size_t>(p * n + q)] = 1;
                    stack.push_back({p, q});
                }
            }
        }
    }
    return components;
}

// ---------------------------------------------------------------------------
// Banchoff / Klenin-Langowski solid angle

double segment_pair_solid_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4, bool* degenerate) {
    if (degenerate) *degenerate = false;
    const Vec3 r12 = p2 - p1;
    const Vec3 r34 = p4 - p3;
    const Vec3 r13 = p3 - p1;
    const Vec3 r14 = p4 - p1;
    const Vec3 r23 = p3 - p2;
    const Vec3 r24 = p4 - p2;

    std::array<Vec3, 4> normal{r13.cross(r14), r14.cross(r24), r24.cross(r23), r23.cross(r13)};
    const double orientation = r34.cross(r12).dot(r13);
    if (orientation == 0.0) {
        // Coplanar segments subtend no solid angle; vanishing normals are flagged.
        if (degenerate) {
            *degenerate = std::any_of(normal.begin(), normal.end(), [](const Vec3& n) { return n.squaredNorm() == 0.0; });
        }
        return 0.0;
    }
    for (auto& n : normal) {
        const double len = n.norm();
        if (len == 0.0) {
            if (degenerate) *degenerate = true;
            return 0.0;
        }
        n /= len;
    }
    // asin(a.b) evaluated as atan2(a.b, |a x b|) to stay accurate near +-1.
    double omega = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec3& a = normal[static_cast<std::size_t>(k)];
        const Vec3& b = normal[static_cast<std::size_t>((k + 1) % 4)];
        omega += std::atan2(a.dot(b), a.cross(b).norm());
    }
    return orientation > 0 ? omega : -omega;
}

WritheMatrix writhe_matrix(const PolygonalCurve& curve) {
    const std::size_t n = curve.size();
    WritheMatrix w{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through the closing segment
            bool degenerate = false;
            const double omega =
                segment_pair_solid_angle(curve[i], curve[(i + 1) % n], curve[j], curve[(j + 1) % n], &degenerate);
            if (degenerate) ++w.degenerate_pairs;
            w.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = omega;
            w.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = omega;
        }
    }
    return w;
}

double total_writhe(const WritheMatrix& w) { return w.entries.sum() / (4.0 * std::numbers::pi); }

double acn(const WritheMatrix& w) { return w.entries.cwiseAbs().sum() / (4.0 * std::numbers::pi); }

// ---------------------------------------------------------------------------
// Lattice writhe via four tilted octant projections

namespace {

// Tilt: d(eps) = D + eps * e_x + eps^2 * e_y. {D, e_x, e_y} is a basis for every
// octant direction D, so a nonzero integer vector never evaluates to an
// identically vanishing polynomial in eps.
int lex_sign(Vec3i c, Vec3i direction) {
    const long long c0 = dot(c, direction);
    if (c0 != 0) return c0 > 0 ? 1 : -1;
    if (c.x != 0) return c.x > 0 ? 1 : -1;
    if (c.y != 0) return c.y > 0 ? 1 : -1;
    return 0;
}

// Crossing sign of edges (p, p+u) and (q, q+v) in the tilted projection along D, or 0.
int edge_pair_crossing(Vec3i p, Vec3i u, Vec3i q, Vec3i v, Vec3i direction) {
    const Vec3i uv = cross(u, v);
    if (uv == Vec3i{}) return 0;
    const Vec3i w = q - p;
    // Solve p + s u + lambda d = q + t v with A = [u, -v, d]; det A = -(u x v).d.
    const Vec3i det_a = -uv;
    const int sd = lex_sign(det_a, direction);
    const Vec3i num_s = -cross(w, v);  // det[w, -v, d]
    const Vec3i num_t = cross(u, w);   // det[u, w, d]
    if (lex_sign(num_s, direction) != sd || lex_sign(det_a - num_s, direction) != sd) return 0;
    if (lex_sign(num_t, direction) != sd || lex_sign(det_a - num_t, direction) != sd) return 0;
    const long long orient = dot(uv, w);
    if (orient == 0) return 0;
    return orient < 0 ? 1 : -1;  // sign((u x v) . (p - q))
}

}  // namespace

int lattice_edge_pair_tait(const LatticeEdge& a, const LatticeEdge& b) {
    const Vec3i u = a.end - a.start;
    const Vec3i v = b.end - b.start;
    int total = 0;
    for (const auto& d : kOctantDirections) total += edge_pair_crossing(a.start, u, b.start, v, d);
    return total;
}

int tait_number(const LatticePolygon& poly, std::size_t direction) {
    const Vec3i d = kOctantDirections.at(direction);
    const std::size_t n = poly.size();
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3i p = poly[i];
        const Vec3i u = poly[(i + 1) % n] - p;
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec3i q = poly[j];
            total += edge_pair_crossing(p, u, q, poly[(j + 1) % n] - q, d);
        }
    }
    return total;
}

double lattice_writhe(const LatticePolygon& poly) {
    const std::size_t n = poly.size();
    long long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const LatticeEdge a{poly[i], poly[(i + 1) % n]};
        for (std::size_t j = i + 1; j < n; ++j) total += lattice_edge_pair_tait(a, {poly[j], poly[(j + 1) % n]});
    }
    return static_cast<double>(total) / 4.0;
}

// ---------------------------------------------------------------------------

double total_curvature(const PolygonalCurve& curve) {
    const std::size_t n = curve.size();
    double kappa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 in = curve[i] - curve.at_cyclic(static_cast<std::ptrdiff_t>(i) - 1);
        const Vec3 out = curve[(i + 1) % n] - curve[i];
        kappa += std::atan2(in.cross(out).norm(), in.dot(out));
    }
    return kappa;
}

std::size_t long_range_entanglement(const PolygonalCurve& curve, double distance_threshold,
                                    std::size_t index_threshold, EntanglementMode mode) {
    if (!(distance_threshold > 0)) throw std::invalid_argument("distance threshold must be positive");
    if (index_threshold == 0) throw std::invalid_argument("index threshold must be positive");
    const std::size_t n = curve.size();
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t q = j - i;
            const std::size_t sep = std::min(q, n - q);
            const bool keep = mode == EntanglementMode::LongRange ? sep > index_threshold : sep < index_threshold;
            if (keep && (curve[i] - curve[j]).norm() < distance_threshold) ++count;
        }
    }
    return count;
}

double radius_of_gyration(const PolygonalCurve& curve) {
    const std::size_t n = curve.size();
    if (n == 0) return 0.0;
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : curve.vertices()) centroid += p;
    centroid /= static_cast<double>(n);
    double s = 0.0;
    for (const auto& p : curve.vertices()) s += (p - centroid).squaredNorm();
    // (1/N^2) sum_ij |x_i - x_j|^2 = (2/N) sum_i |x_i - c|^2
    return std::sqrt(2.0 * s / static_cast<double>(n));
}

FunctionalVector functional_vector(const PolygonalCurve& curve, const LatticePolygon* lattice) {
    const DistanceMatrix d = pairwise_distance_matrix(curve);
    const WritheMatrix w = writhe_matrix(curve);
    FunctionalVector f;
    f.sigma_plus = sigma_plus(d);
    f.omega_plus = lattice ? lattice_writhe(*lattice) : total_writhe(w);
    f.kappa_plus = total_curvature(curve);
    f.max_distance = max_pairwise(d);
    f.pi_5 = static_cast<double>(peak_count(d, 5.0));
    f.pi_10 = static_cast<double>(peak_count(d, 10.0));
    f.pi_20 = static_cast<double>(peak_count(d, 20.0));
    f.acn = acn(w);
    f.entanglement = static_cast<double>(long_range_entanglement(curve));
    f.radius_of_gyration = radius_of_gyration(curve);
    return f;
}

}  // namespace geoknot
