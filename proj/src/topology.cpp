#include "geoknot/topology.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace geoknot {

std::string_view to_string(KnotClass k) {
    switch (k) {
        case KnotClass::Unknot: return "0_1";
        case KnotClass::Trefoil: return "3_1";
        case KnotClass::Other: return "other";
    }
    return "other";
}

KnotClass parse_knot_class(std::string_view label) {
    if (label == "0_1" || label == "0₁" || label == "01") return KnotClass::Unknot;
    if (label == "3_1" || label == "3₁" || label == "31") return KnotClass::Trefoil;
    if (label == "other") return KnotClass::Other;
    throw std::invalid_argument("unknown knot label: " + std::string(label));
}

// ---------------------------------------------------------------------------
// KnotDiagram

KnotDiagram::KnotDiagram(std::vector<GaussEvent> events, std::vector<int> signs)
    : events_(std::move(events)), signs_(std::move(signs)) {
    if (events_.size() != 2 * signs_.size()) throw std::invalid_argument("gauss code must visit each crossing twice");
    std::vector<int> over(signs_.size(), 0), under(signs_.size(), 0);
    for (const auto& e : events_) {
        if (e.crossing >= signs_.size()) throw std::invalid_argument("crossing index out of range");
        ++(e.over ? over : under)[e.crossing];
    }
    for (std::size_t c = 0; c < signs_.size(); ++c) {
        if (over[c] != 1 || under[c] != 1) throw std::invalid_argument("crossing must be passed once over and once under");
        if (signs_[c] != 1 && signs_[c] != -1) throw std::invalid_argument("crossing sign must be +1 or -1");
    }
}

KnotDiagram KnotDiagram::from_gauss_code(std::string_view code) {
    std::vector<GaussEvent> events;
    std::map<long, std::size_t> ids;
    std::map<std::size_t, int> signs;
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < code.size() && (code[pos] == ' ' || code[pos] == '\t' || code[pos] == ',')) ++pos;
    };
    skip_space();
    while (pos < code.size()) {
        const char kind = code[pos++];
        if (kind != 'O' && kind != 'U') throw std::invalid_argument("gauss code token must start with O or U");
        long label = 0;
        auto [ptr, ec] = std::from_chars(code.data() + pos, code.data() + code.size(), label);
        if (ec != std::errc{} || label <= 0) throw std::invalid_argument("bad crossing label in gauss code");
        pos = static_cast<std::size_t>(ptr - code.data());
        int sign = 0;
        if (pos < code.size() && code[pos] == '+') {
            sign = 1;
            ++pos;
        } else if (pos < code.size() && code[pos] == '-') {
            sign = -1;
            ++pos;
        } else if (code.substr(pos).starts_with("−")) {
            sign = -1;
            pos += 3;
        } else {
            throw std::invalid_argument("missing crossing sign in gauss code");
        }
        auto [it, fresh] = ids.try_emplace(label, ids.size());
        auto [sit, sfresh] = signs.try_emplace(it->second, sign);
        if (!sfresh && sit->second != sign) throw std::invalid_argument("inconsistent crossing sign in gauss code");
        events.push_back({it->second, kind == 'O'});
        skip_space();
    }
    std::vector<int> sign_list(ids.size());
    for (auto [c, s] : signs) sign_list[c] = s;
    return KnotDiagram(std::move(events), std::move(sign_list));
}

std::string KnotDiagram::gauss_code() const {
    std::string out;
    for (const auto& e : events_) {
        if (!out.empty()) out += ' ';
        out += e.over ? 'O' : 'U';
        out += std::to_string(e.crossing + 1);
        out += signs_[e.crossing] > 0 ? '+' : '-';
    }
    return out;
}

std::vector<Crossing> KnotDiagram::crossings() const {
    const std::size_t n = signs_.size();
    std::vector<Crossing> out(n);
    std::size_t unders = 0;
    for (const auto& e : events_) {
        Crossing& c = out[e.crossing];
        c.sign = signs_[e.crossing];
        if (e.over) {
            c.over_arc = (unders + n - 1) % n;
        } else {
            c.under_in = (unders + n - 1) % n;
            c.under_out = unders;
            ++unders;
        }
    }
    return out;
}

int KnotDiagram::writhe() const {
    int w = 0;
    for (int s : signs_) w += s;
    return w;
}

KnotDiagram KnotDiagram::rebased(std::size_t offset) const {
    if (events_.empty()) return *this;
    std::vector<GaussEvent> events(events_.size());
    for (std::size_t k = 0; k < events_.size(); ++k) events[k] = events_[(k + offset) % events_.size()];
    return KnotDiagram(std::move(events), signs_);
}

// ---------------------------------------------------------------------------
// Projection

std::vector<Vec3> projection_schedule(std::size_t count, std::uint64_t salt) {
    CounterRng rng(0x70726F6A656374ULL, salt);
    std::vector<Vec3> dirs;
    while (dirs.size() < count) {
        Vec3 v{rng.normal(), rng.normal(), rng.normal()};
        const double len = v.norm();
        if (len < 1e-6) continue;
        dirs.push_back(v / len);
    }
    return dirs;
}

namespace {

constexpr double kGenericTol = 1e-9;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

struct RawCrossing {
    std::size_t over_seg, under_seg;
    double over_param, under_param;
    int sign;
};

std::optional<KnotDiagram> try_project(const PolygonalCurve& curve, const Vec3& d) {
    const std::size_t n = curve.size();
    Vec3 lo = curve[0], hi = curve[0];
    for (const auto& p : curve.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double scale = std::max((hi - lo).maxCoeff(), 1e-300);

    Vec3 e1 = std::abs(d.x()) < 0.9 ? Vec3::UnitX().cross(d) : Vec3::UnitY().cross(d);
    e1.normalize();
    const Vec3 e2 = d.cross(e1);
    std::vector<Eigen::Vector2d> q(n);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = {curve[i].dot(e1), curve[i].dot(e2)};
        h[i] = curve[i].dot(d);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d r = q[(i + 1) % n] - q[i];
        if (r.norm() <= kGenericTol * scale) return std::nullopt;
        const Eigen::Vector2d s = q[(i + 2) % n] - q[(i + 1) % n];
        if (std::abs(cross2(r, s)) <= kGenericTol * r.norm() * s.norm() && r.dot(s) < 0) return std::nullopt;
    }

    std::vector<RawCrossing> raw;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d a = q[i];
        const Eigen::Vector2d r = q[(i + 1) % n] - a;
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            const Eigen::Vector2d c = q[j];
            const Eigen::Vector2d s = q[(j + 1) % n] - c;
            const double den = cross2(r, s);
            const Eigen::Vector2d ac = c - a;
            if (std::abs(den) <= kGenericTol * r.norm() * s.norm()) {
                if (std::abs(cross2(r, ac)) / r.norm() > kGenericTol * scale) continue;
                const double rr = r.squaredNorm();
                const double t0 = ac.dot(r) / rr;
                const double t1 = (ac + s).dot(r) / rr;
                if (std::max(t0, t1) < -kGenericTol || std::min(t0, t1) > 1 + kGenericTol) continue;
                return std::nullopt;
            }
            const double ti = cross2(ac, s) / den;
            const double tj = cross2(ac, r) / den;
            if (ti < -kGenericTol || ti > 1 + kGenericTol || tj < -kGenericTol || tj > 1 + kGenericTol) continue;
            if (ti <= kGenericTol || ti >= 1 - kGenericTol || tj <= kGenericTol || tj >= 1 - kGenericTol)
                return std::nullopt;
            const double hi_ = h[i] + ti * (h[(i + 1) % n] - h[i]);
            const double hj = h[j] + tj * (h[(j + 1) % n] - h[j]);
            if (std::abs(hi_ - hj) <= kGenericTol * scale) return std::nullopt;
            const Vec3 ui = curve[(i + 1) % n] - curve[i];
            const Vec3 uj = curve[(j + 1) % n] - curve[j];
            if (hi_ > hj) {
                raw.push_back({i, j, ti, tj, ui.cross(uj).dot(d) > 0 ? 1 : -1});
            } else {
                raw.push_back({j, i, tj, ti, uj.cross(ui).dot(d) > 0 ? 1 : -1});
            }
        }
    }

    struct Passage {
        std::size_t seg;
        double param;
        std::size_t crossing;
        bool over;
    };
    std::vector<Passage> walk;
    walk.reserve(2 * raw.size());
    for (std::size_t c = 0; c < raw.size(); ++c) {
        walk.push_back({raw[c].over_seg, raw[c].over_param, c, true});
        walk.push_back({raw[c].under_seg, raw[c].under_param, c, false});
    }
    std::sort(walk.begin(), walk.end(), [](const Passage& a, const Passage& b) {
        return a.seg != b.seg ? a.seg < b.seg : a.param < b.param;
    });
    for (std::size_t k = 1; k < walk.size(); ++k) {
        if (walk[k].seg == walk[k - 1].seg && walk[k].param - walk[k - 1].param <= kGenericTol) return std::nullopt;
    }

    // Relabel crossings in order of first appearance.
    std::vector<std::size_t> label(raw.size(), raw.size());
    std::size_t next = 0;
    std::vector<GaussEvent> events;
    events.reserve(walk.size());
    for (const auto& p : walk) {
        if (label[p.crossing] == raw.size()) label[p.crossing] = next++;
        events.push_back({label[p.crossing], p.over});
    }
    std::vector<int> signs(raw.size());
    for (std::size_t c = 0; c < raw.size(); ++c) signs[label[c]] = raw[c].sign;
    return KnotDiagram(std::move(events), std::move(signs));
}

}  // namespace

KnotDiagram project_to_diagram(const PolygonalCurve& curve, const Vec3& direction) {
    const double len = direction.norm();
    if (!(len > 0) || !std::isfinite(len)) throw std::invalid_argument("projection direction must be nonzero");
    const Vec3 d = direction / len;
    if (auto diagram = try_project(curve, d)) return *diagram;
    CounterRng tilts(0x74696C74ULL, 0);
    for (int k = 1; k <= 32; ++k) {
        const Vec3 kick{tilts.normal(), tilts.normal(), tilts.normal()};
        const Vec3 tilted = (d + 1e-3 * k * kick).normalized();
        if (auto diagram = try_project(curve, tilted)) return *diagram;
    }
    throw ProjectionError("no generic projection direction found after 32 tilts");
}

// ---------------------------------------------------------------------------
// Alexander determinant

double alexander_determinant(const KnotDiagram& diagram, double t) {
    const std::size_t n = diagram.crossing_count();
    if (n <= 1) return 1.0;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const auto crossings = diagram.crossings();
    for (std::size_t r = 0; r < n; ++r) {
        const Crossing& c = crossings[r];
        const auto row = static_cast<Eigen::Index>(r);
        a(row, static_cast<Eigen::Index>(c.over_arc)) += 1 - t;
        a(row, static_cast<Eigen::Index>(c.under_in)) += c.sign > 0 ? t : -1.0;
        a(row, static_cast<Eigen::Index>(c.under_out)) += c.sign > 0 ? -1.0 : t;
    }
    const auto m = static_cast<Eigen::Index>(n - 1);
    return std::abs(a.topLeftCorner(m, m).fullPivLu().determinant());
}

std::int64_t knot_determinant(const KnotDiagram& diagram) {
    using boost::multiprecision::cpp_int;
    const std::size_t n = diagram.crossing_count();
    if (n <= 1) return 1;
    const std::size_t m = n - 1;
    std::vector<std::vector<cpp_int>> a(m, std::vector<cpp_int>(m, 0));
    const auto crossings = diagram.crossings();
    auto add = [&](std::size_t r, std::size_t col, int v) {
        if (r < m && col < m) a[r][col] += v;
    };
    for (std::size_t r = 0; r < m; ++r) {
        const Crossing& c = crossings[r];
        add(r, c.over_arc, 2);
        add(r, c.under_in, -1);
        add(r, c.under_out, -1);
    }
    // Fraction-free Gaussian elimination.
    cpp_int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k < m; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < m && a[p][k] == 0) ++p;
            if (p == m) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < m; ++i) {
            for (std::size_t j = k + 1; j < m; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    cpp_int det = a[m - 1][m - 1] * sign;
    if (det < 0) det = -det;
    return det.convert_to<std::int64_t>();
}

// ---------------------------------------------------------------------------
// Vassiliev v2

int vassiliev_v2_exact(const KnotDiagram& diagram) {
    const std::size_t n = diagram.crossing_count();
    std::vector<std::size_t> first(n, SIZE_MAX), second(n, SIZE_MAX);
    std::vector<bool> first_over(n, false);
    const auto& events = diagram.events();
    for (std::size_t p = 0; p < events.size(); ++p) {
        const std::size_t c = events[p].crossing;
        if (first[c] == SIZE_MAX) {
            first[c] = p;
            first_over[c] = events[p].over;
        } else {
            second[c] = p;
        }
    }
    // Interleaved pairs a ... b ... a ... b where a is first met passing under
    // and b is first met passing over.
    int v2 = 0;
    for (std::size_t a = 0; a < n; ++a) {
        if (first_over[a]) continue;
        for (std::size_t b = 0; b < n; ++b) {
            if (!first_over[b]) continue;
            if (first[a] < first[b] && first[b] < second[a] && second[a] < second[b])
                v2 += diagram.signs()[a] * diagram.signs()[b];
        }
    }
    return v2;
}

double vassiliev_v2_writhe(const WritheMatrix& w) {
    const auto n = static_cast<Eigen::Index>(w.size());
    if (n < 4) return 0.0;
    // c(a, b) = sum_{i < a, k < b} w_ik
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) c(i + 1, k + 1) = w.entries(i, k) + c(i, k + 1) + c(i + 1, k) - c(i, k);
    }
    double total = 0.0;
    for (Eigen::Index j = 1; j < n; ++j) {
        for (Eigen::Index l = j + 2; l < n; ++l) {
            // sum over i < j and j < k < l
            const double inner = c(j, l) - c(j, j + 1);
            total += w.entries(j, l) * inner;
        }
    }
    const double four_pi = 4.0 * std::numbers::pi;
    return total / (four_pi * four_pi);
}

// ---------------------------------------------------------------------------
// Triangle-removal simplification

namespace {

double orient(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) { return (b - a).cross(c - a).dot(d - a); }

// Conservative closed test in the plane of triangle abc (normal nrm).
bool coplanar_segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c,
                                    const Vec3& nrm, double eps) {
    auto side = [&](const Vec3& u, const Vec3& v, const Vec3& x) { return (v - u).cross(x - u).dot(nrm); };
    auto inside = [&](const Vec3& x) {
        return side(a, b, x) >= -eps && side(b, c, x) >= -eps && side(c, a, x) >= -eps;
    };
    if (inside(p) || inside(q)) return true;
    const std::array<std::pair<Vec3, Vec3>, 3> edges{{{a, b}, {b, c}, {c, a}}};
    for (const auto& [u, v] : edges) {
        const double s1 = side(p, q, u), s2 = side(p, q, v);
        const double s3 = side(u, v, p), s4 = side(u, v, q);
        const bool straddle_pq = !(s1 > eps && s2 > eps) && !(s1 < -eps && s2 < -eps);
        const bool straddle_uv = !(s3 > eps && s4 > eps) && !(s3 < -eps && s4 < -eps);
        if (straddle_pq && straddle_uv) return true;
    }
    return false;
}

bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c, double eps) {
    const double op = orient(a, b, c, p);
    const double oq = orient(a, b, c, q);
    if ((op > eps && oq > eps) || (op < -eps && oq < -eps)) return false;
    if (std::abs(op) <= eps && std::abs(oq) <= eps) {
        const Vec3 nrm = (b - a).cross(c - a);
        return coplanar_segment_hits_triangle(p, q, a, b, c, nrm, eps);
    }
    const double s1 = orient(p, q, a, b);
    const double s2 = orient(p, q, b, c);
    const double s3 = orient(p, q, c, a);
    const bool pos = s1 > eps || s2 > eps || s3 > eps;
    const bool neg = s1 < -eps || s2 < -eps || s3 < -eps;
    return !(pos && neg);
}

// Segment from triangle corner s (one of a, c) to p: blocks the removal when
// it lies in the plane and points into the closed corner.
bool corner_segment_blocks(const Vec3& s, const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                           const Vec3& other, double eps) {
    if (std::abs(orient(a, b, c, p)) > eps) return false;
    const Vec3 nrm = (b - a).cross(c - a);
    const Vec3 w = p - s;
    const Vec3 to_b = b - s;
    const Vec3 to_other = other - s;
    const double sb = to_b.cross(w).dot(nrm);
    const double so = to_other.cross(w).dot(nrm);
    // w is inside the closed cone spanned by to_b and to_other
    const double orientation = to_b.cross(to_other).dot(nrm);
    if (orientation > 0) return sb >= -eps && so <= eps;
    return sb <= eps && so >= -eps;
}

}  // namespace

PolygonalCurve simplify_curve(const PolygonalCurve& curve) {
    std::vector<Vec3> v(curve.vertices().begin(), curve.vertices().end());
    if (v.size() <= 3) return curve;
    Vec3 lo = v[0], hi = v[0];
    for (const auto& p : v) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double scale = std::max((hi - lo).maxCoeff(), 1.0);
    const double eps = 1e-12 * scale * scale * scale;

    bool changed = true;
    while (changed && v.size() > 3) {
        changed = false;
        for (std::size_t i = 0; i < v.size() && v.size() > 3;) {
            const std::size_t n = v.size();
            const std::size_t ia = (i + n - 1) % n;
            const std::size_t ic = (i + 1) % n;
            const Vec3& a = v[ia];
            const Vec3& b = v[i];
            const Vec3& c = v[ic];
            bool blocked = false;
            const Vec3 nrm = (b - a).cross(c - a);
            if (nrm.squaredNorm() <= 1e-24 * scale * scale * scale * scale) {
                blocked = (b - a).dot(c - b) <= 0;
            } else {
                for (std::size_t k = 0; k < n && !blocked; ++k) {
                    const std::size_t k1 = (k + 1) % n;
                    if (k == ia || k == i) continue;
                    if (k1 == ia) {
                        blocked = corner_segment_blocks(a, v[k], a, b, c, c, eps);
                    } else if (k == ic) {
                        blocked = corner_segment_blocks(c, v[k1], a, b, c, a, eps);
                    } else {
                        blocked = segment_hits_triangle(v[k], v[k1], a, b, c, eps);
                    }
                }
            }
            if (blocked) {
                ++i;
                continue;
            }
            v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
            changed = true;
        }
    }
    return PolygonalCurve::unchecked(std::move(v));
}

// ---------------------------------------------------------------------------
// Verification

std::pair<std::int64_t, int> expected_invariants(KnotClass k) {
    switch (k) {
        case KnotClass::Unknot: return {1, 0};
        case KnotClass::Trefoil: return {3, 1};
        case KnotClass::Other: break;
    }
    throw std::invalid_argument("no invariant signature for class 'other'");
}

namespace {

KnotDiagram schedule_diagram(const PolygonalCurve& simplified, std::uint64_t salt) {
    std::optional<ProjectionError> last;
    for (const auto& d : projection_schedule(4, salt)) {
        try {
            return project_to_diagram(simplified, d);
        } catch (const ProjectionError& e) {
            last = e;
        }
    }
    throw *last;
}

}  // namespace

VerificationResult verify_knot_class(const PolygonalCurve& curve, KnotClass expected, std::uint64_t schedule_salt) {
    VerificationResult r;
    const KnotDiagram diagram = schedule_diagram(simplify_curve(curve), schedule_salt);
    r.determinant = knot_determinant(diagram);
    r.v2_exact = vassiliev_v2_exact(diagram);
    r.v2_writhe = vassiliev_v2_writhe(writhe_matrix(curve));
    if (expected == KnotClass::Other) return r;
    const auto [det, v2] = expected_invariants(expected);
    if (r.determinant == det) r.checks_passed.emplace_back("determinant");
    if (std::abs(r.v2_exact) == v2) r.checks_passed.emplace_back("v2");
    if (r.checks_passed.size() == 2) r.verdict = expected;
    return r;
}

VerificationResult verify_knot_class(const LatticePolygon& poly, KnotClass expected, std::uint64_t schedule_salt) {
    return verify_knot_class(PolygonalCurve::from_lattice(poly), expected, schedule_salt);
}

KnotClass classify(const PolygonalCurve& curve, std::uint64_t schedule_salt) {
    const KnotDiagram diagram = schedule_diagram(simplify_curve(curve), schedule_salt);
    const std::int64_t det = knot_determinant(diagram);
    const int v2 = vassiliev_v2_exact(diagram);
    if (det == 1 && v2 == 0) return KnotClass::Unknot;
    if (det == 3 && std::abs(v2) == 1) return KnotClass::Trefoil;
    return KnotClass::Other;
}

}  // namespace geoknot
