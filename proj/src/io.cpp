#include "geoknot/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace geoknot {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

double parse_real(std::string_view token, std::string_view what) {
    std::string s(token);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw IoError("malformed " + std::string(what) + ": '" + s + "'");
    if (!std::isfinite(v)) throw IoError("non-finite " + std::string(what));
    return v;
}

std::size_t read_count(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("missing count line");
    std::istringstream ls(line);
    long long n = -1;
    std::string rest;
    if (!(ls >> n) || (ls >> rest) || n < 0) throw IoError("malformed count line: '" + line + "'");
    return static_cast<std::size_t>(n);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double quantize(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

PolygonalCurve quantize(const PolygonalCurve& curve) {
    std::vector<Vec3> v;
    v.reserve(curve.size());
    for (const auto& p : curve.vertices()) v.emplace_back(quantize(p.x()), quantize(p.y()), quantize(p.z()));
    return PolygonalCurve(std::move(v));
}

// ---------------------------------------------------------------------------
// XYZ

void write_xyz(std::ostream& os, const PolygonalCurve& curve) {
    os << curve.size() << '\n';
    for (const auto& p : curve.vertices())
        os << format_real(p.x()) << ' ' << format_real(p.y()) << ' ' << format_real(p.z()) << '\n';
}

void write_xyz(const std::filesystem::path& path, const PolygonalCurve& curve) {
    auto out = open_out(path);
    write_xyz(out, curve);
    finish(out, path);
}

PolygonalCurve read_xyz(std::istream& is) {
    const std::size_t n = read_count(is);
    std::vector<Vec3> v;
    v.reserve(n);
    std::string line;
    while (std::getline(is, line)) {
        if (blank(line)) continue;
        if (v.size() == n) throw IoError("more coordinate lines than the declared count " + std::to_string(n));
        std::istringstream ls(line);
        std::string a, b, c, rest;
        if (!(ls >> a >> b >> c) || (ls >> rest)) throw IoError("malformed coordinate line: '" + line + "'");
        v.emplace_back(parse_real(a, "coordinate"), parse_real(b, "coordinate"), parse_real(c, "coordinate"));
    }
    if (v.size() != n)
        throw IoError("declared " + std::to_string(n) + " vertices, found " + std::to_string(v.size()));
    try {
        return PolygonalCurve(std::move(v));
    } catch (const InvalidGeometry& e) {
        throw IoError(std::string("invalid curve: ") + e.what());
    }
}

PolygonalCurve read_xyz(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_xyz(in);
}

// ---------------------------------------------------------------------------
// Lattice polygons and seeds

LatticePolygon read_lattice_polygon(std::istream& is) {
    const std::size_t n = read_count(is);
    std::vector<Vec3i> v;
    v.reserve(n);
    std::string line;
    while (std::getline(is, line)) {
        if (blank(line)) continue;
        if (v.size() == n) throw IoError("more vertex lines than the declared count");
        std::istringstream ls(line);
        Vec3i p;
        std::string rest;
        if (!(ls >> p.x >> p.y >> p.z) || (ls >> rest)) throw IoError("malformed lattice vertex: '" + line + "'");
        v.push_back(p);
    }
    if (v.size() != n) throw IoError("declared " + std::to_string(n) + " vertices, found " + std::to_string(v.size()));
    try {
        return LatticePolygon::from_vertices(std::move(v));
    } catch (const InvalidGeometry& e) {
        throw IoError(std::string("invalid lattice polygon: ") + e.what());
    }
}

LatticePolygon read_lattice_polygon(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_lattice_polygon(in);
}

void write_lattice_polygon(std::ostream& os, const LatticePolygon& poly) {
    os << poly.size() << '\n';
    for (const auto& p : poly.vertices()) os << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

std::filesystem::path default_seed_dir() {
    if (const char* env = std::getenv("GEOKNOT_SEED_DIR"); env && *env) return env;
    return GEOKNOT_SEED_DIR;
}

LatticePolygon load_seed_polygon(KnotClass knot, const std::filesystem::path& dir) {
    if (knot == KnotClass::Other) throw std::invalid_argument("no seed for class 'other'");
    const auto path = dir / (std::string(to_string(knot)) + ".txt");
    LatticePolygon poly = read_lattice_polygon(path);
    const auto check = verify_knot_class(poly, knot);
    if (check.verdict != knot)
        throw IoError("seed " + path.string() + " does not verify as " + std::string(to_string(knot)));
    return poly;
}

LatticePolygon load_seed_polygon(std::string_view label, const std::filesystem::path& dir) {
    return load_seed_polygon(parse_knot_class(label), dir);
}

// ---------------------------------------------------------------------------
// Writhe matrix CSV

void write_writhe_matrix(std::ostream& os, const WritheMatrix& w) {
    const auto n = static_cast<Eigen::Index>(w.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j) os << ',';
            os << format_real(w.entries(i, j));
        }
        os << '\n';
    }
}

void write_writhe_matrix(const std::filesystem::path& path, const WritheMatrix& w) {
    auto out = open_out(path);
    write_writhe_matrix(out, w);
    finish(out, path);
}

WritheMatrix read_writhe_matrix(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (blank(line)) continue;
        std::vector<double> row;
        for (const auto& cell : split(line, ',')) row.push_back(parse_real(cell, "matrix entry"));
        rows.push_back(std::move(row));
    }
    const std::size_t n = rows.size();
    WritheMatrix w{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw IoError("writhe matrix is not square");
        for (std::size_t j = 0; j < n; ++j)
            w.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(rows[i][j] - rows[j][i]) > 1e-6) throw IoError("writhe matrix is not symmetric");
        }
    }
    return w;
}

WritheMatrix read_writhe_matrix(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_writhe_matrix(in);
}

// ---------------------------------------------------------------------------
// Manifest

void write_manifest(std::ostream& os, const std::vector<ManifestRow>& rows) {
    os << kManifestHeader << '\n';
    char buf[40];
    for (const auto& r : rows) {
        os << r.id << ',' << r.label << ',' << r.path << ',' << r.seed << ',' << r.chain_id;
        for (double v : r.functionals.values()) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << ',' << buf;
        }
        os << '\n';
    }
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
    auto out = open_out(path);
    write_manifest(out, rows);
    finish(out, path);
}

std::vector<ManifestRow> read_manifest(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty manifest");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader) throw IoError("unexpected manifest header: '" + line + "'");
    std::vector<ManifestRow> rows;
    std::unordered_set<std::string> ids;
    while (std::getline(is, line)) {
        if (blank(line)) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 15) throw IoError("manifest row has " + std::to_string(cells.size()) + " columns");
        ManifestRow r;
        r.id = cells[0];
        r.label = cells[1];
        r.path = cells[2];
        auto parse_u64 = [&](const std::string& s) {
            std::uint64_t v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size()) throw IoError("malformed integer '" + s + "'");
            return v;
        };
        r.seed = parse_u64(cells[3]);
        r.chain_id = parse_u64(cells[4]);
        std::array<double, 10> f{};
        for (std::size_t k = 0; k < 10; ++k) f[k] = parse_real(cells[5 + k], "functional value");
        r.functionals = {f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9]};
        if (!ids.insert(r.id).second) throw IoError("duplicate manifest id " + r.id);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_manifest(in);
}

std::filesystem::path resolve_manifest_path(const std::filesystem::path& manifest, const std::string& entry) {
    const std::filesystem::path p(entry);
    if (p.is_absolute()) return p;
    return manifest.parent_path() / p;
}

}  // namespace geoknot
