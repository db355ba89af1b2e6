#include "geoknot/io.hpp"
#include "geoknot/sampler.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace geoknot;
using namespace geoknot::testing;

namespace {

PolygonalCurve xyz_round_trip(const PolygonalCurve& c) {
    std::stringstream ss;
    write_xyz(ss, c);
    return read_xyz(ss);
}

PolygonalCurve parse_xyz(const std::string& text) {
    std::istringstream is(text);
    return read_xyz(is);
}

}  // namespace

TEST(Xyz, UnitSquareRoundTripIsExact) {
    const auto sq = PolygonalCurve::from_lattice(unit_square());
    EXPECT_EQ(xyz_round_trip(sq), sq);
    std::stringstream ss;
    write_xyz(ss, sq);
    EXPECT_EQ(ss.str(), "4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n");
}

TEST(Xyz, RoundTripWithinTolerance) {
    const auto c = trefoil_curve(100, 3.7);
    const auto back = xyz_round_trip(c);
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LT((back[i] - c[i]).norm(), 1e-10);
    EXPECT_EQ(xyz_round_trip(back), back);
    EXPECT_EQ(quantize(c), back);
}

TEST(Xyz, CountMismatch) {
    EXPECT_THROW(parse_xyz("3\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n"), IoError);
    EXPECT_THROW(parse_xyz("5\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n"), IoError);
}

TEST(Xyz, MalformedInput) {
    EXPECT_THROW(parse_xyz(""), IoError);
    EXPECT_THROW(parse_xyz("three\n"), IoError);
    EXPECT_THROW(parse_xyz("3\n0 0 0\n1 0\n1 1 0\n"), IoError);
    EXPECT_THROW(parse_xyz("3\n0 0 0\n1 0 0 4\n1 1 0\n"), IoError);
    EXPECT_THROW(parse_xyz("3\n0 0 0\n1 x 0\n1 1 0\n"), IoError);
    EXPECT_THROW(parse_xyz("3\n0 0 0\n1 nan 0\n1 1 0\n"), IoError);
    EXPECT_THROW(parse_xyz("3\n0 0 0\n1 inf 0\n1 1 0\n"), IoError);
    EXPECT_THROW(parse_xyz("3\n0 0 0\n0 0 0\n1 1 0\n"), IoError);
    EXPECT_THROW(read_xyz(std::filesystem::path("/nonexistent/geoknot.xyz")), IoError);
}

TEST(Xyz, FileRoundTrip) {
    const auto dir = scratch_dir("xyz");
    const auto c = trefoil_curve(64);
    write_xyz(dir / "t.xyz", c);
    const auto back = read_xyz(dir / "t.xyz");
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LT((back[i] - c[i]).norm(), 1e-10);
}

TEST(LatticeFile, RoundTripAndValidation) {
    const auto t = load_seed_polygon(KnotClass::Trefoil);
    std::stringstream ss;
    write_lattice_polygon(ss, t);
    EXPECT_EQ(read_lattice_polygon(ss), t);
    std::istringstream bad("4\n0 0 0\n1 0 0\n1 1 0\n0 2 0\n");
    EXPECT_THROW(read_lattice_polygon(bad), IoError);
    std::istringstream frac("4\n0 0 0\n1 0 0\n1 1 0.5\n0 1 0\n");
    EXPECT_THROW(read_lattice_polygon(frac), IoError);
}

TEST(Seeds, LoadExamples) {
    EXPECT_EQ(load_seed_polygon(KnotClass::Unknot), unit_square());
    EXPECT_EQ(load_seed_polygon("0₁"), unit_square());
    const auto t = load_seed_polygon("3_1");
    EXPECT_EQ(t.size(), 24u);
    EXPECT_EQ(verify_knot_class(t, KnotClass::Trefoil).determinant, 3);
    EXPECT_THROW(load_seed_polygon("5₂"), std::invalid_argument);
    EXPECT_THROW(load_seed_polygon(KnotClass::Other), std::invalid_argument);
}

TEST(Seeds, MissingCorruptAndMisclassifiedFiles) {
    const auto dir = scratch_dir("seeds");
    EXPECT_THROW(load_seed_polygon(KnotClass::Unknot, dir), IoError);
    std::ofstream(dir / "0_1.txt") << "4\n0 0 0\n1 0 0\n";
    EXPECT_THROW(load_seed_polygon(KnotClass::Unknot, dir), IoError);
    std::ofstream(dir / "3_1.txt") << "4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n";
    EXPECT_THROW(load_seed_polygon(KnotClass::Trefoil, dir), IoError);
}

TEST(WritheCsv, RoundTrip) {
    const auto w = writhe_matrix(trefoil_curve(50));
    std::stringstream ss;
    write_writhe_matrix(ss, w);
    const auto back = read_writhe_matrix(ss);
    EXPECT_LT((back.entries - w.entries).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(total_writhe(back), total_writhe(w), 1e-9);

    WritheMatrix square{Eigen::MatrixXd::Zero(3, 3)};
    square.entries(0, 1) = square.entries(1, 0) = 0.25;
    std::stringstream s2;
    write_writhe_matrix(s2, square);
    EXPECT_EQ(read_writhe_matrix(s2).entries, square.entries);
}

TEST(WritheCsv, RejectsAsymmetricAndNonSquare) {
    std::istringstream asym("0,0.5\n0.4,0\n");
    EXPECT_THROW(read_writhe_matrix(asym), IoError);
    std::istringstream ragged("0,0.5,1\n0.5,0\n");
    EXPECT_THROW(read_writhe_matrix(ragged), IoError);
    std::istringstream rect("0,0.5\n0.5,0\n1,1\n");
    EXPECT_THROW(read_writhe_matrix(rect), IoError);
    std::istringstream tiny("0,1e-7\n0,0\n");
    EXPECT_NO_THROW(read_writhe_matrix(tiny));
}

TEST(Manifest, RoundTripAndValidation) {
    ManifestRow r;
    r.id = "0_1_000001";
    r.label = "0_1";
    r.path = "xyz/0_1_000001.xyz";
    r.seed = 12;
    r.chain_id = 3;
    r.functionals = functional_vector(trefoil_curve(40));
    std::stringstream ss;
    write_manifest(ss, {r});
    const auto rows = read_manifest(ss);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].id, r.id);
    EXPECT_EQ(rows[0].path, r.path);
    EXPECT_EQ(rows[0].seed, 12u);
    EXPECT_EQ(rows[0].chain_id, 3u);
    EXPECT_EQ(rows[0].functionals, r.functionals);

    std::stringstream dup;
    write_manifest(dup, {r, r});
    EXPECT_THROW(read_manifest(dup), IoError);
    std::istringstream header("id,label\n");
    EXPECT_THROW(read_manifest(header), IoError);
    std::istringstream nonfinite(std::string(kManifestHeader) + "\na,0_1,p,0,0,nan,0,0,0,0,0,0,0,0,0\n");
    EXPECT_THROW(read_manifest(nonfinite), IoError);
    std::istringstream short_row(std::string(kManifestHeader) + "\na,0_1,p,0,0,1\n");
    EXPECT_THROW(read_manifest(short_row), IoError);
}

TEST(Manifest, PathsResolveRelativeToManifest) {
    EXPECT_EQ(resolve_manifest_path("/data/run/manifest.csv", "xyz/a.xyz"), std::filesystem::path("/data/run/xyz/a.xyz"));
    EXPECT_EQ(resolve_manifest_path("/data/run/manifest.csv", "/abs/a.xyz"), std::filesystem::path("/abs/a.xyz"));
}

TEST(Manifest, ShardRecordsMatchRecomputationFromFiles) {
    ChainConfig cfg;
    cfg.knot = KnotClass::Trefoil;
    cfg.target_n = 40;
    cfg.bias.kind = BiasKind::None;
    cfg.save_count = 30;
    cfg.seed = 4;
    const auto shard = run_chain(cfg);
    ASSERT_EQ(shard.records.size(), 30u);
    const auto dir = scratch_dir("manifest");
    std::vector<ManifestRow> rows;
    for (const auto& rec : shard.records) {
        const std::string name = "r" + std::to_string(rec.id) + ".xyz";
        write_xyz(dir / name, rec.curve);
        rows.push_back({std::to_string(rec.id), "3_1", name, rec.seed, rec.chain_id, rec.functionals});
    }
    write_manifest(dir / "manifest.csv", rows);
    for (const auto& row : read_manifest(dir / "manifest.csv")) {
        const auto f = functional_vector(read_xyz(resolve_manifest_path(dir / "manifest.csv", row.path)));
        const auto a = f.values(), b = row.functionals.values();
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-6);
    }
}
