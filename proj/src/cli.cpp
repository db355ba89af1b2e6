#include "geoknot/cli.hpp"

#include "geoknot/io.hpp"
#include "geoknot/probe.hpp"
#include "geoknot/sampler.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace geoknot {

namespace {

struct SampleOptions {
    std::string knot;
    std::size_t n_vertices = 100;
    std::size_t count = 100;
    std::string bias = "writhe";
    std::string bins;
    std::string mix;
    std::size_t chains = 1;
    std::size_t threads = 0;
    std::uint64_t seed = 1;
    double jitter = 0.1;
    std::string out = "geoknot_out";
    std::uint64_t max_moves = 50'000'000;
    std::size_t pivot_batch = 10;
    std::size_t bfacf_per_batch = 100;
    std::string mode = "flat";
    std::string policy = "reject";
    std::uint64_t progress = 0;
    bool mirror = false;
};

std::string record_id(std::string_view label, std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%06zu", id);
    return std::string(label) + buf;
}

std::string relative_to(const fs::path& target, const fs::path& base_dir) {
    const fs::path t = fs::weakly_canonical(fs::absolute(target));
    const fs::path b = fs::weakly_canonical(fs::absolute(base_dir.empty() ? fs::path(".") : base_dir));
    const fs::path rel = t.lexically_relative(b);
    return (rel.empty() ? t : rel).generic_string();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int run_sample(const SampleOptions& o) {
    ChainConfig cfg;
    cfg.knot = parse_knot_class(o.knot);
    cfg.target_n = o.n_vertices;
    cfg.save_count = o.count;
    BiasMode mode = BiasMode::FlatHistogram;
    if (o.mode == "window") {
        mode = BiasMode::Window;
    } else if (o.mode != "flat") {
        throw std::invalid_argument("mode must be flat or window");
    }
    RangePolicy policy = RangePolicy::Reject;
    if (o.policy == "extend") {
        policy = RangePolicy::Extend;
    } else if (o.policy != "reject") {
        throw std::invalid_argument("policy must be reject or extend");
    }
    std::vector<MixtureComponent> components;
    if (o.bias == "geoknot") {
        components = geoknot_mixture();
    } else {
        for (const auto& kind : split_list(o.bias)) components.push_back({{parse_bias_kind(kind), {}}, 1.0});
        if (components.empty()) throw std::invalid_argument("--bias is empty");
        for (auto& c : components) c.bias.bins = default_bins(c.bias.kind);
    }
    const auto bins = split_list(o.bins);
    if (!bins.empty()) {
        if (bins.size() != components.size()) throw std::invalid_argument("--bins needs one LO:HI:COUNT per bias");
        for (std::size_t k = 0; k < bins.size(); ++k) components[k].bias.bins = BinSpec::parse(bins[k]);
    }
    const auto mix = split_list(o.mix);
    if (!mix.empty()) {
        if (mix.size() != components.size()) throw std::invalid_argument("--mix needs one weight per bias");
        for (std::size_t k = 0; k < mix.size(); ++k) {
            std::size_t used = 0;
            try {
                components[k].weight = std::stod(mix[k], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != mix[k].size()) throw std::invalid_argument("malformed --mix weight '" + mix[k] + "'");
        }
    }
    for (auto& c : components) {
        c.bias.mode = mode;
        c.bias.policy = policy;
    }
    cfg.bias = components.front().bias;
    cfg.seed = o.seed;
    cfg.jitter = o.jitter;
    cfg.max_moves = o.max_moves;
    cfg.pivot_batch = o.pivot_batch;
    cfg.bfacf_per_batch = o.bfacf_per_batch;
    cfg.progress_interval = o.progress;
    cfg.mirror_seed = o.mirror;
    for (const auto& c : components) {
        cfg.bias = c.bias;
        cfg.validate();
    }

    const auto shards = components.size() == 1 ? run_chains(cfg, o.chains, o.threads)
                                               : run_mixture(cfg, components, o.chains, o.threads);
    const Dataset data = components.size() == 1 ? merge_shards(shards) : merge_mixture(shards);

    const std::string label(to_string(cfg.knot));
    const fs::path root = fs::path(o.out) / label;
    const fs::path xyz_dir = root / "xyz";
    std::error_code ec;
    fs::create_directories(xyz_dir, ec);
    fs::create_directories(root / "shards", ec);
    if (ec) throw IoError("cannot create " + root.string());

    std::vector<ManifestRow> merged;
    std::size_t next = 0;
    for (const auto& shard : shards) {
        std::vector<ManifestRow> rows;
        for (const auto& r : shard.records) {
            const SavedRecord& m = data.records.at(next++);
            const std::string id = record_id(label, m.id);
            const fs::path file = xyz_dir / (id + ".xyz");
            write_xyz(file, m.curve);
            ManifestRow row{id, label, "xyz/" + id + ".xyz", r.seed, r.chain_id, m.functionals};
            merged.push_back(row);
            row.path = "../xyz/" + id + ".xyz";
            rows.push_back(std::move(row));
        }
        write_manifest(root / "shards" / ("chain_" + std::to_string(shard.config.chain_id) + ".csv"), rows);
    }
    write_manifest(root / "manifest.csv", merged);

    std::cout << "saved=" << data.records.size() << " requested=" << o.count << " partial=" << data.partial
              << " manifest=" << (root / "manifest.csv").string() << '\n';
    if (!data.coverage.empty()) {
        std::cout << "coverage=";
        for (std::size_t b = 0; b < data.coverage.size(); ++b) std::cout << (b ? "," : "") << data.coverage[b];
        std::cout << '\n';
    }
    if (data.partial) {
        std::cerr << "warning: move budget exhausted before the quotas filled\n";
        return kExitPartial;
    }
    return kExitOk;
}

int run_analyze(const std::string& in, const std::string& out) {
    std::vector<fs::path> files;
    const fs::path base(in);
    if (fs::is_directory(base)) {
        for (const auto& e : fs::recursive_directory_iterator(base)) {
            if (e.is_regular_file() && e.path().extension() == ".xyz") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
    } else if (fs::is_regular_file(base)) {
        files.push_back(base);
    } else {
        throw IoError("no such file or directory: " + in);
    }
    const fs::path manifest(out);
    std::vector<ManifestRow> rows;
    for (const auto& f : files) {
        const PolygonalCurve curve = read_xyz(f);
        ManifestRow r;
        fs::path id = fs::is_directory(base) ? f.lexically_relative(base) : f.filename();
        id.replace_extension();
        r.id = id.generic_string();
        r.label = std::string(to_string(classify(curve)));
        r.path = relative_to(f, manifest.parent_path());
        r.functionals = functional_vector(curve);
        rows.push_back(std::move(r));
    }
    write_manifest(manifest, rows);
    std::cout << "analyzed=" << rows.size() << " manifest=" << manifest.string() << '\n';
    return kExitOk;
}

int run_verify(const std::string& in, const std::string& expect, bool gauss) {
    const KnotClass expected = parse_knot_class(expect);
    const PolygonalCurve curve = read_xyz(fs::path(in));
    const VerificationResult r = verify_knot_class(curve, expected);
    std::cout << "determinant=" << r.determinant << " v2=" << r.v2_exact << " v2_writhe=" << format_real(r.v2_writhe)
              << " verdict=" << to_string(r.verdict) << " checks=";
    for (std::size_t k = 0; k < r.checks_passed.size(); ++k) std::cout << (k ? "," : "") << r.checks_passed[k];
    std::cout << '\n';
    if (gauss) {
        for (const auto& d : projection_schedule(1)) std::cout << project_to_diagram(simplify_curve(curve), d).gauss_code() << '\n';
    }
    return r.verdict == expected && expected != KnotClass::Other ? kExitOk : kExitMismatch;
}

LabeledFeatureTable table_from_manifest(const fs::path& manifest) {
    const auto rows = read_manifest(manifest);
    std::map<std::string, int> label_ids;
    for (const auto& r : rows) label_ids.emplace(r.label, 0);
    int next = 0;
    for (auto& [name, id] : label_ids) id = next++;
    LabeledFeatureTable t;
    for (const auto& r : rows) t.labels.push_back(label_ids.at(r.label));
    for (std::size_t k = 0; k < FunctionalVector::kNames.size(); ++k) {
        std::vector<double> col;
        for (const auto& r : rows) col.push_back(r.functionals.values()[k]);
        t.add_column(std::string(FunctionalVector::kNames[k]), std::move(col));
    }
    return t;
}

int run_probe(const std::string& manifest, std::size_t k, const std::string& functionals, const std::string& out) {
    const auto table = table_from_manifest(manifest);
    std::vector<std::string> names = split_list(functionals);
    if (names.empty()) {
        for (auto n : FunctionalVector::kProbeNames) names.emplace_back(n);
    }
    auto report = shortcut_probe(table, names, k);
    std::sort(report.begin(), report.end(), [](const ProbeEntry& a, const ProbeEntry& b) { return a.rank < b.rank; });
    std::ostringstream csv;
    csv << "functional,mi_nats,rank\n";
    char buf[64];
    for (const auto& e : report) {
        std::snprintf(buf, sizeof buf, "%.6f", e.mi_nats);
        csv << e.functional << ',' << buf << ',' << e.rank << '\n';
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!(f << csv.str())) throw IoError("cannot write " + out);
        std::cout << "probe report: " << out << '\n';
    }
    return kExitOk;
}

struct TauOptions {
    double m = -1;
    double m_a = -1;
    std::string manifest;
    std::string features;
    std::uint64_t split_seed = 0;
    std::string out;
};

int run_tau(const TauOptions& o) {
    std::string feature_set = "given";
    double m = o.m, m_a = o.m_a;
    if (!o.manifest.empty()) {
        const auto table = table_from_manifest(o.manifest);
        const auto shortcut = split_list(o.features);
        if (shortcut.empty()) throw std::invalid_argument("--features is required with --manifest");
        std::vector<std::string> all;
        for (auto n : FunctionalVector::kNames) all.emplace_back(n);
        BaselineHyper hyper;
        hyper.split_seed = o.split_seed;
        m_a = train_baseline(table, shortcut, hyper).test_accuracy;
        m = train_baseline(table, all, hyper).test_accuracy;
        feature_set.clear();
        for (std::size_t k = 0; k < shortcut.size(); ++k) feature_set += (k ? "+" : "") + shortcut[k];
    } else if (m < 0 || m_a < 0) {
        throw std::invalid_argument("tau needs --m and --m-a, or --manifest with --features");
    }
    const ShortcutIndex tau = shortcut_index(m_a, m);
    std::ostringstream csv;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%s", m, m_a, tau.tau, tau.informative ? "informative" : "not-informative");
    csv << "feature_set,m,m_a,tau,flag\n" << feature_set << ',' << buf << '\n';
    if (o.out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(o.out, std::ios::binary);
        if (!(f << csv.str())) throw IoError("cannot write " + o.out);
    }
    return kExitOk;
}

int run_writhe_matrix(const std::string& in, const std::string& out) {
    const auto w = writhe_matrix(read_xyz(fs::path(in)));
    write_writhe_matrix(fs::path(out), w);
    std::cout << "segments=" << w.size() << " writhe=" << format_real(total_writhe(w)) << '\n';
    return kExitOk;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"Biased lattice sampling and shortcut probing for polygonal knots", "geoknot"};
    app.set_version_flag("--version", std::string("geoknot 1.0 ") + std::string(kFormatVersion));
    app.set_config("--config", "", "key=value configuration file");
    app.require_subcommand(1);

    SampleOptions so;
    auto* sample = app.add_subcommand("sample", "Run biased chains and write a dataset");
    sample->add_option("--knot", so.knot, "Knot class (0_1 or 3_1)")->required();
    sample->add_option("--n-vertices", so.n_vertices, "Target polygon length")->capture_default_str();
    sample->add_option("--count", so.count, "Number of saved configurations")->capture_default_str();
    sample->add_option("--bias", so.bias, "writhe, acn, entanglement, none, a comma list, or geoknot")
        ->capture_default_str();
    sample->add_option("--bins", so.bins, "LO:HI:COUNT per bias, comma separated (default depends on --bias)");
    sample->add_option("--mix", so.mix, "Share of the saves per bias, comma separated (default equal)");
    sample->add_option("--chains", so.chains, "Independent chains")->capture_default_str();
    sample->add_option("--threads", so.threads, "Worker threads (0 = all cores)")->capture_default_str();
    sample->add_option("--seed", so.seed, "Global seed")->capture_default_str();
    sample->add_option("--jitter", so.jitter, "Off-lattice displacement amplitude")->capture_default_str();
    sample->add_option("--out", so.out, "Output directory")->envname("GEOKNOT_OUT")->capture_default_str();
    sample->add_option("--max-moves", so.max_moves, "Move budget per chain")->capture_default_str();
    sample->add_option("--pivot-batch", so.pivot_batch, "Pivots per batch (0 disables pivots)")->capture_default_str();
    sample->add_option("--bfacf-per-batch", so.bfacf_per_batch, "BFACF moves between pivot batches")
        ->capture_default_str();
    sample->add_option("--mode", so.mode, "flat or window")->capture_default_str();
    sample->add_option("--policy", so.policy, "Out-of-range policy: reject or extend")->capture_default_str();
    sample->add_option("--progress", so.progress, "Progress line every this many moves")->capture_default_str();
    sample->add_flag("--mirror", so.mirror, "Start from the mirror image of the seed");

    std::string analyze_in, analyze_out;
    auto* analyze = app.add_subcommand("analyze", "Compute functional vectors for XYZ files");
    analyze->add_option("--in", analyze_in, "XYZ file or directory (searched recursively)")->required();
    analyze->add_option("--out", analyze_out, "Manifest CSV to write")->required();

    std::string verify_in, verify_expect;
    bool verify_gauss = false;
    auto* verify = app.add_subcommand("verify", "Check the knot class of an XYZ curve");
    verify->add_option("--in", verify_in, "XYZ file")->required();
    verify->add_option("--expect", verify_expect, "Expected class (0_1 or 3_1)")->required();
    verify->add_flag("--gauss", verify_gauss, "Also print the Gauss code");

    std::string probe_manifest, probe_out, probe_functionals;
    std::size_t probe_k = 3;
    auto* probe = app.add_subcommand("probe", "Mutual-information shortcut probe over a manifest");
    probe->add_option("--manifest", probe_manifest, "Manifest CSV")->required();
    probe->add_option("--k", probe_k, "Neighbours for the kNN estimator")->capture_default_str();
    probe->add_option("--functionals", probe_functionals, "Comma-separated columns (default: the seven probe functionals)");
    probe->add_option("--out", probe_out, "Report CSV (default: stdout)");

    TauOptions to;
    auto* tau = app.add_subcommand("tau", "Shortcut index from accuracies or a manifest");
    tau->add_option("--m", to.m, "Accuracy with the full representation");
    tau->add_option("--m-a", to.m_a, "Accuracy with the shortcut features");
    tau->add_option("--manifest", to.manifest, "Manifest CSV to train baselines on");
    tau->add_option("--features", to.features, "Comma-separated shortcut features");
    tau->add_option("--split-seed", to.split_seed, "Seed of the train/val/test split")->capture_default_str();
    tau->add_option("--out", to.out, "Report CSV (default: stdout)");

    std::string wm_in, wm_out;
    auto* wm = app.add_subcommand("writhe-matrix", "Write the segment writhe matrix of an XYZ curve");
    wm->add_option("--in", wm_in, "XYZ file")->required();
    wm->add_option("--out", wm_out, "CSV to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sample) return run_sample(so);
        if (*analyze) return run_analyze(analyze_in, analyze_out);
        if (*verify) return run_verify(verify_in, verify_expect, verify_gauss);
        if (*probe) return run_probe(probe_manifest, probe_k, probe_functionals, probe_out);
        if (*tau) return run_tau(to);
        if (*wm) return run_writhe_matrix(wm_in, wm_out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}

int cli_dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace geoknot
