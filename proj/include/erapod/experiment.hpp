#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "erapod/eval.hpp"
#include "erapod/gramians.hpp"
#include "erapod/hankel.hpp"
#include "erapod/io.hpp"
#include "erapod/reduction.hpp"
#include "erapod/sampling.hpp"

namespace erapod {

/// Everything a reduce/compare/counters run depends on.
struct ExperimentConfig {
    std::string plant = "plant";  ///< scalar | s2 | plant | random | dmat
    PlantConfig plant_config;
    std::array<std::string, 3> dmat_paths;  ///< A, B, C when plant == "dmat"
    Index random_n = 20;
    Index random_p = 1;
    Index random_q = 1;
    double random_rho = 0.9;

    std::optional<long> mc;
    std::optional<long> mo;
    std::optional<int> period;
    std::optional<Index> output_proj;  ///< m_out; none keeps the raw outputs

    std::vector<Method> methods = {Method::era};
    std::vector<Index> orders;  ///< empty selects one order from the HSV tail
    double adjoint_eps = 0.0;
    std::uint64_t seed = 0;
    Index pseudo_modes = 100;
    std::string out = "out";
};

inline io::Json to_json(const ExperimentConfig& c) {
    io::Json j;
    j["plant"] = c.plant;
    if (c.plant == "plant") j["plant_config"] = io::to_json(c.plant_config);
    if (c.plant == "dmat") j["dmat"] = {{"a", c.dmat_paths[0]}, {"b", c.dmat_paths[1]}, {"c", c.dmat_paths[2]}};
    if (c.plant == "random")
        j["random"] = {{"n", c.random_n}, {"p", c.random_p}, {"q", c.random_q}, {"rho", c.random_rho}};
    io::Json s = io::Json::object();
    if (c.mc) s["mc"] = *c.mc;
    if (c.mo) s["mo"] = *c.mo;
    if (c.period) s["P"] = *c.period;
    j["sampling"] = s;
    j["output_proj"] = c.output_proj ? io::Json(*c.output_proj) : io::Json(nullptr);
    io::Json methods = io::Json::array();
    for (Method m : c.methods) methods.push_back(to_string(m));
    j["methods"] = methods;
    j["orders"] = c.orders;
    j["adjoint_eps"] = c.adjoint_eps;
    j["seed"] = c.seed;
    j["pseudo_modes"] = c.pseudo_modes;
    j["out"] = c.out;
    return j;
}

/// Applies the keys present in `j` on top of `c`. Unknown keys are errors.
inline void apply_config_json(ExperimentConfig& c, const io::Json& j) {
    using detail::require;
    require(j.is_object(), ErrorKind::ConfigError, "experiment config must be a JSON object");
    static const std::set<std::string> known = {"plant",  "plant_config", "dmat",   "random",       "sampling",
                                                "output_proj", "methods", "orders", "adjoint_eps", "seed",
                                                "pseudo_modes", "out"};
    for (const auto& [key, _] : j.items())
        require(known.count(key) == 1, ErrorKind::ConfigError, "unknown config key '" + key + "'");
    try {
        if (j.contains("plant")) c.plant = j["plant"].get<std::string>();
        if (j.contains("plant_config")) c.plant_config = io::plant_config_from_json(j["plant_config"]);
        if (j.contains("dmat")) {
            const auto& d = j["dmat"];
            c.dmat_paths = {d.at("a").get<std::string>(), d.at("b").get<std::string>(), d.at("c").get<std::string>()};
        }
        if (j.contains("random")) {
            const auto& r = j["random"];
            c.random_n = r.value("n", c.random_n);
            c.random_p = r.value("p", c.random_p);
            c.random_q = r.value("q", c.random_q);
            c.random_rho = r.value("rho", c.random_rho);
        }
        if (j.contains("sampling")) {
            const auto& s = j["sampling"];
            if (s.contains("mc")) c.mc = s["mc"].get<long>();
            if (s.contains("mo")) c.mo = s["mo"].get<long>();
            if (s.contains("P")) c.period = s["P"].get<int>();
        }
        if (j.contains("output_proj")) {
            if (j["output_proj"].is_null()) c.output_proj.reset();
            else c.output_proj = j["output_proj"].get<Index>();
        }
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& m : j["methods"]) {
                const auto parsed = parse_method(m.get<std::string>());
                require(parsed.has_value(), ErrorKind::ConfigError, "unknown method '" + m.get<std::string>() + "'");
                c.methods.push_back(*parsed);
            }
        }
        if (j.contains("orders")) c.orders = j["orders"].get<std::vector<Index>>();
        if (j.contains("adjoint_eps")) c.adjoint_eps = j["adjoint_eps"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("pseudo_modes")) c.pseudo_modes = j["pseudo_modes"].get<Index>();
        if (j.contains("out")) c.out = j["out"].get<std::string>();
    } catch (const io::Json::exception& e) {
        detail::fail(ErrorKind::ConfigError, std::string("config: ") + e.what());
    }
}

inline void validate(const ExperimentConfig& c) {
    using detail::require;
    static const std::set<std::string> plants = {"scalar", "s2", "plant", "random", "dmat"};
    require(plants.count(c.plant) == 1, ErrorKind::ConfigError, "unknown plant '" + c.plant + "'");
    require(!c.methods.empty(), ErrorKind::ConfigError, "methods list is empty");
    require(std::set<Method>(c.methods.begin(), c.methods.end()).size() == c.methods.size(), ErrorKind::ConfigError,
            "methods list has duplicates");
    for (Index r : c.orders) require(r >= 1, ErrorKind::ConfigError, "orders must be >= 1");
    require(!c.mc || *c.mc >= 0, ErrorKind::ConfigError, "mc must be >= 0");
    require(!c.mo || *c.mo >= 0, ErrorKind::ConfigError, "mo must be >= 0");
    require(!c.period || *c.period >= 1, ErrorKind::ConfigError, "P must be >= 1");
    require(!c.output_proj || *c.output_proj >= 1, ErrorKind::ConfigError, "output projection order must be >= 1");
    require(c.adjoint_eps >= 0.0, ErrorKind::ConfigError, "adjoint perturbation must be >= 0");
    require(c.pseudo_modes >= 1, ErrorKind::ConfigError, "pseudo_modes must be >= 1");
    require(!c.out.empty(), ErrorKind::ConfigError, "output directory is empty");
    if (c.plant == "dmat")
        for (const auto& p : c.dmat_paths) require(!p.empty(), ErrorKind::ConfigError, "dmat plant needs A, B and C paths");
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        detail::fail(ErrorKind::IoError, "SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[digest[i] >> 4];
        s += hex[digest[i] & 15];
    }
    return s;
}

/// Hash of the canonical config JSON, excluding the output directory.
inline std::string config_hash(const ExperimentConfig& c) {
    io::Json j = to_json(c);
    j.erase("out");
    return sha256_hex(j.dump());
}

inline StateSpaceModel build_model(const ExperimentConfig& c) {
    if (c.plant == "scalar") return make_system(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    if (c.plant == "s2") {
        Matrix A(2, 2), B(2, 1), C(1, 2);
        A << 0.5, 1.0, 0.0, 0.6;
        B << 0.0, 1.0;
        C << 1.0, 0.0;
        return make_system(A, B, C);
    }
    if (c.plant == "plant") return build_plant(c.plant_config);
    if (c.plant == "random") return random_stable_system(c.random_n, c.random_p, c.random_q, c.random_rho, c.seed);
    return make_system(io::read_dmat(c.dmat_paths[0]), io::read_dmat(c.dmat_paths[1]), io::read_dmat(c.dmat_paths[2]));
}

/// Intermediate data of one experiment. Optional members are built only when
/// a requested method needs them.
struct PipelineData {
    StateSpaceModel model;
    SamplingPlan plan;
    std::optional<OutputProjector> projector;
    std::optional<HankelPair> era_pair;
    std::optional<HankelSVD> era_svd;
    std::optional<SnapshotMatrix> X;
    std::optional<SnapshotMatrix> Y;
    std::optional<HankelPair> bpod_pair;
    std::optional<HankelSVD> bpod_svd;
    std::optional<ModeSet> pseudo;
    std::vector<Index> orders;
    std::vector<ReducedModel> models;

    const OutputProjector* proj() const { return projector ? &*projector : nullptr; }
};

inline SamplingPlan resolve_sampling(const ExperimentConfig& c, const StateSpaceModel& model) {
    SamplingPlan plan;
    if (!c.mc || !c.mo || !c.period) plan = default_sampling(model);
    if (c.mc) plan.mc = *c.mc;
    if (c.mo) plan.mo = *c.mo;
    if (c.period) plan.period = *c.period;
    return plan;
}

/// Builds the requested data and reduced models. `all_data` forces both
/// Hankel routes and X (used by compare for the diagnostics).
inline PipelineData run_pipeline(const ExperimentConfig& c, bool all_data = false) {
    validate(c);
    PipelineData d{build_model(c), {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
    d.plan = resolve_sampling(c, d.model);
    const auto [mc, mo, P] = d.plan;
    auto wants = [&](Method m) { return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end(); };
    const bool need_era = all_data || wants(Method::era) || wants(Method::pseudo) || c.orders.empty();
    const bool need_bpod = all_data || wants(Method::bpod);
    const bool need_X = need_bpod || wants(Method::pseudo) || wants(Method::pod);

    if (c.output_proj) {
        const MarkovSequence raw = collect_markov_pairs(d.model, mc, mo, P);
        d.projector = fit_output_projector(raw, *c.output_proj);
    }
    if (need_era) {
        const MarkovSequence markov = collect_markov_pairs(d.model, mc, mo, P, d.proj());
        d.era_pair = hankel_from_markov(markov, mc, mo, P);
        d.era_svd = svd_truncate(d.era_pair->H);
    }
    if (need_X) d.X = collect_primal(d.model, mc, P);
    if (need_bpod) {
        d.Y = collect_adjoint_snapshots(perturb_adjoint(d.model, c.adjoint_eps), mo, P, d.proj());
        d.bpod_pair = hankel_from_snapshots(*d.X, *d.Y, d.model);
        d.bpod_svd = svd_truncate(d.bpod_pair->H);
    }

    d.orders = c.orders;
    if (d.orders.empty()) d.orders = {select_order(d.era_svd->sigma)};

    if (wants(Method::pseudo)) {
        const Index k = std::min(c.pseudo_modes, d.era_svd->retained());
        d.pseudo = pseudo_adjoint_modes(primal_modes(*d.X, *d.era_svd, k));
        d.pseudo->hsv = d.era_svd->sigma.head(k);
    }

    for (Method m : c.methods) {
        for (Index r : d.orders) {
            switch (m) {
                case Method::era: d.models.push_back(era_reduce(*d.era_pair, *d.era_svd, r)); break;
                case Method::bpod:
                    d.models.push_back(bpod_reduce(d.model, bpod_modes(*d.X, *d.Y, *d.bpod_svd, r), d.proj()));
                    break;
                case Method::pseudo: d.models.push_back(bpod_reduce(d.model, leading_modes(*d.pseudo, r), d.proj())); break;
                case Method::pod: d.models.push_back(pod_reduce(*d.X, d.model, r, d.proj())); break;
                case Method::bt_oracle: {
                    ReducedModel red = d.projector
                                           ? exact_balanced_truncation(projected_system(d.model, *d.projector), r)
                                           : exact_balanced_truncation(d.model, r);
                    red.projector_id = d.projector ? "pod" + std::to_string(d.projector->modes()) : "";
                    d.models.push_back(std::move(red));
                    break;
                }
            }
            if (d.projector && d.models.back().projector_id.empty())
                d.models.back().projector_id = "pod" + std::to_string(d.projector->modes());
        }
    }
    return d;
}

inline std::string model_stem(const ReducedModel& m) {
    return std::string(to_string(m.method)) + "_r" + std::to_string(m.r());
}

/// Block inner-product counts of both Hankel routes for the given sampling.
inline io::Json counters_report(long mc, long mo, const HankelCounters& bpod, const HankelCounters& era) {
    const double ratio = era.h_blocks > 0 ? static_cast<double>(bpod.h_blocks) / static_cast<double>(era.h_blocks) : 0.0;
    return io::Json{{"mc", mc},
                    {"mo", mo},
                    {"bpod", {{"h_blocks", bpod.h_blocks}, {"hprime_blocks", bpod.hprime_blocks}}},
                    {"era", {{"h_blocks", era.h_blocks}, {"hprime_blocks", era.hprime_blocks}}},
                    {"ratio", ratio},
                    {"ratio_exact", {bpod.h_blocks, era.h_blocks}}};
}

namespace detail {

/// Writes `text` under `dir` and records its digest in the manifest list.
struct ArtifactLog {
    io::fs::path dir;
    io::Json files = io::Json::object();

    void text(const std::string& name, const std::string& content) {
        io::write_text(dir / name, content);
        files[name] = sha256_hex(content);
    }
    void dmat(const std::string& name, const Matrix& M) { text(name, io::to_dmat(M)); }
    void json(const std::string& name, const io::Json& j) { text(name, j.dump(2) + "\n"); }
};

inline void log_model(ArtifactLog& log, const ReducedModel& red) {
    const std::string stem = "models/" + model_stem(red);
    log.dmat(stem + "_A.dmat", red.A);
    log.dmat(stem + "_B.dmat", red.B);
    log.dmat(stem + "_C.dmat", red.C);
    io::Json meta{{"method", to_string(red.method)}, {"r", red.r()}, {"hsv", io::to_json(red.hsv)}};
    meta["projector_id"] = red.projector_id.empty() ? io::Json(nullptr) : io::Json(red.projector_id);
    log.json(stem + ".json", meta);
}

inline void write_manifest(const ArtifactLog& log, const ExperimentConfig& c, const std::string& command,
                           io::Json extra = io::Json::object()) {
    io::Json manifest{{"command", command},
                      {"config", to_json(c)},
                      {"config_hash", config_hash(c)},
                      {"artifacts", log.files}};
    for (auto& [k, v] : extra.items()) manifest[k] = v;
    io::write_json(log.dir / "manifest.json", manifest);
}

}  // namespace detail

/// Reduced models, HSV table and counters under c.out, indexed by manifest.json.
inline PipelineData cmd_reduce(const ExperimentConfig& c) {
    PipelineData d = run_pipeline(c);
    detail::ArtifactLog log{c.out};
    for (const ReducedModel& red : d.models) detail::log_model(log, red);

    io::CsvWriter hsv({"i", "sigma_era", "sigma_bpod"});
    const Index n_era = d.era_svd ? d.era_svd->retained() : 0;
    const Index n_bpod = d.bpod_svd ? d.bpod_svd->retained() : 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Index i = 0; i < std::max(n_era, n_bpod); ++i)
        hsv.row(static_cast<long long>(i + 1), i < n_era ? d.era_svd->sigma(i) : nan,
                i < n_bpod ? d.bpod_svd->sigma(i) : nan);
    log.text("hsv.csv", hsv.text());

    io::Json counters{{"mc", d.plan.mc}, {"mo", d.plan.mo}, {"P", d.plan.period}};
    if (d.era_pair)
        counters["era"] = {{"h_blocks", d.era_pair->counters.h_blocks}, {"hprime_blocks", d.era_pair->counters.hprime_blocks}};
    if (d.bpod_pair)
        counters["bpod"] = {{"h_blocks", d.bpod_pair->counters.h_blocks},
                            {"hprime_blocks", d.bpod_pair->counters.hprime_blocks}};
    log.json("counters.json", counters);
    if (d.projector) log.dmat("output_projector.dmat", d.projector->basis);

    io::Json orders = d.orders;
    detail::write_manifest(log, c, "reduce",
                           {{"sampling", {{"mc", d.plan.mc}, {"mo", d.plan.mo}, {"P", d.plan.period}}},
                            {"orders", orders},
                            {"spectral_radius", d.model.spectral_radius()}});
    return d;
}

/// Loads every model listed in a reduce manifest.
inline std::vector<ReducedModel> load_reduced_models(const io::fs::path& dir) {
    const io::fs::path manifest_path = dir / "manifest.json";
    if (!io::fs::exists(manifest_path)) detail::fail(ErrorKind::MissingArtifact, "no manifest.json in " + dir.string());
    const io::Json manifest = io::read_json(manifest_path);
    const io::Json artifacts = manifest.value("artifacts", io::Json::object());
    std::vector<ReducedModel> out;
    for (const auto& [name, _] : artifacts.items()) {
        if (name.rfind("models/", 0) != 0 || name.size() < 5 || name.substr(name.size() - 5) != ".json") continue;
        out.push_back(io::load_reduced(dir / name.substr(0, name.size() - 5)));
    }
    if (out.empty()) detail::fail(ErrorKind::MissingArtifact, "manifest in " + dir.string() + " lists no models");
    return out;
}

inline void write_diagnostics(detail::ArtifactLog& log, const std::string& stem, const BlockDiagnostics& bd) {
    log.json(stem + ".json", io::to_json(bd));
    log.dmat(stem + "_wc.dmat", bd.wc);
    log.dmat(stem + "_wo.dmat", bd.wo);
    log.dmat(stem + "_prod.dmat", bd.prod);
    auto abs_csv = [](const Matrix& M) {
        std::string s;
        for (Index i = 0; i < M.rows(); ++i) {
            for (Index j = 0; j < M.cols(); ++j) s += (j ? "," : "") + io::format_double(std::abs(M(i, j)));
            s += '\n';
        }
        return s;
    };
    log.text(stem + "_wc_abs.csv", abs_csv(bd.wc));
    log.text(stem + "_wo_abs.csv", abs_csv(bd.wo));
    log.text(stem + "_prod_abs.csv", abs_csv(bd.prod));
}

/// The four comparison CSVs, the ERA/other model deviation table and the
/// transformed-Gramian diagnostics. With `from`, models come from an earlier
/// reduce run; otherwise they are built here.
inline void cmd_compare(const ExperimentConfig& c, const std::optional<std::string>& from = std::nullopt) {
    PipelineData d = run_pipeline(c, true);
    std::vector<ReducedModel> models = from ? load_reduced_models(*from) : d.models;

    CompareOptions opts;
    const ComparisonReport rep = compare_models(d.model, models, d.proj(), opts);
    detail::ArtifactLog log{c.out};

    io::CsvWriter errors({"method", "order", "h2_error", "lower_bound", "truncation_warning"});
    for (const auto& e : rep.errors) errors.row(e.method, static_cast<long long>(e.order), e.h2, e.lower_bound, e.truncation_warning);
    log.text("errors.csv", errors.text());

    io::CsvWriter grams({"method", "order", "i", "sigma", "wc_ii", "wo_ii"});
    for (const auto& g : rep.gramians)
        grams.row(g.method, static_cast<long long>(g.order), static_cast<long long>(g.row.i), g.row.sigma, g.row.wc, g.row.wo);
    log.text("hsv_gramians.csv", grams.text());

    io::CsvWriter traces({"method", "order", "k", "a1"});
    for (const auto& t : rep.traces) traces.row(t.method, static_cast<long long>(t.order), static_cast<long long>(t.k), t.a1);
    log.text("traces.csv", traces.text());

    io::CsvWriter sigma({"method", "order", "omega", "gain"});
    for (const auto& s : rep.sigma) sigma.row(s.method, static_cast<long long>(s.order), s.omega, s.gain);
    log.text("sigma.csv", sigma.text());

    // Max entry difference of each model against the ERA model of equal order.
    io::CsvWriter dev({"method", "order", "max_diff_vs_era"});
    std::map<Index, const ReducedModel*> era_by_order;
    for (const auto& m : models)
        if (m.method == Method::era) era_by_order[m.r()] = &m;
    for (const auto& m : models) {
        const auto it = era_by_order.find(m.r());
        if (m.method == Method::era || it == era_by_order.end()) continue;
        const ReducedModel& e = *it->second;
        double diff = std::numeric_limits<double>::quiet_NaN();
        if (e.B.cols() == m.B.cols() && e.C.rows() == m.C.rows())
            diff = std::max({max_abs_diff(e.A, m.A), max_abs_diff(e.B, m.B), max_abs_diff(e.C, m.C)});
        dev.row(std::string(to_string(m.method)), static_cast<long long>(m.r()), diff);
    }
    log.text("equivalence.csv", dev.text());

    // Transformed Gramians with true and pseudo-adjoint modes over all n1 modes.
    io::Json notes = io::Json::object();
    try {
        const Index r1 = d.bpod_svd->retained();
        const ModeSet truth = bpod_modes(*d.X, *d.Y, *d.bpod_svd, r1);
        const GramianPair g = empirical_gramians(*d.X, *d.Y);
        write_diagnostics(log, "gramians_true",
                          transformed_gramians(build_full_transformation(truth.primal, truth.adjoint), g, truth.hsv));
        const ModeSet pseudo = pseudo_adjoint_modes(truth.primal);
        write_diagnostics(log, "gramians_pseudo",
                          transformed_gramians(build_full_transformation(pseudo.primal, pseudo.adjoint), g, truth.hsv,
                                               &truth.adjoint));
    } catch (const Error& e) {
        notes["transformed_gramians"] = std::string("skipped: ") + e.what();
    }
    detail::write_manifest(log, c, "compare", {{"from", from ? io::Json(*from) : io::Json(nullptr)}, {"notes", notes}});
}

/// Runs both Hankel routes on the configured model and reports their costs.
inline io::Json cmd_counters(const ExperimentConfig& c) {
    validate(c);
    const StateSpaceModel model = build_model(c);
    const auto [mc, mo, P] = resolve_sampling(c, model);
    const SnapshotMatrix X = collect_primal(model, mc, P);
    const SnapshotMatrix Y = collect_adjoint(model, mo, P);
    const HankelPair bpod = hankel_from_snapshots(X, Y, model);
    const HankelPair era = hankel_from_markov(collect_markov_pairs(model, mc, mo, P), mc, mo, P);
    io::Json report = counters_report(mc, mo, bpod.counters, era.counters);
    report["P"] = P;
    return report;
}

}  // namespace erapod
