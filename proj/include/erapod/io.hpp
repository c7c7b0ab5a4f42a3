#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "erapod/gramians.hpp"
#include "erapod/hankel.hpp"
#include "erapod/lti.hpp"
#include "erapod/reduction.hpp"
#include "erapod/snapshots.hpp"

namespace erapod::io {

namespace fs = std::filesystem;
using Json = nlohmann::json;

/// Shortest text that reads back to the same double: 17 significant digits.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto res = std::from_chars(first, s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        detail::fail(ErrorKind::IoError, "not a number: '" + std::string(s) + "'");
    return v;
}

inline std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) detail::fail(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) detail::fail(ErrorKind::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) detail::fail(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
    if (!out) detail::fail(ErrorKind::IoError, "write failed for " + path.string());
}

// DMAT: "dmat <rows> <cols>\n" then one row-major line per matrix row.

inline std::string to_dmat(const Matrix& M) {
    std::string s = "dmat " + std::to_string(M.rows()) + " " + std::to_string(M.cols()) + "\n";
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j > 0) s += ' ';
            s += format_double(M(i, j));
        }
        s += '\n';
    }
    return s;
}

inline Matrix from_dmat(const std::string& text, const std::string& origin = "<dmat>") {
    std::istringstream in(text);
    std::string magic;
    long rows = -1, cols = -1;
    if (!(in >> magic >> rows >> cols) || magic != "dmat" || rows < 0 || cols < 0)
        detail::fail(ErrorKind::IoError, origin + ": missing or malformed 'dmat <rows> <cols>' header");
    Matrix M(rows, cols);
    std::string tok;
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) {
            if (!(in >> tok))
                detail::fail(ErrorKind::IoError, origin + ": expected " + std::to_string(rows * cols) + " entries");
            M(i, j) = parse_double(tok);
        }
    if (in >> tok) detail::fail(ErrorKind::IoError, origin + ": trailing data after " + std::to_string(rows * cols) + " entries");
    return M;
}

inline void write_dmat(const fs::path& path, const Matrix& M) { write_text(path, to_dmat(M)); }
inline Matrix read_dmat(const fs::path& path) { return from_dmat(read_text(path), path.string()); }

inline Json read_json(const fs::path& path, ErrorKind on_parse = ErrorKind::IoError) {
    const std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        detail::fail(on_parse, path.string() + ": " + e.what());
    }
}

inline void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

inline Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Vector vector_from_json(const Json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

// Snapshot and Markov data: <stem>.dmat plus <stem>.json sidecar.

inline void save(const fs::path& stem, const SnapshotMatrix& S) {
    write_dmat(stem.string() + ".dmat", S.data);
    write_json(stem.string() + ".json", Json{{"kind", to_string(S.kind)},
                                             {"P", S.period},
                                             {"block_width", S.block_width},
                                             {"indices", Json::array()}});
}

inline SnapshotMatrix load_snapshots(const fs::path& stem) {
    const Json meta = read_json(stem.string() + ".json");
    SnapshotMatrix S;
    S.data = read_dmat(stem.string() + ".dmat");
    try {
        const std::string kind = meta.at("kind").get<std::string>();
        if (kind != "primal" && kind != "adjoint") detail::fail(ErrorKind::IoError, "unknown snapshot kind " + kind);
        S.kind = kind == "primal" ? SnapshotKind::primal : SnapshotKind::adjoint;
        S.period = meta.at("P").get<int>();
        S.block_width = meta.at("block_width").get<Index>();
    } catch (const Json::exception& e) {
        detail::fail(ErrorKind::IoError, stem.string() + ".json: " + e.what());
    }
    detail::require(S.block_width > 0 && S.data.cols() % S.block_width == 0, ErrorKind::IoError,
                    stem.string() + ": column count is not a multiple of block_width");
    return S;
}

/// Markov blocks are stored side by side in one DMAT (q x p*count).
inline void save(const fs::path& stem, const MarkovSequence& seq, int P) {
    write_dmat(stem.string() + ".dmat", seq.stacked());
    write_json(stem.string() + ".json", Json{{"kind", "markov"},
                                             {"P", P},
                                             {"block_width", seq.input_dim()},
                                             {"indices", seq.indices},
                                             {"pattern", seq.pattern}});
}

inline MarkovSequence load_markov(const fs::path& stem) {
    const Json meta = read_json(stem.string() + ".json");
    const Matrix all = read_dmat(stem.string() + ".dmat");
    MarkovSequence seq;
    Index width = 0;
    try {
        width = meta.at("block_width").get<Index>();
        seq.indices = meta.at("indices").get<std::vector<long>>();
        seq.pattern = meta.value("pattern", seq.indices);
    } catch (const Json::exception& e) {
        detail::fail(ErrorKind::IoError, stem.string() + ".json: " + e.what());
    }
    detail::require(width > 0 && all.cols() == width * static_cast<Index>(seq.indices.size()), ErrorKind::IoError,
                    stem.string() + ": block count does not match indices");
    for (std::size_t k = 0; k < seq.indices.size(); ++k)
        seq.blocks.push_back(all.middleCols(static_cast<Index>(k) * width, width));
    return seq;
}

inline void save(const fs::path& stem, const HankelPair& pair) {
    write_dmat(stem.string() + "_H.dmat", pair.H);
    write_dmat(stem.string() + "_Hprime.dmat", pair.Hprime);
    write_json(stem.string() + ".json", Json{{"source", to_string(pair.source)},
                                             {"block_rows", pair.block_rows},
                                             {"block_cols", pair.block_cols},
                                             {"block_shape", {pair.out_dim, pair.in_dim}},
                                             {"counters",
                                              {{"h_blocks", pair.counters.h_blocks},
                                               {"hprime_blocks", pair.counters.hprime_blocks}}}});
}

// Reduced models: <stem>_A/_B/_C.dmat plus <stem>.json.

inline void save(const fs::path& stem, const ReducedModel& red) {
    write_dmat(stem.string() + "_A.dmat", red.A);
    write_dmat(stem.string() + "_B.dmat", red.B);
    write_dmat(stem.string() + "_C.dmat", red.C);
    Json meta{{"method", to_string(red.method)}, {"r", red.r()}, {"hsv", to_json(red.hsv)}};
    meta["projector_id"] = red.projector_id.empty() ? Json(nullptr) : Json(red.projector_id);
    write_json(stem.string() + ".json", meta);
}

inline ReducedModel load_reduced(const fs::path& stem) {
    const fs::path meta_path = stem.string() + ".json";
    if (!fs::exists(meta_path)) detail::fail(ErrorKind::MissingArtifact, "no reduced model at " + meta_path.string());
    const Json meta = read_json(meta_path);
    ReducedModel red;
    red.A = read_dmat(stem.string() + "_A.dmat");
    red.B = read_dmat(stem.string() + "_B.dmat");
    red.C = read_dmat(stem.string() + "_C.dmat");
    try {
        const auto m = parse_method(meta.at("method").get<std::string>());
        if (!m) detail::fail(ErrorKind::IoError, meta_path.string() + ": unknown method");
        red.method = *m;
        red.hsv = vector_from_json(meta.at("hsv"));
        if (meta.contains("projector_id") && meta["projector_id"].is_string())
            red.projector_id = meta["projector_id"].get<std::string>();
    } catch (const Json::exception& e) {
        detail::fail(ErrorKind::IoError, meta_path.string() + ": " + e.what());
    }
    detail::require(red.A.rows() == red.A.cols() && red.B.rows() == red.A.rows() && red.C.cols() == red.A.rows(),
                    ErrorKind::IoError, stem.string() + ": inconsistent reduced model dimensions");
    return red;
}

// CSV helpers.

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
        text_ += '\n';
    }

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((text_ += (first ? "" : ","), text_ += cell(cells), first = false), ...);
        text_ += '\n';
    }

    const std::string& text() const { return text_; }
    void save(const fs::path& path) const { write_text(path, text_); }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(bool b) { return b ? "1" : "0"; }
    template <std::integral I>
    static std::string cell(I v) { return std::to_string(v); }

    std::string text_;
};

/// |M| as a dense CSV grid, one matrix row per line (heatmap input).
inline void write_abs_csv(const fs::path& path, const Matrix& M) {
    std::string s;
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j > 0) s += ',';
            s += format_double(std::abs(M(i, j)));
        }
        s += '\n';
    }
    write_text(path, s);
}

inline Json to_json(const BlockDiagnostics& d) {
    Json j{{"split", d.split},
           {"wc_offdiag", d.wc_offdiag},
           {"wo_offdiag", d.wo_offdiag},
           {"prod12", d.prod12},
           {"prod21", d.prod21},
           {"prod22", d.prod22},
           {"wc11_dev", d.wc11_dev},
           {"wo11_dev", d.wo11_dev},
           {"prod11_dev", d.prod11_dev},
           {"m1_fro", d.m1.norm()},
           {"m2_fro", d.m2.norm()},
           {"m3_fro", d.m3.norm()}};
    if (d.m3_independent) j["m3_independent_gap"] = max_abs_diff(d.m3, *d.m3_independent);
    return j;
}

/// JSON report, DMAT dumps of the transformed matrices and |.| CSVs.
inline void save(const fs::path& stem, const BlockDiagnostics& d) {
    write_json(stem.string() + ".json", to_json(d));
    write_dmat(stem.string() + "_wc.dmat", d.wc);
    write_dmat(stem.string() + "_wo.dmat", d.wo);
    write_dmat(stem.string() + "_prod.dmat", d.prod);
    write_abs_csv(stem.string() + "_wc_abs.csv", d.wc);
    write_abs_csv(stem.string() + "_wo_abs.csv", d.wo);
    write_abs_csv(stem.string() + "_prod_abs.csv", d.prod);
}

// PlantConfig <-> JSON. The forcing center may be given as forcing_center [x, y].

inline PlantConfig plant_config_from_json(const Json& j) {
    using detail::require;
    require(j.is_object(), ErrorKind::ConfigError, "plant config must be a JSON object");
    static const std::vector<std::string> known = {"nx", "ny", "nu", "cx", "cy", "forcing_x", "forcing_y",
                                                   "forcing_center", "forcing_width", "dt"};
    for (const auto& [key, _] : j.items())
        require(std::find(known.begin(), known.end(), key) != known.end(), ErrorKind::ConfigError,
                "unknown plant config key '" + key + "'");
    PlantConfig c;
    try {
        c.nx = j.value("nx", c.nx);
        c.ny = j.value("ny", c.ny);
        c.nu = j.value("nu", c.nu);
        c.cx = j.value("cx", c.cx);
        c.cy = j.value("cy", c.cy);
        c.forcing_x = j.value("forcing_x", c.forcing_x);
        c.forcing_y = j.value("forcing_y", c.forcing_y);
        if (j.contains("forcing_center")) {
            const auto& fc = j.at("forcing_center");
            require(fc.is_array() && fc.size() == 2, ErrorKind::ConfigError, "forcing_center must be [x, y]");
            c.forcing_x = fc[0].get<double>();
            c.forcing_y = fc[1].get<double>();
        }
        c.forcing_width = j.value("forcing_width", c.forcing_width);
        c.dt = j.value("dt", c.dt);
    } catch (const Json::exception& e) {
        detail::fail(ErrorKind::ConfigError, std::string("plant config: ") + e.what());
    }
    return c;
}

inline Json to_json(const PlantConfig& c) {
    return Json{{"nx", c.nx},
                {"ny", c.ny},
                {"nu", c.nu},
                {"cx", c.cx},
                {"cy", c.cy},
                {"forcing_center", {c.forcing_x, c.forcing_y}},
                {"forcing_width", c.forcing_width},
                {"dt", c.dt}};
}

inline PlantConfig read_plant_config(const fs::path& path) {
    return plant_config_from_json(read_json(path, ErrorKind::ConfigError));
}

}  // namespace erapod::io
