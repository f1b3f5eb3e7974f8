#pragma once

// JSON/CSV serialization. Numbers are written with 17 significant digits so
// doubles round-trip, and every file is written to a temporary sibling first
// and renamed into place.

#include "cagc/foliation.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cagc::io {

using nlohmann::json;

inline std::string num(double v) {
    if (v == kInf) return "+inf";
    if (v == -kInf) return "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json value_json(double v) {
    if (v == kInf) return "+inf";
    return v;
}

inline double value_from(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "+inf") return kInf;
        throw Error("parse_error", "unexpected string value", j.get<std::string>());
    }
    if (!j.is_number()) throw Error("parse_error", "expected a number");
    return j.get<double>();
}

inline Vec2 vec2_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error("parse_error", "expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Vec3 vec3_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error("parse_error", "expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Mat3 mat3_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error("parse_error", "expected a 3x3 matrix");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (!j[r].is_array() || j[r].size() != 3) throw Error("parse_error", "expected a 3x3 matrix");
        for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline json to_json(const Mat3& m) {
    json j = json::array();
    for (int r = 0; r < 3; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2)});
    return j;
}

inline json to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

// ---------------------------------------------------------------------------
// Domains and boundary functions

inline json to_json(const PlanarDomain& d) {
    json j;
    j["kind"] = to_string(d.kind());
    if (d.kind() == DomainKind::Ellipse) {
        j["a"] = d.semi_a();
        j["b"] = d.semi_b();
    }
    json b = json::array();
    for (const auto& p : d.boundary()) b.push_back({p.x(), p.y()});
    j["boundary"] = std::move(b);
    return j;
}

// Accepts {"kind": "disk" | "ellipse" | "polygon", ...} or a bare
// {"boundary": [...]} polygon. Analytic kinds take "samples" or an explicit
// "boundary" lying on the curve.
inline PlanarDomain domain_from_json(const json& j) {
    const std::string kind = j.value("kind", std::string("polygon"));
    std::vector<Vec2> pts;
    if (j.contains("boundary"))
        for (const auto& p : j.at("boundary")) pts.push_back(vec2_from(p));
    const std::size_t samples = j.value("samples", std::size_t{512});
    PlanarDomain d;
    if (kind == "disk") {
        d = PlanarDomain::disk(samples);
    } else if (kind == "ellipse") {
        d = PlanarDomain::ellipse(j.at("a").get<double>(), j.at("b").get<double>(), samples);
    } else if (kind == "polygon") {
        if (pts.size() < 3) throw Error("parse_error", "polygon needs at least 3 boundary points");
        return PlanarDomain::polygon(std::move(pts));
    } else {
        throw Error("parse_error", "unknown domain kind", kind);
    }
    if (!pts.empty()) d = d.with_samples(std::move(pts));
    return d;
}

inline json to_json(const BoundaryFunction& f) {
    json j = to_json(f.domain);
    json v = json::array();
    for (double x : f.values) v.push_back(value_json(x));
    j["values"] = std::move(v);
    return j;
}

inline BoundaryFunction boundary_function_from_json(const json& j) {
    PlanarDomain d = domain_from_json(j);
    std::vector<double> v;
    const json& vals = j.at("values");
    if (vals.is_array()) {
        for (const auto& x : vals) v.push_back(value_from(x));
    } else {
        v.assign(d.size(), value_from(vals));  // constant data
    }
    return BoundaryFunction(std::move(d), std::move(v));
}

// ---------------------------------------------------------------------------
// Group data

inline json to_json(const GroupData& gd) {
    json j;
    j["g"] = gd.pres.g;
    j["n"] = gd.pres.n;
    json rho = json::object(), tau = json::object();
    for (int i = 0; i < gd.pres.generators(); ++i) {
        rho[gd.pres.name(i)] = to_json(gd.rho[static_cast<std::size_t>(i)]);
        tau[gd.pres.name(i)] = to_json(gd.tau[static_cast<std::size_t>(i)]);
    }
    j["rho"] = std::move(rho);
    j["tau"] = std::move(tau);
    j["cone_section"] = to_json(gd.cone.section);
    return j;
}

// Missing "tau" entries default to 0 and a missing section to the disk.
inline GroupData group_from_json(const json& j) {
    GroupData gd;
    gd.pres = {j.at("g").get<int>(), j.at("n").get<int>()};
    gd.pres.validate();
    const int m = gd.pres.generators();
    gd.rho.assign(static_cast<std::size_t>(m), Mat3::Identity());
    gd.tau.assign(static_cast<std::size_t>(m), Vec3::Zero());
    const json& rho = j.at("rho");
    for (int i = 0; i < m; ++i) {
        const std::string name = gd.pres.name(i);
        if (!rho.contains(name)) throw Error("parse_error", "missing generator matrix", name);
        gd.rho[static_cast<std::size_t>(i)] = mat3_from(rho.at(name));
        if (j.contains("tau") && j.at("tau").contains(name))
            gd.tau[static_cast<std::size_t>(i)] = vec3_from(j.at("tau").at(name));
    }
    gd.cone.section = j.contains("cone_section") ? domain_from_json(j.at("cone_section")) : PlanarDomain::disk();
    gd.check_shape();
    return gd;
}

// ---------------------------------------------------------------------------
// Files

inline json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("io_error", "cannot open file", p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("parse_error", e.what(), p.string());
    }
}

inline void write_atomic(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write file", tmp.string());
        out << content;
        if (!out) throw Error("io_error", "write failed", tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_atomic(p, j.dump(2) + "\n"); }

// CSV with a leading "# provenance" line.
class Csv {
public:
    Csv(const std::string& provenance, const std::vector<std::string>& header) {
        out_ << "# " << provenance << "\n";
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }

    template <class... T>
    void row(const T&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << "\n";
    }

    std::string str() const { return out_.str(); }
    void save(const std::filesystem::path& p) const { write_atomic(p, out_.str()); }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "true" : "false"; }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }

    std::ostringstream out_;
};

inline Csv grid_csv(const GridFunction& u, const std::string& provenance) {
    Csv c(provenance, {"x", "y", "value"});
    for (std::size_t k = 0; k < u.grid->size(); ++k) c.row(u.grid->node(k).x(), u.grid->node(k).y(), u.values[k]);
    return c;
}

inline json solution_meta(const MASolution& s, const GridFunction& u) {
    return {{"residual", s.residual_max}, {"iterations", s.iterations}, {"h", u.grid->h()},
            {"c", s.factor},              {"converged", s.converged},   {"pairs", s.pairs}};
}

inline Csv curve_csv(const InvariantCurve& c, const std::string& provenance) {
    Csv out(provenance, {"arc_length", "p1", "p2", "xi", "word"});
    for (const auto& s : c.samples) out.row(s.arc, s.p.x(), s.p.y(), s.xi, s.word.empty() ? std::string("e") : s.word);
    return out;
}

inline Csv surface_csv(const std::vector<AffinePoint>& pts, double t, const std::string& provenance) {
    Csv out(provenance, {"y1", "y2", "eta", "t"});
    for (const auto& p : pts) out.row(p.y.x(), p.y.y(), p.eta, t);
    return out;
}

}  // namespace cagc::io
