// Command-line driver. Every command writes its artifacts under --out and
// prints a short JSON summary; failures exit nonzero with a JSON error on
// stderr.

#include "cagc/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#ifndef CAGC_DATA_DIR
#define CAGC_DATA_DIR "data"
#endif

using namespace cagc;
using io::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string out = "out";
    double h = 0.0;
    double tol = 1e-10;
    int max_iter = 100;
    int stencil_dirs = 4;
    double boundary_clamp = 1e-3;

    std::string domain = std::string(CAGC_DATA_DIR) + "/disk.json";
    std::string boundary = std::string(CAGC_DATA_DIR) + "/phi_zero_disk.json";
    std::string group = std::string(CAGC_DATA_DIR) + "/punctured_torus.json";
    std::string matrix = std::string(CAGC_DATA_DIR) + "/a0.json";
    std::string points;
    std::string word;
    std::vector<double> mu{1.0};
    double t = 0.0;
    double k = 0.0;
    int max_word_len = 8;
    int transport_len = 6;
    double t_min = -1.0, t_max = 2.0;
    int t_steps = 4;
    std::string mode = "info";
};

MAConfig config(const Options& o) {
    MAConfig c;
    c.h = o.h;
    c.tol = o.tol;
    c.max_iter = o.max_iter;
    c.stencil_dirs = o.stencil_dirs;
    c.boundary_clamp = o.boundary_clamp;
    c.validate();
    return c;
}

json config_json(const Options& o) {
    return {{"h", o.h}, {"tol", o.tol}, {"max_iter", o.max_iter}, {"stencil_dirs", o.stencil_dirs},
            {"boundary_clamp", o.boundary_clamp}};
}

std::string provenance(const std::string& cmd, const Options& o, json extra = json::object()) {
    json j = config_json(o);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    return "cagc " + cmd + " " + j.dump();
}

int threads() {
    const char* env = std::getenv("CAGC_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// Closed-form Cheng-Yau solution for disks and ellipses.
std::optional<double> closed_form_cy(const PlanarDomain& d, const Vec2& x) {
    if (d.kind() == DomainKind::Polygon) return std::nullopt;
    const double a = d.semi_a(), b = d.semi_b();
    const double q = 1.0 - x.x() * x.x() / (a * a) - x.y() * x.y() / (b * b);
    return -std::cbrt(a * b) * std::sqrt(std::max(q, 0.0));
}

void cmd_domain(const Options& o) {
    const PlanarDomain d = io::domain_from_json(io::read_json(o.domain));
    if (o.mode == "dualize") {
        const PlanarDomain dual = d.dual();
        io::write_json(fs::path(o.out) / "dual_domain.json", io::to_json(dual));
        print({{"dual", dual.describe()}, {"hausdorff_to_input", hausdorff_distance(d, dual)}});
        return;
    }
    if (o.mode != "info") throw Error("usage", "domain mode must be dualize or info", o.mode);
    print({{"domain", d.describe()}, {"kind", to_string(d.kind())}, {"samples", d.size()}, {"diameter", d.diameter()}});
}

void cmd_cheng_yau(const Options& o) {
    const PlanarDomain d = io::domain_from_json(io::read_json(o.domain));
    const MASolution s = cheng_yau(d, config(o));
    const fs::path out(o.out);
    io::grid_csv(s.u, provenance("cheng-yau", o)).save(out / "cheng_yau.csv");
    json meta = io::solution_meta(s, s.u);
    double err = -1.0;
    for (std::size_t k = 0; k < s.u.grid->size(); ++k) {
        const Vec2& x = s.u.grid->node(k);
        if (s.u.grid->boundary_distance_estimate(x) < 2.0 * s.u.grid->h()) continue;
        if (const auto exact = closed_form_cy(d, x)) err = std::max(err, std::abs(s.u.values[k] - *exact));
    }
    if (err >= 0.0) meta["sup_error_closed_form"] = err;
    io::write_json(out / "cheng_yau.json", meta);
    print(meta);
    if (!s.converged) throw Error("not_converged", "Cheng-Yau solve did not converge");
}

void cmd_cagc(const Options& o) {
    const BoundaryFunction phi = io::boundary_function_from_json(io::read_json(o.boundary));
    const double t = o.k > 0.0 ? std::log(o.k) : o.t;
    const MAConfig cfg = config(o);
    const MASolution w = cheng_yau(phi.domain, cfg);
    const MASolution s = cagc_solve(phi.domain, w, phi, cagc_factor(t), cfg);
    const GridFunction env = convex_envelope(phi, w.u.grid);
    const BarrierReport br = barrier_check(w.u, env, s.u, t);
    const fs::path out(o.out);
    io::grid_csv(s.u, provenance("cagc", o, {{"t", t}})).save(out / "cagc.csv");
    json meta = io::solution_meta(s, s.u);
    meta["t"] = t;
    meta["barrier_lower"] = br.lower;
    meta["barrier_upper"] = br.upper;
    meta["blowup_fraction"] = s.blowup_fraction;
    io::write_json(out / "cagc.json", meta);
    print(meta);
    if (!s.converged) throw Error("not_converged", "CAGC solve did not converge");
}

void cmd_classify(const Options& o) {
    const json j = io::read_json(o.matrix);
    const Mat3 a = io::mat3_from(j.is_array() ? j : j.at("matrix"));
    const Classification c = classify_sl3(a);
    json ev = json::array();
    for (const auto& e : c.eigenvalues) ev.push_back({e.real(), e.imag()});
    print({{"class", to_string(c.kind)}, {"confident", c.confident}, {"eigenvalues", ev},
           {"rank_minus_identity", c.rank_minus_identity}});
}

void cmd_admissible(const Options& o) {
    json res = json::object();
    const GroupData gd = io::group_from_json(io::read_json(o.group));
    json per = json::array();
    bool all = true;
    std::vector<Word> words;
    if (!o.word.empty()) {
        words.push_back(gd.pres.parse(o.word));
    } else {
        for (int j = 0; j < gd.pres.n; ++j) words.push_back({{2 * gd.pres.g + j, false}});
    }
    for (const auto& w : words) {
        const bool ok = is_admissible(gd, w);
        all = all && ok;
        per.push_back({{"word", gd.pres.format(w)}, {"admissible", ok}, {"tau", io::to_json(cocycle_eval(gd, w))}});
    }
    res["elements"] = per;
    res["admissible"] = all;
    res["relator_defect"] = relator_defect(gd).norm();
    print(res);
}

void cmd_admissible_matrix(const Options& o) {
    const json j = io::read_json(o.matrix);
    const Mat3 a = io::mat3_from(j.at("matrix"));
    const Vec3 tau = io::vec3_from(j.at("tau"));
    print({{"admissible", is_admissible(a, tau)}});
}

void cmd_rank(const Options& o) {
    const GroupData gd = io::group_from_json(io::read_json(o.group));
    const ModuliRank r = moduli_rank(gd.pres, gd.rho);
    std::cout << "dim_ker_L=" << r.dim_ker_L << "\n"
              << "coboundary_rank=" << r.coboundary_rank << "\n"
              << "rank=" << r.rank_H1_admissible << "\n"
              << "expected=" << r.expected << "\n";
}

void cmd_curve(const Options& o) {
    const GroupData gd = io::group_from_json(io::read_json(o.group));
    const InvariantCurve c = sample_invariant_curve(gd, o.max_word_len);
    io::curve_csv(c, provenance("curve", o, {{"max_word_len", o.max_word_len}})).save(fs::path(o.out) / "curve.csv");
    print({{"samples", c.samples.size()},
           {"continuity_gap", c.continuity_gap},
           {"duplicate_gap", c.duplicate_gap},
           {"fixed_residual", c.fixed_residual}});
}

BoundaryFunction phi_mu_from(const Options& o, const GroupData& gd, InvariantCurve* curve_out = nullptr) {
    InvariantCurve c = sample_invariant_curve(gd, o.max_word_len);
    std::vector<double> mu = o.mu;
    if (gd.pres.n == 0) mu.clear();
    if (mu.size() == 1 && gd.pres.n > 1) mu.assign(static_cast<std::size_t>(gd.pres.n), mu.front());
    if (static_cast<int>(mu.size()) != gd.pres.n)
        throw Error("usage", "one --mu value per puncture required", std::to_string(gd.pres.n));
    BoundaryFunction phi = build_phi_mu(gd, c, mu, o.transport_len);
    if (curve_out) *curve_out = std::move(c);
    return phi;
}

void cmd_phimu(const Options& o) {
    const GroupData gd = io::group_from_json(io::read_json(o.group));
    const BoundaryFunction phi = phi_mu_from(o, gd);
    io::write_json(fs::path(o.out) / "phi_mu.json", io::to_json(phi));
    double lo = kInf;
    for (double v : phi.values) lo = std::min(lo, v);
    print({{"samples", phi.values.size()}, {"min_value", lo}, {"mu", o.mu}});
}

void cmd_foliate(const Options& o) {
    if (o.t_steps < 1 || !(o.t_max >= o.t_min)) throw Error("usage", "need t-steps >= 1 and t-max >= t-min");
    const GroupData gd = io::group_from_json(io::read_json(o.group));
    const BoundaryFunction phi = phi_mu_from(o, gd);
    const PlanarDomain omega = gd.cone.tube_domain();
    const MAConfig cfg = config(o);
    const MASolution w = cheng_yau(omega, cfg);
    std::vector<double> ts;
    for (int i = 0; i < o.t_steps; ++i)
        ts.push_back(o.t_steps == 1 ? o.t_min : o.t_min + (o.t_max - o.t_min) * i / (o.t_steps - 1));
    const FoliationFamily fam = foliate(omega, w, phi, ts, cfg, threads());
    const fs::path out(o.out);
    const json extra = {{"mu", o.mu}, {"max_word_len", o.max_word_len}, {"transport_len", o.transport_len}};
    json members = json::array();
    const auto gaps = asymptotics_check(fam);
    for (std::size_t i = 0; i < fam.solutions.size(); ++i) {
        const auto& s = fam.solutions[i];
        if (!s.u.grid) continue;
        json e = extra;
        e["t"] = fam.t_grid[i];
        const std::string stem = "leaf_" + std::to_string(i);
        io::grid_csv(s.u, provenance("foliate", o, e)).save(out / (stem + ".csv"));
        io::surface_csv(surface_points(s), fam.t_grid[i], provenance("foliate", o, e)).save(out / (stem + "_surface.csv"));
        json m = io::solution_meta(s, s.u);
        m["t"] = fam.t_grid[i];
        m["file"] = stem + ".csv";
        m["surface_file"] = stem + "_surface.csv";
        m["boundary_gap"] = i < gaps.size() ? gaps[i] : -1.0;
        members.push_back(m);
    }
    json manifest = {{"config", config_json(o)},
                     {"mu", o.mu},
                     {"partial", fam.partial},
                     {"failures", fam.failures},
                     {"monotone", fam.monotone},
                     {"monotone_fraction", fam.monotone_fraction},
                     {"max_t_second_difference", fam.max_t_second_difference},
                     {"members", members}};
    io::write_json(out / "manifest.json", manifest);
    print({{"partial", fam.partial}, {"monotone", fam.monotone}, {"members", fam.solutions.size()}});
    if (fam.partial) throw Error("partial_family", "some solves failed", fam.failures.front());
}

// Reads "y1,y2,eta" rows (header and '#' lines skipped).
std::vector<AffinePoint> read_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open file", path);
    std::vector<AffinePoint> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, b, c;
        if (!(ss >> a >> b >> c)) continue;  // header
        pts.push_back({{a, b}, c});
    }
    return pts;
}

void cmd_membership(const Options& o, bool regular) {
    if (o.points.empty()) throw Error("usage", "--points is required");
    const auto pts = read_points(o.points);
    io::Csv csv(provenance("membership", o, {{"regular", regular}}), {"y1", "y2", "eta", "inside"});
    std::size_t inside = 0;
    if (regular) {
        const BoundaryFunction phi = io::boundary_function_from_json(io::read_json(o.boundary));
        const ConvexEnvelope env(phi);
        for (const auto& p : pts) {
            const bool in = regular_domain_membership(env, p);
            inside += in ? 1 : 0;
            csv.row(p.y.x(), p.y.y(), p.eta, in);
        }
    } else {
        const ProperCone cone{io::domain_from_json(io::read_json(o.domain))};
        for (const auto& p : pts) {
            const Membership m = cone_membership(cone, p);
            inside += m == Membership::Inside ? 1 : 0;
            csv.row(p.y.x(), p.y.y(), p.eta, std::string(to_string(m)));
        }
    }
    csv.save(fs::path(o.out) / "membership.csv");
    print({{"points", pts.size()}, {"inside", inside}});
}

// Quick invariant suite on the bundled data at a coarse grid.
int cmd_check(const Options& o) {
    std::vector<std::pair<std::string, bool>> rows;
    auto add = [&](const std::string& name, const std::function<bool()>& f) {
        bool ok = false;
        try {
            ok = f();
        } catch (const std::exception&) {
            ok = false;
        }
        rows.emplace_back(name, ok);
    };
    MAConfig cfg = config(o);
    if (cfg.h <= 0.0) cfg.h = 1.0 / 32.0;
    const PlanarDomain disk = PlanarDomain::disk();
    MASolution w;
    add("cheng-yau converges on the disk", [&] {
        w = cheng_yau(disk, cfg);
        return w.converged;
    });
    add("cheng-yau solution is discretely convex and negative", [&] {
        for (double v : w.u.values)
            if (!(v < 0.0)) return false;
        return discretely_convex(w.u, 1e-9);
    });
    add("dual of the dual is the domain", [&] {
        const PlanarDomain sq = PlanarDomain::polygon({{1, 1}, {-1, 1}, {-1, -1}, {1, -1}});
        return hausdorff_distance(sq, sq.dual().dual()) < 1e-9;
    });
    const GroupData pt = io::group_from_json(io::read_json(std::string(CAGC_DATA_DIR) + "/punctured_torus_deformed.json"));
    const GroupData g2 = io::group_from_json(io::read_json(std::string(CAGC_DATA_DIR) + "/genus2.json"));
    add("relator defects below 1e-8", [&] {
        return relator_defect(pt).norm() < 1e-8 && pt.relator_defect_linear() < 1e-8 &&
               g2.relator_defect_linear() < 1e-8;
    });
    add("punctured torus generators hyperbolic", [&] {
        for (int i = 0; i < 2; ++i)
            if (classify_sl3(pt.linear(Word{{i, false}})).kind != SL3Class::Hyperbolic) return false;
        return classify_sl3(pt.linear(Word{{2, false}})).kind == SL3Class::Parabolic;
    });
    add("moduli ranks 2 and 6", [&] {
        return moduli_rank(pt.pres, pt.rho).rank_H1_admissible == 2 && moduli_rank(g2.pres, g2.rho).rank_H1_admissible == 6;
    });
    add("cocycle admissible at the puncture", [&] { return is_admissible(pt); });
    InvariantCurve curve;
    add("invariant curve samples are fixed points", [&] {
        curve = sample_invariant_curve(pt, 6);
        return curve.fixed_residual <= 1e-8 && curve.duplicate_gap <= 1e-6;
    });
    FoliationFamily fam;
    add("foliation family converges and is monotone", [&] {
        const BoundaryFunction phi = build_phi_mu(pt, curve, {1.0}, 4);
        const MASolution wo = cheng_yau(curve.omega, cfg);
        fam = foliate(curve.omega, wo, phi, {-1.0, 0.0, 1.0}, cfg, threads());
        return !fam.partial && fam.monotone && fam.max_t_second_difference <= 1e-6;
    });
    add("family invariant under generators (<= 10h)", [&] {
        for (const auto& s : fam.solutions)
            for (int g = 0; g < pt.pres.generators(); ++g)
                if (invariance_residual(s.u, pt.tube(Word{{g, false}}), 0.05) > 10.0 * cfg.h) return false;
        return true;
    });
    bool all = true;
    for (const auto& [name, ok] : rows) {
        std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
        all = all && ok;
    }
    return all ? 0 : 1;
}

void emit_error(const std::string& code, const std::string& message, const std::string& context) {
    std::cerr << json{{"code", code}, {"message", message}, {"context", context}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affine (C,k)-surfaces: Monge-Ampere solvers and deformation tools"};
    app.require_subcommand(1);
    Options o;
    app.set_help_flag("--help", "print help");
    auto common = [&](CLI::App* s) {
        s->set_help_flag("--help", "print help");
        s->add_option("--out", o.out, "output directory");
        s->add_option("--h", o.h, "grid spacing (<= 0: diameter/128)");
        s->add_option("--tol", o.tol, "Newton tolerance");
        s->add_option("--max-iter", o.max_iter, "Newton iteration cap");
        s->add_option("--stencil-dirs", o.stencil_dirs, "direction pairs at the base resolution");
        s->add_option("--boundary-clamp", o.boundary_clamp, "clamp for w near the boundary");
    };
    auto group_opts = [&](CLI::App* s) {
        s->add_option("--group", o.group, "GroupData JSON");
        s->add_option("--max-word-len", o.max_word_len, "word length for curve sampling");
    };

    auto* domain = app.add_subcommand("domain", "domain utilities");
    domain->add_option("mode", o.mode, "dualize | info")->check(CLI::IsMember({"dualize", "info"}));
    domain->add_option("--domain", o.domain, "domain JSON");
    common(domain);

    auto* cy = app.add_subcommand("cheng-yau", "solve det D2 w = w^-4, w = 0 on the boundary");
    cy->add_option("--domain", o.domain, "domain JSON");
    common(cy);

    auto* cg = app.add_subcommand("cagc", "solve the CAGC equation for boundary data");
    cg->add_option("--boundary", o.boundary, "BoundaryFunction JSON");
    auto* topt = cg->add_option("--t", o.t, "leaf parameter t (factor e^{-2t/3})");
    cg->add_option("--k", o.k, "curvature k = e^t")->excludes(topt);
    common(cg);

    auto* cl = app.add_subcommand("classify", "classify an SL(3,R) matrix");
    cl->add_option("--matrix", o.matrix, "JSON {\"matrix\": [[...]]} or a bare 3x3 array");
    common(cl);

    auto* ad = app.add_subcommand("admissible", "admissibility of the cocycle at parabolic elements");
    ad->add_option("--group", o.group, "GroupData JSON");
    ad->add_option("--word", o.word, "element to test (default: the puncture generators)");
    auto* adm = ad->add_option("--matrix", o.matrix, "JSON {\"matrix\": ..., \"tau\": ...} for a single pair");
    common(ad);

    auto* rk = app.add_subcommand("rank", "moduli rank of admissible cohomology");
    rk->add_option("--group", o.group, "GroupData JSON");
    common(rk);

    auto* cv = app.add_subcommand("curve", "sample the invariant boundary curve");
    group_opts(cv);
    common(cv);

    auto* pm = app.add_subcommand("phimu", "boundary data modified at the cusps");
    group_opts(pm);
    pm->add_option("--mu", o.mu, "depths, one per puncture")->delimiter(',');
    pm->add_option("--transport-len", o.transport_len, "word length for transporting the cusps");
    common(pm);

    auto* fo = app.add_subcommand("foliate", "CAGC family over a t range");
    group_opts(fo);
    fo->add_option("--mu", o.mu, "depths, one per puncture")->delimiter(',');
    fo->add_option("--transport-len", o.transport_len, "word length for transporting the cusps");
    fo->add_option("--t-min", o.t_min);
    fo->add_option("--t-max", o.t_max);
    fo->add_option("--t-steps", o.t_steps);
    common(fo);

    auto* mb = app.add_subcommand("membership", "batch membership of (y1, y2, eta) points");
    mb->add_option("--points", o.points, "CSV of y1,y2,eta")->required();
    auto* mbb = mb->add_option("--boundary", o.boundary, "BoundaryFunction JSON: test the regular domain");
    mb->add_option("--domain", o.domain, "cone section JSON: test the cone");
    common(mb);

    auto* ck = app.add_subcommand("check", "run the invariant suite on the bundled data");
    common(ck);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what(), "");
        return 2;
    }

    try {
        if (*domain) cmd_domain(o);
        else if (*cy) cmd_cheng_yau(o);
        else if (*cg) cmd_cagc(o);
        else if (*cl) cmd_classify(o);
        else if (*ad) {
            if (adm->count() > 0) cmd_admissible_matrix(o);
            else cmd_admissible(o);
        } else if (*rk) cmd_rank(o);
        else if (*cv) cmd_curve(o);
        else if (*pm) cmd_phimu(o);
        else if (*fo) cmd_foliate(o);
        else if (*mb) cmd_membership(o, mbb->count() > 0);
        else if (*ck) return cmd_check(o);
    } catch (const Error& e) {
        emit_error(e.code(), e.what(), e.context());
        return 1;
    } catch (const std::exception& e) {
        emit_error("internal", e.what(), "");
        return 1;
    }
    return 0;
}
