// Command-line front end: critical cells, homology, cup products, K_nT,
// topological complexity bounds, h_s and allowable arcs.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <treebraid/arcs.hpp>
#include <treebraid/flow.hpp>
#include <treebraid/oracle.hpp>
#include <treebraid/ring.hpp>
#include <treebraid/snf.hpp>
#include <treebraid/tc.hpp>

using namespace treebraid;
using Json = nlohmann::ordered_json;

namespace {

constexpr int exit_verify_failed = 1;

struct RunConfig {
    std::string tree_path;
    int n = 0;
    int s = 2;
    std::string format = "text";
    std::int64_t budget_cells = 5'000'000;
    std::int64_t budget_terms = 10'000'000;
    std::int64_t budget_nodes = 50'000'000;
    bool verify = false;
    std::string reading = "leading";
};

struct Report {
    Json json;
    std::vector<std::string> text;
    int exit_code = 0;

    void line(const std::string& s) { text.push_back(s); }
};

PlanarTree load_tree(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::Parse, "cannot open tree file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return PlanarTree::parse(ss.str());
}

BracketReading reading_of(const RunConfig& c)
{
    return c.reading == "verbatim" ? BracketReading::Verbatim : BracketReading::WithLeading;
}

Json header(const std::string& command, const PlanarTree& t, const RunConfig& c)
{
    Json j;
    j["schema"] = "treebraid/1";
    j["command"] = command;
    j["tree"] = t.name();
    if (c.n > 0)
        j["n"] = c.n;
    return j;
}

std::string join(const std::vector<std::int64_t>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? " " : "") + std::to_string(v[i]);
    return out;
}

void require_n(const RunConfig& c) { require(c.n >= 1, ErrorKind::Invalid, "--n must be at least 1"); }

// ---------------------------------------------------------------------------

Report cmd_critical(const RunConfig& c)
{
    require_n(c);
    auto t = subdivide_for_n(load_tree(c.tree_path), c.n);
    auto cells = critical_cells(t, c.n, std::nullopt, c.budget_cells);
    Report r;
    r.json = header("critical", t, c);
    std::vector<std::int64_t> counts;
    Json by_dim = Json::object();
    for (const auto& cell : cells) {
        if (cell.dim() >= static_cast<int>(counts.size()))
            counts.resize(cell.dim() + 1, 0);
        ++counts[cell.dim()];
        by_dim[std::to_string(cell.dim())].push_back(to_string(cell, t));
    }
    r.json["counts"] = counts;
    r.json["cells"] = by_dim;
    r.line("critical cells of UD^" + std::to_string(c.n) + " " + t.name() + ": " + join(counts));
    for (const auto& [d, list] : by_dim.items()) {
        r.line("dimension " + d + ":");
        for (const auto& s : list)
            r.line("  " + s.get<std::string>());
    }
    if (c.verify) {
        auto h = homology(t, c.n, {c.budget_cells});
        auto betti = h.betti;
        while (betti.size() > counts.size() && betti.back() == 0)
            betti.pop_back();
        bool agrees = betti == counts && h.torsion_free();
        r.json["verify"] = {{"betti", h.betti}, {"torsion_free", h.torsion_free()}, {"agrees", agrees}};
        r.line(std::string("verify: Betti numbers ") + join(h.betti) + (agrees ? " agree" : " DISAGREE"));
        if (!agrees)
            r.exit_code = exit_verify_failed;
    }
    return r;
}

Report cmd_homology(const RunConfig& c)
{
    require_n(c);
    auto t = subdivide_for_n(load_tree(c.tree_path), c.n);
    auto h = homology(t, c.n, {c.budget_cells});
    Report r;
    r.json = header("homology", t, c);
    r.json["cells"] = h.cells;
    r.json["betti"] = h.betti;
    Json torsion = Json::array();
    for (const auto& list : h.torsion) {
        Json d = Json::array();
        for (const auto& f : list)
            d.push_back(f.str());
        torsion.push_back(d);
    }
    r.json["torsion"] = torsion;
    r.line("cells per dimension: " + join(h.cells));
    r.line("Betti numbers: " + join(h.betti));
    r.line(h.torsion_free() ? "no torsion" : "torsion present: " + torsion.dump());
    return r;
}

Report cmd_cup(const RunConfig& c, const std::vector<std::string>& symbols, bool same_vertex_zero)
{
    require_n(c);
    require(symbols.size() >= 2, ErrorKind::Invalid, "cup needs at least two cells");
    auto t = subdivide_for_n(load_tree(c.tree_path), c.n);
    std::vector<CriticalCell> cells;
    for (const auto& s : symbols) {
        cells.push_back(parse_critical(s, t));
        require_valid(cells.back(), t, c.n);
    }
    CupEngine engine(t, c.n, {same_vertex_zero ? SameVertex::Zero : SameVertex::Reject, {}});
    std::vector<CohomologyClass> classes;
    for (const auto& cell : cells)
        classes.push_back(basis_class(cell));
    auto product = engine.cup(classes);
    Report r;
    r.json = header("cup", t, c);
    r.json["factors"] = symbols;
    r.json["product"] = to_string(product, t);
    std::string annotation;
    bool one_cells = std::all_of(cells.begin(), cells.end(), [](const CriticalCell& x) { return x.dim() == 1; });
    if (one_cells) {
        bool distinct = true;
        for (std::size_t i = 0; i < cells.size(); ++i)
            for (std::size_t j = i + 1; j < cells.size(); ++j)
                distinct = distinct && cells[i].blocks[0].x != cells[j].blocks[0].x;
        if (distinct) {
            annotation = to_string(interaction_parameters(cells, t, c.n).verdict);
            r.json["interaction"] = annotation;
        }
    }
    if (product.empty() && annotation == "none")
        r.line("0 (no interaction)");
    else
        r.line(to_string(product, t) + (annotation.empty() ? "" : "  [" + annotation + "]"));
    if (c.verify) {
        require(cells.size() == 2, ErrorKind::Invalid, "--verify compares two factors with the cube-complex oracle");
        CubicalCupOracle oracle(t, c.n);
        int dim = cells[0].dim() + cells[1].dim();
        auto want = oracle.product(cells[0], cells[1], critical_cells(t, c.n, dim, c.budget_cells));
        CohomologyClass w(want.begin(), want.end());
        bool agrees = w == product;
        r.json["verify"] = {{"oracle", to_string(w, t)}, {"agrees", agrees}};
        r.line(std::string("verify: cube-complex oracle ") + (agrees ? "agrees" : "DISAGREES: " + to_string(w, t)));
        if (!agrees)
            r.exit_code = exit_verify_failed;
    }
    return r;
}

Report cmd_knt(const RunConfig& c)
{
    require_n(c);
    auto t = subdivide_for_n(load_tree(c.tree_path), c.n);
    auto K = build_KnT(t, c.n, reading_of(c));
    Report r;
    r.json = header("knt", t, c);
    r.json["reading"] = c.reading;
    Json vertices = Json::array();
    for (const auto& v : K.vertices)
        vertices.push_back(to_string(v, t));
    Json faces = Json::array();
    for (const auto& f : K.faces)
        if (f.size() > 1) {
            Json face = Json::array();
            for (int v : f)
                face.push_back(to_string(K.vertices[v], t));
            faces.push_back(face);
        }
    auto isolated = K.isolated();
    r.json["vertex_count"] = K.vertices.size();
    r.json["isolated_count"] = isolated.size();
    r.json["vertices"] = vertices;
    r.json["faces"] = faces;
    r.line("K_" + std::to_string(c.n) + "T: " + std::to_string(K.vertices.size()) + " vertices, " +
           std::to_string(isolated.size()) + " isolated");
    for (std::size_t k = 2;; ++k) {
        auto fk = K.faces_of_size(k);
        if (fk.empty())
            break;
        r.line(std::to_string(fk.size()) + " faces with " + std::to_string(k) + " vertices");
    }
    for (const auto& f : faces)
        r.line("  " + f.dump());
    if (c.verify) {
        auto check = face_ring_check(K, t, c.n, reading_of(c));
        r.json["verify"] = {{"pairs", check.pairs}, {"mismatches", check.mismatches.size()}, {"agrees", check.ok()}};
        r.line("verify: " + std::to_string(check.pairs) + " products of vertex classes, " +
               std::to_string(check.mismatches.size()) + " disagree with the face ring");
        if (!check.ok())
            r.exit_code = exit_verify_failed;
    }
    return r;
}

Report cmd_tc(const RunConfig& c)
{
    require_n(c);
    require(c.s >= 2, ErrorKind::Invalid, "--s must be at least 2");
    auto t = subdivide_for_n(load_tree(c.tree_path), c.n);
    CupEngine engine(t, c.n, {SameVertex::Zero, {}});
    TensorBudget tb{c.budget_terms};
    SearchBudget sb{c.budget_nodes};
    Report r;
    r.json = header("tc", t, c);
    r.json["s"] = c.s;
    int upper = upper_bound(t, c.n, c.s);
    int best = 0;
    Json certs = Json::array();
    Json skipped = Json::object();
    auto attempt = [&](const std::string& name, auto&& run) {
        try {
            BoundCertificate cert = run();
            if (cert.verified)
                best = std::max(best, cert.bound);
            certs.push_back(cert.to_json());
            r.line(name + ": " + (cert.verified ? "certified " + std::to_string(cert.bound) : "not certified") +
                   " (claimed " + std::to_string(cert.claimed) + ")");
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Hypothesis && e.kind() != ErrorKind::Budget)
                throw;
            skipped[name] = e.what();
            r.line(name + ": " + (e.kind() == ErrorKind::Budget ? "budget exceeded: " : "inapplicable: ") + e.what());
        }
    };
    attempt("pars", [&] { return theorem_pars(t, c.n, c.s, engine, tb); });
    attempt("mayorj", [&] {
        auto sets = search_mayorj_sets(t, c.n, c.s, sb);
        require(sets.has_value(), ErrorKind::Hypothesis, "no sets satisfy the hypotheses");
        return theorem_mayorj(t, c.n, c.s, *sets, engine, reading_of(c), tb);
    });
    attempt("tercero", [&] { return theorem_tercero(t, c.n, c.s, engine, sb, tb); });
    r.json["lower_bound"] = best;
    r.json["upper_bound"] = upper;
    r.json["sharp"] = best == upper;
    r.json["certificates"] = certs;
    r.json["inapplicable"] = skipped;
    r.line("TC_" + std::to_string(c.s) + ": " + std::to_string(best) + " <= TC <= " + std::to_string(upper) +
           (best == upper ? " (sharp)" : ""));
    if (certs.empty())
        r.line("no theorem applicable");
    return r;
}

Report cmd_hs(const RunConfig& c, bool equal_sizes)
{
    require(c.s >= 2, ErrorKind::Invalid, "--s must be at least 2");
    auto t = load_tree(c.tree_path);
    auto hs = compute_hs(t, c.s, {c.budget_nodes}, equal_sizes ? HsSizes::Equal : HsSizes::AtMost);
    Report r;
    r.json = header("hs", t, c);
    r.json["s"] = c.s;
    if (!hs) {
        r.json["h"] = nullptr;
        r.line("h_" + std::to_string(c.s) + " is undefined: no assignment satisfies the conditions");
        return r;
    }
    r.json["h"] = hs->h;
    Json sets = Json::array();
    for (const auto& set : hs->sets) {
        Json labels = Json::array();
        for (Vertex v : set)
            labels.push_back(t.label(v));
        sets.push_back(labels);
    }
    r.json["sets"] = sets;
    r.line("h_" + std::to_string(c.s) + " = " + std::to_string(hs->h));
    for (std::size_t i = 0; i < sets.size(); ++i)
        r.line("  V_" + std::to_string(i + 1) + " = " + sets[i].dump());
    return r;
}

Report cmd_arcs(const RunConfig& c, const std::vector<std::string>& given)
{
    auto tree = load_tree(c.tree_path);
    Report r;
    if (!given.empty()) {
        ArcCollection arcs;
        for (const auto& s : given)
            arcs.push_back(parse_arc(s, tree));
        auto bad = is_allowable(arcs, degree_three_vertices(tree), tree);
        r.json = header("arcs", tree, c);
        r.json["arcs"] = arcs_to_json(arcs, tree);
        r.json["allowable"] = !bad;
        if (bad)
            r.json["failing_vertex"] = tree.label(*bad);
        r.line(bad ? "not allowable: fails at " + tree.label(*bad) : "allowable for all degree-3 vertices");
        return r;
    }
    auto t = arc_search_tree(tree);
    auto res = min_allowable_p(t, {c.budget_nodes});
    r.json = header("arcs", t, c);
    r.json["p"] = res.p;
    r.json["arcs"] = arcs_to_json(res.arcs, t);
    r.line("p = " + std::to_string(res.p));
    for (const auto& a : res.arcs)
        r.line("  " + to_string(a, t));
    if (c.verify) {
        auto hs = compute_hs(tree, 2, {c.budget_nodes});
        Json v;
        v["h2"] = hs ? Json(hs->h) : Json(nullptr);
        bool agrees = hs && hs->h == res.p;
        v["agrees"] = agrees;
        r.json["verify"] = v;
        r.line(hs ? "verify: h_2 = " + std::to_string(hs->h) + (agrees ? ", agrees" : ", DIFFERS")
                  : "verify: h_2 undefined");
        if (hs && !agrees)
            r.exit_code = exit_verify_failed;
    }
    return r;
}

Report cmd_verify_all(const RunConfig& c)
{
    require_n(c);
    auto t = subdivide_for_n(load_tree(c.tree_path), c.n);
    Report r;
    r.json = header("verify-all", t, c);
    bool ok = true;
    auto field = audit_field(t, c.n, {c.budget_cells});
    r.json["field"] = {{"pairs", field.pairs},
                       {"pairing_violations", field.pairing_violations},
                       {"ingredient_mismatches", field.ingredient_mismatches},
                       {"acyclic", field.acyclic}};
    r.line(std::string("gradient field: ") + (field.ok() ? "ok" : "FAILED " + field.first_problem));
    ok = ok && field.ok();

    auto cells = critical_cells(t, c.n, std::nullopt, c.budget_cells);
    std::int64_t bad_coboundary = 0;
    MorseFlow flow(t, c.n);
    for (const auto& cell : cells)
        bad_coboundary += !flow.coboundary(decode(cell, t, c.n)).empty();
    r.json["morse_coboundary_nonzero"] = bad_coboundary;
    r.line("Morse coboundary: " + std::string(bad_coboundary ? "NONZERO" : "zero on every critical cell"));
    ok = ok && bad_coboundary == 0;

    auto h = homology(t, c.n, {c.budget_cells});
    std::vector<std::int64_t> counts;
    for (const auto& cell : cells) {
        if (cell.dim() >= static_cast<int>(counts.size()))
            counts.resize(cell.dim() + 1, 0);
        ++counts[cell.dim()];
    }
    auto betti = h.betti;
    while (betti.size() > counts.size() && betti.back() == 0)
        betti.pop_back();
    bool betti_ok = betti == counts && h.torsion_free();
    r.json["betti"] = {{"critical", counts}, {"snf", h.betti}, {"agrees", betti_ok}};
    r.line("critical counts " + join(counts) + " vs Betti " + join(h.betti) + (betti_ok ? ": agree" : ": DISAGREE"));
    ok = ok && betti_ok;

    std::vector<CriticalCell> ones;
    for (const auto& cell : cells)
        if (cell.dim() == 1)
            ones.push_back(cell);
    CupEngine engine(t, c.n);
    CubicalCupOracle oracle(t, c.n);
    std::vector<CriticalCell> twos;
    for (const auto& cell : cells)
        if (cell.dim() == 2)
            twos.push_back(cell);
    int pairs = 0, disagreements = 0;
    for (const auto& a : ones)
        for (const auto& b : ones) {
            if (a.blocks[0].x == b.blocks[0].x)
                continue;
            ++pairs;
            auto want = oracle.product(a, b, twos);
            if (engine.cup(a, b) != CohomologyClass(want.begin(), want.end()))
                ++disagreements;
        }
    r.json["cup_oracle"] = {{"pairs", pairs}, {"disagreements", disagreements}};
    r.line("cup vs oracle: " + std::to_string(pairs) + " pairs, " + std::to_string(disagreements) + " disagree");
    ok = ok && disagreements == 0;
    r.json["ok"] = ok;
    if (!ok)
        r.exit_code = exit_verify_failed;
    return r;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cohomology and topological complexity of discrete configuration spaces of trees"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    app.add_option("--tree", cfg.tree_path, "tree JSON file")->required();
    app.add_option("--n", cfg.n, "number of particles");
    app.add_option("--s", cfg.s, "TC_s index (at least 2)");
    app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--budget-cells", cfg.budget_cells, "cell enumeration budget")->check(CLI::PositiveNumber);
    app.add_option("--budget-terms", cfg.budget_terms, "tensor term budget")->check(CLI::PositiveNumber);
    app.add_option("--budget-nodes", cfg.budget_nodes, "search node budget")->check(CLI::PositiveNumber);
    app.add_flag("--verify", cfg.verify, "add independent cross-checks");
    app.add_option("--reading", cfg.reading, "bracket class index range")
        ->check(CLI::IsMember({"leading", "verbatim"}));

    auto* critical = app.add_subcommand("critical", "list critical cells");
    auto* hom = app.add_subcommand("homology", "integral homology by Smith normal form");
    auto* cup = app.add_subcommand("cup", "cup product of critical cells");
    std::vector<std::string> symbols;
    bool same_vertex_zero = false;
    cup->add_option("cells", symbols, "critical cell symbols such as {0|x,(1),(0)}")->required();
    cup->add_flag("--same-vertex-zero", same_vertex_zero, "treat 1-cells sharing a vertex as multiplying to zero");
    auto* knt = app.add_subcommand("knt", "simplicial complex K_nT of a binary tree");
    auto* tc = app.add_subcommand("tc", "lower and upper bounds for TC_s");
    auto* hs = app.add_subcommand("hs", "the invariant h_s");
    bool equal_sizes = false;
    hs->add_flag("--equal-sizes", equal_sizes, "require |V_i| = h for every set");
    auto* arcs = app.add_subcommand("arcs", "minimal allowable arc collection, or check given arcs");
    std::vector<std::string> given;
    arcs->add_option("--arc", given, "an arc \"a -> b -> c\"; repeatable");
    auto* all = app.add_subcommand("verify-all", "field, Betti and cup cross-checks");

    CLI11_PARSE(app, argc, argv);

    try {
        Report r;
        if (*critical)
            r = cmd_critical(cfg);
        else if (*hom)
            r = cmd_homology(cfg);
        else if (*cup)
            r = cmd_cup(cfg, symbols, same_vertex_zero);
        else if (*knt)
            r = cmd_knt(cfg);
        else if (*tc)
            r = cmd_tc(cfg);
        else if (*hs)
            r = cmd_hs(cfg, equal_sizes);
        else if (*arcs)
            r = cmd_arcs(cfg, given);
        else if (*all)
            r = cmd_verify_all(cfg);
        if (cfg.format == "json")
            std::cout << r.json.dump(2) << '\n';
        else
            for (const auto& l : r.text)
                std::cout << l << '\n';
        return r.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Parse);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Invalid);
    }
}
